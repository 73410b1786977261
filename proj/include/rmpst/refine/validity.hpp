#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rmpst/core/context.hpp"
#include "rmpst/core/error.hpp"
#include "rmpst/core/value.hpp"

namespace rmpst {

/// `(h1 && ... && hn) ==> goal` over sorted variables.
struct Formula {
  std::vector<std::pair<std::string, BaseType>> decls;
  std::vector<Expr> hyps;
  Expr goal;

  Expr as_expr() const;
  void declare(const std::string& var, BaseType base);
};

Formula encode_context(const LocalContext& ctx);
Formula encode_context(const GlobalContext& ctx);

enum class Verdict { Valid, Invalid, Unknown };

std::string_view to_string(Verdict v);

struct ValidityResult {
  Verdict verdict = Verdict::Unknown;
  Env model;  // counter-model when Invalid
  std::string note;

  bool valid() const { return verdict == Verdict::Valid; }
};

std::string to_string(const ValidityResult& r);

class SolverUnavailable : public Error {
 public:
  using Error::Error;
};

/// SMT-LIB 2 text that asserts the negation of f.
std::string to_smtlib(const Formula& f);

struct SolverConfig {
  std::string path = "z3";
  int timeout_ms = 5000;

  /// `RMPST_SOLVER` overrides the default path.
  static SolverConfig from_env();
};

/// One solver process per query. Throws SolverUnavailable when the
/// executable cannot be started.
ValidityResult check_validity_solver(const Formula& f, const SolverConfig& cfg);

/// Exhaustive search of integers in [-bound, bound], both booleans and
/// enough distinct strings. Sound only relative to the bound; gives Unknown
/// when the search exceeds `max_steps` evaluations.
ValidityResult check_validity_enumerate(const Formula& f, int bound,
                                        std::uint64_t max_steps = 200'000'000);

/// Validity back-end with a query cache shared between copies.
class Oracle {
 public:
  enum class Mode { Solver, Enumerate };

  static Oracle solver(SolverConfig cfg = SolverConfig::from_env());
  static Oracle enumerate(int bound);

  ValidityResult check(const Formula& f) const;

  Mode mode() const { return mode_; }
  int bound() const { return bound_; }
  const SolverConfig& solver_config() const { return cfg_; }
  std::size_t cache_size() const;

 private:
  Oracle(Mode m, SolverConfig cfg, int bound);

  struct Cache {
    std::mutex mu;
    std::unordered_map<std::string, ValidityResult> entries;
  };

  Mode mode_;
  SolverConfig cfg_;
  int bound_;
  std::shared_ptr<Cache> cache_;
};

}  // namespace rmpst
