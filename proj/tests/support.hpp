#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "rmpst/core/print.hpp"
#include "rmpst/frontend/parser.hpp"
#include "rmpst/project/project.hpp"
#include "rmpst/refine/validity.hpp"

#ifndef RMPST_PROTOCOL_DIR
#define RMPST_PROTOCOL_DIR "protocols"
#endif

namespace testing {

using namespace rmpst;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string protocol_path(const std::string& name) {
  return std::string(RMPST_PROTOCOL_DIR) + "/" + name + ".rscr";
}

inline GlobalType load(const std::string& name, std::string* proto = nullptr) {
  std::vector<Diagnostic> diags;
  auto g = load_protocol(read_file(protocol_path(name)), diags, proto);
  if (!g || has_errors(diags)) {
    std::string msg = "cannot load " + name;
    for (const auto& d : diags) msg += "\n" + to_string(d);
    throw std::runtime_error(msg);
  }
  return *g;
}

inline const std::vector<std::string>& corpus() {
  static const std::vector<std::string> names{"g1",        "g2",         "g3",          "higherlower",
                                              "pingpong1", "pingpong2",  "pingpong3",   "twobuyer",
                                              "negotiation", "fibonacci", "calculator"};
  return names;
}

/// Shared by every test in a binary so repeated obligations hit the cache.
inline ProjectOptions& shared_options() {
  static ProjectOptions opts;
  return opts;
}

// --------------------------------------------------------------- protocols

/// Random global types over at most three roles, two branches per choice and
/// one recursion; not necessarily projectable.
class ProtocolGen {
 public:
  explicit ProtocolGen(std::uint64_t seed) : rng_(seed) {}

  GlobalType next() {
    counter_ = 0;
    int n = pick(2, 3);
    roles_.clear();
    for (int i = 0; i < n; ++i) roles_.push_back(Role{std::string(1, static_cast<char>('A' + i))});
    in_rec_ = coin(0.5);
    scope_.clear();
    if (!in_rec_) return body(pick(1, 3), false);
    with_state_ = coin(0.5);
    std::vector<GStateVar> vars;
    if (with_state_) {
      vars.push_back(GStateVar{"i", parse_refinement("i:int{i >= 0}"), Expr::integer(0), std::nullopt});
      scope_.push_back("i");
    }
    return GlobalType::rec("X", vars, body(pick(1, 3), true));
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  RefinementType payload(const std::string& v) {
    switch (pick(0, 4)) {
      case 0: return RefinementType::plain(BaseType::Unit, v);
      case 1: return RefinementType::plain(BaseType::Int, v);
      case 2: return parse_refinement(v + ":int{" + v + " >= 0}");
      case 3:
        if (!scope_.empty()) {
          auto w = scope_[static_cast<std::size_t>(pick(0, static_cast<int>(scope_.size()) - 1))];
          return parse_refinement(v + ":int{" + v + " > " + w + "}");
        }
        return RefinementType::plain(BaseType::Int, v);
      default: return RefinementType::plain(BaseType::Bool, v);
    }
  }

  GlobalType body(int depth, bool loop_ok) {
    if (depth == 0) {
      if (loop_ok && coin(0.6)) {
        if (with_state_) return GlobalType::tvar("X", {parse_expr("i + 1")});
        return GlobalType::tvar("X");
      }
      return GlobalType::end();
    }
    auto from = roles_[static_cast<std::size_t>(pick(0, static_cast<int>(roles_.size()) - 1))];
    Role to;
    do to = roles_[static_cast<std::size_t>(pick(0, static_cast<int>(roles_.size()) - 1))];
    while (to == from);
    int nb = pick(1, 2);
    std::vector<GBranch> branches;
    for (int b = 0; b < nb; ++b) {
      std::string v = "v" + std::to_string(counter_++);
      auto t = payload(v);
      auto saved = scope_;
      if (t.base == BaseType::Int) scope_.push_back(v);
      branches.push_back(GBranch{"l" + std::to_string(b), v, t, body(depth - 1, loop_ok)});
      scope_ = saved;
    }
    return GlobalType::message(from, to, branches);
  }

  std::mt19937_64 rng_;
  std::vector<Role> roles_;
  std::vector<std::string> scope_;
  bool in_rec_ = false;
  bool with_state_ = false;
  int counter_ = 0;
};

// ---------------------------------------------------------------- formulas

/// Quantifier-free linear integer formulas over x, y, z.
class FormulaGen {
 public:
  explicit FormulaGen(std::uint64_t seed) : rng_(seed) {}

  Formula next() {
    Formula f;
    int nvars = pick(1, 3);
    vars_.clear();
    for (int i = 0; i < nvars; ++i) {
      vars_.push_back(std::string(1, static_cast<char>('x' + i)));
      f.declare(vars_.back(), BaseType::Int);
    }
    int nh = pick(0, 2);
    for (int i = 0; i < nh; ++i) f.hyps.push_back(prop(1));
    f.goal = prop(2);
    return f;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Expr term() {
    Expr e = Expr::integer(pick(-4, 4));
    for (const auto& v : vars_) {
      int c = pick(-4, 4);
      if (c == 0) continue;
      e = Expr::binary(BinaryOp::Add, e, Expr::binary(BinaryOp::Mul, Expr::integer(c), Expr::var(v)));
    }
    return e;
  }

  Expr atom() {
    static const BinaryOp ops[] = {BinaryOp::Eq, BinaryOp::Ne, BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt, BinaryOp::Ge};
    return Expr::binary(ops[pick(0, 5)], term(), Expr::integer(0));
  }

  Expr prop(int depth) {
    if (depth == 0 || pick(0, 2) == 0) return atom();
    switch (pick(0, 2)) {
      case 0: return Expr::binary(BinaryOp::And, prop(depth - 1), prop(depth - 1));
      case 1: return Expr::binary(BinaryOp::Or, prop(depth - 1), prop(depth - 1));
      default: return Expr::unary(UnaryOp::Not, prop(depth - 1));
    }
  }

  std::mt19937_64 rng_;
  std::vector<std::string> vars_;
};

/// Independent of the compiled enumerator: plain nested loops and eval().
/// Returns a counter-model or nullopt when valid within the bound.
inline std::optional<Env> brute_force(const Formula& f, int bound) {
  std::vector<std::string> ints;
  std::vector<std::string> bools;
  for (const auto& [v, s] : f.decls) {
    if (s == BaseType::Int) ints.push_back(v);
    else if (s == BaseType::Bool) bools.push_back(v);
    else if (s != BaseType::Unit) throw std::runtime_error("brute_force: unsupported sort");
  }
  auto e = f.as_expr();
  Env env;
  std::optional<Env> found;
  std::function<void(std::size_t)> go = [&](std::size_t k) {
    if (found) return;
    if (k == ints.size() + bools.size()) {
      if (!eval_bool(e, env)) found = env;
      return;
    }
    if (k < ints.size()) {
      for (std::int64_t v = -bound; v <= bound && !found; ++v) {
        env[ints[k]] = v;
        go(k + 1);
      }
    } else {
      for (bool b : {false, true}) {
        env[bools[k - ints.size()]] = b;
        go(k + 1);
      }
    }
  };
  go(0);
  return found;
}

}  // namespace testing
