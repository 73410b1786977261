#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "rmpst/cfsm/cfsm.hpp"
#include "rmpst/core/value.hpp"
#include "rmpst/runtime/connection.hpp"

namespace rmpst::rt {

class ErasedField : public Error {
 public:
  using Error::Error;
};

/// State record as callbacks see it: communicated fields only.
class RecordView {
 public:
  RecordView(const Env& env, std::set<std::string> visible) : env_(&env), visible_(std::move(visible)) {}

  bool has(const std::string& var) const { return visible_.count(var) && env_->count(var); }
  const Value& get(const std::string& var) const;
  std::int64_t get_int(const std::string& var) const;
  bool get_bool(const std::string& var) const;
  const std::string& get_string(const std::string& var) const;
  /// Only the visible part.
  Env env() const;

 private:
  const Env* env_;
  std::set<std::string> visible_;
};

struct Choice {
  std::string label;
  Value payload = Unit{};
};

class Callbacks {
 public:
  virtual ~Callbacks() = default;
  virtual Choice choose(int state, const RecordView& st) = 0;
  virtual void receive(int state, const std::string& label, const RecordView& st, const Value& payload);
};

/// Chooser as an ordered list of guarded labels over the visible record.
struct Decision {
  std::string label;
  Expr guard;
  Expr payload = Expr::var("%unit");
};

class DecisionCallbacks : public Callbacks {
 public:
  void decide(int state, std::vector<Decision> list) { lists_[state] = std::move(list); }
  /// Unit-payload send states with a single label get that label, unless decided.
  void decide_forced(const Cfsm& m);
  Choice choose(int state, const RecordView& st) override;

 private:
  std::map<int, std::vector<Decision>> lists_;
};

struct RunOptions {
  std::size_t max_steps = 0;  // 0: unbounded
};

struct RunResult {
  int final_state = 0;
  Env record;
  std::size_t steps = 0;
  /// predicates skipped because they mention erased variables
  std::vector<std::string> notes;
};

class StepLimitExceeded : public Error {
 public:
  using Error::Error;
};

RunResult run_endpoint(const Cfsm& m, Callbacks& cb, Connection& conn, const RunOptions& opts = {});

std::string snapshot(const Env& env);

}  // namespace rmpst::rt
