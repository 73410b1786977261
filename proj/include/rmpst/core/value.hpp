#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "rmpst/core/error.hpp"
#include "rmpst/core/expr.hpp"

namespace rmpst {

struct Unit {
  bool operator==(const Unit&) const = default;
};

using Value = std::variant<Unit, std::int64_t, bool, std::string>;

BaseType sort_of(const Value& v);
std::string to_string(const Value& v);

class EvalError : public Error {
 public:
  using Error::Error;
};

using Env = std::map<std::string, Value>;

/// Evaluates with wrap-around 64-bit arithmetic. Throws EvalError on unbound
/// variables and sort mismatches.
Value eval(const Expr& e, const Env& env);
bool eval_bool(const Expr& e, const Env& env);

}  // namespace rmpst
