#include "rmpst/core/value.hpp"

namespace rmpst {

BaseType sort_of(const Value& v) {
  switch (v.index()) {
    case 0: return BaseType::Unit;
    case 1: return BaseType::Int;
    case 2: return BaseType::Bool;
    default: return BaseType::String;
  }
}

std::string to_string(const Value& v) {
  switch (v.index()) {
    case 0: return "()";
    case 1: return std::to_string(std::get<std::int64_t>(v));
    case 2: return std::get<bool>(v) ? "true" : "false";
    default: return "\"" + std::get<std::string>(v) + "\"";
  }
}

namespace {

std::int64_t wrap(std::uint64_t u) { return static_cast<std::int64_t>(u); }

std::int64_t as_int(const Value& v) {
  if (auto p = std::get_if<std::int64_t>(&v)) return *p;
  throw EvalError("expected int, got " + to_string(v));
}

bool as_bool(const Value& v) {
  if (auto p = std::get_if<bool>(&v)) return *p;
  throw EvalError("expected bool, got " + to_string(v));
}

}  // namespace

Value eval(const Expr& e, const Env& env) {
  return std::visit(
      [&](const auto& n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarExpr>) {
          auto it = env.find(n.name);
          if (it == env.end()) throw EvalError("unbound variable '" + n.name + "'");
          return it->second;
        } else if constexpr (std::is_same_v<T, IntExpr>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, BoolExpr>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          auto a = eval(n.arg, env);
          if (n.op == UnaryOp::Not) return !as_bool(a);
          return wrap(0 - static_cast<std::uint64_t>(as_int(a)));
        } else {
          if (n.op == BinaryOp::And) return as_bool(eval(n.lhs, env)) && as_bool(eval(n.rhs, env));
          if (n.op == BinaryOp::Or) return as_bool(eval(n.lhs, env)) || as_bool(eval(n.rhs, env));
          auto a = eval(n.lhs, env);
          auto b = eval(n.rhs, env);
          if (n.op == BinaryOp::Eq || n.op == BinaryOp::Ne) {
            if (a.index() != b.index()) throw EvalError("comparison of different sorts");
            return (a == b) == (n.op == BinaryOp::Eq);
          }
          auto x = as_int(a);
          auto y = as_int(b);
          auto ux = static_cast<std::uint64_t>(x);
          auto uy = static_cast<std::uint64_t>(y);
          switch (n.op) {
            case BinaryOp::Add: return wrap(ux + uy);
            case BinaryOp::Sub: return wrap(ux - uy);
            case BinaryOp::Mul: return wrap(ux * uy);
            case BinaryOp::Lt: return x < y;
            case BinaryOp::Le: return x <= y;
            case BinaryOp::Gt: return x > y;
            case BinaryOp::Ge: return x >= y;
            default: throw EvalError("bad operator");
          }
        }
      },
      e.node().value);
}

bool eval_bool(const Expr& e, const Env& env) { return as_bool(eval(e, env)); }

}  // namespace rmpst
