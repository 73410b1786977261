#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>

namespace rmpst {

enum class BaseType { Int, Bool, String, Unit };

std::string_view to_string(BaseType base);

enum class UnaryOp { Not, Neg };
enum class BinaryOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

std::string_view to_string(UnaryOp op);
std::string_view to_string(BinaryOp op);
bool is_arithmetic(BinaryOp op);
bool is_comparison(BinaryOp op);
bool is_logical(BinaryOp op);

struct ExprNode;

/// Immutable handle to a refinement-language expression. Copies share the
/// underlying tree. A default-constructed Expr is the literal `true`.
class Expr {
 public:
  Expr();

  static Expr var(std::string name);
  static Expr integer(std::int64_t value);
  static Expr boolean(bool value);
  static Expr unary(UnaryOp op, Expr arg);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

  const ExprNode& node() const { return *node_; }

  template <class T>
  const T* as() const;

  bool is_true() const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

struct VarExpr {
  std::string name;
};
struct IntExpr {
  std::int64_t value;
};
struct BoolExpr {
  bool value;
};
struct UnaryExpr {
  UnaryOp op;
  Expr arg;
};
struct BinaryExpr {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};

struct ExprNode {
  std::variant<VarExpr, IntExpr, BoolExpr, UnaryExpr, BinaryExpr> value;
};

template <class T>
const T* Expr::as() const {
  return std::get_if<T>(&node_->value);
}

// Smart constructors that fold the neutral `true` operand.
Expr conj(const Expr& a, const Expr& b);
Expr disj(const Expr& a, const Expr& b);
Expr negate(const Expr& a);
Expr implies(const Expr& a, const Expr& b);

std::set<std::string> free_vars(const Expr& e);

/// Simultaneous substitution of variables by expressions. Expressions have
/// no binders, so no capture can occur.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& subst);
Expr rename(const Expr& e, const std::string& from, const std::string& to);

/// `x:S{E}`. The binder is bound in the predicate only.
struct RefinementType {
  std::string binder;
  BaseType base = BaseType::Unit;
  Expr predicate;

  /// Bare base type `S`, i.e. `(binder:S{true})`.
  static RefinementType plain(BaseType base, std::string binder);

  /// Same type with the binder renamed to `name` throughout the predicate.
  RefinementType with_binder(const std::string& name) const;

  friend bool operator==(const RefinementType& a, const RefinementType& b);
  friend bool operator!=(const RefinementType& a, const RefinementType& b) { return !(a == b); }
};

std::set<std::string> free_vars(const RefinementType& t);

/// Substitutes free variables of the type; the binder itself is never
/// replaced, and a substitution whose range mentions the binder forces
/// a fresh binder.
RefinementType substitute(const RefinementType& t, const std::map<std::string, Expr>& subst);

/// Equality up to renaming of the binder.
bool alpha_equal(const RefinementType& a, const RefinementType& b);

/// Fresh variable name `hint'N` from a process-wide counter.
std::string fresh_name(std::string_view hint);

/// Strips a `'N` suffix added by fresh_name, giving the display hint.
std::string display_hint(std::string_view name);

}  // namespace rmpst
