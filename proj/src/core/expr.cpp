#include "rmpst/core/expr.hpp"

#include <atomic>
#include <cassert>

namespace rmpst {

std::string_view to_string(BaseType base) {
  switch (base) {
    case BaseType::Int: return "int";
    case BaseType::Bool: return "bool";
    case BaseType::String: return "string";
    case BaseType::Unit: return "unit";
  }
  return "?";
}

std::string_view to_string(UnaryOp op) { return op == UnaryOp::Not ? "!" : "-"; }

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

bool is_arithmetic(BinaryOp op) {
  return op == BinaryOp::Add || op == BinaryOp::Sub || op == BinaryOp::Mul;
}
bool is_comparison(BinaryOp op) {
  return op == BinaryOp::Eq || op == BinaryOp::Ne || op == BinaryOp::Lt || op == BinaryOp::Le ||
         op == BinaryOp::Gt || op == BinaryOp::Ge;
}
bool is_logical(BinaryOp op) { return op == BinaryOp::And || op == BinaryOp::Or; }

namespace {
const std::shared_ptr<const ExprNode>& true_node() {
  static const auto node = std::make_shared<const ExprNode>(ExprNode{BoolExpr{true}});
  return node;
}
}  // namespace

Expr::Expr() : node_(true_node()) {}

Expr Expr::var(std::string name) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{VarExpr{std::move(name)}}));
}
Expr Expr::integer(std::int64_t value) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{IntExpr{value}}));
}
Expr Expr::boolean(bool value) {
  if (value) return Expr();
  return Expr(std::make_shared<const ExprNode>(ExprNode{BoolExpr{false}}));
}
Expr Expr::unary(UnaryOp op, Expr arg) {
  return Expr(std::make_shared<const ExprNode>(ExprNode{UnaryExpr{op, std::move(arg)}}));
}
Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return Expr(
      std::make_shared<const ExprNode>(ExprNode{BinaryExpr{op, std::move(lhs), std::move(rhs)}}));
}

bool Expr::is_true() const {
  auto b = as<BoolExpr>();
  return b && b->value;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = a.node_->value;
  const auto& y = b.node_->value;
  if (x.index() != y.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(y);
        if constexpr (std::is_same_v<T, VarExpr>) return lhs.name == rhs.name;
        else if constexpr (std::is_same_v<T, IntExpr>) return lhs.value == rhs.value;
        else if constexpr (std::is_same_v<T, BoolExpr>) return lhs.value == rhs.value;
        else if constexpr (std::is_same_v<T, UnaryExpr>) return lhs.op == rhs.op && lhs.arg == rhs.arg;
        else return lhs.op == rhs.op && lhs.lhs == rhs.lhs && lhs.rhs == rhs.rhs;
      },
      x);
}

Expr conj(const Expr& a, const Expr& b) {
  if (a.is_true()) return b;
  if (b.is_true()) return a;
  return Expr::binary(BinaryOp::And, a, b);
}

Expr disj(const Expr& a, const Expr& b) {
  if (a.is_true() || b.is_true()) return Expr();
  return Expr::binary(BinaryOp::Or, a, b);
}

Expr negate(const Expr& a) { return Expr::unary(UnaryOp::Not, a); }

Expr implies(const Expr& a, const Expr& b) {
  if (a.is_true()) return b;
  return Expr::binary(BinaryOp::Or, negate(a), b);
}

namespace {
void collect(const Expr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarExpr>) out.insert(n.name);
        else if constexpr (std::is_same_v<T, UnaryExpr>) collect(n.arg, out);
        else if constexpr (std::is_same_v<T, BinaryExpr>) {
          collect(n.lhs, out);
          collect(n.rhs, out);
        }
      },
      e.node().value);
}
}  // namespace

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  collect(e, out);
  return out;
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& subst) {
  if (subst.empty()) return e;
  return std::visit(
      [&](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarExpr>) {
          auto it = subst.find(n.name);
          return it == subst.end() ? e : it->second;
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          return Expr::unary(n.op, substitute(n.arg, subst));
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          return Expr::binary(n.op, substitute(n.lhs, subst), substitute(n.rhs, subst));
        } else {
          return e;
        }
      },
      e.node().value);
}

Expr rename(const Expr& e, const std::string& from, const std::string& to) {
  if (from == to) return e;
  return substitute(e, {{from, Expr::var(to)}});
}

RefinementType RefinementType::plain(BaseType base, std::string binder) {
  return RefinementType{std::move(binder), base, Expr()};
}

RefinementType RefinementType::with_binder(const std::string& name) const {
  if (name == binder) return *this;
  return RefinementType{name, base, rename(predicate, binder, name)};
}

bool operator==(const RefinementType& a, const RefinementType& b) {
  return a.binder == b.binder && a.base == b.base && a.predicate == b.predicate;
}

std::set<std::string> free_vars(const RefinementType& t) {
  auto out = free_vars(t.predicate);
  out.erase(t.binder);
  return out;
}

RefinementType substitute(const RefinementType& t, const std::map<std::string, Expr>& subst) {
  std::map<std::string, Expr> inner;
  bool capture = false;
  for (const auto& [k, v] : subst) {
    if (k == t.binder) continue;
    if (free_vars(v).count(t.binder)) capture = true;
    inner.emplace(k, v);
  }
  if (inner.empty()) return t;
  RefinementType base = capture ? t.with_binder(fresh_name(display_hint(t.binder))) : t;
  return RefinementType{base.binder, base.base, substitute(base.predicate, inner)};
}

bool alpha_equal(const RefinementType& a, const RefinementType& b) {
  if (a.base != b.base) return false;
  if (a.binder == b.binder) return a.predicate == b.predicate;
  // rename both binders to a name free in neither
  auto fa = free_vars(a.predicate);
  auto fb = free_vars(b.predicate);
  if (!fa.count(a.binder) && !fb.count(b.binder)) return a.predicate == b.predicate;
  std::string probe = "%b";
  while (fa.count(probe) || fb.count(probe)) probe += "'";
  return rename(a.predicate, a.binder, probe) == rename(b.predicate, b.binder, probe);
}

namespace {
std::atomic<unsigned long> fresh_counter{0};
}

std::string fresh_name(std::string_view hint) {
  return std::string(hint) + "'" + std::to_string(++fresh_counter);
}

std::string display_hint(std::string_view name) {
  auto pos = name.find('\'');
  if (pos == std::string_view::npos || pos == 0) return std::string(name);
  for (auto i = pos + 1; i < name.size(); ++i)
    if (name[i] < '0' || name[i] > '9') return std::string(name);
  if (pos + 1 == name.size()) return std::string(name);
  return std::string(name.substr(0, pos));
}

}  // namespace rmpst
