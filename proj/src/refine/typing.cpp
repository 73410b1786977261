#include "rmpst/refine/typing.hpp"

#include "rmpst/core/print.hpp"

namespace rmpst {

std::string_view to_string(TypeErrorKind k) {
  switch (k) {
    case TypeErrorKind::IrrelevantVariableUse: return "IrrelevantVariableUse";
    case TypeErrorKind::UnboundVariable: return "UnboundVariable";
    case TypeErrorKind::SortError: return "SortError";
  }
  return "?";
}

LocalContext promote(const LocalContext& ctx) {
  std::vector<LocalEntry> out(ctx.begin(), ctx.end());
  for (auto& e : out) e.mult = Mult::Omega;
  return LocalContext(std::move(out));
}

namespace {

TypeError sort_error(const Expr& e, const std::string& what) {
  return TypeError(TypeErrorKind::SortError, "", "sort error in '" + to_string(e) + "': " + what);
}

BaseType expect(const LocalContext& ctx, const Expr& e, BaseType want) {
  auto s = sort_expr(ctx, e);
  if (s != want)
    throw sort_error(e, "expected " + std::string(to_string(want)) + ", found " +
                            std::string(to_string(s)));
  return s;
}

// binder name that cannot clash with source identifiers
const std::string kBinder = "%v";

}  // namespace

BaseType sort_expr(const LocalContext& ctx, const Expr& e) {
  return std::visit(
      [&](const auto& n) -> BaseType {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarExpr>) {
          auto* entry = ctx.find(n.name);
          if (!entry)
            throw TypeError(TypeErrorKind::UnboundVariable, n.name,
                            "unbound variable '" + n.name + "'");
          if (entry->mult == Mult::Zero)
            throw TypeError(TypeErrorKind::IrrelevantVariableUse, n.name,
                            "variable '" + n.name + "' is erased here and cannot be used");
          if (entry->type.base == BaseType::Unit)
            throw TypeError(TypeErrorKind::SortError, n.name,
                            "unit variable '" + n.name + "' cannot be used in an expression");
          return entry->type.base;
        } else if constexpr (std::is_same_v<T, IntExpr>) {
          return BaseType::Int;
        } else if constexpr (std::is_same_v<T, BoolExpr>) {
          return BaseType::Bool;
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          return expect(ctx, n.arg, n.op == UnaryOp::Not ? BaseType::Bool : BaseType::Int);
        } else {
          if (is_arithmetic(n.op)) {
            expect(ctx, n.lhs, BaseType::Int);
            expect(ctx, n.rhs, BaseType::Int);
            return BaseType::Int;
          }
          if (is_logical(n.op)) {
            expect(ctx, n.lhs, BaseType::Bool);
            expect(ctx, n.rhs, BaseType::Bool);
            return BaseType::Bool;
          }
          if (n.op == BinaryOp::Eq || n.op == BinaryOp::Ne) {
            auto l = sort_expr(ctx, n.lhs);
            expect(ctx, n.rhs, l);
            return BaseType::Bool;
          }
          expect(ctx, n.lhs, BaseType::Int);
          expect(ctx, n.rhs, BaseType::Int);
          return BaseType::Bool;
        }
      },
      e.node().value);
}

RefinementType type_expr(const LocalContext& ctx, const Expr& e) {
  auto base = sort_expr(ctx, e);
  auto fv = free_vars(e);
  std::string v = "v";
  for (int i = 1; fv.count(v) || ctx.contains(v); ++i) v = "v" + std::to_string(i);
  Expr self = Expr::binary(BinaryOp::Eq, Expr::var(v), e);
  if (auto var = e.as<VarExpr>()) {
    auto p = ctx.find(var->name)->type.with_binder(v).predicate;
    return RefinementType{v, base, conj(p, self)};
  }
  return RefinementType{v, base, self};
}

bool wf_type(const LocalContext& ctx, const RefinementType& t, std::string* why) {
  try {
    if (t.base == BaseType::Unit) {
      if (free_vars(t.predicate).count(t.binder))
        throw TypeError(TypeErrorKind::SortError, t.binder,
                        "unit variable '" + t.binder + "' cannot be used in an expression");
    }
    std::vector<LocalEntry> entries;
    for (const auto& e : ctx)
      if (e.var != t.binder) entries.push_back(e);
    LocalContext c = promote(LocalContext(std::move(entries)))
                         .appended(LocalEntry{t.binder, Mult::Omega, RefinementType::plain(t.base, t.binder)});
    if (sort_expr(c, t.predicate) != BaseType::Bool) {
      if (why) *why = "predicate '" + to_string(t.predicate) + "' is not boolean";
      return false;
    }
    return true;
  } catch (const TypeError& e) {
    if (why) *why = e.what();
    return false;
  }
}

CheckResult check_type(const LocalContext& ctx, const Expr& e, const RefinementType& t,
                       const Oracle& oracle) {
  CheckResult r;
  auto have = type_expr(ctx, e);
  if (have.base != t.base) {
    r.message = "'" + to_string(e) + "' has sort " + std::string(to_string(have.base)) +
                ", expected " + std::string(to_string(t.base));
    return r;
  }
  Formula f = encode_context(ctx);
  f.declare(kBinder, t.base);
  auto hyp = have.with_binder(kBinder).predicate;
  if (!hyp.is_true()) f.hyps.push_back(hyp);
  f.goal = t.with_binder(kBinder).predicate;
  r.validity = oracle.check(f);
  r.ok = r.validity.valid();
  if (!r.ok) {
    r.message = "cannot show '" + to_string(e) + "' : " + to_string(t) + " (" +
                to_string(r.validity) + ")";
  }
  return r;
}

ValidityResult check_empty(const LocalContext& ctx, const RefinementType& t, const Oracle& oracle) {
  Formula f = encode_context(ctx);
  f.declare(kBinder, t.base);
  f.goal = negate(t.with_binder(kBinder).predicate);
  return oracle.check(f);
}

bool ChooserReport::ok() const {
  return errors.empty() && exhaustive.valid() && first_failure() == nullptr;
}

const ChoiceObligation* ChooserReport::first_failure() const {
  for (const auto& o : obligations)
    if (!o.result.valid()) return &o;
  return nullptr;
}

namespace {

void split(const Expr& e, std::vector<Expr>& out) {
  if (auto b = e.as<BinaryExpr>(); b && b->op == BinaryOp::And) {
    split(b->lhs, out);
    split(b->rhs, out);
  } else {
    out.push_back(e);
  }
}

// the part of a branch refinement the chooser is responsible for
Expr label_condition(const LBranch& b) {
  std::vector<Expr> parts;
  split(b.type.with_binder(b.var).predicate, parts);
  Expr out;
  for (const auto& p : parts)
    if (!free_vars(p).count(b.var)) out = conj(out, p);
  return out;
}

}  // namespace

ChooserReport check_chooser(const LocalContext& ctx, const std::vector<LBranch>& branches,
                            const std::vector<GuardedLabel>& decisions, const Oracle& oracle) {
  ChooserReport rep;
  auto find = [&](const std::string& l) -> const LBranch* {
    for (const auto& b : branches)
      if (b.label == l) return &b;
    return nullptr;
  };
  for (const auto& d : decisions) {
    if (!find(d.label)) rep.errors.push_back("label '" + d.label + "' is not offered here");
    try {
      if (sort_expr(ctx, d.guard) != BaseType::Bool)
        rep.errors.push_back("guard '" + to_string(d.guard) + "' is not boolean");
    } catch (const TypeError& e) {
      rep.errors.push_back(e.what());
    }
  }
  for (const auto& b : branches) {
    bool used = false;
    for (const auto& d : decisions) used = used || d.label == b.label;
    if (!used) rep.unused_labels.push_back(b.label);
  }
  if (!rep.errors.empty()) return rep;

  Formula base = encode_context(ctx);
  Expr earlier;  // none of the previous guards held
  Expr covered = Expr::boolean(false);
  for (const auto& d : decisions) {
    auto cond = label_condition(*find(d.label));
    ChoiceObligation o;
    o.label = d.label;
    o.formula = base;
    if (!earlier.is_true()) o.formula.hyps.push_back(earlier);
    o.formula.hyps.push_back(d.guard);
    o.formula.goal = cond;
    o.result = oracle.check(o.formula);
    rep.obligations.push_back(std::move(o));
    covered = disj(covered, conj(conj(earlier, d.guard), cond));
    earlier = conj(earlier, negate(d.guard));
  }
  Formula tot = base;
  tot.goal = covered;
  rep.exhaustive = oracle.check(tot);
  return rep;
}

}  // namespace rmpst
