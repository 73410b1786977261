#pragma once

#include <string>
#include <vector>

#include "rmpst/core/context.hpp"
#include "rmpst/refine/validity.hpp"

namespace rmpst {

enum class TypeErrorKind { IrrelevantVariableUse, UnboundVariable, SortError };

std::string_view to_string(TypeErrorKind k);

class TypeError : public Error {
 public:
  TypeError(TypeErrorKind kind, std::string var, const std::string& msg)
      : Error(msg), kind_(kind), var_(std::move(var)) {}
  TypeErrorKind kind() const { return kind_; }
  const std::string& var() const { return var_; }

 private:
  TypeErrorKind kind_;
  std::string var_;
};

/// Sigma+: every 0 entry becomes omega.
LocalContext promote(const LocalContext& ctx);

/// Base sort of e; variables must be bound with multiplicity omega.
BaseType sort_expr(const LocalContext& ctx, const Expr& e);

/// Singleton type of e, e.g. (v:int{v = x + 1}). Variables keep their declared
/// predicate as well.
RefinementType type_expr(const LocalContext& ctx, const Expr& e);

/// Predicate is a well-sorted bool under Sigma+ plus the binder.
bool wf_type(const LocalContext& ctx, const RefinementType& t, std::string* why = nullptr);

struct CheckResult {
  bool ok = false;
  ValidityResult validity;
  std::string message;

  explicit operator bool() const { return ok; }
};

/// Subsumption: type_expr(ctx, e) <: t. Throws TypeError from type_expr.
CheckResult check_type(const LocalContext& ctx, const Expr& e, const RefinementType& t,
                       const Oracle& oracle);

/// `ctx ==> !pred`; Valid means t has no inhabitant under ctx.
ValidityResult check_empty(const LocalContext& ctx, const RefinementType& t, const Oracle& oracle);

/// Chooser given as an ordered decision list `if g1 then l1 elif g2 then l2 ...`.
struct GuardedLabel {
  std::string label;
  Expr guard;
};

struct ChoiceObligation {
  std::string label;
  Formula formula;
  ValidityResult result;
};

struct ChooserReport {
  std::vector<ChoiceObligation> obligations;
  /// every state of ctx leads to a label whose refinement holds
  ValidityResult exhaustive;
  std::vector<std::string> unused_labels;
  std::vector<std::string> errors;

  bool ok() const;
  /// first obligation that is not Valid
  const ChoiceObligation* first_failure() const;
};

/// Refinement conjuncts mentioning the payload binder are left to the
/// send-time check.
ChooserReport check_chooser(const LocalContext& ctx, const std::vector<LBranch>& branches,
                            const std::vector<GuardedLabel>& decisions, const Oracle& oracle);

}  // namespace rmpst
