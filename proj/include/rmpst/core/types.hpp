#pragma once

#include <compare>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rmpst/core/expr.hpp"

namespace rmpst {

struct Role {
  std::string name;

  auto operator<=>(const Role&) const = default;
  bool operator==(const Role&) const = default;
};

using RoleSet = std::set<Role>;

enum class Mult { Zero, Omega };

class GlobalType;
class LocalType;

struct GBranch;
struct GMessage;
struct GRec;
struct GVar;
struct GEnd {};

// Type binders of payloads and state variables are normalised to the
// variable name at construction.
struct GStateVar {
  std::string var;
  RefinementType type;
  Expr init;
  /// Roles that hold the value; unset means every participant of the body.
  std::optional<RoleSet> knowers;
};

struct GlobalNode;

class GlobalType {
 public:
  GlobalType();  // end

  static GlobalType end();
  static GlobalType message(Role from, Role to, std::vector<GBranch> branches);
  static GlobalType rec(std::string tvar, std::vector<GStateVar> vars, GlobalType body);
  /// Arguments are positional, one per state variable of the binding Rec.
  /// An empty list keeps every state variable unchanged.
  static GlobalType tvar(std::string name, std::vector<Expr> args = {});

  const GlobalNode& node() const { return *node_; }
  template <class T>
  const T* as() const;
  bool is_end() const;

 private:
  explicit GlobalType(std::shared_ptr<const GlobalNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const GlobalNode> node_;
};

struct GBranch {
  std::string label;
  std::string var;
  RefinementType type;
  GlobalType cont;
};

struct GMessage {
  Role from;
  Role to;
  std::vector<GBranch> branches;
};

struct GRec {
  std::string tvar;
  std::vector<GStateVar> vars;
  GlobalType body;
};

struct GVar {
  std::string tvar;
  std::vector<Expr> args;
};

struct GlobalNode {
  std::variant<GEnd, GMessage, GRec, GVar> value;
};

template <class T>
const T* GlobalType::as() const {
  return std::get_if<T>(&node_->value);
}

enum class Dir { Send, Recv };

struct LBranch;
struct LComm;
struct LSilent;
struct LRec;
struct LVar;
struct LEnd {};

struct LStateVar {
  std::string var;
  Mult mult = Mult::Omega;
  RefinementType type;
  Expr init;
};

struct LocalNode;

class LocalType {
 public:
  LocalType();  // end

  static LocalType end();
  static LocalType comm(Dir dir, Role peer, std::vector<LBranch> branches);
  static LocalType send(Role peer, std::vector<LBranch> branches) {
    return comm(Dir::Send, std::move(peer), std::move(branches));
  }
  static LocalType recv(Role peer, std::vector<LBranch> branches) {
    return comm(Dir::Recv, std::move(peer), std::move(branches));
  }
  static LocalType silent(std::string label, std::string var, RefinementType type, LocalType cont);
  static LocalType rec(std::string tvar, std::vector<LStateVar> vars, LocalType body);
  static LocalType tvar(std::string name, std::vector<Expr> args = {});

  const LocalNode& node() const { return *node_; }
  template <class T>
  const T* as() const;
  bool is_end() const;

  bool same_node(const LocalType& o) const { return node_ == o.node_; }

 private:
  explicit LocalType(std::shared_ptr<const LocalNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const LocalNode> node_;
};

struct LBranch {
  std::string label;
  std::string var;
  RefinementType type;
  LocalType cont;
};

struct LComm {
  Dir dir;
  Role peer;
  std::vector<LBranch> branches;
};

struct LSilent {
  std::string label;
  std::string var;
  RefinementType type;
  LocalType cont;
};

struct LRec {
  std::string tvar;
  std::vector<LStateVar> vars;
  LocalType body;
};

struct LVar {
  std::string tvar;
  std::vector<Expr> args;
};

struct LocalNode {
  std::variant<LEnd, LComm, LSilent, LRec, LVar> value;
};

template <class T>
const T* LocalType::as() const {
  return std::get_if<T>(&node_->value);
}

/// `p -> q : l(x:T)`
struct Action {
  Role from;
  Role to;
  std::string label;
  std::string var;
  RefinementType type;

  RoleSet subjects() const { return {from, to}; }
};

// Free expression variables.
std::set<std::string> free_vars(const GlobalType& g);
std::set<std::string> free_vars(const LocalType& l);

std::set<std::string> free_tvars(const GlobalType& g);
std::set<std::string> free_tvars(const LocalType& l);

/// Roles occurring as message endpoints.
RoleSet participants(const GlobalType& g);

/// One unfolding of a Rec node at the head. Throws InvariantViolation on a
/// non-Rec argument.
GlobalType unfold(const GlobalType& rec);
LocalType unfold(const LocalType& rec);

/// Substitutes free expression variables; binders in the way are renamed.
GlobalType substitute(const GlobalType& g, const std::map<std::string, Expr>& subst);
LocalType substitute(const LocalType& l, const std::map<std::string, Expr>& subst);

/// Equality up to renaming of every bound expression and type variable.
bool alpha_equal(const GlobalType& a, const GlobalType& b);
bool alpha_equal(const LocalType& a, const LocalType& b);

/// Throws InvariantViolation when a Rec body can reach its own type
/// variable without passing a prefix.
void check_contractive(const GlobalType& g);
void check_contractive(const LocalType& l);

}  // namespace rmpst
