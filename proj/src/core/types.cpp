#include "rmpst/core/types.hpp"

#include <algorithm>

#include "rmpst/core/error.hpp"
#include "rmpst/core/print.hpp"

namespace rmpst {

namespace {

RefinementType bind_to(const RefinementType& t, const std::string& var) {
  if (t.binder == var) return t;
  auto fv = free_vars(t);
  if (fv.count(var))
    throw InvariantViolation("variable '" + var + "' is shadowed inside its own refinement");
  return t.with_binder(var);
}

template <class Branch>
void check_branches(const std::vector<Branch>& branches) {
  if (branches.empty()) throw InvariantViolation("message with no branches");
  std::set<std::string> labels;
  for (const auto& b : branches) {
    if (b.label.empty()) throw InvariantViolation("empty label");
    if (!labels.insert(b.label).second)
      throw InvariantViolation("duplicate label '" + b.label + "'");
  }
}

std::set<std::string> unguarded(const GlobalType& g) {
  if (auto v = g.as<GVar>()) return {v->tvar};
  if (auto r = g.as<GRec>()) {
    auto s = unguarded(r->body);
    s.erase(r->tvar);
    return s;
  }
  return {};
}

std::set<std::string> unguarded(const LocalType& l) {
  if (auto v = l.as<LVar>()) return {v->tvar};
  if (auto r = l.as<LRec>()) {
    auto s = unguarded(r->body);
    s.erase(r->tvar);
    return s;
  }
  return {};
}

}  // namespace

GlobalType::GlobalType() : node_(std::make_shared<const GlobalNode>(GlobalNode{GEnd{}})) {}

GlobalType GlobalType::end() { return GlobalType(); }

GlobalType GlobalType::message(Role from, Role to, std::vector<GBranch> branches) {
  if (from.name.empty() || to.name.empty()) throw InvariantViolation("empty role name");
  if (from == to) throw InvariantViolation("role '" + from.name + "' sends to itself");
  check_branches(branches);
  for (auto& b : branches) b.type = bind_to(b.type, b.var);
  return GlobalType(std::make_shared<const GlobalNode>(
      GlobalNode{GMessage{std::move(from), std::move(to), std::move(branches)}}));
}

GlobalType GlobalType::rec(std::string tvar, std::vector<GStateVar> vars, GlobalType body) {
  if (unguarded(body).count(tvar))
    throw InvariantViolation("recursion '" + tvar + "' is not contractive");
  std::set<std::string> seen;
  for (auto& v : vars) {
    if (!seen.insert(v.var).second)
      throw InvariantViolation("duplicate state variable '" + v.var + "'");
    v.type = bind_to(v.type, v.var);
  }
  return GlobalType(std::make_shared<const GlobalNode>(
      GlobalNode{GRec{std::move(tvar), std::move(vars), std::move(body)}}));
}

GlobalType GlobalType::tvar(std::string name, std::vector<Expr> args) {
  return GlobalType(
      std::make_shared<const GlobalNode>(GlobalNode{GVar{std::move(name), std::move(args)}}));
}

bool GlobalType::is_end() const { return as<GEnd>() != nullptr; }

LocalType::LocalType() : node_(std::make_shared<const LocalNode>(LocalNode{LEnd{}})) {}

LocalType LocalType::end() { return LocalType(); }

LocalType LocalType::comm(Dir dir, Role peer, std::vector<LBranch> branches) {
  if (peer.name.empty()) throw InvariantViolation("empty role name");
  check_branches(branches);
  for (auto& b : branches) b.type = bind_to(b.type, b.var);
  return LocalType(std::make_shared<const LocalNode>(
      LocalNode{LComm{dir, std::move(peer), std::move(branches)}}));
}

LocalType LocalType::silent(std::string label, std::string var, RefinementType type,
                            LocalType cont) {
  type = bind_to(type, var);
  return LocalType(std::make_shared<const LocalNode>(
      LocalNode{LSilent{std::move(label), std::move(var), std::move(type), std::move(cont)}}));
}

LocalType LocalType::rec(std::string tvar, std::vector<LStateVar> vars, LocalType body) {
  if (unguarded(body).count(tvar))
    throw InvariantViolation("recursion '" + tvar + "' is not contractive");
  std::set<std::string> seen;
  for (auto& v : vars) {
    if (!seen.insert(v.var).second)
      throw InvariantViolation("duplicate state variable '" + v.var + "'");
    v.type = bind_to(v.type, v.var);
  }
  return LocalType(std::make_shared<const LocalNode>(
      LocalNode{LRec{std::move(tvar), std::move(vars), std::move(body)}}));
}

LocalType LocalType::tvar(std::string name, std::vector<Expr> args) {
  return LocalType(
      std::make_shared<const LocalNode>(LocalNode{LVar{std::move(name), std::move(args)}}));
}

bool LocalType::is_end() const { return as<LEnd>() != nullptr; }

// ---------------------------------------------------------------- free vars

namespace {

template <class StateVar>
void state_free_vars(const std::vector<StateVar>& vars, std::set<std::string>& out) {
  std::set<std::string> bound;
  for (const auto& v : vars) {
    for (const auto& x : free_vars(v.init)) out.insert(x);
    for (const auto& x : free_vars(v.type))
      if (!bound.count(x)) out.insert(x);
    bound.insert(v.var);
  }
}

template <class StateVar>
void erase_state(const std::vector<StateVar>& vars, std::set<std::string>& s) {
  for (const auto& v : vars) s.erase(v.var);
}

}  // namespace

std::set<std::string> free_vars(const GlobalType& g) {
  std::set<std::string> out;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, GMessage>) {
          for (const auto& b : n.branches) {
            for (const auto& x : free_vars(b.type)) out.insert(x);
            auto c = free_vars(b.cont);
            c.erase(b.var);
            out.insert(c.begin(), c.end());
          }
        } else if constexpr (std::is_same_v<T, GRec>) {
          state_free_vars(n.vars, out);
          auto c = free_vars(n.body);
          erase_state(n.vars, c);
          out.insert(c.begin(), c.end());
        } else if constexpr (std::is_same_v<T, GVar>) {
          for (const auto& a : n.args)
            for (const auto& x : free_vars(a)) out.insert(x);
        }
      },
      g.node().value);
  return out;
}

std::set<std::string> free_vars(const LocalType& l) {
  std::set<std::string> out;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LComm>) {
          for (const auto& b : n.branches) {
            for (const auto& x : free_vars(b.type)) out.insert(x);
            auto c = free_vars(b.cont);
            c.erase(b.var);
            out.insert(c.begin(), c.end());
          }
        } else if constexpr (std::is_same_v<T, LSilent>) {
          for (const auto& x : free_vars(n.type)) out.insert(x);
          auto c = free_vars(n.cont);
          c.erase(n.var);
          out.insert(c.begin(), c.end());
        } else if constexpr (std::is_same_v<T, LRec>) {
          state_free_vars(n.vars, out);
          auto c = free_vars(n.body);
          erase_state(n.vars, c);
          out.insert(c.begin(), c.end());
        } else if constexpr (std::is_same_v<T, LVar>) {
          for (const auto& a : n.args)
            for (const auto& x : free_vars(a)) out.insert(x);
        }
      },
      l.node().value);
  return out;
}

std::set<std::string> free_tvars(const GlobalType& g) {
  if (auto m = g.as<GMessage>()) {
    std::set<std::string> out;
    for (const auto& b : m->branches) {
      auto s = free_tvars(b.cont);
      out.insert(s.begin(), s.end());
    }
    return out;
  }
  if (auto r = g.as<GRec>()) {
    auto s = free_tvars(r->body);
    s.erase(r->tvar);
    return s;
  }
  if (auto v = g.as<GVar>()) return {v->tvar};
  return {};
}

std::set<std::string> free_tvars(const LocalType& l) {
  if (auto m = l.as<LComm>()) {
    std::set<std::string> out;
    for (const auto& b : m->branches) {
      auto s = free_tvars(b.cont);
      out.insert(s.begin(), s.end());
    }
    return out;
  }
  if (auto s = l.as<LSilent>()) return free_tvars(s->cont);
  if (auto r = l.as<LRec>()) {
    auto s = free_tvars(r->body);
    s.erase(r->tvar);
    return s;
  }
  if (auto v = l.as<LVar>()) return {v->tvar};
  return {};
}

RoleSet participants(const GlobalType& g) {
  RoleSet out;
  if (auto m = g.as<GMessage>()) {
    out.insert(m->from);
    out.insert(m->to);
    for (const auto& b : m->branches) {
      auto s = participants(b.cont);
      out.insert(s.begin(), s.end());
    }
  } else if (auto r = g.as<GRec>()) {
    out = participants(r->body);
  }
  return out;
}

// ------------------------------------------------------------- substitution

namespace {

using Subst = std::map<std::string, Expr>;

GlobalType rename_binders(const GlobalType& g, const std::set<std::string>& avoid);
LocalType rename_binders(const LocalType& l, const std::set<std::string>& avoid);

Subst without(const Subst& s, const std::string& var) {
  if (!s.count(var)) return s;
  Subst out = s;
  out.erase(var);
  return out;
}

template <class StateVar>
std::vector<StateVar> subst_state(const std::vector<StateVar>& vars, const Subst& s, Subst& inner) {
  std::vector<StateVar> out;
  inner = s;
  for (const auto& v : vars) {
    StateVar nv = v;
    nv.init = substitute(v.init, s);
    nv.type = substitute(v.type, without(inner, v.var));
    inner.erase(v.var);
    out.push_back(std::move(nv));
  }
  return out;
}

// Assumes no binder of g occurs free in the range of subst.
GlobalType subst_global(const GlobalType& g, const Subst& subst) {
  if (subst.empty()) return g;
  if (auto m = g.as<GMessage>()) {
    std::vector<GBranch> bs;
    for (const auto& b : m->branches) {
      GBranch nb = b;
      nb.type = substitute(b.type, without(subst, b.var));
      nb.cont = subst_global(b.cont, without(subst, b.var));
      bs.push_back(std::move(nb));
    }
    return GlobalType::message(m->from, m->to, std::move(bs));
  }
  if (auto r = g.as<GRec>()) {
    Subst inner;
    auto vars = subst_state(r->vars, subst, inner);
    return GlobalType::rec(r->tvar, std::move(vars), subst_global(r->body, inner));
  }
  if (auto v = g.as<GVar>()) {
    std::vector<Expr> args;
    for (const auto& a : v->args) args.push_back(substitute(a, subst));
    return GlobalType::tvar(v->tvar, std::move(args));
  }
  return g;
}

LocalType subst_local(const LocalType& l, const Subst& subst) {
  if (subst.empty()) return l;
  if (auto m = l.as<LComm>()) {
    std::vector<LBranch> bs;
    for (const auto& b : m->branches) {
      LBranch nb = b;
      nb.type = substitute(b.type, without(subst, b.var));
      nb.cont = subst_local(b.cont, without(subst, b.var));
      bs.push_back(std::move(nb));
    }
    return LocalType::comm(m->dir, m->peer, std::move(bs));
  }
  if (auto s = l.as<LSilent>()) {
    auto inner = without(subst, s->var);
    return LocalType::silent(s->label, s->var, substitute(s->type, inner),
                             subst_local(s->cont, inner));
  }
  if (auto r = l.as<LRec>()) {
    Subst inner;
    auto vars = subst_state(r->vars, subst, inner);
    return LocalType::rec(r->tvar, std::move(vars), subst_local(r->body, inner));
  }
  if (auto v = l.as<LVar>()) {
    std::vector<Expr> args;
    for (const auto& a : v->args) args.push_back(substitute(a, subst));
    return LocalType::tvar(v->tvar, std::move(args));
  }
  return l;
}

template <class T>
std::pair<Subst, std::set<std::string>> relevant(const T& t, const Subst& subst) {
  auto fv = free_vars(t);
  Subst s;
  std::set<std::string> range;
  for (const auto& [k, v] : subst) {
    if (!fv.count(k)) continue;
    s.emplace(k, v);
    for (const auto& x : free_vars(v)) range.insert(x);
  }
  return {s, range};
}

}  // namespace

GlobalType substitute(const GlobalType& g, const Subst& subst) {
  auto [s, range] = relevant(g, subst);
  if (s.empty()) return g;
  return subst_global(rename_binders(g, range), s);
}

LocalType substitute(const LocalType& l, const Subst& subst) {
  auto [s, range] = relevant(l, subst);
  if (s.empty()) return l;
  return subst_local(rename_binders(l, range), s);
}

// ------------------------------------------------------------------- unfold

namespace {

// Renames every binder in g whose name is in `avoid`.
GlobalType rename_binders(const GlobalType& g, const std::set<std::string>& avoid) {
  if (auto m = g.as<GMessage>()) {
    std::vector<GBranch> bs;
    for (const auto& b : m->branches) {
      GBranch nb = b;
      nb.cont = rename_binders(b.cont, avoid);
      if (avoid.count(b.var)) {
        auto fresh = fresh_name(display_hint(b.var));
        nb.cont = substitute(nb.cont, {{b.var, Expr::var(fresh)}});
        nb.var = fresh;
        nb.type = b.type.with_binder(fresh);
      }
      bs.push_back(std::move(nb));
    }
    return GlobalType::message(m->from, m->to, std::move(bs));
  }
  if (auto r = g.as<GRec>()) {
    auto body = rename_binders(r->body, avoid);
    auto vars = r->vars;
    Subst ren;
    for (auto& sv : vars) {
      if (!avoid.count(sv.var)) continue;
      auto fresh = fresh_name(display_hint(sv.var));
      ren.emplace(sv.var, Expr::var(fresh));
      sv.var = fresh;
    }
    if (ren.empty()) return GlobalType::rec(r->tvar, vars, body);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      Subst earlier;
      for (std::size_t j = 0; j < i; ++j)
        if (ren.count(r->vars[j].var)) earlier.emplace(r->vars[j].var, ren.at(r->vars[j].var));
      auto t = substitute(r->vars[i].type, earlier);
      vars[i].type = t.with_binder(vars[i].var);
    }
    return GlobalType::rec(r->tvar, vars, substitute(body, ren));
  }
  return g;
}

LocalType rename_binders(const LocalType& l, const std::set<std::string>& avoid) {
  if (auto m = l.as<LComm>()) {
    std::vector<LBranch> bs;
    for (const auto& b : m->branches) {
      LBranch nb = b;
      nb.cont = rename_binders(b.cont, avoid);
      if (avoid.count(b.var)) {
        auto fresh = fresh_name(display_hint(b.var));
        nb.cont = substitute(nb.cont, {{b.var, Expr::var(fresh)}});
        nb.var = fresh;
        nb.type = b.type.with_binder(fresh);
      }
      bs.push_back(std::move(nb));
    }
    return LocalType::comm(m->dir, m->peer, std::move(bs));
  }
  if (auto s = l.as<LSilent>()) {
    auto cont = rename_binders(s->cont, avoid);
    if (!avoid.count(s->var)) return LocalType::silent(s->label, s->var, s->type, cont);
    auto fresh = fresh_name(display_hint(s->var));
    return LocalType::silent(s->label, fresh, s->type.with_binder(fresh),
                             substitute(cont, {{s->var, Expr::var(fresh)}}));
  }
  if (auto r = l.as<LRec>()) {
    auto body = rename_binders(r->body, avoid);
    auto vars = r->vars;
    Subst ren;
    for (auto& sv : vars) {
      if (!avoid.count(sv.var)) continue;
      auto fresh = fresh_name(display_hint(sv.var));
      ren.emplace(sv.var, Expr::var(fresh));
      sv.var = fresh;
    }
    if (ren.empty()) return LocalType::rec(r->tvar, vars, body);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      Subst earlier;
      for (std::size_t j = 0; j < i; ++j)
        if (ren.count(r->vars[j].var)) earlier.emplace(r->vars[j].var, ren.at(r->vars[j].var));
      vars[i].type = substitute(r->vars[i].type, earlier).with_binder(vars[i].var);
    }
    return LocalType::rec(r->tvar, vars, substitute(body, ren));
  }
  return l;
}

template <class StateVar>
std::vector<StateVar> reseed(const std::vector<StateVar>& vars, const std::vector<Expr>& args) {
  auto out = vars;
  if (args.empty()) {
    for (auto& v : out) v.init = Expr::var(v.var);
    return out;
  }
  if (args.size() != vars.size())
    throw InvariantViolation("type variable applied to " + std::to_string(args.size()) +
                             " arguments, expected " + std::to_string(vars.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i].init = args[i];
  return out;
}

GlobalType replace_tvar(const GlobalType& g, const GRec& rec) {
  if (auto m = g.as<GMessage>()) {
    std::vector<GBranch> bs;
    for (const auto& b : m->branches) {
      GBranch nb = b;
      nb.cont = replace_tvar(b.cont, rec);
      bs.push_back(std::move(nb));
    }
    return GlobalType::message(m->from, m->to, std::move(bs));
  }
  if (auto r = g.as<GRec>()) {
    if (r->tvar == rec.tvar) return g;
    return GlobalType::rec(r->tvar, r->vars, replace_tvar(r->body, rec));
  }
  if (auto v = g.as<GVar>()) {
    if (v->tvar != rec.tvar) return g;
    return GlobalType::rec(rec.tvar, reseed(rec.vars, v->args), rec.body);
  }
  return g;
}

LocalType replace_tvar(const LocalType& l, const LRec& rec) {
  if (auto m = l.as<LComm>()) {
    std::vector<LBranch> bs;
    for (const auto& b : m->branches) {
      LBranch nb = b;
      nb.cont = replace_tvar(b.cont, rec);
      bs.push_back(std::move(nb));
    }
    return LocalType::comm(m->dir, m->peer, std::move(bs));
  }
  if (auto s = l.as<LSilent>())
    return LocalType::silent(s->label, s->var, s->type, replace_tvar(s->cont, rec));
  if (auto r = l.as<LRec>()) {
    if (r->tvar == rec.tvar) return l;
    return LocalType::rec(r->tvar, r->vars, replace_tvar(r->body, rec));
  }
  if (auto v = l.as<LVar>()) {
    if (v->tvar != rec.tvar) return l;
    return LocalType::rec(rec.tvar, reseed(rec.vars, v->args), rec.body);
  }
  return l;
}

}  // namespace

GlobalType unfold(const GlobalType& g) {
  auto r = g.as<GRec>();
  if (!r) throw InvariantViolation("unfold of a non-recursive global type");
  // free variables of the re-inserted recursion, ignoring its initialisers
  auto body_fv = free_vars(r->body);
  std::set<std::string> outer;
  for (const auto& x : body_fv)
    if (std::none_of(r->vars.begin(), r->vars.end(), [&](const auto& v) { return v.var == x; }))
      outer.insert(x);
  auto body = outer.empty() ? r->body : rename_binders(r->body, outer);
  return replace_tvar(body, *r);
}

LocalType unfold(const LocalType& l) {
  auto r = l.as<LRec>();
  if (!r) throw InvariantViolation("unfold of a non-recursive local type");
  auto body_fv = free_vars(r->body);
  std::set<std::string> outer;
  for (const auto& x : body_fv)
    if (std::none_of(r->vars.begin(), r->vars.end(), [&](const auto& v) { return v.var == x; }))
      outer.insert(x);
  auto body = outer.empty() ? r->body : rename_binders(r->body, outer);
  return replace_tvar(body, *r);
}

// ------------------------------------------------------------ contractivity

void check_contractive(const GlobalType& g) {
  if (auto m = g.as<GMessage>()) {
    for (const auto& b : m->branches) check_contractive(b.cont);
  } else if (auto r = g.as<GRec>()) {
    if (unguarded(r->body).count(r->tvar))
      throw InvariantViolation("recursion '" + r->tvar + "' is not contractive");
    check_contractive(r->body);
  }
}

void check_contractive(const LocalType& l) {
  if (auto m = l.as<LComm>()) {
    for (const auto& b : m->branches) check_contractive(b.cont);
  } else if (auto s = l.as<LSilent>()) {
    check_contractive(s->cont);
  } else if (auto r = l.as<LRec>()) {
    if (unguarded(r->body).count(r->tvar))
      throw InvariantViolation("recursion '" + r->tvar + "' is not contractive");
    check_contractive(r->body);
  }
}

// ------------------------------------------------------------ alpha-equality

bool alpha_equal(const GlobalType& a, const GlobalType& b) {
  return canonical_text(a) == canonical_text(b);
}

bool alpha_equal(const LocalType& a, const LocalType& b) {
  if (a.same_node(b)) return true;
  return canonical_text(a) == canonical_text(b);
}

}  // namespace rmpst
