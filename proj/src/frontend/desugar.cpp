#include "rmpst/core/error.hpp"
#include "rmpst/frontend/parser.hpp"

namespace rmpst {

namespace {

using Seq = std::vector<const Stmt*>;

class Lowerer {
 public:
  explicit Lowerer(const ProtocolDecl& decl) : decl_(decl) {}

  GlobalType run() {
    Seq seq;
    for (const auto& s : decl_.main.body) seq.push_back(&s);
    return lower(decl_.main, seq, 0);
  }

 private:
  GlobalType lower(const ProtocolDef& def, const Seq& seq, std::size_t i) {
    if (i == seq.size()) return GlobalType::end();
    const Stmt& st = *seq[i];
    bool last = i + 1 == seq.size();
    try {
      return std::visit(
          [&](const auto& n) -> GlobalType {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, MessageStmt>) {
              return GlobalType::message(n.from, n.to,
                                         {GBranch{n.label, n.var, n.type, lower(def, seq, i + 1)}});
            } else if constexpr (std::is_same_v<T, ChoiceStmt>) {
              return choice(def, n, st.span, seq, i);
            } else if constexpr (std::is_same_v<T, DoStmt>) {
              if (!last)
                throw DesugarError(DesugarErrorKind::UnsupportedNesting,
                                   "'do " + n.protocol + "' must be the last statement of its block",
                                   st.span);
              return enter(def, n, st.span);
            } else if constexpr (std::is_same_v<T, RecStmt>) {
              Seq body;
              for (const auto& s : n.body) body.push_back(&s);
              body.insert(body.end(), seq.begin() + i + 1, seq.end());
              return GlobalType::rec(n.tvar, {}, lower(def, body, 0));
            } else {
              if (!last)
                throw DesugarError(DesugarErrorKind::UnsupportedNesting,
                                   "'continue " + n.tvar + "' must be the last statement of its block",
                                   st.span);
              return GlobalType::tvar(n.tvar);
            }
          },
          st.value);
    } catch (const InvariantViolation& e) {
      throw DesugarError(DesugarErrorKind::Invariant, e.what(), st.span);
    }
  }

  GlobalType choice(const ProtocolDef& def, const ChoiceStmt& c, Span span, const Seq& seq,
                    std::size_t i) {
    std::optional<Role> to;
    std::vector<GBranch> branches;
    for (const auto& blk : c.blocks) {
      Seq s;
      for (const auto& st : blk) s.push_back(&st);
      s.insert(s.end(), seq.begin() + i + 1, seq.end());
      Span at = blk.empty() ? span : blk.front().span;
      auto g = lower(def, s, 0);
      auto m = g.as<GMessage>();
      if (!m)
        throw DesugarError(DesugarErrorKind::NonDirectedChoice,
                           "every branch of 'choice at " + c.at.name + "' must start with a message",
                           at);
      if (m->from != c.at)
        throw DesugarError(DesugarErrorKind::NonDirectedChoice,
                           "branch of 'choice at " + c.at.name + "' starts with a message from '" +
                               m->from.name + "'",
                           at);
      if (to && *to != m->to)
        throw DesugarError(DesugarErrorKind::NonDirectedChoice,
                           "branches of 'choice at " + c.at.name + "' address different roles ('" +
                               to->name + "' and '" + m->to.name + "')",
                           at);
      to = m->to;
      for (const auto& b : m->branches) {
        for (const auto& o : branches)
          if (o.label == b.label)
            throw DesugarError(DesugarErrorKind::Invariant,
                               "duplicate label '" + b.label + "' in 'choice at " + c.at.name + "'",
                               at);
        branches.push_back(b);
      }
    }
    return GlobalType::message(c.at, *to, std::move(branches));
  }

  GlobalType enter(const ProtocolDef& def, const DoStmt& d, Span span) {
    const ProtocolDef* target = nullptr;
    if (d.protocol == decl_.main.name) target = &decl_.main;
    else target = decl_.find_aux(d.protocol);
    if (!target || target->core)
      throw DesugarError(DesugarErrorKind::UnknownProtocol, "unknown protocol '" + d.protocol + "'",
                         span);
    if (d.args.size() != target->roles.size())
      throw DesugarError(DesugarErrorKind::UnsupportedNesting,
                         "wrong number of roles for '" + d.protocol + "'", span);
    for (std::size_t k = 0; k < d.args.size(); ++k) {
      if (d.args[k].role != target->roles[k].role)
        throw DesugarError(DesugarErrorKind::UnsupportedNesting,
                           "role renaming is not supported ('" + d.args[k].role.name + "' for '" +
                               target->roles[k].role.name + "')",
                           d.args[k].span);
      if (d.args[k].state.size() != target->roles[k].state.size())
        throw DesugarError(DesugarErrorKind::UnsupportedNesting,
                           "wrong number of state arguments for role '" +
                               target->roles[k].role.name + "'",
                           d.args[k].span);
    }
    // one state variable per distinct name; roles declaring it know it
    std::vector<GStateVar> vars;
    for (std::size_t k = 0; k < d.args.size(); ++k) {
      const auto& rd = target->roles[k];
      for (std::size_t j = 0; j < rd.state.size(); ++j) {
        const auto& sd = rd.state[j];
        const Expr& arg = d.args[k].state[j];
        GStateVar* existing = nullptr;
        for (auto& v : vars)
          if (v.var == sd.var) existing = &v;
        if (existing) {
          if (existing->init != arg)
            throw DesugarError(DesugarErrorKind::UnsupportedNesting,
                               "state variable '" + sd.var + "' initialised differently by two roles",
                               d.args[k].span);
          existing->knowers->insert(rd.role);
        } else {
          vars.push_back(GStateVar{sd.var, sd.type, arg, RoleSet{rd.role}});
        }
      }
    }
    bool recursive = false;
    for (const auto& a : active_) recursive = recursive || a == target->name;
    if (recursive) {
      std::vector<Expr> args;
      for (const auto& v : vars) args.push_back(v.init);
      return GlobalType::tvar(target->name, std::move(args));
    }
    (void)def;
    active_.push_back(target->name);
    Seq body;
    for (const auto& s : target->body) body.push_back(&s);
    auto g = lower(*target, body, 0);
    active_.pop_back();
    return GlobalType::rec(target->name, std::move(vars), g);
  }

  const ProtocolDecl& decl_;
  std::vector<std::string> active_;
};

}  // namespace

GlobalType desugar(const ProtocolDecl& decl) {
  if (decl.main.core) return *decl.main.core;
  return Lowerer(decl).run();
}

std::optional<GlobalType> load_protocol(std::string_view text, std::vector<Diagnostic>& diagnostics,
                                        std::string* name) {
  auto res = parse_protocol(text);
  diagnostics.insert(diagnostics.end(), res.diagnostics.begin(), res.diagnostics.end());
  if (!res.ok()) return std::nullopt;
  if (name) *name = res.decl->name;
  try {
    auto g = desugar(*res.decl);
    check_contractive(g);
    return g;
  } catch (const DesugarError& e) {
    diagnostics.push_back({Severity::Error, e.what(), e.span()});
  } catch (const Error& e) {
    diagnostics.push_back({Severity::Error, e.what(), res.decl->main.span});
  }
  return std::nullopt;
}

}  // namespace rmpst
