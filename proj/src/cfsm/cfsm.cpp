#include "rmpst/cfsm/cfsm.hpp"

#include <deque>
#include <map>
#include <memory>
#include <set>

#include <json.hpp>

#include "rmpst/core/error.hpp"
#include "rmpst/core/print.hpp"

namespace rmpst {

std::string_view to_string(StateKind k) {
  switch (k) {
    case StateKind::Send: return "send";
    case StateKind::Recv: return "recv";
    case StateKind::Terminal: return "terminal";
  }
  return "?";
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::MixedState: return "MixedState";
    case ViolationKind::Undirected: return "Undirected";
    case ViolationKind::NonDeterministic: return "NonDeterministic";
    case ViolationKind::Unreachable: return "Unreachable";
    case ViolationKind::Stuck: return "Stuck";
    case ViolationKind::DanglingEdge: return "DanglingEdge";
  }
  return "?";
}

std::vector<const Transition*> Cfsm::outgoing(int id) const {
  std::vector<const Transition*> out;
  for (const auto& t : transitions)
    if (t.from == id) out.push_back(&t);
  return out;
}

std::optional<int> Cfsm::terminal() const {
  for (const auto& s : states)
    if (s.kind == StateKind::Terminal) return s.id;
  return std::nullopt;
}

namespace {

using Group = std::vector<Update>;

// sequential composition of simultaneous assignment groups
void append_group(std::vector<Update>& acc, const Group& g) {
  std::map<std::string, Expr> m;
  for (const auto& u : acc) m[u.var] = u.expr;
  Group next;
  for (const auto& u : g) next.push_back(Update{u.var, substitute(u.expr, m)});
  for (const auto& u : next) {
    bool found = false;
    for (auto& a : acc)
      if (a.var == u.var) {
        a.expr = u.expr;
        found = true;
      }
    if (!found) acc.push_back(u);
  }
}

struct RecInfo {
  int state = -1;
  std::vector<LStateVar> vars;
  std::vector<Group> tail;  // inits of recs nested directly inside
};

using Env = std::shared_ptr<const std::map<std::string, std::shared_ptr<RecInfo>>>;

struct Pending {
  int id;
  LocalContext sigma;
  LocalType type;
  Env env;
};

class Builder {
 public:
  explicit Builder(Role role) { m_.role = std::move(role); }

  Cfsm run(const LocalContext& sigma, const LocalType& l) {
    auto [id, ups] = resolve(sigma, l, std::make_shared<const std::map<std::string, std::shared_ptr<RecInfo>>>());
    m_.initial = id;
    m_.initial_updates = ups;
    while (!queue_.empty()) {
      auto p = queue_.front();
      queue_.pop_front();
      const auto& c = *p.type.as<LComm>();
      for (const auto& b : c.branches) {
        auto next = try_extend_local(p.sigma, b.var, Mult::Omega, b.type);
        auto [to, ups2] = resolve(next ? *next : p.sigma, b.cont, p.env);
        m_.transitions.push_back(Transition{p.id, to, c.dir, c.peer, b.label, b.var, b.type, ups2});
      }
    }
    return std::move(m_);
  }

 private:
  std::pair<int, std::vector<Update>> resolve(LocalContext sigma, LocalType l, Env env) {
    std::vector<Update> ups;
    std::vector<std::pair<std::shared_ptr<RecInfo>, std::size_t>> opened;
    for (;;) {
      if (auto s = l.as<LSilent>()) {
        if (auto next = try_extend_local(sigma, s->var, Mult::Zero, s->type)) sigma = *next;
        l = s->cont;
      } else if (auto r = l.as<LRec>()) {
        auto info = std::make_shared<RecInfo>();
        info->vars = r->vars;
        Group g;
        for (const auto& v : r->vars) {
          g.push_back(Update{v.var, v.init});
          if (auto next = try_extend_local(sigma, v.var, v.mult, v.type)) sigma = *next;
        }
        append_group(ups, g);
        for (auto& [o, start] : opened) o->tail.push_back(g);
        opened.emplace_back(info, 0);
        auto m = std::make_shared<std::map<std::string, std::shared_ptr<RecInfo>>>(*env);
        (*m)[r->tvar] = info;
        env = m;
        l = r->body;
      } else if (auto v = l.as<LVar>()) {
        auto it = env->find(v->tvar);
        if (it == env->end())
          throw InvariantViolation("free type variable '" + v->tvar + "' in local type");
        auto& info = *it->second;
        if (info.state < 0)
          throw InvariantViolation("recursion '" + v->tvar + "' reaches no communication");
        if (!v->args.empty()) {
          if (v->args.size() != info.vars.size())
            throw InvariantViolation("wrong number of arguments for '" + v->tvar + "'");
          Group g;
          for (std::size_t i = 0; i < v->args.size(); ++i) g.push_back(Update{info.vars[i].var, v->args[i]});
          append_group(ups, g);
        }
        for (const auto& g : info.tail) append_group(ups, g);
        for (auto& [o, start] : opened) o->state = info.state;
        return {info.state, ups};
      } else if (l.is_end()) {
        int id = terminal(sigma);
        for (auto& [o, start] : opened) o->state = id;
        return {id, ups};
      } else {
        const auto& c = *l.as<LComm>();
        int id = static_cast<int>(m_.states.size()) + 1;
        m_.states.push_back(CfsmState{id, c.dir == Dir::Send ? StateKind::Send : StateKind::Recv,
                                      c.peer, sigma});
        for (auto& [o, start] : opened) o->state = id;
        queue_.push_back(Pending{id, sigma, l, env});
        return {id, ups};
      }
    }
  }

  int terminal(const LocalContext& sigma) {
    if (terminal_ < 0) {
      terminal_ = static_cast<int>(m_.states.size()) + 1;
      m_.states.push_back(CfsmState{terminal_, StateKind::Terminal, std::nullopt, sigma});
      return terminal_;
    }
    // keep the entries every path agrees on
    auto& ctx = m_.states[static_cast<std::size_t>(terminal_ - 1)].context;
    std::vector<LocalEntry> keep;
    for (const auto& e : ctx) {
      auto other = sigma.find(e.var);
      if (other && other->mult == e.mult && alpha_equal(other->type, e.type)) keep.push_back(e);
    }
    ctx = LocalContext(std::move(keep));
    return terminal_;
  }

  Cfsm m_;
  std::deque<Pending> queue_;
  int terminal_ = -1;
};

}  // namespace

Cfsm to_cfsm(const Role& role, const LocalContext& sigma, const LocalType& l) {
  return Builder(role).run(sigma, l);
}

std::vector<Violation> validate(const Cfsm& m) {
  std::vector<Violation> out;
  auto exists = [&](int id) { return id >= 1 && id <= static_cast<int>(m.states.size()); };
  for (const auto& t : m.transitions)
    if (!exists(t.from) || !exists(t.to))
      out.push_back({ViolationKind::DanglingEdge, t.from,
                     "edge " + t.label + " connects unknown states"});
  for (const auto& s : m.states) {
    auto edges = m.outgoing(s.id);
    if (edges.empty()) {
      if (s.kind != StateKind::Terminal)
        out.push_back({ViolationKind::Stuck, s.id, "non-terminal state without transitions"});
      continue;
    }
    std::set<std::string> labels;
    for (const auto* e : edges) {
      if (e->dir != edges.front()->dir)
        out.push_back({ViolationKind::MixedState, s.id, "state mixes sends and receives"});
      if (e->peer != edges.front()->peer)
        out.push_back({ViolationKind::Undirected, s.id,
                       "state talks to " + edges.front()->peer.name + " and " + e->peer.name});
      if (!labels.insert(e->label).second)
        out.push_back({ViolationKind::NonDeterministic, s.id, "label " + e->label + " repeated"});
    }
  }
  std::set<int> seen{m.initial};
  std::deque<int> work{m.initial};
  while (!work.empty()) {
    int q = work.front();
    work.pop_front();
    for (const auto* e : m.outgoing(q))
      if (seen.insert(e->to).second) work.push_back(e->to);
  }
  for (const auto& s : m.states)
    if (!seen.count(s.id))
      out.push_back({ViolationKind::Unreachable, s.id, "state not reachable from the initial state"});
  return out;
}

namespace {

nlohmann::json updates_json(const std::vector<Update>& ups) {
  auto arr = nlohmann::json::array();
  for (const auto& u : ups) arr.push_back({{"var", u.var}, {"expr", to_string(u.expr)}});
  return arr;
}

}  // namespace

std::string to_json(const Cfsm& m, int indent) {
  nlohmann::json j;
  j["role"] = m.role.name;
  j["initial"] = m.initial;
  j["initial_updates"] = updates_json(m.initial_updates);
  auto states = nlohmann::json::array();
  for (const auto& s : m.states) {
    auto ctx = nlohmann::json::array();
    for (const auto& e : s.context)
      ctx.push_back({{"var", e.var},
                     {"mult", e.mult == Mult::Omega ? "omega" : "0"},
                     {"base", std::string(to_string(e.type.base))},
                     {"pred", to_string(e.type.with_binder(e.var).predicate)}});
    nlohmann::json st{{"id", s.id}, {"kind", std::string(to_string(s.kind))}, {"context", ctx}};
    st["peer"] = s.peer ? nlohmann::json(s.peer->name) : nlohmann::json(nullptr);
    states.push_back(st);
  }
  j["states"] = states;
  auto trans = nlohmann::json::array();
  for (const auto& t : m.transitions)
    trans.push_back({{"from", t.from},
                     {"to", t.to},
                     {"dir", t.dir == Dir::Send ? "send" : "recv"},
                     {"peer", t.peer.name},
                     {"label", t.label},
                     {"var", t.var},
                     {"base", std::string(to_string(t.type.base))},
                     {"pred", to_string(t.type.with_binder(t.var).predicate)},
                     {"updates", updates_json(t.updates)}});
  j["transitions"] = trans;
  return j.dump(indent);
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const Cfsm& m) {
  std::string out = "digraph \"" + dot_escape(m.role.name) + "\" {\n  rankdir=LR;\n  start [shape=point];\n";
  for (const auto& s : m.states) {
    std::string shape = s.kind == StateKind::Terminal ? "doublecircle" : "circle";
    out += "  s" + std::to_string(s.id) + " [shape=" + shape + ", label=\"" +
           (s.kind == StateKind::Terminal ? "" : std::to_string(s.id)) + "\", tooltip=\"" +
           dot_escape(to_string(s.context)) + "\"];\n";
  }
  out += "  start -> s" + std::to_string(m.initial) + ";\n";
  for (const auto& t : m.transitions) {
    std::string label = t.peer.name + (t.dir == Dir::Send ? "!" : "?") + t.label;
    if (t.type.base != BaseType::Unit) label += "(" + t.var + ")";
    if (!t.type.predicate.is_true()) label += "{" + to_string(t.type.with_binder(t.var).predicate) + "}";
    label = dot_escape(label);
    for (const auto& u : t.updates) label += "\\n" + dot_escape(u.var + " := " + to_string(u.expr));
    out += "  s" + std::to_string(t.from) + " -> s" + std::to_string(t.to) + " [label=\"" + label +
           "\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace rmpst
