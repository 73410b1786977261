#include "rmpst/semantics/semantics.hpp"

#include <algorithm>
#include <deque>
#include <functional>

#include "rmpst/core/print.hpp"

namespace rmpst {

std::string action_key(const Action& a) {
  return a.from.name + "->" + a.to.name + ":" + a.label + "(" + canonical_text(a.type) + ")";
}

std::string state_key(const GlobalState& s) { return to_string(s.ctx) + " |- " + to_string(s.type); }
std::string state_key(const LocalState& s) { return to_string(s.ctx) + " |- " + to_string(s.type); }

std::string state_key(const Configuration& c) {
  std::string out;
  for (const auto& [r, s] : c) out += r.name + " => " + state_key(s) + "\n";
  return out;
}

std::string to_string(const TraceKey& t) {
  if (t.empty()) return "<empty>";
  std::string out;
  for (const auto& a : t) out += (out.empty() ? "" : " . ") + a;
  return out;
}

// ------------------------------------------------------------------ global

namespace {

using GSteps = std::vector<std::pair<Action, GlobalState>>;

// `blocked`: roles of enclosing prefixes passed by G-Cnt; `unfolded`: recursions
// already unfolded inside the same derivation
GSteps gsteps_under(const GlobalState& s, const RoleSet& blocked,
                    const std::set<std::string>& unfolded) {
  const auto& g = s.type;
  if (auto r = g.as<GRec>()) {
    if (unfolded.count(r->tvar)) return {};
    GlobalContext c = s.ctx;
    for (const auto& v : r->vars) {
      auto next = try_extend_global(c, v.var, state_knowers(*r, v), v.type);
      if (!next) return {};
      c = *next;
    }
    auto u = unfolded;
    if (!blocked.empty()) u.insert(r->tvar);
    return gsteps_under(GlobalState{c, unfold(g)}, blocked, u);
  }
  auto m = g.as<GMessage>();
  if (!m) return {};

  GSteps out;
  if (!blocked.count(m->from) && !blocked.count(m->to)) {
    for (const auto& b : m->branches) {
      auto c = try_extend_global(s.ctx, b.var, RoleSet{m->from, m->to}, b.type);
      if (c) out.emplace_back(Action{m->from, m->to, b.label, b.var, b.type}, GlobalState{*c, b.cont});
    }
  }

  // G-Cnt: steps independent of the prefix, uniform across branches
  RoleSet inner = blocked;
  inner.insert(m->from);
  inner.insert(m->to);
  auto parts = participants(g);
  if (std::includes(inner.begin(), inner.end(), parts.begin(), parts.end())) return out;
  std::vector<GSteps> per;
  for (const auto& b : m->branches) {
    auto c = try_extend_global(s.ctx, b.var, RoleSet{}, b.type);
    if (!c) return out;
    auto steps = gsteps_under(GlobalState{*c, b.cont}, inner, unfolded);
    if (steps.empty()) return out;
    per.push_back(std::move(steps));
  }
  for (const auto& [a, s1] : per.front()) {
    auto key = action_key(a);
    std::vector<GBranch> branches{m->branches.front()};
    branches.front().cont = s1.type;
    bool ok = true;
    for (std::size_t j = 1; j < per.size() && ok; ++j) {
      ok = false;
      for (const auto& [b, sj] : per[j]) {
        if (b.var == a.var && action_key(b) == key && context_equal(sj.ctx, s1.ctx)) {
          auto br = m->branches[j];
          br.cont = sj.type;
          branches.push_back(br);
          ok = true;
          break;
        }
      }
    }
    if (ok) out.emplace_back(a, GlobalState{s1.ctx, GlobalType::message(m->from, m->to, branches)});
  }
  return out;
}

}  // namespace

std::vector<std::pair<Action, GlobalState>> gsteps(const GlobalState& s) {
  return gsteps_under(s, {}, {});
}

// ------------------------------------------------------------------- local

namespace {

struct Silent {
  LocalState st;
  std::set<std::string> unfolded;
};

std::vector<Silent> silent_succ(const LocalState& s, const std::set<std::string>& unfolded) {
  const auto& l = s.type;
  if (auto p = l.as<LSilent>()) {
    auto c = try_extend_local(s.ctx, p->var, Mult::Zero, p->type);
    if (!c) return {};
    return {Silent{LocalState{*c, p->cont}, unfolded}};
  }
  if (auto r = l.as<LRec>()) {
    if (unfolded.count(r->tvar)) return {};
    LocalContext c = s.ctx;
    for (const auto& v : r->vars) {
      auto next = try_extend_local(c, v.var, v.mult, v.type);
      if (!next) return {};
      c = *next;
    }
    auto u = unfolded;
    u.insert(r->tvar);
    return {Silent{LocalState{c, unfold(l)}, u}};
  }
  auto m = l.as<LComm>();
  if (!m) return {};
  std::vector<std::vector<Silent>> per;
  for (const auto& b : m->branches) {
    auto c = try_extend_local(s.ctx, b.var, Mult::Zero, b.type);
    if (!c) return {};
    auto next = silent_succ(LocalState{*c, b.cont}, unfolded);
    if (next.empty()) return {};
    per.push_back(std::move(next));
  }
  std::vector<Silent> out;
  for (const auto& first : per.front()) {
    std::vector<LBranch> branches{m->branches.front()};
    branches.front().cont = first.st.type;
    auto u = first.unfolded;
    bool ok = true;
    for (std::size_t j = 1; j < per.size() && ok; ++j) {
      ok = false;
      for (const auto& other : per[j]) {
        if (context_equal(other.st.ctx, first.st.ctx)) {
          auto br = m->branches[j];
          br.cont = other.st.type;
          branches.push_back(br);
          u.insert(other.unfolded.begin(), other.unfolded.end());
          ok = true;
          break;
        }
      }
    }
    if (ok)
      out.push_back(Silent{LocalState{first.st.ctx, LocalType::comm(m->dir, m->peer, branches)}, u});
  }
  return out;
}

}  // namespace

std::vector<LocalState> lsteps_silent(const LocalState& s) {
  std::vector<LocalState> out;
  for (auto& x : silent_succ(s, {})) out.push_back(std::move(x.st));
  return out;
}

std::vector<LocalState> silent_closure(const LocalState& s) {
  std::vector<LocalState> out{s};
  std::set<std::string> seen{state_key(s)};
  std::deque<Silent> work{Silent{s, {}}};
  while (!work.empty()) {
    auto cur = std::move(work.front());
    work.pop_front();
    for (auto& n : silent_succ(cur.st, cur.unfolded)) {
      if (!seen.insert(state_key(n.st)).second) continue;
      out.push_back(n.st);
      work.push_back(std::move(n));
    }
  }
  return out;
}

std::vector<std::pair<Action, LocalState>> lsteps(const Role& self, const LocalState& s) {
  std::vector<std::pair<Action, LocalState>> out;
  std::set<std::string> seen;
  for (const auto& st : silent_closure(s)) {
    auto m = st.type.as<LComm>();
    if (!m) continue;
    for (const auto& b : m->branches) {
      auto c = try_extend_local(st.ctx, b.var, Mult::Omega, b.type);
      if (!c) continue;
      Action a = m->dir == Dir::Send ? Action{self, m->peer, b.label, b.var, b.type}
                                     : Action{m->peer, self, b.label, b.var, b.type};
      LocalState next{*c, b.cont};
      if (seen.insert(action_key(a) + "\n" + state_key(next)).second) out.emplace_back(a, next);
    }
  }
  return out;
}

// ----------------------------------------------------------- configurations

Configuration associate(const GlobalContext& ctx, const GlobalType& g, const ProjectOptions& opts) {
  Configuration c;
  for (const auto& r : participants(g)) {
    try {
      auto p = project(ctx, g, r, opts);
      c.emplace(r, LocalState{p.context, p.local_type});
    } catch (const ProjectionError& e) {
      throw NotProjectable("projection onto " + r.name + " undefined: " + e.what());
    }
  }
  return c;
}

std::vector<std::pair<Action, Configuration>> config_steps(const Configuration& c) {
  std::map<Role, std::vector<std::pair<Action, LocalState>>> ls;
  std::map<Role, std::vector<LocalState>> closure;
  for (const auto& [r, s] : c) {
    ls[r] = lsteps(r, s);
    closure[r] = silent_closure(s);
  }
  std::vector<std::pair<Action, Configuration>> out;
  std::set<std::string> seen;
  for (const auto& [p, steps] : ls) {
    for (const auto& [a, sp] : steps) {
      if (a.from != p || !c.count(a.to)) continue;
      const Role& q = a.to;
      auto key = action_key(a);
      for (const auto& [b, sq] : ls[q]) {
        if (b.from != p || b.to != q || action_key(b) != key) continue;
        std::vector<Role> others;
        for (const auto& [r, s] : c)
          if (r != p && r != q) others.push_back(r);
        Configuration next = c;
        next[p] = sp;
        next[q] = sq;
        std::function<void(std::size_t)> pick = [&](std::size_t i) {
          if (i == others.size()) {
            if (seen.insert(key + "\n" + state_key(next)).second) out.emplace_back(a, next);
            return;
          }
          for (const auto& st : closure[others[i]]) {
            next[others[i]] = st;
            pick(i + 1);
          }
        };
        pick(0);
      }
    }
  }
  return out;
}

bool is_terminal(const Configuration& c) {
  for (const auto& [r, s] : c) {
    bool end = false;
    for (const auto& st : silent_closure(s)) end = end || st.type.is_end();
    if (!end) return false;
  }
  return true;
}

// ------------------------------------------------------------- exploration

namespace {

template <class S>
class TraceCollector {
 public:
  using StepFn = std::function<std::vector<std::pair<Action, S>>(const S&)>;
  using KeyFn = std::function<std::string(const S&)>;

  TraceCollector(StepFn step, KeyFn key, std::size_t budget)
      : step_(std::move(step)), key_(std::move(key)), budget_(budget) {}

  const TraceSet& run(const S& s, int depth) {
    auto k = std::make_pair(key_(s), depth);
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    if (++nodes_ > budget_)
      throw ExplorationBudgetExceeded("exploration exceeded " + std::to_string(budget_) + " nodes");
    TraceSet out{TraceKey{}};
    if (depth > 0) {
      for (const auto& [a, next] : step_(s)) {
        auto ak = action_key(a);
        for (const auto& t : run(next, depth - 1)) {
          TraceKey full{ak};
          full.insert(full.end(), t.begin(), t.end());
          out.insert(std::move(full));
        }
      }
    }
    return memo_.emplace(k, std::move(out)).first->second;
  }

 private:
  StepFn step_;
  KeyFn key_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  std::map<std::pair<std::string, int>, TraceSet> memo_;
};

}  // namespace

TraceSet traces(const GlobalState& s, const ExploreOptions& opts) {
  TraceCollector<GlobalState> c([](const GlobalState& x) { return gsteps(x); },
                                [](const GlobalState& x) { return state_key(x); }, opts.node_budget);
  return c.run(s, opts.depth);
}

TraceSet traces(const Configuration& s, const ExploreOptions& opts) {
  TraceCollector<Configuration> c([](const Configuration& x) { return config_steps(x); },
                                  [](const Configuration& x) { return state_key(x); },
                                  opts.node_budget);
  return c.run(s, opts.depth);
}

TraceEqReport check_trace_equivalence(const GlobalContext& ctx, const GlobalType& g,
                                      const ExploreOptions& eopts, const ProjectOptions& popts) {
  TraceEqReport rep;
  rep.depth = eopts.depth;
  auto gt = traces(GlobalState{ctx, g}, eopts);
  auto ct = traces(associate(ctx, g, popts), eopts);
  rep.global_traces = gt.size();
  rep.config_traces = ct.size();
  for (const auto& t : gt)
    if (!ct.count(t)) {
      rep.only_global = t;
      break;
    }
  for (const auto& t : ct)
    if (!gt.count(t)) {
      rep.only_config = t;
      break;
    }
  rep.equal = !rep.only_global && !rep.only_config;
  return rep;
}

ProgressReport check_progress(const GlobalContext& ctx, const GlobalType& g,
                              const ExploreOptions& eopts, const ProjectOptions& popts) {
  ProgressReport rep;
  struct Node {
    Configuration c;
    int depth;
    TraceKey path;
  };
  std::set<std::string> seen;
  std::deque<Node> work;
  auto start = associate(ctx, g, popts);
  seen.insert(state_key(start));
  work.push_back(Node{start, 0, {}});
  while (!work.empty()) {
    auto n = std::move(work.front());
    work.pop_front();
    ++rep.explored;
    if (rep.explored > eopts.node_budget)
      throw ExplorationBudgetExceeded("progress exploration exceeded " +
                                      std::to_string(eopts.node_budget) + " nodes");
    if (is_terminal(n.c)) continue;
    auto steps = config_steps(n.c);
    if (steps.empty()) {
      rep.ok = false;
      rep.stuck_path = n.path;
      rep.stuck_state = state_key(n.c);
      return rep;
    }
    if (n.depth >= eopts.depth) continue;
    for (auto& [a, next] : steps) {
      if (!seen.insert(state_key(next)).second) continue;
      auto path = n.path;
      path.push_back(action_key(a));
      work.push_back(Node{std::move(next), n.depth + 1, std::move(path)});
    }
  }
  return rep;
}

PreservationReport check_preservation(const GlobalContext& ctx, const GlobalType& g,
                                      const ExploreOptions& eopts, const ProjectOptions& popts) {
  PreservationReport rep;
  struct Node {
    GlobalState s;
    int depth;
    TraceKey path;
  };
  std::set<std::string> seen{state_key(GlobalState{ctx, g})};
  std::deque<Node> work{Node{GlobalState{ctx, g}, 0, {}}};
  while (!work.empty()) {
    auto n = std::move(work.front());
    work.pop_front();
    if (n.depth >= eopts.depth) continue;
    for (auto& [a, next] : gsteps(n.s)) {
      if (!seen.insert(state_key(next)).second) continue;
      if (seen.size() > eopts.node_budget)
        throw ExplorationBudgetExceeded("preservation exploration exceeded " +
                                        std::to_string(eopts.node_budget) + " nodes");
      auto path = n.path;
      path.push_back(action_key(a));
      ++rep.checked;
      auto wf = well_formed(next.ctx, next.type, popts);
      if (!wf.ok) {
        rep.ok = false;
        rep.path = path;
        rep.failure = to_string(wf);
        return rep;
      }
      work.push_back(Node{std::move(next), n.depth + 1, std::move(path)});
    }
  }
  return rep;
}

}  // namespace rmpst
