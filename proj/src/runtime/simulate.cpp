#include "rmpst/runtime/simulate.hpp"

#include <algorithm>
#include <thread>

#include "rmpst/core/print.hpp"
#include "rmpst/frontend/parser.hpp"

namespace rmpst::rt {

namespace {

struct Replayer {
  std::vector<Role> roles;
  std::map<Role, std::vector<Event>> logs;
  std::set<std::string> dead;
  TraceKey trace;

  std::string key(const Configuration& c, const std::vector<std::size_t>& at) {
    std::string k = state_key(c);
    for (auto i : at) k += std::to_string(i) + ",";
    return k;
  }

  std::size_t index(const Role& r) const {
    return static_cast<std::size_t>(std::find(roles.begin(), roles.end(), r) - roles.begin());
  }

  bool matches(const Event& e, Dir d, const Action& a) const {
    return e.dir == d && e.from == a.from && e.to == a.to && e.label == a.label;
  }

  bool done(const std::vector<std::size_t>& at) const {
    for (std::size_t i = 0; i < roles.size(); ++i)
      if (at[i] < logs.at(roles[i]).size()) return false;
    return true;
  }

  std::optional<Configuration> search(const Configuration& c, std::vector<std::size_t>& at) {
    if (done(at)) return c;
    if (!dead.insert(key(c, at)).second) return std::nullopt;
    for (const auto& [a, next] : config_steps(c)) {
      auto fi = index(a.from), ti = index(a.to);
      if (fi == roles.size() || ti == roles.size()) continue;
      const auto& fl = logs[a.from];
      const auto& tl = logs[a.to];
      if (at[fi] >= fl.size() || at[ti] >= tl.size()) continue;
      if (!matches(fl[at[fi]], Dir::Send, a) || !matches(tl[at[ti]], Dir::Recv, a)) continue;
      ++at[fi];
      ++at[ti];
      trace.push_back(action_key(a));
      if (auto r = search(next, at)) return r;
      trace.pop_back();
      --at[fi];
      --at[ti];
    }
    return std::nullopt;
  }
};

}  // namespace

ReplayReport replay(const Configuration& c, const std::vector<Event>& log) {
  Replayer r;
  for (const auto& [role, st] : c) {
    r.roles.push_back(role);
    r.logs[role];
  }
  for (const auto& e : log) {
    if (!r.logs.count(e.observer)) return ReplayReport{false, false, {}, "event from unknown role " + e.observer.name};
    r.logs[e.observer].push_back(e);
  }
  std::vector<std::size_t> at(r.roles.size(), 0);
  ReplayReport out;
  if (auto end = r.search(c, at)) {
    out.ok = true;
    out.terminal = is_terminal(*end);
    out.trace = r.trace;
    out.message = "replayed " + std::to_string(r.trace.size()) + " steps";
  } else {
    out.message = "no configuration trace matches the log";
  }
  return out;
}

SimulationResult simulate(std::vector<Endpoint>& endpoints, const RunOptions& opts,
                          std::chrono::milliseconds timeout) {
  auto net = MemoryNetwork::create(1 << 16, timeout);
  TransportLog log;
  SimulationResult out;
  std::mutex mu;
  std::vector<std::thread> threads;
  std::vector<std::unique_ptr<Connection>> conns;
  for (auto& ep : endpoints) {
    conns.push_back(net->connect(ep.machine.role));
    conns.back()->observe(&log, ep.machine.role);
  }
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    threads.emplace_back([&, i] {
      auto& ep = endpoints[i];
      const auto& role = ep.machine.role;
      try {
        auto r = run_endpoint(ep.machine, *ep.callbacks, *conns[i], opts);
        std::lock_guard lock(mu);
        out.results.emplace(role, std::move(r));
      } catch (const RuntimeViolation& e) {
        {
          std::lock_guard lock(mu);
          out.errors[role] = e.what();
          if (!out.violation || out.violation->kind() == RuntimeErrorKind::PeerClosed) out.violation = e;
        }
        net->close(role);
      } catch (const std::exception& e) {
        {
          std::lock_guard lock(mu);
          out.errors[role] = e.what();
        }
        net->close(role);
      }
    });
  }
  for (auto& t : threads) t.join();
  out.log = log.events();
  out.messages = log.sends();
  out.ok = out.errors.empty();
  return out;
}

std::optional<int> send_state_with(const Cfsm& m, const std::string& label) {
  for (const auto& t : m.transitions)
    if (t.dir == Dir::Send && t.label == label) return t.from;
  return std::nullopt;
}

std::vector<Decision> referee_decisions(const std::string& lose_guard, bool with_lose) {
  std::vector<Decision> d{{"win", parse_expr("x = n")}};
  if (with_lose) d.push_back({"lose", parse_expr(lose_guard)});
  d.push_back({"higher", parse_expr("n > x")});
  d.push_back({"lower", Expr::boolean(true)});
  return d;
}

Choice GuesserCallbacks::choose(int, const RecordView&) {
  guesses_.push_back(next_);
  return Choice{"guess", next_};
}

void GuesserCallbacks::receive(int, const std::string& label, const RecordView& st, const Value&) {
  if (label == "higher") next_ = st.get_int("x") + 1;
  else if (label == "lower") next_ = st.get_int("x") - 1;
}

std::vector<Endpoint> guessing_game(const std::map<Role, Cfsm>& machines, const GameSetup& g,
                                    GuesserCallbacks** guesser) {
  const auto& a = machines.at(Role{"A"});
  const auto& b = machines.at(Role{"B"});
  const auto& c = machines.at(Role{"C"});
  std::vector<Endpoint> out;

  auto ca = std::make_unique<DecisionCallbacks>();
  if (auto q = send_state_with(a, "start")) ca->decide(*q, {{"start", Expr::boolean(true), Expr::integer(g.secret)}});
  if (auto q = send_state_with(a, "limit")) ca->decide(*q, {{"limit", Expr::boolean(true), Expr::integer(g.limit)}});
  ca->decide_forced(a);
  out.push_back(Endpoint{a, std::move(ca)});

  auto cb = std::make_unique<DecisionCallbacks>();
  if (auto q = send_state_with(b, "win")) cb->decide(*q, referee_decisions(g.lose_guard, g.with_lose));
  cb->decide_forced(b);
  out.push_back(Endpoint{b, std::move(cb)});

  auto cc = std::make_unique<GuesserCallbacks>();
  if (guesser) *guesser = cc.get();
  out.push_back(Endpoint{c, std::move(cc)});
  return out;
}

namespace {

void defining_values(const Expr& e, const std::string& var, const Env& env, std::vector<Value>& out) {
  auto b = e.as<BinaryExpr>();
  if (!b) return;
  if (b->op == BinaryOp::And) {
    defining_values(b->lhs, var, env, out);
    defining_values(b->rhs, var, env, out);
    return;
  }
  if (b->op != BinaryOp::Eq) return;
  auto try_side = [&](const Expr& x, const Expr& rhs) {
    auto v = x.as<VarExpr>();
    if (!v || v->name != var || free_vars(rhs).count(var)) return;
    try {
      out.push_back(eval(rhs, env));
    } catch (const EvalError&) {
    }
  };
  try_side(b->lhs, b->rhs);
  try_side(b->rhs, b->lhs);
}

}  // namespace

Choice RandomCallbacks::choose(int state, const RecordView& st) {
  auto edges = m_->outgoing(state);
  std::shuffle(edges.begin(), edges.end(), rng_);
  Env env = st.env();
  for (const auto* t : edges) {
    auto pred = t->type.with_binder(t->var).predicate;
    std::vector<Value> cands;
    switch (t->type.base) {
      case BaseType::Unit: cands.push_back(Unit{}); break;
      case BaseType::Bool: cands = {true, false}; break;
      case BaseType::String: cands = {std::string(), std::string("a"), std::string("ab")}; break;
      case BaseType::Int:
        defining_values(pred, t->var, env, cands);
        for (std::int64_t k = 0; k <= 64; ++k) {
          cands.push_back(k);
          if (k) cands.push_back(-k);
        }
        break;
    }
    for (const auto& v : cands) {
      Env e = env;
      e[t->var] = v;
      bool known = true;
      for (const auto& fv : free_vars(pred)) known &= e.count(fv) > 0;
      try {
        if (!known || eval_bool(pred, e)) return Choice{t->label, v};
      } catch (const EvalError&) {
      }
    }
  }
  throw Error("no label of state " + std::to_string(state) + " has a payload the strategy can find");
}

}  // namespace rmpst::rt
