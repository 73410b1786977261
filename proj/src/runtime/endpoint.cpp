#include "rmpst/runtime/endpoint.hpp"

#include "rmpst/core/print.hpp"

namespace rmpst::rt {

const Value& RecordView::get(const std::string& var) const {
  if (!visible_.count(var)) throw ErasedField("field '" + var + "' is not available in this state");
  auto it = env_->find(var);
  if (it == env_->end()) throw ErasedField("field '" + var + "' has no value");
  return it->second;
}

std::int64_t RecordView::get_int(const std::string& var) const {
  auto* p = std::get_if<std::int64_t>(&get(var));
  if (!p) throw EvalError("field '" + var + "' is not an int");
  return *p;
}

bool RecordView::get_bool(const std::string& var) const {
  auto* p = std::get_if<bool>(&get(var));
  if (!p) throw EvalError("field '" + var + "' is not a bool");
  return *p;
}

const std::string& RecordView::get_string(const std::string& var) const {
  auto* p = std::get_if<std::string>(&get(var));
  if (!p) throw EvalError("field '" + var + "' is not a string");
  return *p;
}

Env RecordView::env() const {
  Env out;
  for (const auto& v : visible_)
    if (auto it = env_->find(v); it != env_->end()) out.insert(*it);
  return out;
}

void Callbacks::receive(int, const std::string&, const RecordView&, const Value&) {}

void DecisionCallbacks::decide_forced(const Cfsm& m) {
  for (const auto& s : m.states) {
    if (s.kind != StateKind::Send || lists_.count(s.id)) continue;
    auto edges = m.outgoing(s.id);
    if (edges.size() == 1 && edges.front()->type.base == BaseType::Unit)
      lists_[s.id] = {Decision{edges.front()->label, Expr::boolean(true)}};
  }
}

Choice DecisionCallbacks::choose(int state, const RecordView& st) {
  auto it = lists_.find(state);
  if (it == lists_.end()) throw Error("no decision list for state " + std::to_string(state));
  auto env = st.env();
  for (const auto& d : it->second) {
    if (!eval_bool(d.guard, env)) continue;
    if (d.payload == Expr::var("%unit")) return Choice{d.label, Unit{}};
    return Choice{d.label, eval(d.payload, env)};
  }
  throw Error("decision list for state " + std::to_string(state) + " selects nothing");
}

std::string snapshot(const Env& env) {
  std::string out = "{";
  for (const auto& [k, v] : env) out += (out.size() > 1 ? ", " : "") + k + " = " + to_string(v);
  return out + "}";
}

namespace {

bool covers(const Env& env, const Expr& e) {
  for (const auto& v : free_vars(e))
    if (!env.count(v)) return false;
  return true;
}

// simultaneous; a target whose expression mentions an unknown value becomes unknown
void apply(Env& env, const std::vector<Update>& ups) {
  Env next = env;
  for (const auto& u : ups) {
    if (covers(env, u.expr)) next[u.var] = eval(u.expr, env);
    else next.erase(u.var);
  }
  env = std::move(next);
}

std::set<std::string> visible(const CfsmState& s) {
  std::set<std::string> out;
  for (const auto& e : s.context)
    if (e.mult == Mult::Omega && e.type.base != BaseType::Unit) out.insert(e.var);
  return out;
}

class Runner {
 public:
  Runner(const Cfsm& m, Callbacks& cb, Connection& conn, const RunOptions& opts)
      : m_(m), cb_(cb), conn_(conn), opts_(opts) {}

  RunResult run() {
    apply(res_.record, m_.initial_updates);
    int q = m_.initial;
    for (;;) {
      const auto& st = m_.state(q);
      if (st.kind == StateKind::Terminal) break;
      if (opts_.max_steps && res_.steps >= opts_.max_steps)
        throw StepLimitExceeded(m_.role.name + " exceeded " + std::to_string(opts_.max_steps) + " steps");
      auto edges = m_.outgoing(q);
      const Transition* t = nullptr;
      Value payload;
      RecordView view(res_.record, visible(st));
      if (st.kind == StateKind::Send) {
        auto c = cb_.choose(q, view);
        for (const auto* e : edges)
          if (e->label == c.label) t = e;
        if (!t)
          throw RuntimeViolation(RuntimeErrorKind::UnknownLabel,
                                 "chooser of state " + std::to_string(q) + " picked '" + c.label + "'", q);
        payload = c.payload;
        check(q, *t, payload);
        conn_.send_message(t->peer, t->label, payload);
      } else {
        const Role& peer = edges.front()->peer;
        std::string label;
        try {
          label = conn_.recv_label(peer);
        } catch (const DeserializationError& e) {
          throw RuntimeViolation(RuntimeErrorKind::Deserialization, e.what(), q);
        }
        for (const auto* e : edges)
          if (e->label == label) t = e;
        if (!t)
          throw RuntimeViolation(RuntimeErrorKind::UnknownLabel,
                                 "state " + std::to_string(q) + " got '" + label + "' from " + peer.name, q);
        try {
          payload = conn_.recv_payload(peer, label, t->type.base);
        } catch (const DeserializationError& e) {
          throw RuntimeViolation(RuntimeErrorKind::Deserialization, e.what(), q);
        }
        check(q, *t, payload);
        cb_.receive(q, label, view, payload);
      }
      if (t->type.base != BaseType::Unit) res_.record[t->var] = payload;
      apply(res_.record, t->updates);
      ++res_.steps;
      q = t->to;
    }
    res_.final_state = q;
    return std::move(res_);
  }

 private:
  void check(int q, const Transition& t, const Value& payload) {
    auto pred = t.type.with_binder(t.var).predicate;
    if (sort_of(payload) != t.type.base)
      throw RuntimeViolation(RuntimeErrorKind::RefinementFailed,
                             "payload of " + t.label + " has sort " + std::string(to_string(sort_of(payload))) +
                                 ", expected " + std::string(to_string(t.type.base)),
                             q, to_string(pred), snapshot(res_.record));
    Env env = res_.record;
    env[t.var] = payload;
    if (!covers(env, pred)) {
      res_.notes.push_back("state " + std::to_string(q) + ": skipped " + to_string(pred));
      return;
    }
    if (!eval_bool(pred, env))
      throw RuntimeViolation(RuntimeErrorKind::RefinementFailed,
                             "state " + std::to_string(q) + " " + (t.dir == Dir::Send ? "send " : "receive ") +
                                 t.label + ": " + to_string(pred) + " does not hold in " + snapshot(env),
                             q, to_string(pred), snapshot(env));
  }

  const Cfsm& m_;
  Callbacks& cb_;
  Connection& conn_;
  const RunOptions& opts_;
  RunResult res_;
};

}  // namespace

RunResult run_endpoint(const Cfsm& m, Callbacks& cb, Connection& conn, const RunOptions& opts) {
  return Runner(m, cb, conn, opts).run();
}

}  // namespace rmpst::rt
