#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "rmpst/cfsm/cfsm.hpp"
#include "rmpst/codegen/codegen.hpp"
#include "rmpst/core/print.hpp"
#include "rmpst/frontend/parser.hpp"
#include "rmpst/project/project.hpp"
#include "rmpst/runtime/simulate.hpp"
#include "rmpst/semantics/semantics.hpp"

using namespace rmpst;
using nlohmann::json;

namespace {

struct Config {
  std::string solver;
  int solver_timeout = 0;
  bool full_merge = false;
  bool plain_merge = false;
  bool json = false;
  int depth = 10;
  std::size_t budget = 50'000;
};

struct Loaded {
  std::string name;
  GlobalType type;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// prints diagnostics; nullopt when the file does not load
std::optional<Loaded> load(const std::string& path) {
  std::vector<Diagnostic> diags;
  std::string name;
  auto g = load_protocol(slurp(path), diags, &name);
  for (const auto& d : diags) std::cerr << path << ":" << to_string(d) << "\n";
  if (!g || has_errors(diags)) return std::nullopt;
  return Loaded{name, *g};
}

Oracle make_oracle(const Config& c) {
  auto cfg = SolverConfig::from_env();
  if (!c.solver.empty()) cfg.path = c.solver;
  if (c.solver_timeout > 0) cfg.timeout_ms = c.solver_timeout;
  return Oracle::solver(cfg);
}

ProjectOptions project_options(const Config& c) {
  ProjectOptions o;
  o.oracle = make_oracle(c);
  o.merge = c.full_merge ? MergeMode::Full : c.plain_merge ? MergeMode::Plain : MergeMode::Auto;
  return o;
}

ExploreOptions explore_options(const Config& c) {
  ExploreOptions e;
  e.depth = c.depth;
  e.node_budget = c.budget;
  return e;
}

Cfsm machine(const Loaded& p, const Role& r, const ProjectOptions& po) {
  auto proj = project(GlobalContext(), p.type, r, po);
  return to_cfsm(r, proj.context, proj.local_type);
}

bool has_role(const Loaded& p, const std::string& role) {
  if (participants(p.type).count(Role{role})) return true;
  std::cerr << "unknown role " << role << " in " << p.name << "\n";
  return false;
}

json trace_json(const TraceKey& t) { return json(t); }

// ------------------------------------------------------------------ commands

int cmd_check(const Config& c, const std::string& file) {
  auto p = load(file);
  if (!p) return 1;
  auto po = project_options(c);
  auto rep = well_formed(GlobalContext(), p->type, po);
  auto empties = empty_payloads(GlobalContext(), p->type, po.oracle);
  if (c.json) {
    json j{{"protocol", p->name}, {"well_formed", rep.ok}};
    j["failures"] = json::array();
    for (const auto& f : rep.failures)
      j["failures"].push_back({{"role", f.role.name},
                               {"reason", std::string(to_string(f.reason))},
                               {"path", f.path},
                               {"message", f.message}});
    j["merge"] = json::object();
    for (const auto& [r, pr] : rep.projections) j["merge"][r.name] = std::string(to_string(pr.merge_used));
    j["empty_types"] = json::array();
    for (const auto& e : empties)
      j["empty_types"].push_back({{"path", e.path}, {"type", to_string(e.type)}, {"verdict", to_string(e.verdict)}});
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << p->name << ": " << to_string(rep) << "\n";
    for (const auto& e : empties)
      std::cout << "warning: " << e.path << " carries an empty type " << to_string(e.type) << "\n";
  }
  return rep.ok ? 0 : 1;
}

int cmd_project(const Config& c, const std::string& file, const std::string& role) {
  auto p = load(file);
  if (!p) return 1;
  if (!has_role(*p, role)) return 1;
  try {
    auto r = project(GlobalContext(), p->type, Role{role}, project_options(c));
    if (c.json) {
      std::cout << json{{"role", role},
                        {"context", to_string(r.context)},
                        {"local_type", to_string(r.local_type)},
                        {"merge", std::string(to_string(r.merge_used))}}
                       .dump(2)
                << "\n";
    } else {
      std::cout << "context: " << to_string(r.context) << "\n" << to_string(r.local_type) << "\n";
    }
    return 0;
  } catch (const ProjectionError& e) {
    std::cerr << "projection onto " << role << " failed (" << to_string(e.kind()) << ") at " << e.path() << ": "
              << e.what() << "\n";
    return 1;
  }
}

void print_fsm(const Cfsm& m) {
  std::cout << "role " << m.role.name << ", initial " << m.initial << "\n";
  for (const auto& u : m.initial_updates) std::cout << "  init " << u.var << " := " << to_string(u.expr) << "\n";
  for (const auto& s : m.states) {
    std::cout << "state " << s.id << " " << to_string(s.kind) << "  " << to_string(s.context) << "\n";
    for (const auto* t : m.outgoing(s.id)) {
      std::cout << "  -> " << t->to << "  " << t->peer.name << (t->dir == Dir::Send ? "!" : "?") << t->label << "("
                << to_string(t->type.with_binder(t->var)) << ")";
      for (const auto& u : t->updates) std::cout << " [" << u.var << " := " << to_string(u.expr) << "]";
      std::cout << "\n";
    }
  }
}

int cmd_fsm(const Config& c, const std::string& file, const std::string& role, bool dot) {
  auto p = load(file);
  if (!p) return 1;
  if (!has_role(*p, role)) return 1;
  try {
    auto m = machine(*p, Role{role}, project_options(c));
    auto problems = validate(m);
    if (dot) std::cout << to_dot(m);
    else if (c.json) std::cout << to_json(m) << "\n";
    else print_fsm(m);
    for (const auto& v : problems)
      std::cerr << "state " << v.state << ": " << to_string(v.kind) << ": " << v.message << "\n";
    return problems.empty() ? 0 : 1;
  } catch (const ProjectionError& e) {
    std::cerr << "projection onto " << role << " failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_gen(const Config& c, const std::string& file, const std::string& role, const std::string& out,
            const std::string& chooser) {
  auto p = load(file);
  if (!p) return 1;
  if (!has_role(*p, role)) return 1;
  try {
    auto po = project_options(c);
    auto m = machine(*p, Role{role}, po);
    if (!chooser.empty()) {
      auto reports = check_choosers(m, parse_chooser(slurp(chooser)), po.oracle);
      bool ok = true;
      json j = json::array();
      for (const auto& [q, r] : reports) {
        ok &= r.ok();
        json entry{{"state", q}, {"exhaustive", to_string(r.exhaustive)}};
        entry["obligations"] = json::array();
        for (const auto& o : r.obligations)
          entry["obligations"].push_back({{"label", o.label}, {"verdict", to_string(o.result)}});
        entry["errors"] = r.errors;
        entry["unused_labels"] = r.unused_labels;
        j.push_back(entry);
        if (!c.json) {
          for (const auto& o : r.obligations)
            std::cout << "state " << q << " " << o.label << ": " << to_string(o.result) << "\n";
          std::cout << "state " << q << " exhaustive: " << to_string(r.exhaustive) << "\n";
          for (const auto& e : r.errors) std::cout << "state " << q << " error: " << e << "\n";
          for (const auto& l : r.unused_labels) std::cout << "state " << q << " never selects " << l << "\n";
        }
      }
      if (c.json) std::cout << j.dump(2) << "\n";
      if (!ok) {
        std::cerr << "chooser rejected; nothing generated\n";
        return 1;
      }
    }
    std::filesystem::create_directories(out);
    for (const auto& f : generate(m, p->name)) {
      auto path = std::filesystem::path(out) / f.name;
      std::ofstream o(path, std::ios::binary);
      o << f.content;
      if (!o) throw Error("cannot write " + path.string());
      if (!c.json) std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
  } catch (const ProjectionError& e) {
    std::cerr << "projection onto " << role << " failed: " << e.what() << "\n";
  } catch (const GenerationError& e) {
    std::cerr << e.what() << "\n";
  }
  return 1;
}

int cmd_trace_eq(const Config& c, const std::string& file) {
  auto p = load(file);
  if (!p) return 1;
  try {
    auto r = check_trace_equivalence(GlobalContext(), p->type, explore_options(c), project_options(c));
    if (c.json) {
      json j{{"equal", r.equal}, {"depth", r.depth}, {"global_traces", r.global_traces}, {"config_traces", r.config_traces}};
      if (r.only_global) j["only_global"] = trace_json(*r.only_global);
      if (r.only_config) j["only_config"] = trace_json(*r.only_config);
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << (r.equal ? "equal" : "different") << " at depth " << r.depth << " (" << r.global_traces
                << " global, " << r.config_traces << " configuration traces)\n";
      if (r.only_global) std::cout << "only global: " << to_string(*r.only_global) << "\n";
      if (r.only_config) std::cout << "only configuration: " << to_string(*r.only_config) << "\n";
    }
    return r.equal ? 0 : 1;
  } catch (const NotProjectable& e) {
    std::cerr << e.what() << "\n";
  } catch (const ExplorationBudgetExceeded& e) {
    std::cerr << e.what() << "\n";
  }
  return 1;
}

int cmd_progress(const Config& c, const std::string& file) {
  auto p = load(file);
  if (!p) return 1;
  try {
    auto r = check_progress(GlobalContext(), p->type, explore_options(c), project_options(c));
    if (c.json) {
      json j{{"ok", r.ok}, {"explored", r.explored}};
      if (!r.ok) {
        j["stuck_path"] = trace_json(r.stuck_path);
        j["stuck_state"] = r.stuck_state;
      }
      std::cout << j.dump(2) << "\n";
    } else if (r.ok) {
      std::cout << "progress holds (" << r.explored << " configurations, depth " << c.depth << ")\n";
    } else {
      std::cout << "stuck after " << to_string(r.stuck_path) << "\n" << r.stuck_state;
    }
    return r.ok ? 0 : 1;
  } catch (const NotProjectable& e) {
    std::cerr << e.what() << "\n";
  } catch (const ExplorationBudgetExceeded& e) {
    std::cerr << e.what() << "\n";
  }
  return 1;
}

struct SimArgs {
  std::int64_t secret = -1;
  std::int64_t limit = 10;
  std::uint64_t seed = 1;
  std::size_t steps = 100;
  std::vector<std::string> choosers;  // ROLE=FILE
};

int cmd_simulate(const Config& c, const std::string& file, const SimArgs& a) {
  auto p = load(file);
  if (!p) return 1;
  auto po = project_options(c);
  std::map<Role, Cfsm> machines;
  Configuration init;
  try {
    for (const auto& r : participants(p->type)) machines.emplace(r, machine(*p, r, po));
    init = associate(GlobalContext(), p->type, po);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  std::map<Role, ChooserSpec> overrides;
  for (const auto& spec : a.choosers) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) {
      std::cerr << "--chooser expects ROLE=FILE\n";
      return 2;
    }
    overrides[Role{spec.substr(0, eq)}] = parse_chooser(slurp(spec.substr(eq + 1)));
  }

  std::vector<rt::Endpoint> eps;
  std::mt19937_64 rng(a.seed);
  bool game = machines.count(Role{"A"}) && machines.count(Role{"B"}) && machines.count(Role{"C"}) &&
              rt::send_state_with(machines.at(Role{"C"}), "guess") &&
              rt::send_state_with(machines.at(Role{"B"}), "win");
  std::int64_t secret = a.secret >= 0 ? a.secret : static_cast<std::int64_t>(rng() % 100);
  if (game) {
    rt::GameSetup gs;
    gs.secret = secret;
    gs.limit = a.limit;
    eps = rt::guessing_game(machines, gs);
  } else {
    for (const auto& [r, m] : machines) eps.push_back(rt::Endpoint{m, std::make_unique<rt::RandomCallbacks>(m, rng())});
  }
  for (auto& ep : eps) {
    auto it = overrides.find(ep.machine.role);
    if (it == overrides.end()) continue;
    auto cb = std::make_unique<rt::DecisionCallbacks>();
    for (const auto& [q, list] : it->second) cb->decide(q, list);
    cb->decide_forced(ep.machine);
    ep.callbacks = std::move(cb);
  }

  rt::RunOptions ro;
  ro.max_steps = a.steps;
  auto res = rt::simulate(eps, ro);
  auto rep = rt::replay(init, res.log);

  if (c.json) {
    json j{{"ok", res.ok && rep.ok}, {"messages", res.messages}, {"replay", rep.ok}, {"terminal", rep.terminal}};
    if (game) j["secret"] = secret;
    j["log"] = json::array();
    for (const auto& e : res.log)
      if (e.dir == Dir::Send)
        j["log"].push_back({{"from", e.from.name}, {"to", e.to.name}, {"label", e.label}, {"value", to_string(e.value)}});
    j["errors"] = json::object();
    for (const auto& [r, e] : res.errors) j["errors"][r.name] = e;
    if (res.violation) j["violation"] = {{"kind", std::string(rt::to_string(res.violation->kind()))},
                                         {"state", res.violation->state()},
                                         {"predicate", res.violation->predicate()},
                                         {"record", res.violation->snapshot()}};
    std::cout << j.dump(2) << "\n";
  } else {
    if (game) std::cout << "secret " << secret << ", limit " << a.limit << "\n";
    if (rep.ok) {
      // linearised by the replay; values from the senders' logs in the same order
      std::map<std::pair<std::string, std::string>, std::vector<const rt::Event*>> sent;
      for (const auto& e : res.log)
        if (e.dir == Dir::Send) sent[{e.from.name, e.to.name}].push_back(&e);
      std::map<std::pair<std::string, std::string>, std::size_t> at;
      for (const auto& step : rep.trace) {
        auto arrow = step.find("->"), colon = step.find(':');
        std::pair<std::string, std::string> ch{step.substr(0, arrow), step.substr(arrow + 2, colon - arrow - 2)};
        const auto* e = sent[ch][at[ch]++];
        std::cout << e->from.name << " -> " << e->to.name << " : " << e->label << "(" << to_string(e->value) << ")\n";
      }
    } else {
      for (const auto& e : res.log)
        if (e.dir == Dir::Send)
          std::cout << e.from.name << " -> " << e.to.name << " : " << e.label << "(" << to_string(e.value) << ")\n";
    }
    for (const auto& [r, e] : res.errors) std::cout << r.name << ": " << e << "\n";
    std::cout << res.messages << " messages; replay " << (rep.ok ? "ok" : "FAILED") << " (" << rep.message << ")"
              << (rep.terminal ? ", terminal" : "") << "\n";
  }
  return res.ok && rep.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmpst: refined multiparty session types toolchain"};
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--solver", cfg.solver, "SMT solver executable (default $RMPST_SOLVER or z3)");
  app.add_option("--solver-timeout", cfg.solver_timeout, "solver timeout in ms")->check(CLI::PositiveNumber);
  auto* full = app.add_flag("--full-merge", cfg.full_merge, "use full merging");
  app.add_flag("--plain-merge", cfg.plain_merge, "use plain merging only")->excludes(full);
  app.add_flag("--json", cfg.json, "machine-readable output");
  app.add_option("--depth", cfg.depth, "exploration depth")->check(CLI::NonNegativeNumber);
  app.add_option("--budget", cfg.budget, "exploration node budget")->check(CLI::PositiveNumber);

  std::string file, role, out, chooser;
  bool dot = false;
  SimArgs sim;

  auto* check = app.add_subcommand("check", "parse and check well-formedness");
  check->add_option("file", file)->required()->check(CLI::ExistingFile);

  auto* proj = app.add_subcommand("project", "print the projection onto a role");
  proj->add_option("file", file)->required()->check(CLI::ExistingFile);
  proj->add_option("--role", role)->required();

  auto* fsm = app.add_subcommand("fsm", "print the state machine of a role");
  fsm->add_option("file", file)->required()->check(CLI::ExistingFile);
  fsm->add_option("--role", role)->required();
  fsm->add_flag("--dot", dot, "Graphviz output");

  auto* gen = app.add_subcommand("gen", "generate the C++ endpoint API of a role");
  gen->add_option("file", file)->required()->check(CLI::ExistingFile);
  gen->add_option("--role", role)->required();
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--chooser", chooser, "decision lists to check before generating")->check(CLI::ExistingFile);

  auto* teq = app.add_subcommand("trace-eq", "compare global and configuration traces");
  teq->add_option("file", file)->required()->check(CLI::ExistingFile);

  auto* prog = app.add_subcommand("progress", "look for stuck configurations");
  prog->add_option("file", file)->required()->check(CLI::ExistingFile);

  auto* simc = app.add_subcommand("simulate", "run every role in-process and replay the log");
  simc->add_option("file", file)->required()->check(CLI::ExistingFile);
  simc->add_option("--secret", sim.secret, "secret of the guessing game (random when absent)")->check(CLI::Range(0, 99));
  simc->add_option("--limit", sim.limit, "attempts in the guessing game")->check(CLI::PositiveNumber);
  simc->add_option("--seed", sim.seed, "seed for random strategies");
  simc->add_option("--steps", sim.steps, "per-role step limit");
  simc->add_option("--chooser", sim.choosers, "ROLE=FILE decision lists replacing a role's strategy");

  for (auto* sub : {check, proj, fsm, gen, teq, prog, simc}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*check) return cmd_check(cfg, file);
    if (*proj) return cmd_project(cfg, file, role);
    if (*fsm) return cmd_fsm(cfg, file, role, dot);
    if (*gen) return cmd_gen(cfg, file, role, out, chooser);
    if (*teq) return cmd_trace_eq(cfg, file);
    if (*prog) return cmd_progress(cfg, file);
    if (*simc) return cmd_simulate(cfg, file, sim);
  } catch (const SolverUnavailable& e) {
    std::cerr << "solver unavailable: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
