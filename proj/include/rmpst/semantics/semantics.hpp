#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rmpst/core/context.hpp"
#include "rmpst/core/types.hpp"
#include "rmpst/project/project.hpp"

namespace rmpst {

struct GlobalState {
  GlobalContext ctx;
  GlobalType type;
};

struct LocalState {
  LocalContext ctx;
  LocalType type;
};

using Configuration = std::map<Role, LocalState>;

/// (from, to, label, base, predicate up to binder renaming)
std::string action_key(const Action& a);

std::string state_key(const GlobalState& s);
std::string state_key(const LocalState& s);
std::string state_key(const Configuration& c);

std::vector<std::pair<Action, GlobalState>> gsteps(const GlobalState& s);

/// One silent step (E-Phi, E-Rec, E-Cnt).
std::vector<LocalState> lsteps_silent(const LocalState& s);

/// Reflexive silent closure; each recursion variable is unfolded at most once.
std::vector<LocalState> silent_closure(const LocalState& s);

/// Concrete steps of role `self`, silent prefixes first (L-Eps).
std::vector<std::pair<Action, LocalState>> lsteps(const Role& self, const LocalState& s);

class NotProjectable : public Error {
 public:
  using Error::Error;
};

Configuration associate(const GlobalContext& ctx, const GlobalType& g, const ProjectOptions& opts);

std::vector<std::pair<Action, Configuration>> config_steps(const Configuration& c);

/// Every role can silently reach end.
bool is_terminal(const Configuration& c);

class ExplorationBudgetExceeded : public Error {
 public:
  using Error::Error;
};

struct ExploreOptions {
  int depth = 10;
  std::size_t node_budget = 50'000;
};

using TraceKey = std::vector<std::string>;
using TraceSet = std::set<TraceKey>;

TraceSet traces(const GlobalState& s, const ExploreOptions& opts);
TraceSet traces(const Configuration& c, const ExploreOptions& opts);

struct TraceEqReport {
  bool equal = false;
  int depth = 0;
  std::size_t global_traces = 0;
  std::size_t config_traces = 0;
  std::optional<TraceKey> only_global;
  std::optional<TraceKey> only_config;
};

TraceEqReport check_trace_equivalence(const GlobalContext& ctx, const GlobalType& g,
                                      const ExploreOptions& eopts, const ProjectOptions& popts);

struct ProgressReport {
  bool ok = true;
  std::size_t explored = 0;
  TraceKey stuck_path;
  std::string stuck_state;
};

ProgressReport check_progress(const GlobalContext& ctx, const GlobalType& g,
                              const ExploreOptions& eopts, const ProjectOptions& popts);

struct PreservationReport {
  bool ok = true;
  std::size_t checked = 0;
  TraceKey path;
  std::string failure;
};

/// Every global successor within the depth stays well-formed.
PreservationReport check_preservation(const GlobalContext& ctx, const GlobalType& g,
                                      const ExploreOptions& eopts, const ProjectOptions& popts);

std::string to_string(const TraceKey& t);

}  // namespace rmpst
