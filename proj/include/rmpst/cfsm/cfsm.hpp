#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmpst/core/context.hpp"
#include "rmpst/core/types.hpp"

namespace rmpst {

enum class StateKind { Send, Recv, Terminal };

std::string_view to_string(StateKind k);

struct Update {
  std::string var;
  Expr expr;
};

struct Transition {
  int from = 0;
  int to = 0;
  Dir dir = Dir::Send;
  Role peer;
  std::string label;
  std::string var;
  RefinementType type;
  /// state-variable assignments, simultaneous, against the record after the payload
  std::vector<Update> updates;
};

struct CfsmState {
  int id = 0;
  StateKind kind = StateKind::Terminal;
  std::optional<Role> peer;
  LocalContext context;
};

struct Cfsm {
  Role role;
  std::vector<CfsmState> states;  // states[i].id == i + 1
  int initial = 1;
  std::vector<Update> initial_updates;
  std::vector<Transition> transitions;

  const CfsmState& state(int id) const { return states.at(static_cast<std::size_t>(id - 1)); }
  std::vector<const Transition*> outgoing(int id) const;
  std::optional<int> terminal() const;
};

/// States in BFS order from 1; silent prefixes only extend state contexts.
Cfsm to_cfsm(const Role& role, const LocalContext& sigma, const LocalType& l);

enum class ViolationKind { MixedState, Undirected, NonDeterministic, Unreachable, Stuck, DanglingEdge };

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  int state;
  std::string message;
};

std::vector<Violation> validate(const Cfsm& m);

std::string to_json(const Cfsm& m, int indent = 2);
std::string to_dot(const Cfsm& m);

}  // namespace rmpst
