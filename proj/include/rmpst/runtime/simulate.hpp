#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rmpst/runtime/endpoint.hpp"
#include "rmpst/semantics/semantics.hpp"

namespace rmpst::rt {

struct ReplayReport {
  bool ok = false;
  bool terminal = false;
  TraceKey trace;
  std::string message;
};

/// Searches for a configuration trace that matches every role's own log order.
ReplayReport replay(const Configuration& c, const std::vector<Event>& log);

struct Endpoint {
  Cfsm machine;
  std::unique_ptr<Callbacks> callbacks;
};

struct SimulationResult {
  bool ok = false;
  std::map<Role, RunResult> results;
  /// first failure per role
  std::map<Role, std::string> errors;
  std::optional<RuntimeViolation> violation;
  std::vector<Event> log;
  std::size_t messages = 0;
};

/// One thread per endpoint over an in-memory network.
SimulationResult simulate(std::vector<Endpoint>& endpoints, const RunOptions& opts,
                          std::chrono::milliseconds timeout = std::chrono::seconds(10));

/// Send state offering `label`, if any.
std::optional<int> send_state_with(const Cfsm& m, const std::string& label);

// ------------------------------------------------------------- strategies

/// B of the guessing game: x = n wins, t = 1 loses, then the hint.
std::vector<Decision> referee_decisions(const std::string& lose_guard = "t = 1", bool with_lose = true);

/// Starts at 50 and moves one past the last guess on each hint.
class GuesserCallbacks : public Callbacks {
 public:
  Choice choose(int state, const RecordView& st) override;
  void receive(int state, const std::string& label, const RecordView& st, const Value& payload) override;
  const std::vector<std::int64_t>& guesses() const { return guesses_; }

 private:
  std::int64_t next_ = 50;
  std::vector<std::int64_t> guesses_;
};

struct GameSetup {
  std::int64_t secret = 42;
  std::int64_t limit = 10;
  std::string lose_guard = "t = 1";
  bool with_lose = true;
};

/// Endpoints for A, B, C of the guessing game; the guesser is owned by the result.
std::vector<Endpoint> guessing_game(const std::map<Role, Cfsm>& machines, const GameSetup& g,
                                    GuesserCallbacks** guesser = nullptr);

/// Picks a random enabled label and a payload satisfying the checkable part
/// of its refinement: `v = E` conjuncts first, then small values.
class RandomCallbacks : public Callbacks {
 public:
  RandomCallbacks(const Cfsm& m, std::uint64_t seed) : m_(&m), rng_(seed) {}
  Choice choose(int state, const RecordView& st) override;

 private:
  const Cfsm* m_;
  std::mt19937_64 rng_;
};

}  // namespace rmpst::rt
