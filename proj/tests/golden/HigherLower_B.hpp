// Generated by rmpst from protocol HigherLower, role B. Do not edit.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "rmpst/runtime/connection.hpp"

namespace rmpst_gen::HigherLower_B {

using Connection = rmpst::rt::Connection;

namespace detail {
inline std::int64_t add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
inline std::int64_t sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
inline std::int64_t mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}
}  // namespace detail

// state 1 (recv)
struct State1 {
};

// state 2 (recv)
struct State2 {
  std::int64_t n0;  // n0:int{0 <= n0 && n0 < 100}
};

// state 3 (recv)
struct State3 {
  std::int64_t n0;  // n0:int{0 <= n0 && n0 < 100}
  std::int64_t t0;  // t0:int{0 < t0}
  std::int64_t n;  // n:int{0 <= n && n < 100}
  std::int64_t t;  // t:int{0 < t}
};

// state 4 (send)
struct State4 {
  std::int64_t n0;  // n0:int{0 <= n0 && n0 < 100}
  std::int64_t t0;  // t0:int{0 < t0}
  std::int64_t n;  // n:int{0 <= n && n < 100}
  std::int64_t t;  // t:int{0 < t}
  std::int64_t x;  // x:int{0 <= x && x < 100}
};

struct State4_higher {};
struct State4_lower {};
struct State4_win {};
struct State4_lose {};
using State4Choice = std::variant<State4_higher, State4_lower, State4_win, State4_lose>;

// state 5 (send)
struct State5 {
  std::int64_t n0;  // n0:int{0 <= n0 && n0 < 100}
  std::int64_t t0;  // t0:int{0 < t0}
  std::int64_t n;  // n:int{0 <= n && n < 100}
  std::int64_t t;  // t:int{0 < t}
  std::int64_t x;  // x:int{0 <= x && x < 100}
};

struct State5_higher {};
using State5Choice = std::variant<State5_higher>;

// state 6 (send)
struct State6 {
  std::int64_t n0;  // n0:int{0 <= n0 && n0 < 100}
  std::int64_t t0;  // t0:int{0 < t0}
  std::int64_t n;  // n:int{0 <= n && n < 100}
  std::int64_t t;  // t:int{0 < t}
  std::int64_t x;  // x:int{0 <= x && x < 100}
};

struct State6_lower {};
using State6Choice = std::variant<State6_lower>;

// state 7 (send)
struct State7 {
  std::int64_t n0;  // n0:int{0 <= n0 && n0 < 100}
  std::int64_t t0;  // t0:int{0 < t0}
  std::int64_t n;  // n:int{0 <= n && n < 100}
  std::int64_t t;  // t:int{0 < t}
  std::int64_t x;  // x:int{0 <= x && x < 100}
};

struct State7_lose {};
using State7Choice = std::variant<State7_lose>;

// state 8 (send)
struct State8 {
  std::int64_t n0;  // n0:int{0 <= n0 && n0 < 100}
  std::int64_t t0;  // t0:int{0 < t0}
  std::int64_t n;  // n:int{0 <= n && n < 100}
  std::int64_t t;  // t:int{0 < t}
  std::int64_t x;  // x:int{0 <= x && x < 100}
};

struct State8_win {};
using State8Choice = std::variant<State8_win>;

// state 9 (terminal)
struct State9 {
  std::int64_t n0;  // n0:int{0 <= n0 && n0 < 100}
  std::int64_t t0;  // t0:int{0 < t0}
  std::int64_t n;  // n:int{0 <= n && n < 100}
  std::int64_t t;  // t:int{0 < t}
  std::int64_t x;  // x:int{0 <= x && x < 100}
};

// one chooser per sending state, one handler per received label
class Callbacks {
 public:
  virtual ~Callbacks() = default;
  virtual void state1_receive_start(const State1& st, std::int64_t n0) = 0;
  virtual void state2_receive_limit(const State2& st, std::int64_t t0) = 0;
  virtual void state3_receive_guess(const State3& st, std::int64_t x) = 0;
  virtual State4Choice state4_send(const State4& st) = 0;
  virtual State5Choice state5_send(const State5& st) = 0;
  virtual State6Choice state6_send(const State6& st) = 0;
  virtual State7Choice state7_send(const State7& st) = 0;
  virtual State8Choice state8_send(const State8& st) = 0;
};

struct Record {
  std::optional<std::int64_t> n0;
  std::optional<std::int64_t> t0;
  std::optional<std::int64_t> n;
  std::optional<std::int64_t> t;
  std::optional<std::int64_t> x;
};

inline std::string snapshot(const Record& r) {
  std::string out;
  if (r.n0) out += (out.empty() ? "" : ", ") + std::string("n0") + " = " + std::to_string(*r.n0);
  if (r.t0) out += (out.empty() ? "" : ", ") + std::string("t0") + " = " + std::to_string(*r.t0);
  if (r.n) out += (out.empty() ? "" : ", ") + std::string("n") + " = " + std::to_string(*r.n);
  if (r.t) out += (out.empty() ? "" : ", ") + std::string("t") + " = " + std::to_string(*r.t);
  if (r.x) out += (out.empty() ? "" : ", ") + std::string("x") + " = " + std::to_string(*r.x);
  return "{" + out + "}";
}

inline void require(bool ok, int state, const char* what, const char* pred, const Record& r) {
  if (!ok)
    throw rmpst::rt::RuntimeViolation(rmpst::rt::RuntimeErrorKind::RefinementFailed,
                                      std::string("state ") + std::to_string(state) + " " + what + ": " + pred +
                                          " does not hold in " + snapshot(r),
                                      state, pred, snapshot(r));
}

inline Record run(Callbacks& cb, Connection& conn) {
  using namespace detail;
  Record r;
  int q = 1;
  for (;;) {
    switch (q) {
      case 1: {
        const State1 st{};
        const std::string label = conn.recv_label(rmpst::Role{"A"});
        if (label == "start") {
          const auto n0 = std::get<std::int64_t>(conn.recv_payload(rmpst::Role{"A"}, label, rmpst::BaseType::Int));
          require(((std::int64_t{0} <= n0) && (n0 < std::int64_t{100})), 1, "receive start", "0 <= n0 && n0 < 100", r);
          cb.state1_receive_start(st, n0);
          r.n0 = n0;
          q = 2;
        } else {
          throw rmpst::rt::RuntimeViolation(rmpst::rt::RuntimeErrorKind::UnknownLabel,
                                            "state 1 got '" + label + "'", 1);
        }
        break;
      }
      case 2: {
        const State2 st{*r.n0};
        const std::string label = conn.recv_label(rmpst::Role{"A"});
        if (label == "limit") {
          const auto t0 = std::get<std::int64_t>(conn.recv_payload(rmpst::Role{"A"}, label, rmpst::BaseType::Int));
          require((std::int64_t{0} < t0), 2, "receive limit", "0 < t0", r);
          cb.state2_receive_limit(st, t0);
          r.t0 = t0;
          const std::int64_t u0 = (*r.n0);  // n := n0
          const std::int64_t u1 = (*r.t0);  // t := t0
          r.n = u0;
          r.t = u1;
          q = 3;
        } else {
          throw rmpst::rt::RuntimeViolation(rmpst::rt::RuntimeErrorKind::UnknownLabel,
                                            "state 2 got '" + label + "'", 2);
        }
        break;
      }
      case 3: {
        const State3 st{*r.n0, *r.t0, *r.n, *r.t};
        const std::string label = conn.recv_label(rmpst::Role{"C"});
        if (label == "guess") {
          const auto x = std::get<std::int64_t>(conn.recv_payload(rmpst::Role{"C"}, label, rmpst::BaseType::Int));
          require(((std::int64_t{0} <= x) && (x < std::int64_t{100})), 3, "receive guess", "0 <= x && x < 100", r);
          cb.state3_receive_guess(st, x);
          r.x = x;
          q = 4;
        } else {
          throw rmpst::rt::RuntimeViolation(rmpst::rt::RuntimeErrorKind::UnknownLabel,
                                            "state 3 got '" + label + "'", 3);
        }
        break;
      }
      case 4: {
        const State4 st{*r.n0, *r.t0, *r.n, *r.t, *r.x};
        const auto c = cb.state4_send(st);
        if (auto* p = std::get_if<State4_higher>(&c)) {
          (void)p;
          require((((*r.n) > (*r.x)) && ((*r.t) > std::int64_t{1})), 4, "send higher", "n > x && t > 1", r);
          conn.send_message(rmpst::Role{"C"}, "higher", rmpst::Value(rmpst::Unit{}));
          q = 5;
        } else if (auto* p = std::get_if<State4_lower>(&c)) {
          (void)p;
          require((((*r.n) < (*r.x)) && ((*r.t) > std::int64_t{1})), 4, "send lower", "n < x && t > 1", r);
          conn.send_message(rmpst::Role{"C"}, "lower", rmpst::Value(rmpst::Unit{}));
          q = 6;
        } else if (auto* p = std::get_if<State4_win>(&c)) {
          (void)p;
          require(((*r.n) == (*r.x)), 4, "send win", "n = x", r);
          conn.send_message(rmpst::Role{"C"}, "win", rmpst::Value(rmpst::Unit{}));
          q = 7;
        } else if (auto* p = std::get_if<State4_lose>(&c)) {
          (void)p;
          require((((*r.n) != (*r.x)) && ((*r.t) == std::int64_t{1})), 4, "send lose", "n <> x && t = 1", r);
          conn.send_message(rmpst::Role{"C"}, "lose", rmpst::Value(rmpst::Unit{}));
          q = 8;
        }
        break;
      }
      case 5: {
        const State5 st{*r.n0, *r.t0, *r.n, *r.t, *r.x};
        const auto c = cb.state5_send(st);
        if (auto* p = std::get_if<State5_higher>(&c)) {
          (void)p;
          conn.send_message(rmpst::Role{"A"}, "higher", rmpst::Value(rmpst::Unit{}));
          const std::int64_t u0 = (*r.n);  // n := n
          const std::int64_t u1 = sub((*r.t), std::int64_t{1});  // t := t - 1
          r.n = u0;
          r.t = u1;
          q = 3;
        }
        break;
      }
      case 6: {
        const State6 st{*r.n0, *r.t0, *r.n, *r.t, *r.x};
        const auto c = cb.state6_send(st);
        if (auto* p = std::get_if<State6_lower>(&c)) {
          (void)p;
          conn.send_message(rmpst::Role{"A"}, "lower", rmpst::Value(rmpst::Unit{}));
          const std::int64_t u0 = (*r.n);  // n := n
          const std::int64_t u1 = sub((*r.t), std::int64_t{1});  // t := t - 1
          r.n = u0;
          r.t = u1;
          q = 3;
        }
        break;
      }
      case 7: {
        const State7 st{*r.n0, *r.t0, *r.n, *r.t, *r.x};
        const auto c = cb.state7_send(st);
        if (auto* p = std::get_if<State7_lose>(&c)) {
          (void)p;
          conn.send_message(rmpst::Role{"A"}, "lose", rmpst::Value(rmpst::Unit{}));
          q = 9;
        }
        break;
      }
      case 8: {
        const State8 st{*r.n0, *r.t0, *r.n, *r.t, *r.x};
        const auto c = cb.state8_send(st);
        if (auto* p = std::get_if<State8_win>(&c)) {
          (void)p;
          conn.send_message(rmpst::Role{"A"}, "win", rmpst::Value(rmpst::Unit{}));
          q = 9;
        }
        break;
      }
      case 9: {
        return r;
      }
    }
  }
}

}  // namespace rmpst_gen::HigherLower_B
