// Runs the generated HigherLower endpoints against each other in one process.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "HigherLower_A.hpp"
#include "HigherLower_B.hpp"
#include "HigherLower_C.hpp"

namespace A = rmpst_gen::HigherLower_A;
namespace B = rmpst_gen::HigherLower_B;
namespace C = rmpst_gen::HigherLower_C;

namespace {

int failures = 0;

void expect(bool cond, const std::string& what) {
  if (!cond) {
    std::fprintf(stderr, "FAIL: %s\n", what.c_str());
    ++failures;
  }
}

struct Starter : A::Callbacks {
  std::int64_t secret, limit;
  std::string outcome;
  Starter(std::int64_t s, std::int64_t l) : secret(s), limit(l) {}
  A::State1Choice state1_send(const A::State1&) override { return A::State1_start{secret}; }
  A::State2Choice state2_send(const A::State2&) override { return A::State2_limit{limit}; }
  void state3_receive_higher(const A::State3&) override {}
  void state3_receive_lower(const A::State3&) override {}
  void state3_receive_lose(const A::State3&) override { outcome = "lose"; }
  void state3_receive_win(const A::State3&) override { outcome = "win"; }
};

// the referee; `weak` uses t = 0 for the lose case
struct Referee : B::Callbacks {
  bool weak = false;
  void state1_receive_start(const B::State1&, std::int64_t) override {}
  void state2_receive_limit(const B::State2&, std::int64_t) override {}
  void state3_receive_guess(const B::State3&, std::int64_t) override {}
  B::State4Choice state4_send(const B::State4& st) override {
    if (st.x == st.n) return B::State4_win{};
    if (st.t == (weak ? 0 : 1)) return B::State4_lose{};
    if (st.n > st.x) return B::State4_higher{};
    return B::State4_lower{};
  }
  B::State5Choice state5_send(const B::State5&) override { return B::State5_higher{}; }
  B::State6Choice state6_send(const B::State6&) override { return B::State6_lower{}; }
  B::State7Choice state7_send(const B::State7&) override { return B::State7_lose{}; }
  B::State8Choice state8_send(const B::State8&) override { return B::State8_win{}; }
};

// binary search over [lo, hi)
struct Guesser : C::Callbacks {
  std::int64_t lo = 0, hi = 100, last = -1;
  std::vector<std::int64_t> guesses;
  std::string outcome;
  C::State1Choice state1_send(const C::State1&) override {
    last = lo + (hi - lo) / 2;
    guesses.push_back(last);
    return C::State1_guess{last};
  }
  void state2_receive_higher(const C::State2& st) override { lo = st.x + 1; }
  void state2_receive_lower(const C::State2& st) override { hi = st.x; }
  void state2_receive_win(const C::State2&) override { outcome = "win"; }
  void state2_receive_lose(const C::State2&) override { outcome = "lose"; }
};

struct Game {
  Starter a;
  Referee b;
  Guesser c;
  std::string error_b;
  B::Record rb;
  C::Record rc;
};

void play(Game& g) {
  auto net = rmpst::rt::MemoryNetwork::create(1 << 16, std::chrono::milliseconds(2000));
  auto ca = net->connect(rmpst::Role{"A"});
  auto cb = net->connect(rmpst::Role{"B"});
  auto cc = net->connect(rmpst::Role{"C"});
  std::thread ta([&] {
    try {
      A::run(g.a, *ca);
    } catch (const std::exception&) {
    }
  });
  std::thread tb([&] {
    try {
      g.rb = B::run(g.b, *cb);
    } catch (const rmpst::rt::RuntimeViolation& e) {
      g.error_b = std::string(to_string(e.kind())) + " at state " + std::to_string(e.state());
      net->close(rmpst::Role{"B"});
    }
  });
  std::thread tc([&] {
    try {
      g.rc = C::run(g.c, *cc);
    } catch (const std::exception&) {
    }
  });
  ta.join();
  tb.join();
  tc.join();
}

}  // namespace

int main() {
  for (std::int64_t secret : {0, 42, 63, 99}) {
    Game g{Starter(secret, 10), {}, {}, {}, {}, {}};
    play(g);
    std::string tag = "secret " + std::to_string(secret);
    expect(g.error_b.empty(), tag + ": " + g.error_b);
    expect(g.c.outcome == "win", tag + ": guesser did not win");
    expect(g.a.outcome == "lose", tag + ": starter was told " + g.a.outcome);
    expect(g.c.guesses.back() == secret, tag + ": last guess");
    expect(g.rc.x && *g.rc.x == secret, tag + ": guesser record");
    expect(g.rb.n && *g.rb.n == secret && g.rb.t && *g.rb.t >= 1, tag + ": referee record");
  }

  // three attempts are not enough for 99
  {
    Game g{Starter(99, 3), {}, {}, {}, {}, {}};
    play(g);
    expect(g.error_b.empty(), "limit 3: " + g.error_b);
    expect(g.c.outcome == "lose" && g.a.outcome == "win", "limit 3: outcome");
    expect(g.c.guesses.size() == 3, "limit 3: guesses");
  }

  // the weakened referee is stopped by the generated check
  {
    Game g{Starter(99, 3), {}, {}, {}, {}, {}};
    g.b.weak = true;
    play(g);
    expect(g.error_b == "RefinementFailed at state 4", "weak referee: '" + g.error_b + "'");
  }

  std::printf("%s\n", failures ? "generated endpoints: FAILED" : "generated endpoints: ok");
  return failures ? 1 : 0;
}
