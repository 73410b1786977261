#include <doctest.h>

#include <thread>

#include "rmpst/cfsm/cfsm.hpp"
#include "rmpst/frontend/parser.hpp"
#include "rmpst/runtime/simulate.hpp"
#include "rmpst/runtime/wire.hpp"
#include "support.hpp"

using namespace rmpst;
using namespace rmpst::rt;

namespace {

std::map<Role, Cfsm> machines(const GlobalType& g) {
  std::map<Role, Cfsm> out;
  auto rep = well_formed(GlobalContext(), g, testing::shared_options());
  REQUIRE(rep.ok);
  for (const auto& [r, p] : rep.projections) out.emplace(r, to_cfsm(r, p.context, p.local_type));
  return out;
}

Bytes bytes(std::initializer_list<int> v) {
  Bytes b;
  for (int x : v) b.push_back(static_cast<std::uint8_t>(x));
  return b;
}

}  // namespace

TEST_CASE("wire encoding, byte for byte") {
  CHECK(encode(Value{std::int64_t{-1}}) == bytes({0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff}));
  CHECK(encode(Value{std::int64_t{0}}) == Bytes(8, 0));
  CHECK(encode(Value{std::int64_t{1} << 40}) == bytes({0, 0, 0x01, 0, 0, 0, 0, 0}));
  CHECK(encode(Value{true}) == bytes({1}));
  CHECK(encode(Value{false}) == bytes({0}));
  CHECK(encode(Value{std::string()}) == bytes({0, 0, 0, 0}));
  CHECK(encode(Value{std::string("hi")}) == bytes({0, 0, 0, 2, 'h', 'i'}));
  CHECK(encode(Value{Unit{}}).empty());
  CHECK(encode_label("Ping") == bytes({0, 0, 0, 4, 'P', 'i', 'n', 'g'}));
  CHECK(hex(bytes({0, 0xab})) == "00ab");
}

TEST_CASE("wire decoding") {
  for (std::int64_t v : {std::int64_t{-1}, std::int64_t{0}, std::int64_t{1} << 40, INT64_MIN, INT64_MAX}) {
    auto b = encode(Value{v});
    CHECK(std::get<std::int64_t>(decode(BaseType::Int, b)) == v);
  }
  CHECK(std::get<std::string>(decode(BaseType::String, encode(Value{std::string("héllo")}))) == "héllo");
  CHECK(std::holds_alternative<Unit>(decode(BaseType::Unit, Bytes{})));
  CHECK_THROWS_AS(decode(BaseType::Int, bytes({1, 2, 3})), DeserializationError);
  CHECK_THROWS_AS(decode(BaseType::Bool, bytes({2})), DeserializationError);
  CHECK_THROWS_AS(decode(BaseType::Unit, bytes({0})), DeserializationError);
  CHECK_THROWS_AS(decode(BaseType::String, bytes({0, 0, 0, 5, 'a'})), DeserializationError);
}

TEST_CASE("memory transport keeps per-channel order") {
  auto net = MemoryNetwork::create();
  auto a = net->connect(Role{"A"});
  auto b = net->connect(Role{"B"});
  a->send_int(Role{"B"}, 7);
  a->send_string(Role{"B"}, "x");
  a->send_bool(Role{"B"}, true);
  a->send_unit(Role{"B"});
  CHECK(b->recv_int(Role{"A"}) == 7);
  CHECK(b->recv_string(Role{"A"}) == "x");
  CHECK(b->recv_bool(Role{"A"}));
  b->recv_unit(Role{"A"});

  TransportLog log;
  a->observe(&log, Role{"A"});
  b->observe(&log, Role{"B"});
  a->send_message(Role{"B"}, "m", Value{std::int64_t{3}});
  CHECK(b->recv_label(Role{"A"}) == "m");
  CHECK(std::get<std::int64_t>(b->recv_payload(Role{"A"}, "m", BaseType::Int)) == 3);
  REQUIRE(log.events().size() == 2);
  CHECK(log.sends() == 1);
  CHECK(log.of(Role{"B"}).front().dir == Dir::Recv);
}

TEST_CASE("closing a role wakes its readers") {
  auto net = MemoryNetwork::create(1 << 16, std::chrono::milliseconds(2000));
  auto b = net->connect(Role{"B"});
  std::thread t([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    net->close(Role{"A"});
  });
  try {
    b->recv_int(Role{"A"});
    FAIL("expected PeerClosed");
  } catch (const RuntimeViolation& e) {
    CHECK(e.kind() == RuntimeErrorKind::PeerClosed);
  }
  t.join();
}

TEST_CASE("ping pong exchanges 2k + 1 messages") {
  auto ms = machines(testing::load("pingpong1"));
  for (int k : {0, 1, 5}) {
    CAPTURE(k);
    std::vector<Endpoint> eps;
    auto a = std::make_unique<DecisionCallbacks>();
    auto& am = ms.at(Role{"A"});
    auto ping = send_state_with(am, "Ping1");
    REQUIRE(ping);
    a->decide(*ping, {Decision{"Ping1", parse_expr("i < " + std::to_string(k)), parse_expr("i + 1")},
                      Decision{"Stop", parse_expr("true")}});
    auto b = std::make_unique<DecisionCallbacks>();
    auto& bm = ms.at(Role{"B"});
    auto pong = send_state_with(bm, "Pong1");
    REQUIRE(pong);
    b->decide(*pong, {Decision{"Pong1", parse_expr("true"), parse_expr("x1 + 1")}});
    eps.push_back(Endpoint{am, std::move(a)});
    eps.push_back(Endpoint{bm, std::move(b)});
    auto r = simulate(eps, RunOptions{});
    CHECK_MESSAGE(r.ok, r.errors.size());
    CHECK(r.messages == static_cast<std::size_t>(2 * k + 1));
    auto cfg = associate(GlobalContext(), testing::load("pingpong1"), testing::shared_options());
    auto rep = replay(cfg, r.log);
    CHECK(rep.ok);
    CHECK(rep.terminal);
  }
}

TEST_CASE("sender refinement is enforced") {
  auto ms = machines(testing::load("pingpong1"));
  std::vector<Endpoint> eps;
  auto a = std::make_unique<DecisionCallbacks>();
  auto& am = ms.at(Role{"A"});
  a->decide(*send_state_with(am, "Ping1"), {Decision{"Ping1", parse_expr("true"), parse_expr("i + 2")}});
  eps.push_back(Endpoint{am, std::move(a)});
  auto b = std::make_unique<DecisionCallbacks>();
  auto& bm = ms.at(Role{"B"});
  b->decide(*send_state_with(bm, "Pong1"), {Decision{"Pong1", parse_expr("true"), parse_expr("x1 + 1")}});
  eps.push_back(Endpoint{bm, std::move(b)});
  auto r = simulate(eps, RunOptions{}, std::chrono::milliseconds(2000));
  CHECK_FALSE(r.ok);
  REQUIRE(r.violation);
  CHECK(r.violation->kind() == RuntimeErrorKind::RefinementFailed);
  CHECK(r.violation->predicate() == "x1 = i + 1");
  CHECK(r.violation->snapshot() == "{i = 0, x1 = 2}");
}

TEST_CASE("unknown label from a callback") {
  auto ms = machines(testing::load("pingpong1"));
  struct Bogus : Callbacks {
    Choice choose(int, const RecordView&) override { return {"Pang", Unit{}}; }
  } cb;
  auto net = MemoryNetwork::create(1 << 16, std::chrono::milliseconds(200));
  auto conn = net->connect(Role{"A"});
  try {
    run_endpoint(ms.at(Role{"A"}), cb, *conn);
    FAIL("expected UnknownLabel");
  } catch (const RuntimeViolation& e) {
    CHECK(e.kind() == RuntimeErrorKind::UnknownLabel);
  }
}

TEST_CASE("receiver rejects a label outside the protocol") {
  auto ms = machines(testing::load("pingpong1"));
  auto net = MemoryNetwork::create(1 << 16, std::chrono::milliseconds(500));
  auto a = net->connect(Role{"A"});
  auto b = net->connect(Role{"B"});
  a->send_message(Role{"B"}, "Pang", Value{Unit{}});
  DecisionCallbacks cb;
  try {
    run_endpoint(ms.at(Role{"B"}), cb, *b);
    FAIL("expected UnknownLabel");
  } catch (const RuntimeViolation& e) {
    CHECK(e.kind() == RuntimeErrorKind::UnknownLabel);
  }
}

TEST_CASE("guessing game outcomes") {
  auto ms = machines(testing::load("higherlower"));
  SUBCASE("guesser wins") {
    GuesserCallbacks* c = nullptr;
    auto eps = guessing_game(ms, GameSetup{42, 10}, &c);
    auto r = simulate(eps, RunOptions{100});
    REQUIRE(r.ok);
    CHECK(c->guesses().back() == 42);
    CHECK(r.results.at(Role{"C"}).final_state == 3);
  }
  SUBCASE("guesser runs out of attempts") {
    GuesserCallbacks* c = nullptr;
    auto eps = guessing_game(ms, GameSetup{90, 3}, &c);
    auto r = simulate(eps, RunOptions{100});
    REQUIRE(r.ok);
    CHECK(c->guesses() == std::vector<std::int64_t>{50, 51, 52});
  }
  SUBCASE("wrong lose guard is caught at the referee") {
    GameSetup s;
    s.lose_guard = "t = 0";
    auto eps = guessing_game(ms, s);
    // t reaches 1 before C finds 42 from 50 downwards
    auto r = simulate(eps, RunOptions{100}, std::chrono::milliseconds(2000));
    if (!r.ok) {
      REQUIRE(r.violation);
      CHECK(r.violation->kind() == RuntimeErrorKind::RefinementFailed);
      CHECK(r.violation->state() == 4);
    }
  }
}

TEST_CASE("random strategies on the corpus replay") {
  for (const std::string name : {"g1", "g2", "g3", "twobuyer", "negotiation", "fibonacci", "calculator"}) {
    CAPTURE(name);
    auto g = testing::load(name);
    auto ms = machines(g);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      std::vector<Endpoint> eps;
      for (auto& [r, m] : ms) eps.push_back(Endpoint{m, nullptr});
      for (auto& e : eps) e.callbacks = std::make_unique<RandomCallbacks>(e.machine, seed);
      auto res = simulate(eps, RunOptions{60}, std::chrono::milliseconds(2000));
      auto rep = replay(associate(GlobalContext(), g, testing::shared_options()), res.log);
      CHECK(rep.ok);
    }
  }
}
