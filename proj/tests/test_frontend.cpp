#include <doctest.h>

#include "rmpst/core/print.hpp"
#include "rmpst/frontend/parser.hpp"
#include "support.hpp"

using namespace rmpst;

TEST_CASE("HigherLower declaration") {
  auto r = parse_protocol(testing::read_file(testing::protocol_path("higherlower")));
  REQUIRE(r.ok());
  CHECK(r.decl->name == "HigherLower");
  CHECK(r.decl->roles.size() == 3);
  REQUIRE(r.decl->aux_protocols.size() == 1);
}

TEST_CASE("HigherLower desugars to a recursion over (n, t) with a four-way choice at B") {
  auto g = testing::load("higherlower");
  auto m = g.as<GMessage>();
  REQUIRE(m);
  CHECK(m->branches.front().label == "start");
  auto limit = m->branches.front().cont.as<GMessage>();
  REQUIRE(limit);
  auto rec = limit->branches.front().cont.as<GRec>();
  REQUIRE(rec);
  REQUIRE(rec->vars.size() == 2);
  CHECK(rec->vars[0].var == "n");
  CHECK(rec->vars[1].var == "t");
  auto guess = rec->body.as<GMessage>();
  REQUIRE(guess);
  auto choice = guess->branches.front().cont.as<GMessage>();
  REQUIRE(choice);
  CHECK(choice->from == Role{"B"});
  std::set<std::string> labels;
  for (const auto& b : choice->branches) labels.insert(b.label);
  CHECK(labels == std::set<std::string>{"higher", "lower", "win", "lose"});
}

TEST_CASE("minimal protocol") {
  std::vector<Diagnostic> d;
  auto g = load_protocol("global protocol P(role A, role B){ m(x:int) from A to B; }", d);
  REQUIRE(g);
  auto m = g->as<GMessage>();
  REQUIRE(m);
  CHECK(m->from == Role{"A"});
  CHECK(m->branches.size() == 1);
  CHECK(m->branches.front().cont.is_end());
}

TEST_CASE("unknown role is diagnosed") {
  std::vector<Diagnostic> d;
  auto g = load_protocol("global protocol P(role A, role B){ m(x:int) from A to C; }", d);
  CHECK_FALSE(g);
  REQUIRE(has_errors(d));
  bool mentions = false;
  for (const auto& x : d) mentions |= x.message.find("unknown role") != std::string::npos;
  CHECK(mentions);
}

TEST_CASE("PingPong(1) is a recursion with Ping then Pong then the loop") {
  auto g = testing::load("pingpong1");
  auto rec = g.as<GRec>();
  REQUIRE(rec);
  auto ping = rec->body.as<GMessage>();
  REQUIRE(ping);
  CHECK(ping->branches[0].label == "Ping1");
  auto pong = ping->branches[0].cont.as<GMessage>();
  REQUIRE(pong);
  CHECK(pong->branches[0].label == "Pong1");
  CHECK(pong->branches[0].cont.as<GVar>());
}

TEST_CASE("syntax errors carry positions") {
  auto r = parse_protocol("global protocol P(role A, role B) {\n  m(x:int from A to B;\n}");
  CHECK_FALSE(r.ok());
  REQUIRE_FALSE(r.diagnostics.empty());
  CHECK(r.diagnostics.front().span.line == 2);
}

TEST_CASE("every corpus file loads") {
  for (const auto& name : testing::corpus()) {
    CAPTURE(name);
    CHECK_NOTHROW(testing::load(name));
  }
  CHECK_NOTHROW(testing::load("ex42"));
}
