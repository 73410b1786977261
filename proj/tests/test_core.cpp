#include <doctest.h>

#include "rmpst/core/print.hpp"
#include "rmpst/core/value.hpp"
#include "rmpst/frontend/parser.hpp"
#include "support.hpp"

using namespace rmpst;

TEST_CASE("free variables") {
  CHECK(free_vars(parse_refinement("x:int{x >= 0}")).empty());
  CHECK(free_vars(parse_refinement("y:int{y > x}")) == std::set<std::string>{"x"});
  CHECK(free_vars(testing::load("g1")).empty());
  CHECK(free_vars(parse_expr("a + b * a")) == std::set<std::string>{"a", "b"});
}

TEST_CASE("unfold re-seeds the recursion with the assignment") {
  auto g = parse_global("rec t(x:int{x >= 0} := 0) . A -> B : a(y:int) . t(x := x + 1)");
  auto u = unfold(g);
  auto m = u.as<GMessage>();
  REQUIRE(m);
  CHECK(m->branches.front().label == "a");
  auto r = m->branches.front().cont.as<GRec>();
  REQUIRE(r);
  REQUIRE(r->vars.size() == 1);
  CHECK(to_string(r->vars[0].init) == "x + 1");
}

TEST_CASE("unfold of G3 exposes Password, twice for PingPong exposes Ping again") {
  auto g3 = testing::load("g3");
  auto u = unfold(g3);
  REQUIRE(u.as<GMessage>());
  CHECK(u.as<GMessage>()->branches.front().label == "Password");

  GlobalType g = testing::load("pingpong1");
  while (!g.as<GRec>()) g = g.as<GMessage>()->branches.front().cont;
  auto once = unfold(g);
  auto m = once.as<GMessage>();
  REQUIRE(m);
  CHECK(m->branches.front().label == "Ping1");
  auto back = m->branches.front().cont.as<GMessage>()->branches.front().cont;
  REQUIRE(back.as<GRec>());
  auto twice = unfold(back);
  CHECK(twice.as<GMessage>()->branches.front().label == "Ping1");
}

TEST_CASE("global context extension") {
  auto T = parse_refinement("x:int");
  auto c = extend_global(GlobalContext(), "x", {Role{"A"}, Role{"B"}}, T);
  CHECK(to_string(c) == "x^{A,B}:int");

  auto empty_knowers = GlobalContext().appended(GlobalEntry{"x", {}, T});
  CHECK(to_string(extend_global(empty_knowers, "x", {Role{"A"}, Role{"B"}}, T)) == "x^{A,B}:int");

  auto a_only = GlobalContext().appended(GlobalEntry{"x", {Role{"A"}}, T});
  CHECK_THROWS_AS(extend_global(a_only, "x", {Role{"B"}}, T), UndefinedExtension);
  CHECK_THROWS_AS(extend_global(a_only, "x", {}, T), UndefinedExtension);
}

TEST_CASE("local context extension, all cases") {
  auto T = parse_refinement("x:int");
  CHECK(to_string(extend_local(LocalContext(), "x", Mult::Omega, T)) == "x^w:int");
  auto zero = parse_local_context("x^0:int");
  auto omega = parse_local_context("x^w:int");
  CHECK(to_string(extend_local(zero, "x", Mult::Omega, T)) == "x^w:int");
  CHECK(to_string(extend_local(zero, "x", Mult::Zero, T)) == "x^0:int");
  CHECK(to_string(extend_local(omega, "x", Mult::Omega, T)) == "x^w:int");
  CHECK_THROWS_AS(extend_local(omega, "x", Mult::Zero, T), UndefinedExtension);
  // a different type is never compatible
  CHECK_THROWS_AS(extend_local(omega, "x", Mult::Omega, parse_refinement("x:bool")), UndefinedExtension);
}

TEST_CASE("alpha equivalence and canonical text") {
  auto a = parse_global("A -> B : m(x:int{x > 0}) . B -> A : n(y:int{y = x}) . end");
  auto b = parse_global("A -> B : m(u:int{u > 0}) . B -> A : n(w:int{w = u}) . end");
  auto c = parse_global("A -> B : m(u:int{u > 0}) . B -> A : n(w:int{w = 0}) . end");
  CHECK(alpha_equal(a, b));
  CHECK(canonical_text(a) == canonical_text(b));
  CHECK_FALSE(alpha_equal(a, c));
  CHECK(alpha_equal(parse_refinement("x:int{x > 1}"), parse_refinement("z:int{z > 1}")));
}

TEST_CASE("printing round-trips through the parser") {
  for (const auto& name : testing::corpus()) {
    auto g = testing::load(name);
    auto text = to_string(g);
    CAPTURE(text);
    CHECK(alpha_equal(parse_global(text), g));
  }
}

TEST_CASE("evaluation wraps around and rejects sort errors") {
  Env env{{"x", std::int64_t{INT64_MAX}}, {"b", true}};
  CHECK(std::get<std::int64_t>(eval(parse_expr("x + 1"), env)) == INT64_MIN);
  CHECK(eval_bool(parse_expr("b && x > 0"), env));
  CHECK_THROWS_AS(eval(parse_expr("x + b"), env), EvalError);
  CHECK_THROWS_AS(eval(parse_expr("y"), env), EvalError);
}

TEST_CASE("contractiveness") {
  CHECK_THROWS_AS(check_contractive(GlobalType::rec("t", {}, GlobalType::tvar("t"))), InvariantViolation);
  CHECK_NOTHROW(check_contractive(testing::load("g3")));
}
