#include <doctest.h>

#include "rmpst/core/print.hpp"
#include "rmpst/frontend/parser.hpp"
#include "rmpst/refine/typing.hpp"
#include "rmpst/refine/validity.hpp"
#include "support.hpp"

using namespace rmpst;

namespace {

Formula implication(const std::string& hyp, const std::string& goal, std::vector<std::string> ints) {
  Formula f;
  for (const auto& v : ints) f.declare(v, BaseType::Int);
  f.hyps.push_back(parse_expr(hyp));
  f.goal = parse_expr(goal);
  return f;
}

}  // namespace

TEST_CASE("promotion") {
  CHECK(to_string(promote(parse_local_context("x^0:int"))) == "x^w:int");
  CHECK(promote(LocalContext()).empty());
  CHECK(to_string(promote(parse_local_context("x^w:int, y^0:bool"))) == "x^w:int, y^w:bool");
}

TEST_CASE("well-formed types") {
  CHECK(wf_type(LocalContext(), parse_refinement("x:int{x >= 0}")));
  CHECK(wf_type(parse_local_context("n^0:int"), parse_refinement("y:int{y > n}")));
  CHECK_FALSE(wf_type(LocalContext(), parse_refinement("x:int{x + true}")));
}

TEST_CASE("expression typing") {
  auto t = type_expr(LocalContext(), parse_expr("3"));
  CHECK(alpha_equal(t, parse_refinement("v:int{v = 3}")));
  auto ctx = parse_local_context("x^w:int{x > 0}");
  auto tx = type_expr(ctx, parse_expr("x + 1"));
  CHECK(alpha_equal(tx, parse_refinement("v:int{v = x + 1}")));
  try {
    type_expr(parse_local_context("x^0:int"), parse_expr("x"));
    FAIL("expected IrrelevantVariableUse");
  } catch (const TypeError& e) {
    CHECK(e.kind() == TypeErrorKind::IrrelevantVariableUse);
  }
}

TEST_CASE("type checking against refinements") {
  auto oracle = Oracle::solver();
  CHECK(check_type(LocalContext(), parse_expr("5"), parse_refinement("v:int{v > 0}"), oracle).ok);
  CHECK(check_type(parse_local_context("x^w:int{x > 0}"), parse_expr("x"), parse_refinement("v:int{v >= 0}"), oracle).ok);
  CHECK_FALSE(check_type(LocalContext(), parse_expr("0"), parse_refinement("v:int{v > 0 && v < 0}"), oracle).ok);

  // the second case cross-checked with the independent brute-force oracle
  auto f = implication("x > 0", "x >= 0", {"x"});
  CHECK_FALSE(testing::brute_force(f, 64));
}

TEST_CASE("context encoding") {
  CHECK(encode_context(LocalContext()).hyps.empty());
  auto f = encode_context(parse_local_context("x^w:int{x > 0}, y^0:int{y > x}"));
  REQUIRE(f.hyps.size() == 2);
  CHECK(to_string(f.hyps[0]) == "x > 0");
  CHECK(to_string(f.hyps[1]) == "y > x");
  auto b = encode_context(parse_local_context("b^w:bool{b}"));
  REQUIRE(b.hyps.size() == 1);
  CHECK(to_string(b.hyps[0]) == "b");
}

TEST_CASE("validity in both modes") {
  auto oracle = Oracle::solver();
  auto valid = implication("x > 0", "x >= 0", {"x"});
  auto invalid = implication("x > 0", "x > 1", {"x"});
  CHECK(oracle.check(valid).verdict == Verdict::Valid);
  auto r = oracle.check(invalid);
  REQUIRE(r.verdict == Verdict::Invalid);
  CHECK(std::get<std::int64_t>(r.model.at("x")) == 1);

  CHECK(check_validity_enumerate(valid, 16).verdict == Verdict::Valid);
  auto e = check_validity_enumerate(invalid, 16);
  REQUIRE(e.verdict == Verdict::Invalid);
  CHECK(std::get<std::int64_t>(e.model.at("x")) == 1);
}

TEST_CASE("win-branch obligation agrees with enumeration at 128") {
  // n, x in [0, 100): n = x is not implied, n = x given n <= x && n >= x is
  auto oracle = Oracle::solver();
  auto plain = implication("0 <= n && n < 100 && 0 <= x && x < 100", "n = x", {"n", "x"});
  auto pinned = implication("0 <= n && n < 100 && 0 <= x && x < 100 && n <= x && n >= x", "n = x", {"n", "x"});
  for (const auto& f : {plain, pinned}) {
    auto s = oracle.check(f).verdict;
    auto e = check_validity_enumerate(f, 128).verdict;
    CHECK(s == e);
    CHECK((testing::brute_force(f, 128).has_value() ? Verdict::Invalid : Verdict::Valid) == s);
  }
}

TEST_CASE("emptiness") {
  auto oracle = Oracle::solver();
  auto t = parse_refinement("x:int{x > 0 && x < 0}");
  CHECK(check_empty(LocalContext(), t, oracle).valid());
  CHECK(check_empty(LocalContext(), t, Oracle::enumerate(64)).valid());
  CHECK_FALSE(check_empty(LocalContext(), parse_refinement("x:int{x > 0}"), oracle).valid());
}

TEST_CASE("enumerator matches the brute-force oracle on random formulas") {
  testing::FormulaGen gen(7);
  for (int i = 0; i < 60; ++i) {
    auto f = gen.next();
    CAPTURE(to_string(f.as_expr()));
    auto expect = testing::brute_force(f, 8);
    auto got = check_validity_enumerate(f, 8);
    CHECK((got.verdict == Verdict::Invalid) == expect.has_value());
    if (got.verdict == Verdict::Invalid) CHECK_FALSE(eval_bool(f.as_expr(), got.model));
  }
}

TEST_CASE("solver models are real counter-models") {
  testing::FormulaGen gen(11);
  auto oracle = Oracle::solver();
  for (int i = 0; i < 20; ++i) {
    auto f = gen.next();
    auto r = oracle.check(f);
    if (r.verdict != Verdict::Invalid) continue;
    Env env = r.model;
    for (const auto& [v, s] : f.decls)
      if (!env.count(v)) env[v] = std::int64_t{0};
    CHECK_FALSE(eval_bool(f.as_expr(), env));
  }
}

TEST_CASE("missing solver is reported") {
  SolverConfig cfg;
  cfg.path = "/nonexistent/solver";
  Formula f = implication("x > 0", "x >= 0", {"x"});
  CHECK_THROWS_AS(check_validity_solver(f, cfg), SolverUnavailable);
}

TEST_CASE("chooser obligations for the guessing game") {
  auto oracle = Oracle::solver();
  auto ctx = parse_local_context(
      "n^w:int{0 <= n && n < 100}, t^w:int{0 < t}, x^w:int{0 <= x && x < 100}");
  std::vector<LBranch> branches{
      {"higher", "_h", parse_refinement("_h:unit{n > x && t > 1}"), LocalType::end()},
      {"lower", "_l", parse_refinement("_l:unit{n < x && t > 1}"), LocalType::end()},
      {"win", "_w", parse_refinement("_w:unit{n = x}"), LocalType::end()},
      {"lose", "_o", parse_refinement("_o:unit{n <> x && t = 1}"), LocalType::end()},
  };
  std::vector<GuardedLabel> good{{"win", parse_expr("x = n")},
                                 {"lose", parse_expr("t = 1")},
                                 {"higher", parse_expr("n > x")},
                                 {"lower", parse_expr("true")}};
  auto ok = check_chooser(ctx, branches, good, oracle);
  CHECK(ok.ok());
  CHECK(ok.exhaustive.valid());

  auto weak = good;
  weak[1].guard = parse_expr("t = 0");
  auto bad = check_chooser(ctx, branches, weak, oracle);
  CHECK_FALSE(bad.ok());
  const auto* fail = bad.first_failure();
  REQUIRE(fail);
  CHECK(fail->label == "higher");
  CHECK(std::get<std::int64_t>(fail->result.model.at("t")) == 1);

  std::vector<GuardedLabel> no_lose{good[0], good[2], good[3]};
  auto partial = check_chooser(ctx, branches, no_lose, oracle);
  CHECK_FALSE(partial.ok());
  CHECK(partial.exhaustive.verdict == Verdict::Invalid);
}
