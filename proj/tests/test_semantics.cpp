#include <doctest.h>

#include "rmpst/core/print.hpp"
#include "rmpst/frontend/parser.hpp"
#include "rmpst/semantics/semantics.hpp"
#include "support.hpp"

using namespace rmpst;

namespace {

std::string key(const std::string& from, const std::string& to, const std::string& label, const std::string& type) {
  auto t = parse_refinement(type);
  return action_key(Action{Role{from}, Role{to}, label, t.binder, t});
}

}  // namespace

TEST_CASE("both reduction orders of the commuting example") {
  GlobalState s{GlobalContext(), testing::load("ex42")};
  auto steps = gsteps(s);
  REQUIRE(steps.size() == 2);
  std::map<std::string, GlobalState> by_label;
  for (const auto& [a, n] : steps) by_label.emplace(a.label, n);

  const auto& hello = by_label.at("Hello");
  CHECK(to_string(hello.ctx) == "x^{p,q}:int{x < 0}");
  auto then = gsteps(hello);
  REQUIRE(then.size() == 1);
  CHECK(then[0].first.label == "Hola");
  CHECK(to_string(then[0].second.ctx) == "x^{p,q}:int{x < 0}, y^{r,s}:int{y > x}");

  const auto& hola = by_label.at("Hola");
  CHECK(to_string(hola.ctx) == "x^{}:int{x < 0}, y^{r,s}:int{y > x}");
  auto after = gsteps(hola);
  REQUIRE(after.size() == 1);
  CHECK(after[0].first.label == "Hello");
  CHECK(to_string(after[0].second.ctx) == "x^{p,q}:int{x < 0}, y^{r,s}:int{y > x}");
  CHECK(after[0].second.type.is_end());
}

TEST_CASE("global steps") {
  CHECK(gsteps(GlobalState{GlobalContext(), GlobalType::end()}).empty());
  auto steps = gsteps(GlobalState{GlobalContext(), testing::load("g3")});
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].first.label == "Password");
  CHECK(to_string(steps[0].second.ctx).rfind("try^{A,B}:", 0) == 0);
}

TEST_CASE("silent local steps") {
  auto l = parse_local("<Fst>(x:int) . B ? Snd(y:int{x = y}) . end");
  auto s = lsteps_silent(LocalState{LocalContext(), l});
  REQUIRE(s.size() == 1);
  CHECK(to_string(s[0].ctx) == "x^0:int");
  CHECK(alpha_equal(s[0].type, parse_local("B ? Snd(y:int{x = y}) . end")));
  CHECK(lsteps_silent(LocalState{LocalContext(), LocalType::end()}).empty());

  auto r = parse_local("rec t(i^w:int{i >= 0} := 0) . B ! a(x:int) . t(i := i + 1)");
  auto u = lsteps_silent(LocalState{LocalContext(), r});
  REQUIRE(u.size() == 1);
  CHECK(to_string(u[0].ctx) == "i^w:int{i >= 0}");
  CHECK(u[0].type.as<LComm>());
}

TEST_CASE("concrete local steps") {
  auto l = parse_local("B ! {a(x:int) . end ; b(y:bool) . end}");
  CHECK(lsteps(Role{"A"}, LocalState{LocalContext(), l}).size() == 2);
  CHECK(lsteps(Role{"A"}, LocalState{LocalContext(), LocalType::end()}).empty());

  auto c = parse_local("<Fst>(x:int) . B ? Snd(y:int{x = y}) . D ! Trd(z:int{x = z}) . end");
  auto steps = lsteps(Role{"C"}, LocalState{LocalContext(), c});
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].first.label == "Snd");
  CHECK(steps[0].second.ctx.find("x"));
}

TEST_CASE("associated configurations") {
  auto& po = testing::shared_options();
  auto g1 = associate(GlobalContext(), testing::load("g1"), po);
  CHECK(g1.size() == 4);
  CHECK(to_string(g1.at(Role{"C"}).type) == "<Fst>(x:int) . B ? Snd(y:int{x = y}) . D ! Trd(z:int{x = z}) . end");
  CHECK(associate(GlobalContext(), GlobalType::end(), po).empty());
  CHECK(associate(GlobalContext(), testing::load("higherlower"), po).size() == 3);
}

TEST_CASE("configuration steps") {
  auto& po = testing::shared_options();
  auto g1 = config_steps(associate(GlobalContext(), testing::load("g1"), po));
  // bystanders may be left anywhere in their silent closure
  REQUIRE_FALSE(g1.empty());
  for (const auto& [a, next] : g1) {
    CHECK(a.from == Role{"A"});
    CHECK(a.label == "Fst");
  }

  Configuration done{{Role{"A"}, LocalState{LocalContext(), LocalType::end()}}};
  CHECK(config_steps(done).empty());
  CHECK(is_terminal(done));

  auto ex = config_steps(associate(GlobalContext(), testing::load("ex42"), po));
  std::set<std::string> labels;
  for (const auto& [a, c] : ex) labels.insert(a.label);
  CHECK(labels == std::set<std::string>{"Hello", "Hola"});
}

TEST_CASE("traces of G2 at depth 2") {
  ExploreOptions eo;
  eo.depth = 2;
  auto t = traces(GlobalState{GlobalContext(), testing::load("g2")}, eo);
  auto number = key("A", "B", "Number", "x:int");
  TraceSet expected{{},
                    {number},
                    {number, key("B", "C", "Positive", "u:unit{x > 0}")},
                    {number, key("B", "C", "Zero", "u:unit{x = 0}")},
                    {number, key("B", "C", "Negative", "u:unit{x < 0}")}};
  CHECK(t == expected);
  CHECK(traces(GlobalState{GlobalContext(), GlobalType::end()}, eo) == TraceSet{{}});
}

TEST_CASE("trace equivalence, positive and negative") {
  ExploreOptions eo;
  eo.depth = 4;
  auto r = check_trace_equivalence(GlobalContext(), testing::load("higherlower"), eo, testing::shared_options());
  CHECK(r.equal);
  CHECK(check_trace_equivalence(GlobalContext(), GlobalType::end(), eo, testing::shared_options()).equal);

  // D's projection with a mutated label must diverge
  auto g = testing::load("g1");
  auto c = associate(GlobalContext(), g, testing::shared_options());
  c.at(Role{"D"}).type = parse_local("<Fst>(x:int) . <Snd>(y:int{x = y}) . C ? Trx(z:int{x = z}) . end");
  CHECK(traces(GlobalState{GlobalContext(), g}, eo) != traces(c, eo));
}

TEST_CASE("progress finds a stuck configuration") {
  // B waits for a message A never sends
  Configuration c{{Role{"A"}, LocalState{LocalContext(), LocalType::end()}},
                  {Role{"B"}, LocalState{LocalContext(), parse_local("A ? m(x:int) . end")}}};
  CHECK(config_steps(c).empty());
  CHECK_FALSE(is_terminal(c));
}

TEST_CASE("budget is enforced") {
  ExploreOptions eo;
  eo.depth = 12;
  eo.node_budget = 5;
  CHECK_THROWS_AS(traces(GlobalState{GlobalContext(), testing::load("higherlower")}, eo), ExplorationBudgetExceeded);
}
