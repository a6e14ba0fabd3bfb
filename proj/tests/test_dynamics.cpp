#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "belcal/dynamics.hpp"
#include "belcal/paper_table.hpp"
#include "common.hpp"

using namespace belcal;

namespace {

WorldPoint reals(std::initializer_list<double> xs) {
  std::vector<Value> v;
  for (double x : xs) v.push_back(Value::real(x));
  return WorldPoint(std::move(v));
}

BoundAction act(const TheorySpec& s, const char* name, std::initializer_list<double> args) {
  BoundAction a{*s.find_action(name), {}};
  for (double x : args) a.args.push_back(Value::real(x));
  return a;
}

}  // namespace

TEST_CASE("robot moves stop at the wall [trivial]") {
  const TheorySpec r = example("robot1d");
  CHECK(progress(r, reals({5, 1}), act(r, "move", {4}))[0].as_real() == 1.0);
  CHECK(progress(r, reals({3, 1}), act(r, "move", {4}))[0].as_real() == 0.0);
  CHECK(progress(r, reals({3, 1}), act(r, "move", {-4}))[0].as_real() == 7.0);
  const WorldPoint up = progress(r, reals({3, 1}), act(r, "up", {2.5}));
  CHECK(up[0].as_real() == 3.0);
  CHECK(up[1].as_real() == 3.5);
}

TEST_CASE("sensing leaves the world unchanged and weighs readings") {
  const TheorySpec r = example("robot1d");
  const WorldPoint w = reals({5, 2});
  CHECK(progress(r, w, act(r, "sonar", {6})).identical(w));
  CHECK(likelihood(r, w, act(r, "sonar", {6})) == doctest::Approx(gauss_density(1, 0, 4)));
  CHECK(likelihood(r, w, act(r, "sonar", {-1})) == 0.0);
}

TEST_CASE("updates are simultaneous") {
  const TheorySpec t = parse_theory(
      "theory swap\nfluent a : real\nfluent b : real\ninit p = 1\naction swap() { a' = b  b' = a }\n");
  const WorldPoint w = progress(t, reals({1, 2}), BoundAction{0, {}});
  CHECK(w[0].as_real() == 2.0);
  CHECK(w[1].as_real() == 1.0);
}

TEST_CASE("preconditions stop a trajectory") {
  const TheorySpec t = parse_theory(
      "theory gate\nfluent h : real\ninit p = 1\naction go(x: real) { poss = h + x <= 10  h' = h + x }\n");
  const std::vector<BoundAction> beta{act(t, "go", {4}), act(t, "go", {4}), act(t, "go", {4})};
  const Trajectory tr = simulate(t, reals({0}), beta);
  REQUIRE(tr.inexecutable_at.has_value());
  CHECK(*tr.inexecutable_at == 2);
  CHECK(tr.points.back()[0].as_real() == 8.0);
  CHECK_FALSE(poss(t, reals({8}), act(t, "go", {4})));
  const Trajectory ok = simulate(t, reals({0}), std::span(beta).first(2));
  CHECK_FALSE(ok.inexecutable_at.has_value());
  CHECK(ok.points.size() == 3);
}

TEST_CASE("errors from dynamics") {
  const TheorySpec t = parse_theory(
      "theory e\nfluent w : { a, b }\ninit p = 1\naction s(z: real) sensing { likelihood = z }\n"
      "action m(x: real ~ y: real) { likelihood = gauss(y; x, 1) }\n");
  const WorldPoint w({Value::sym(*t.symbols.find("a"))});
  CHECK(code_of([&] { likelihood(t, w, BoundAction{0, {Value::real(-1)}}); }) == ErrorCode::NegativeLikelihood);
  GroundAction g{1, {Value::real(0)}, std::nullopt, {}};
  CHECK(ground_alt(t, g, std::vector<Value>{Value::real(0.5)}).args.size() == 2);
  CHECK(code_of([&] { ground_alt(t, g, std::vector<Value>{}); }) == ErrorCode::ArityMismatch);
  CHECK(code_of([&] { ground_alt(t, g, std::vector<Value>{Value::sym(*t.symbols.find("a"))}); }) ==
        ErrorCode::DomainMismatch);
}

TEST_CASE("noisy actions use the actual argument") {
  const TheorySpec n = example("noisy");
  const GroundAction g = parse_query(n, "bel(true) after [nmove(-2)]").alpha[0];
  const BoundAction alt = ground_alt(n, g, std::vector<Value>{Value::real(-2.5)});
  CHECK(progress(n, reals({11}), alt)[0].as_real() == 13.5);
  CHECK(likelihood(n, reals({11}), alt) == doctest::Approx(gauss_density(-0.5, 0, 1)));
}

TEST_CASE("property: frame invariance (200 cases)") {
  const ExampleTheories t = load_example_theories(BELCAL_THEORY_DIR);
  const PropertyOutcome o = check_frame_invariance(t, 200, 77);
  CHECK(o.cases == 200);
  CHECK_MESSAGE(o.failures == 0, o.first_failure);
}
