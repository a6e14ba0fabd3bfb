#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "belcal/engine.hpp"
#include "belcal/oracle.hpp"
#include "common.hpp"

using namespace belcal;

TEST_CASE("enumeration on a two-value fluent [trivial]") {
  const TheorySpec t = parse_theory("theory f\nfluent f : { 0, 1 }\ninit p = cases { 1 if f = 0 ; 0 }\n");
  CHECK(enumerate_bel(t, parse_query(t, "bel(f = 0)")) == 1.0);
  CHECK(enumerate_bel(t, parse_query(t, "bel(f = 1)")) == 0.0);
}

TEST_CASE("enumeration reproduces the window values [reference]") {
  const TheorySpec w = example("window_discrete");
  CHECK(std::fabs(enumerate_bel(w, parse_query(w, "bel(win = 0)")) - 0.4) <= 1e-12);
  CHECK(std::fabs(enumerate_bel(w, parse_query(w, "bel(win = 0) after [setwin(0)]")) - 0.75) <= 1e-12);
  CHECK(std::fabs(enumerate_bel(w, parse_query(w, "bel(win = 0) after [setwin(0), seewin(0)]")) - 0.875) <= 1e-12);
  CHECK(code_of([] { enumerate_bel(example("robot1d"), parse_query(example("robot1d"), "bel(true)")); }) ==
        ErrorCode::InfiniteDomain);
}

TEST_CASE("Bayesian conditioning [derived]") {
  const TheorySpec s = example("sensewall");
  const PriorGrid prior = make_prior_grid(s, {{0, 2, 12, 2000}});
  const ErrFn err = make_err_fn(s, *s.find_action("sensewall"));
  const Query q = parse_query(s, "bel(h <= 4) after [sensewall(close)]");
  // (2/3 * 1 + 1/3 * 1) / (2/3 * 1 + 1/3 * 9) = 3/11
  CHECK(std::fabs(bayes_posterior(prior, err, q.alpha[0].nominal[0], q.pool, q.formula) - 3.0 / 11.0) <= 1e-3);
  const Query always = parse_query(s, "bel(true) after [sensewall(close)]");
  CHECK(bayes_posterior(prior, err, q.alpha[0].nominal[0], always.pool, always.formula) == 1.0);

  const TheorySpec r = example("robot1d");
  const PriorGrid rp = make_prior_grid(r, {{0, 2, 12, 1000}, {1, -32, 32, 4}});
  const ErrFn sonar = make_err_fn(r, *r.find_action("sonar"));
  const Query t = parse_query(r, "bel(true)");
  CHECK(code_of([&] { bayes_posterior(rp, sonar, Value::real(-1), t.pool, t.formula); }) == ErrorCode::ZeroEvidence);
  CHECK(code_of([&] { make_err_fn(r, *r.find_action("move")); }) == ErrorCode::OracleNotApplicable);
  CHECK(code_of([&] { make_prior_grid(r, {{0, 2, 12, 10}}); }) == ErrorCode::OracleNotApplicable);
}

TEST_CASE("oracle_bel picks a method") {
  const TheorySpec w = example("window_discrete");
  CHECK(oracle_bel(w, parse_query(w, "bel(win = 0) after [setwin(0)]")).method == OracleAnswer::Method::Enumerate);
  const TheorySpec r = example("robot1d");
  const OracleAnswer a = oracle_bel(r, parse_query(r, "bel(h <= 9) after [sonar(5)]"));
  CHECK(a.method == OracleAnswer::Method::Bayes);
  CHECK(a.value == doctest::Approx(0.97).epsilon(0.01));
  CHECK(code_of([&] { oracle_bel(r, parse_query(r, "bel(h <= 9) after [move(1)]")); }) ==
        ErrorCode::OracleNotApplicable);
  CHECK(code_of([&] { oracle_bel(r, parse_query(r, "bel(h@0 <= 9) after [sonar(3)]")); }) ==
        ErrorCode::OracleNotApplicable);
}

TEST_CASE("property: engine agrees with conditioning on sensing-only sequences (100 cases)") {
  const TheorySpec r = example("robot1d");
  const TheorySpec s = example("sensewall");
  const PriorGrid rp = make_prior_grid(r, {{0, 2, 12, 4000}, {1, -32, 32, 2}});
  const PriorGrid sp = make_prior_grid(s, {{0, 2, 12, 4000}});
  const ErrFn sonar = make_err_fn(r, *r.find_action("sonar"));
  const ErrFn wall = make_err_fn(s, *s.find_action("sensewall"));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 13);
  std::uniform_int_distribution<int> n_steps(1, 3);
  for (int i = 0; i < 100; ++i) {
    const bool robot = i % 2 == 0;
    const TheorySpec& th = robot ? r : s;
    std::string alpha;
    const int n = n_steps(rng);
    for (int k = 0; k < n; ++k) {
      if (k) alpha += ", ";
      alpha += robot ? "sonar(" + format_real(std::round(u(rng) * 10) / 10) + ")"
                     : std::string("sensewall(") + (u(rng) < 6 ? "close" : "far") + ")";
    }
    const std::string text = "bel(h <= " + format_real(std::round(u(rng) * 10) / 10) + ") after [" + alpha + "]";
    CAPTURE(text);
    const Query q = parse_query(th, text);
    PriorGrid g = robot ? rp : sp;
    for (const GroundAction& a : q.alpha) g = bayes_update(g, robot ? sonar : wall, a.nominal[0]);
    const double oracle = grid_belief(g, q.pool, q.formula);
    const double engine = bel(th, q, effective_config(th, q, EngineConfig{})).value;
    CHECK(std::fabs(engine - oracle) <= 2e-3);
  }
}
