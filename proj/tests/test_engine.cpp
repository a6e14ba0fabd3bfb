#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "belcal/engine.hpp"
#include "belcal/paper_table.hpp"
#include "common.hpp"

using namespace belcal;

namespace {

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

EngineConfig cfg_for(const TheorySpec& s, const Query& q, std::initializer_list<std::pair<const char*, const char*>> kv = {}) {
  ConfigOverrides o;
  for (auto [k, v] : kv) o.set(k, v);
  return effective_config(s, q, EngineConfig{}, o);
}

BeliefResult B(const TheorySpec& s, const char* text, std::initializer_list<std::pair<const char*, const char*>> kv = {}) {
  const Query q = parse_query(s, text);
  return bel(s, q, cfg_for(s, q, kv));
}

}  // namespace

TEST_CASE("robot1d reference values [reference]") {
  const TheorySpec r = example("robot1d");
  CHECK(B(r, "bel(h <= 9)").value == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(B(r, "bel(h = 0) after [move(4)]").value == doctest::Approx(0.2).epsilon(1e-3));
  CHECK(B(r, "bel(h <= 3) after [move(4)]").value == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(B(r, "bel(h@0 > 1) after [move(4)]").value == 1.0);
}

TEST_CASE("closed forms [derived]") {
  const TheorySpec r = example("robot1d");
  // v ~ N(0, 16): P(v <= 4) = Phi(1).
  CHECK(std::fabs(B(r, "bel(v <= 4)").value - Phi(1.0)) <= 1e-3);
  // h ~ U[2, 12] shifted by the wall: P(h' <= 3 after move(1)) = P(h <= 4) = 0.2.
  CHECK(std::fabs(B(r, "bel(h <= 3) after [move(1)]").value - 0.2) <= 1e-3);
  // noisy: h' = h + 2 - e with h ~ U[10, 12], e ~ N(0, 1):
  // P(h' >= 11) = (1/2) * integral_1^3 Phi(t) dt.
  const TheorySpec n = example("noisy");
  auto F = [](double t) { return t * Phi(t) + phi(t); };
  const double want = 0.5 * (F(3) - F(1));
  CHECK(std::fabs(B(n, "bel(h >= 11) after [nmove(-2)]").value - want) <= 1e-3);
  // A single Gaussian reading of a uniform prior: posterior mass on [2, 9].
  const double z = 5.0;
  const double num = Phi((9 - z) / 2) - Phi((2 - z) / 2);
  const double den = Phi((12 - z) / 2) - Phi((2 - z) / 2);
  CHECK(std::fabs(B(r, "bel(h <= 9) after [sonar(5)]").value - num / den) <= 1e-3);
}

TEST_CASE("result fields and notes") {
  const TheorySpec r = example("robot1d");
  const BeliefResult q = B(r, "bel(h <= 9)");
  CHECK(q.backend == Backend::Quad);
  CHECK(q.gamma > 0.0);
  CHECK(q.value == doctest::Approx(q.numerator / q.gamma));
  CHECK_FALSE(q.std_error.has_value());
  CHECK(q.dims.size() == 1);  // v is irrelevant and integrated exactly
  const BeliefResult m = B(r, "bel(h <= 9)", {{"backend", "mc"}, {"samples", "50000"}, {"seed", "3"}});
  CHECK(m.backend == Backend::MonteCarlo);
  REQUIRE(m.std_error.has_value());
  REQUIRE(m.ess.has_value());
  CHECK(m.nodes == 50000);
  CHECK(std::fabs(m.value - 0.7) <= 3 * *m.std_error);
}

TEST_CASE("errors") {
  const TheorySpec r = example("robot1d");
  CHECK(code_of([&] { B(r, "bel(h > 0) after [sonar(-1)]"); }) == ErrorCode::DegenerateBelief);
  CHECK(code_of([&] { B(r, "bel(h > 7 * v)", {{"max-dims", "1"}}); }) == ErrorCode::DimensionLimit);
  CHECK(code_of([&] { B(r, "bel(true)", {{"grid", "0"}}); }) == ErrorCode::ConfigError);
  const TheorySpec w = example("window");
  CHECK(code_of([&] { marginal(w, parse_query(w, "marginal win"), EngineConfig{}); }) == ErrorCode::FiniteFluentMarginal);
}

TEST_CASE("knows") {
  const TheorySpec r = example("robot1d");
  auto K = [&](const char* text) {
    const Query q = parse_query(r, text);
    return knows(r, q, cfg_for(r, q)).known;
  };
  CHECK(K("knows(2 <= h and h <= 12)"));
  CHECK_FALSE(K("knows(h <= 9)"));
  CHECK(K("knows(h@0 > 1) after [move(4)]"));
  CHECK(K("knows(h >= 0) after [move(20)]"));
  CHECK_FALSE(K("knows(h > 0) after [move(4)]"));
}

TEST_CASE("configuration precedence: flags > query > theory") {
  const TheorySpec t = parse_theory("theory t\nfluent h : real\ninit p = cases { 1 if 0 <= h and h <= 1 ; 0 }\nconfig grid = 501\n");
  ConfigOverrides flag;
  flag.set("grid", "3001");
  const Query plain = parse_query(t, "bel(h < 0.5)");
  const Query opt = parse_query(t, "bel(h < 0.5) grid=1001");
  CHECK(effective_config(t, plain, EngineConfig{}).quad_points_per_dim == 501);
  CHECK(effective_config(t, opt, EngineConfig{}).quad_points_per_dim == 1001);
  CHECK(effective_config(t, opt, EngineConfig{}, flag).quad_points_per_dim == 3001);
}

TEST_CASE("grid-only densities use quadrature; mc falls back with a note [derived]") {
  const TheorySpec t = parse_theory("theory t\nfluent h : real\ninit p = cases { h if 0 <= h and h <= 1 ; 0 }\n");
  // density 2h on [0, 1]: P(h <= 0.5) = 0.25.
  CHECK(std::fabs(B(t, "bel(h <= 0.5)").value - 0.25) <= 1e-3);
  const BeliefResult m = B(t, "bel(h <= 0.5)", {{"backend", "mc"}});
  CHECK(m.backend == Backend::Quad);
  CHECK_FALSE(m.notes.empty());
}

TEST_CASE("marginals [derived]") {
  const TheorySpec r = example("robot1d");
  auto M = [&](const char* text) { return marginal(r, parse_query(r, text), EngineConfig{}); };
  const Histogram h = M("marginal h range=4,6 bins=4");
  CHECK(h.mass.size() == 4);
  CHECK(h.below == doctest::Approx(0.2).epsilon(1e-3));
  CHECK(h.above == doctest::Approx(0.6).epsilon(1e-3));
  CHECK(std::fabs(h.total() - 1.0) <= 1e-9);
  const Histogram wall = M("marginal h after [move(4)] range=0,8 bins=8");
  REQUIRE(wall.atoms.size() == 1);
  CHECK(wall.atoms[0].first == 0.0);
  CHECK(wall.atoms[0].second == doctest::Approx(0.2).epsilon(1e-3));
  for (double m : wall.mass) CHECK(m == doctest::Approx(0.1).epsilon(1e-2));
  const Histogram smooth = M("marginal v");
  CHECK(smooth.atoms.empty());
  CHECK(smooth.mass.size() == 50);
  CHECK(std::fabs(smooth.total() - 1.0) <= 1e-9);
  EngineConfig mc;
  mc.backend = Backend::MonteCarlo;
  mc.mc_samples = 40000;
  const Histogram hm = marginal(r, parse_query(r, "marginal h after [move(4)] range=0,8 bins=8"), mc);
  REQUIRE(hm.atoms.size() == 1);
  CHECK(std::fabs(hm.atoms[0].second - 0.2) <= 0.01);
  CHECK(std::fabs(hm.total() - 1.0) <= 1e-9);
}

TEST_CASE("property: 0 <= bel <= 1, bel(true) = 1, monotone in the threshold (120 cases)") {
  const TheorySpec r = example("robot1d");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 14);
  std::uniform_real_distribution<double> mv(-5, 5);
  for (int i = 0; i < 120; ++i) {
    const double a = std::round(u(rng) * 100) / 100;
    const double b = a + std::round(std::fabs(mv(rng)) * 100) / 100;
    const std::string alpha = " after [move(" + format_real(std::round(mv(rng) * 10) / 10) + "), sonar(" +
                              format_real(std::round(std::fabs(u(rng)) * 10) / 10) + ")]";
    CAPTURE(alpha);
    const double pa = B(r, ("bel(h <= " + format_real(a) + ")" + alpha).c_str(), {{"grid", "401"}}).value;
    const double pb = B(r, ("bel(h <= " + format_real(b) + ")" + alpha).c_str(), {{"grid", "401"}}).value;
    const double pt = B(r, ("bel(true)" + alpha).c_str(), {{"grid", "401"}}).value;
    CHECK(pa >= 0.0);
    CHECK(pb <= 1.0);
    CHECK(pa <= pb);
    CHECK(pt == 1.0);
  }
}

TEST_CASE("property suites from the acceptance table") {
  const ExampleTheories t = load_example_theories(BELCAL_THEORY_DIR);
  for (const PropertyOutcome& o : {check_complementarity(t, 100, 101), check_seed_determinism(t, 100, 103),
                                   check_actual_irrelevance(t, 100, 104)}) {
    CAPTURE(o.name);
    CHECK(o.cases >= 100);
    CHECK_MESSAGE(o.failures == 0, o.first_failure);
  }
}

TEST_CASE("quadrature is independent of the thread count") {
  const TheorySpec n = example("noisy");
  const BeliefResult a = B(n, "bel(h >= 10) after [nmove(-2), nmove(2)]", {{"threads", "1"}, {"grid", "201"}});
  const BeliefResult b = B(n, "bel(h >= 10) after [nmove(-2), nmove(2)]", {{"threads", "5"}, {"grid", "201"}});
  CHECK(a.value == b.value);
  CHECK(a.gamma == b.gamma);
}

TEST_CASE("samplers reproduce the prior and outcome moments [derived]") {
  const TheorySpec r = example("robot1d");
  const InitForm form = analyze_init(r);
  std::mt19937_64 rng(21);
  double sw = 0.0;
  double sh = 0.0;
  double sv2 = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto [w, weight] = sample_initial(r, form, rng);
    sw += weight;
    sh += weight * w[0].as_real();
    sv2 += weight * w[1].as_real() * w[1].as_real();
  }
  // h ~ U[2, 12] has mean 7; v ~ N(0, 16).
  CHECK(std::fabs(sh / sw - 7.0) <= 0.05);
  CHECK(std::fabs(sv2 / sw - 16.0) <= 0.5);

  const TheorySpec nz = example("noisy");
  const GroundAction g = parse_query(nz, "bel(true) after [nmove(-2)]").alpha[0];
  const WorldPoint w({Value::real(11.0)});
  double tw = 0.0;
  double ty = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto [y, weight] = sample_outcome(nz, g, w, rng, EngineConfig{});
    REQUIRE(y.size() == 1);
    tw += weight;
    ty += weight * y[0].as_real();
  }
  // The likelihood N(y - x; 0, 1) integrates to 1 over y and has mean x.
  CHECK(std::fabs(tw / n - 1.0) <= 0.02);
  CHECK(std::fabs(ty / tw + 2.0) <= 0.03);
}

TEST_CASE("deterministic actions with a likelihood reweight worlds [derived]") {
  const TheorySpec t = parse_theory(
      "theory t\nfluent h : real\ninit p = cases { 0.1 if 0 <= h and h <= 10 ; 0 }\n"
      "action m() { likelihood = cases { 2 if h > 5 ; 1 } }\n");
  // Prior mass 1/2 on h > 5 doubled: (2 * 0.5) / (2 * 0.5 + 0.5) = 2/3.
  CHECK(std::fabs(B(t, "bel(h > 5) after [m]").value - 2.0 / 3.0) <= 1e-3);
  CHECK(std::fabs(B(t, "bel(h > 5) after [m]", {{"backend", "mc"}, {"samples", "50000"}}).value - 2.0 / 3.0) <= 0.01);
}
