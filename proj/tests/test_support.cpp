#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "belcal/support.hpp"
#include "common.hpp"

using namespace belcal;

TEST_CASE("robot1d initial density is uniform x gauss [derived]") {
  const TheorySpec r = example("robot1d");
  const InitForm f = analyze_init(r);
  REQUIRE(f.combos.size() == 1);
  CHECK(f.continuous_fluents.size() == 2);
  const ProductForm& p = f.combos[0].form;
  CHECK(p.factors[0].kind == Factor::Kind::Uniform);
  CHECK(p.factors[0].lo == 2.0);
  CHECK(p.factors[0].hi == 12.0);
  CHECK(p.factors[1].kind == Factor::Kind::Gauss);
  CHECK(p.factors[1].var == 16.0);
  // 0.1 * 10 * 1
  CHECK(f.total_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("window initial density splits by the finite fluent [derived]") {
  const TheorySpec w = example("window");
  const InitForm f = analyze_init(w);
  REQUIRE(f.combos.size() == 2);
  double m0 = 0.0;
  double m1 = 0.0;
  const std::uint32_t win = *w.find_fluent("win");
  for (const auto& c : f.combos) {
    (w.symbols.name(c.values[win].as_sym()) == "0" ? m0 : m1) = c.form.mass();
  }
  CHECK(m0 == doctest::Approx(0.4));
  CHECK(m1 == doctest::Approx(0.6));
  CHECK(f.total_mass == doctest::Approx(1.0));
}

TEST_CASE("non-product densities are reported") {
  const TheorySpec t = parse_theory("theory t\nfluent h : real\ninit p = cases { h if 0 <= h and h <= 1 ; 0 }\n");
  CHECK(code_of([&] { analyze_init(t); }) == ErrorCode::UnrecognizedInitForm);
  const TheorySpec u = parse_theory("theory t\nfluent h : real\ninit p = 1\n");
  CHECK(code_of([&] { analyze_init(u); }).has_value());
}

TEST_CASE("likelihood supports") {
  const TheorySpec r = example("robot1d");
  const ActionDecl& sonar = r.actions[*r.find_action("sonar")];
  SupportScope scope;
  scope.fluents = {Value::real(5.0), std::nullopt};
  scope.params = {std::nullopt};
  scope.target_is_param = true;
  scope.target = 0;
  const VarSupport s = analyze_support(r.pool, sonar.likelihood, scope);
  REQUIRE(s.kind != VarSupport::Kind::Unbounded);
  const auto [lo, hi] = s.range(8.0);
  CHECK(lo <= 0.0 + 1e-12);  // gauss(5, 2) cut at 8 sigma is clipped by z >= 0
  CHECK(hi == doctest::Approx(21.0));

  const TheorySpec n = example("noisy");
  const ActionDecl& nm = n.actions[*n.find_action("nmove")];
  SupportScope s2;
  s2.fluents = {std::nullopt};
  s2.params = {Value::real(-2.0), std::nullopt};
  s2.target_is_param = true;
  s2.target = 1;
  const VarSupport g = analyze_support(n.pool, nm.likelihood, s2);
  CHECK(g.kind == VarSupport::Kind::Gauss);
  CHECK(g.mean == -2.0);
  CHECK(g.sd == 1.0);
}

TEST_CASE("formula bounds") {
  const TheorySpec r = example("robot1d");
  const Query q = parse_query(r, "bel(2 <= h and h <= 9)");
  SupportScope scope;
  scope.fluents = {std::nullopt, std::nullopt};
  scope.target = 0;
  const auto b = formula_bounds(q.pool, q.formula, scope);
  REQUIRE(b.has_value());
  CHECK(b->first == 2.0);
  CHECK(b->second == 9.0);
  const Query never = parse_query(r, "bel(h < 1 and h > 3)");
  CHECK_FALSE(formula_bounds(never.pool, never.formula, scope).has_value());
}

TEST_CASE("enumerate_domains in odometer order [trivial]") {
  SymbolTable s;
  const Domain a = Domain::of({s.intern("x"), s.intern("y")});
  const Domain b = Domain::of({s.intern("p"), s.intern("q"), s.intern("r")});
  const auto rows = enumerate_domains({&a, &b});
  REQUIRE(rows.size() == 6);
  CHECK(s.name(rows[0][0]) == "x");
  CHECK(s.name(rows[0][1]) == "p");
  CHECK(s.name(rows[1][1]) == "q");
  CHECK(s.name(rows[5][0]) == "y");
  CHECK(s.name(rows[5][1]) == "r");
  CHECK(enumerate_domains({}).size() == 1);
}
