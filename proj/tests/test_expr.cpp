#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "belcal/expr.hpp"

using namespace belcal;

namespace {

double ev(const ExprPool& p, ExprId id, std::span<const WorldPoint> traj = {}, std::span<const Value> params = {},
          std::size_t now = 0) {
  return eval_real(p, id, Env{traj, params, now, 0.0});
}

}  // namespace

TEST_CASE("arithmetic [trivial]") {
  ExprPool p;
  const ExprId e = p.binary(Op::Add, p.real(2), p.binary(Op::Mul, p.real(3), p.real(4)));
  CHECK(ev(p, e) == 14.0);
  CHECK(ev(p, p.binary(Op::Min, p.real(-1), p.real(2))) == -1.0);
  CHECK(ev(p, p.binary(Op::Max, p.real(-1), p.real(2))) == 2.0);
  CHECK(ev(p, p.unary(Op::Abs, p.real(-2.5))) == 2.5);
  CHECK(ev(p, p.unary(Op::Neg, p.real(2.5))) == -2.5);
  CHECK(ev(p, p.binary(Op::Div, p.real(1), p.real(4))) == 0.25);
}

TEST_CASE("division by zero raises") {
  ExprPool p;
  const ExprId e = p.binary(Op::Div, p.real(1), p.real(0));
  try {
    ev(p, e);
    FAIL("no error");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::DivisionByZero);
  }
}

TEST_CASE("gauss density [derived]") {
  CHECK(gauss_density(0, 0, 1) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-15));
  CHECK(gauss_density(1, 0, 4) == doctest::Approx(std::exp(-1.0 / 8.0) / std::sqrt(8 * std::numbers::pi)).epsilon(1e-15));
  CHECK(gauss_density(3, 3, 0.25) == doctest::Approx(1.0 / std::sqrt(0.5 * std::numbers::pi)).epsilon(1e-15));
  CHECK_THROWS_AS(gauss_density(0, 0, 0), Error);
  CHECK_THROWS_AS(gauss_density(0, 0, -1), Error);
  ExprPool p;
  const ExprId g = p.gauss(p.real(0), p.real(0), p.real(-1));
  try {
    ev(p, g);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveVariance);
  }
}

TEST_CASE("cases takes the first true guard, else the default") {
  ExprPool p;
  const ExprId x = p.fluent(0);
  const Branch br[] = {{p.compare(CmpOp::Lt, x, p.real(0)), p.real(-1)}, {p.compare(CmpOp::Lt, x, p.real(10)), p.real(1)},
                       {p.compare(CmpOp::Lt, x, p.real(5)), p.real(99)}};
  const ExprId c = p.cases(br, p.real(7));
  auto at = [&](double v) {
    const WorldPoint w(std::vector<Value>{Value::real(v)});
    return ev(p, c, std::span<const WorldPoint>(&w, 1));
  };
  CHECK(at(-3) == -1.0);
  CHECK(at(3) == 1.0);
  CHECK(at(20) == 7.0);
}

TEST_CASE("formulas, equality tolerance and history") {
  ExprPool p;
  const ExprId h = p.fluent(0);
  const ExprId h0 = p.fluent(0, 0);
  const std::vector<WorldPoint> traj{WorldPoint({Value::real(5)}), WorldPoint({Value::real(1)})};
  const ExprId eq = p.compare(CmpOp::Eq, h, p.real(1.05));
  CHECK_FALSE(eval_formula(p, eq, Env{traj, {}, 1, 0.0}));
  CHECK(eval_formula(p, eq, Env{traj, {}, 1, 0.1}));
  CHECK(eval_real(p, h0, Env{traj, {}, 1, 0.0}) == 5.0);
  CHECK(eval_real(p, h, Env{traj, {}, 1, 0.0}) == 1.0);
  const ExprId imp = p.logic(Op::Implies, p.truth(false), p.truth(false));
  CHECK(eval_formula(p, imp, Env{}));
  CHECK_FALSE(eval_formula(p, p.negation(imp), Env{}));
  CHECK(eval_formula(p, p.logic(Op::Or, p.truth(false), p.truth(true)), Env{}));
  CHECK_FALSE(eval_formula(p, p.logic(Op::And, p.truth(false), p.truth(true)), Env{}));
}

TEST_CASE("symbols compare by identity") {
  SymbolTable syms;
  const SymbolId a = syms.intern("open");
  const SymbolId b = syms.intern("closed");
  CHECK(syms.intern("open") == a);
  ExprPool p;
  const WorldPoint w({Value::sym(a)});
  const Env env{std::span<const WorldPoint>(&w, 1), {}, 0, 0.0};
  CHECK(eval_formula(p, p.compare(CmpOp::Eq, p.fluent(0), p.constant(Value::sym(a))), env));
  CHECK_FALSE(eval_formula(p, p.compare(CmpOp::Eq, p.fluent(0), p.constant(Value::sym(b))), env));
}

TEST_CASE("refs_of collects fluents, params and history") {
  ExprPool p;
  const ExprId e = p.binary(Op::Add, p.fluent(2, 1), p.binary(Op::Mul, p.param(1), p.fluent(0)));
  const Refs r = refs_of(p, e);
  CHECK(r.fluents == std::set<std::uint32_t>{0, 2});
  CHECK(r.params == std::set<std::uint32_t>{1});
  CHECK(r.history);
}

TEST_CASE("format_real round-trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    CHECK(std::stod(format_real(x)) == x);
  }
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(2) == "2");
}

TEST_CASE("property: evaluator matches a direct recursive computation (200 cases)") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_int_distribution<int> pick(0, 7);
  for (int n = 0; n < 200; ++n) {
    ExprPool p;
    const double fv = u(rng);
    std::function<std::pair<ExprId, double>(int)> build = [&](int depth) -> std::pair<ExprId, double> {
      const int k = depth == 0 ? pick(rng) % 2 : pick(rng);
      if (k == 0) {
        const double c = u(rng);
        return {p.real(c), c};
      }
      if (k == 1) return {p.fluent(0), fv};
      auto [a, va] = build(depth - 1);
      if (k == 2) return {p.unary(Op::Neg, a), -va};
      if (k == 3) return {p.unary(Op::Abs, a), std::fabs(va)};
      auto [b, vb] = build(depth - 1);
      switch (k) {
        case 4: return {p.binary(Op::Add, a, b), va + vb};
        case 5: return {p.binary(Op::Sub, a, b), va - vb};
        case 6: return {p.binary(Op::Mul, a, b), va * vb};
        default: return {p.binary(Op::Max, a, b), std::max(va, vb)};
      }
    };
    const auto [e, expected] = build(5);
    const WorldPoint w({Value::real(fv)});
    REQUIRE(ev(p, e, std::span<const WorldPoint>(&w, 1)) == expected);
  }
}
