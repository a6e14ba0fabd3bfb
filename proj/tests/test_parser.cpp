#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "belcal/parser.hpp"
#include "common.hpp"

using namespace belcal;

namespace {

const char* kTiny = R"(theory tiny
fluent h : real
fluent w : { a, b }
init p = cases { 1 if 0 <= h and h <= 1 and w = a ; 0 }
action move(x: real) { h' = h - x }
action flip(x: { a, b } ~ y: { a, b }) {
  likelihood = cases { 0.9 if x = y ; 0.1 }
  w' = y
}
action look(z: { a, b }) sensing { likelihood = cases { 0.8 if z = w ; 0.2 } }
config grid = 501
)";

}  // namespace

TEST_CASE("shipped theories parse and validate cleanly") {
  for (const char* name : {"robot1d", "noisy", "sensewall", "window", "window_discrete"}) {
    CAPTURE(name);
    const TheorySpec s = example(name);
    CHECK(s.name == name);
    for (const Diagnostic& d : validate(s)) CHECK_MESSAGE(d.severity != Severity::Error, d.message);
  }
  const TheorySpec r = example("robot1d");
  REQUIRE(r.fluents.size() == 2);
  CHECK(r.actions[*r.find_action("sonar")].kind == ActionKind::Sensing);
  const TheorySpec n = example("noisy");
  const ActionDecl& nm = n.actions[*n.find_action("nmove")];
  CHECK(nm.kind == ActionKind::Noisy);
  CHECK(nm.nominal.size() == 1);
  CHECK(nm.actual.size() == 1);
}

TEST_CASE("print/parse round trip preserves structure") {
  for (const char* name : {"robot1d", "noisy", "sensewall", "window", "window_discrete"}) {
    CAPTURE(name);
    const TheorySpec a = example(name);
    const TheorySpec b = parse_theory(print_theory(a));
    CHECK(same_structure(a, b));
    CHECK(print_theory(b) == print_theory(a));
  }
  const TheorySpec t = parse_theory(kTiny);
  CHECK(same_structure(t, parse_theory(print_theory(t))));
}

TEST_CASE("theory errors carry codes and positions") {
  auto parse = [](const char* text) { return [text] { parse_theory(text); }; };
  CHECK(code_of(parse("")) == ErrorCode::SyntaxError);
  CHECK(code_of(parse("theory t\nfluent h : real\n")) == ErrorCode::SyntaxError);  // no init
  CHECK(code_of(parse("theory t\nfluent h : real\nfluent h : real\ninit p = 1\n")) == ErrorCode::DuplicateName);
  CHECK(code_of(parse("theory t\nfluent h : real\ninit p = g\n")) == ErrorCode::UnknownIdentifier);
  CHECK(code_of(parse("theory t\nfluent h : real\ninit p = 1\nconfig bogus = 3\n")) == ErrorCode::ConfigError);
  CHECK(code_of(parse("theory t\nfluent h : real\ninit p = 1\naction s(x: real ~ y: real) sensing { }\n")) ==
        ErrorCode::SyntaxError);
  CHECK(code_of(parse("theory t\nfluent h : real\ninit p = 1\naction m(x: real) { h' = x h' = 2 }\n")) ==
        ErrorCode::DuplicateName);
  const SourceSpan sp = span_of(parse("theory t\nfluent h : real\ninit p = 1 +\n"));
  CHECK(sp.line == 4);
  const SourceSpan sp2 = span_of(parse("theory t\nfluent h : real\ninit p = cases { 1 if h < 0 ; }\n"));
  CHECK(sp2.line == 3);
  CHECK(sp2.column > 1);
}

TEST_CASE("validation diagnostics") {
  auto codes = [](const char* text) {
    std::vector<ErrorCode> out;
    for (const Diagnostic& d : validate(parse_theory(text))) out.push_back(d.code);
    return out;
  };
  auto has = [](const std::vector<ErrorCode>& v, ErrorCode c) { return std::find(v.begin(), v.end(), c) != v.end(); };
  CHECK(has(codes("theory t\nfluent w : {a, b}\ninit p = 1\naction s(z: {a, b}) sensing { w' = b }\n"),
            ErrorCode::ValidationFailed));
  CHECK(has(codes("theory t\nfluent h : real\ninit p = 1\naction s(z: real) sensing { likelihood = z - h }\n"),
            ErrorCode::NegativeLikelihood));
  CHECK(has(codes("theory t\nfluent h : real\ninit p = 1\naction s(z: real) sensing { likelihood = gauss(z; h, 0) }\n"),
            ErrorCode::NonPositiveVariance));
  CHECK(has(codes("theory t\nfluent h : real\ninit p = -1\n"), ErrorCode::NegativeWeight));
  CHECK(has(codes("theory t\nfluent h : real\ninit p = 1\naction m(x: real ~ y: real) { likelihood = gauss(y; x, 1) h' = x }\n"),
            ErrorCode::ValidationFailed));
  CHECK(has(codes("theory t\nfluent w : {a, b}\nfluent u : {c}\ninit p = 1\naction m(x: {a, b, c}) { w' = x }\n"),
            ErrorCode::DomainViolation));
  // A grid-only initial density is a note, not an error.
  const auto notes = validate(parse_theory("theory t\nfluent h : real\ninit p = cases { h if 0 <= h and h <= 1 ; 0 }\n"));
  REQUIRE(notes.size() == 1);
  CHECK(notes[0].severity == Severity::Note);
  CHECK(notes[0].code == ErrorCode::UnrecognizedInitForm);
}

TEST_CASE("queries") {
  const TheorySpec t = parse_theory(kTiny);
  const Query q1 = parse_query(t, "bel(h <= 0.5 and w = a) after [move(1), flip(b), look(a)]");
  CHECK(q1.kind == QueryKind::Bel);
  CHECK(q1.alpha.size() == 3);
  CHECK_FALSE(q1.alpha[1].actual.has_value());
  const Query q2 = parse_query(t, "bel(w = a) after [flip(b ~ a)]");
  REQUIRE(q2.alpha[0].actual.has_value());
  const Query q3 = parse_query(t, "marginal h after [move(2)] bins=20 range=-1,1 grid=101 backend=mc");
  CHECK(q3.kind == QueryKind::Marginal);
  CHECK(*q3.bins == 20);
  CHECK(*q3.range_lo == -1.0);
  CHECK(*q3.overrides.quad_points_per_dim == 101);
  CHECK(*q3.overrides.backend == Backend::MonteCarlo);
  CHECK(parse_query(t, "knows(h ≥ 0 and h ≤ 1)").kind == QueryKind::Knows);
  CHECK(parse_query(t, "bel(h@0 > h@1) after [move(1)]").kind == QueryKind::Bel);
  {
    const Query uni = parse_query(t, "bel(h ≤ 1 ∧ ¬(h < 0) ∨ h ≥ −2)");
    const Query asc = parse_query(t, "bel(h <= 1 and not (h < 0) or h >= -2)");
    CHECK(same_structure(uni.pool, uni.formula, asc.pool, asc.formula));
  }

  auto q = [&](const char* text) { return [&t, text] { parse_query(t, text); }; };
  CHECK(code_of(q("bel(h <= )")) == ErrorCode::SyntaxError);
  CHECK(span_of(q("bel(h <= )")).column == 10);
  CHECK(code_of(q("bel(g > 1)")) == ErrorCode::UnknownIdentifier);
  CHECK(code_of(q("bel(true) after [move(1, 2)]")) == ErrorCode::ArityMismatch);
  CHECK(code_of(q("bel(true) after [flip(c)]")) == ErrorCode::DomainMismatch);
  CHECK(code_of(q("bel(true) after [move(a)]")) == ErrorCode::DomainMismatch);
  CHECK(code_of(q("bel(h@2 > 0) after [move(1)]")) == ErrorCode::HistoryIndexOutOfRange);
  CHECK(code_of(q("bel(h + w > 0)")) == ErrorCode::TypeError);
  CHECK(code_of(q("bel(true) bins=3")) == ErrorCode::ConfigError);
  CHECK(code_of(q("bel(true) grid=abc")) == ErrorCode::ConfigError);

  const auto many = parse_query_file(t, "# header\nbel(h <= 1)\n\nknows(true)  # trailing\nmarginal h\n");
  REQUIRE(many.size() == 3);
  CHECK(many[2].kind == QueryKind::Marginal);
  const SourceSpan bad = span_of([&] { parse_query_file(t, "bel(true)\nbel(h <= )\n"); });
  CHECK(bad.line == 2);
}

TEST_CASE("property: formula print/parse round trip (150 cases)") {
  const TheorySpec t = example("robot1d");
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> u(-20, 20);
  std::function<std::string(int)> expr = [&](int d) -> std::string {
    const int k = d == 0 ? pick(rng) % 3 : pick(rng);
    switch (k) {
      case 0: return format_real(std::round(u(rng) * 100) / 100);
      case 1: return "h";
      case 2: return "v@0";
      case 3: return "(" + expr(d - 1) + " + " + expr(d - 1) + ")";
      case 4: return expr(d - 1) + " * " + expr(d - 1);
      case 5: return "abs(" + expr(d - 1) + ")";
      case 6: return "max(" + expr(d - 1) + ", " + expr(d - 1) + ")";
      case 7: return "-(" + expr(d - 1) + ")";
      case 8: return "gauss(" + expr(d - 1) + "; 0, 4)";
      default: return "cases { " + expr(d - 1) + " if h > 0 ; " + expr(d - 1) + " }";
    }
  };
  std::function<std::string(int)> formula = [&](int d) -> std::string {
    const char* ops[] = {"<", "<=", ">", ">=", "=", "!="};
    const int k = d == 0 ? 0 : pick(rng) % 5;
    switch (k) {
      case 0: return expr(2) + " " + ops[pick(rng) % 6] + " " + expr(2);
      case 1: return "(" + formula(d - 1) + " and " + formula(d - 1) + ")";
      case 2: return "(" + formula(d - 1) + " or " + formula(d - 1) + ")";
      case 3: return "not " + formula(d - 1);
      default: return "(" + formula(d - 1) + " implies " + formula(d - 1) + ")";
    }
  };
  for (int i = 0; i < 150; ++i) {
    const std::string text = "bel(" + formula(3) + ") after [move(1)]";
    CAPTURE(text);
    const Query a = parse_query(t, text);
    const std::string printed = print_formula(t, a);
    CAPTURE(printed);
    const Query b = parse_query(t, "bel(" + printed + ") after [move(1)]");
    REQUIRE(same_structure(a.pool, a.formula, b.pool, b.formula));
  }
}
