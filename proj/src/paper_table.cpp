#include "belcal/paper_table.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "belcal/dynamics.hpp"
#include "belcal/engine.hpp"
#include "belcal/oracle.hpp"
#include "belcal/parser.hpp"

namespace belcal {

namespace {

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

TheorySpec load_one(const std::string& dir, const std::string& file) {
  const std::string path = dir + "/" + file;
  try {
    return load_theory_file(path);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.detail(), e.span());
  }
}

ConfigOverrides overrides(std::initializer_list<std::pair<const char*, std::string>> kv) {
  ConfigOverrides o;
  for (const auto& [k, v] : kv) o.set(k, v);
  return o;
}

BeliefResult run_bel(const TheorySpec& spec, const std::string& text, const ConfigOverrides& flags = {}) {
  const Query q = parse_query(spec, text);
  return bel(spec, q, effective_config(spec, q, EngineConfig{}, flags));
}

double bel_value(const TheorySpec& spec, const std::string& text, const ConfigOverrides& flags = {}) {
  return run_bel(spec, text, flags).value;
}

bool near(double got, double want, double tol) { return std::fabs(got - want) <= tol; }

// Random queries over the example theories.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  // Two decimals keeps generated query text short and exact to reparse.
  double uni(double lo, double hi) {
    return std::round(std::uniform_real_distribution<double>(lo, hi)(rng_) * 100.0) / 100.0;
  }
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin() { return pick(2) == 0; }
  std::mt19937_64& rng() { return rng_; }

  std::string real_atom(const std::string& f, double lo, double hi) {
    const double a = uni(lo, hi);
    switch (pick(4)) {
      case 0: return f + " <= " + format_real(a);
      case 1: return f + " > " + format_real(a);
      case 2: return f + " >= " + format_real(a);
      default: {
        const double b = uni(lo, hi);
        return "(" + format_real(std::min(a, b)) + " <= " + f + " and " + f + " <= " + format_real(std::max(a, b)) + ")";
      }
    }
  }
  std::string formula(const std::function<std::string()>& atom) {
    switch (pick(4)) {
      case 0: return "(" + atom() + " or " + atom() + ")";
      case 1: return "(" + atom() + " and not " + atom() + ")";
      default: return atom();
    }
  }

 private:
  std::mt19937_64 rng_;
};

struct GenQuery {
  const TheorySpec* spec = nullptr;
  std::string phi;
  std::vector<std::string> alpha;

  std::string text(const std::string& formula) const {
    std::string s = "bel(" + formula + ")";
    if (!alpha.empty()) {
      s += " after [";
      for (std::size_t i = 0; i < alpha.size(); ++i) s += (i ? ", " : "") + alpha[i];
      s += "]";
    }
    return s;
  }
  std::string text() const { return text(phi); }
};

struct GenOptions {
  bool one_dim = false;       // formulas over a single continuous fluent, at most one noisy step
  bool with_actuals = false;  // spell out actual arguments of noisy actions
};

GenQuery generate(const ExampleTheories& t, Gen& g, const GenOptions& opt) {
  GenQuery q;
  const std::size_t steps = g.pick(3);
  switch (g.pick(4)) {
    case 0: {
      q.spec = &t.robot1d;
      const std::size_t which = g.pick(opt.one_dim ? 2 : 3);
      q.phi = g.formula([&] {
        if (which == 0) return g.real_atom("h", 0, 14);
        if (which == 1) return g.real_atom("v", -10, 10);
        return g.coin() ? g.real_atom("h", 0, 14) : g.real_atom("v", -10, 10);
      });
      for (std::size_t i = 0; i < steps; ++i) {
        switch (g.pick(3)) {
          case 0: q.alpha.push_back("move(" + format_real(g.uni(-5, 5)) + ")"); break;
          case 1: q.alpha.push_back("up(" + format_real(g.uni(-5, 5)) + ")"); break;
          default: q.alpha.push_back("sonar(" + format_real(g.uni(0, 14)) + ")"); break;
        }
      }
      break;
    }
    case 1: {
      q.spec = &t.noisy;
      q.phi = g.formula([&] { return g.real_atom("h", 0, 16); });
      bool noisy_used = false;
      for (std::size_t i = 0; i < steps; ++i) {
        if (g.coin() && !(opt.one_dim && noisy_used)) {
          noisy_used = true;
          const double x = g.uni(-3, 3);
          std::string a = "nmove(" + format_real(x);
          if (opt.with_actuals) a += " ~ " + format_real(g.uni(x - 2, x + 2));
          q.alpha.push_back(a + ")");
        } else {
          q.alpha.push_back("sonar2(" + format_real(g.uni(9, 13)) + ")");
        }
      }
      break;
    }
    case 2: {
      q.spec = &t.sensewall;
      q.phi = g.formula([&] { return g.real_atom("h", 0, 14); });
      for (std::size_t i = 0; i < steps; ++i) {
        q.alpha.push_back(g.coin() ? "move(" + format_real(g.uni(-2, 2)) + ")"
                                   : std::string("sensewall(") + (g.coin() ? "close" : "far") + ")");
      }
      break;
    }
    default: {
      q.spec = &t.window;
      const bool on_h = g.coin();
      q.phi = g.formula([&] {
        if (on_h) return g.real_atom("h", 0, 14);
        return std::string("win = ") + (g.coin() ? "0" : "1");
      });
      for (std::size_t i = 0; i < steps; ++i) {
        switch (g.pick(3)) {
          case 0: q.alpha.push_back("move(" + format_real(g.uni(-3, 3)) + ")"); break;
          case 1: {
            std::string a = std::string("setwin(") + (g.coin() ? "0" : "1");
            if (opt.with_actuals) a += std::string(" ~ ") + (g.coin() ? "0" : "1");
            q.alpha.push_back(a + ")");
            break;
          }
          default: q.alpha.push_back(std::string("seewin(") + (g.coin() ? "0" : "1") + ")"); break;
        }
      }
      break;
    }
  }
  return q;
}

// Drops a noisy action's spelled-out actual arguments.
std::string strip_actual(const std::string& a) {
  const auto tilde = a.find('~');
  if (tilde == std::string::npos) return a;
  std::size_t end = tilde;
  while (end > 0 && a[end - 1] == ' ') --end;
  return a.substr(0, end) + ")";
}

class Suite {
 public:
  explicit Suite(std::string name) { out_.name = std::move(name); }

  void pass() { ++out_.cases; }
  void fail(const std::string& why) {
    ++out_.cases;
    if (out_.failures++ == 0) out_.first_failure = why;
  }
  void check(bool ok, const std::function<std::string()>& why) { ok ? pass() : fail(why()); }
  std::size_t cases() const { return out_.cases; }
  PropertyOutcome done() { return out_; }

 private:
  PropertyOutcome out_;
};

// Runs `body` until `cases` cases are counted; cases where both sides raise
// the same error are redrawn, up to four attempts per case.
template <class Body>
PropertyOutcome run_suite(const std::string& name, std::size_t cases, Body&& body) {
  Suite s(name);
  std::size_t attempts = 0;
  while (s.cases() < cases) {
    if (++attempts > 4 * cases) {
      s.fail("too many degenerate draws");
      break;
    }
    body(s);
  }
  return s.done();
}

std::string describe_error(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& x) {
    return x.what();
  }
}

}  // namespace

ExampleTheories load_example_theories(const std::string& dir) {
  return ExampleTheories{load_one(dir, "robot1d.bat"), load_one(dir, "noisy.bat"), load_one(dir, "sensewall.bat"),
                         load_one(dir, "window.bat"), load_one(dir, "window_discrete.bat")};
}

PropertyOutcome check_complementarity(const ExampleTheories& t, std::size_t cases, std::uint64_t seed) {
  Gen g(seed);
  const ConfigOverrides cfg = overrides({{"grid", "201"}});
  return run_suite("complementarity", cases, [&](Suite& s) {
    const GenQuery q = generate(t, g, {});
    std::exception_ptr e1;
    std::exception_ptr e2;
    double a = 0.0;
    double b = 0.0;
    try {
      a = bel_value(*q.spec, q.text(), cfg);
    } catch (const Error&) {
      e1 = std::current_exception();
    }
    try {
      b = bel_value(*q.spec, q.text("not " + q.phi), cfg);
    } catch (const Error&) {
      e2 = std::current_exception();
    }
    if (e1 || e2) {
      if (!(e1 && e2)) s.fail(q.text() + ": only one side failed: " + describe_error(e1 ? e1 : e2));
      return;
    }
    s.check(std::fabs(a + b - 1.0) <= 1e-9, [&] { return q.text() + ": " + fmt(a, 17) + " + " + fmt(b, 17); });
  });
}

PropertyOutcome check_backend_agreement(const ExampleTheories& t, std::size_t cases, std::uint64_t seed) {
  Gen g(seed);
  std::uint64_t n = 0;
  return run_suite("backend agreement", cases, [&](Suite& s) {
    const GenQuery q = generate(t, g, {.one_dim = true});
    const ConfigOverrides quad = overrides({{"grid", "1001"}});
    const ConfigOverrides mc =
        overrides({{"backend", "mc"}, {"samples", "20000"}, {"seed", std::to_string(seed + n++)}});
    BeliefResult a;
    BeliefResult b;
    try {
      a = run_bel(*q.spec, q.text(), quad);
    } catch (const Error&) {
      return;  // quadrature found no evidence; nothing to compare
    }
    try {
      b = run_bel(*q.spec, q.text(), mc);
    } catch (const Error& e) {
      s.fail(q.text() + ": quad " + fmt(a.value) + " but mc failed: " + e.what());
      return;
    }
    const double tol = std::max(1e-3, 3.0 * b.std_error.value_or(0.0));
    s.check(std::fabs(a.value - b.value) <= tol, [&] {
      return q.text() + ": quad " + fmt(a.value) + " mc " + fmt(b.value) + " tol " + fmt(tol);
    });
  });
}

PropertyOutcome check_seed_determinism(const ExampleTheories& t, std::size_t cases, std::uint64_t seed) {
  Gen g(seed);
  return run_suite("seed determinism", cases, [&](Suite& s) {
    const GenQuery q = generate(t, g, {});
    const std::string samples = std::to_string(1000 + g.pick(20000));
    const std::string rseed = std::to_string(g.pick(1u << 30));
    auto run = [&](const char* threads) {
      return run_bel(*q.spec, q.text(),
                     overrides({{"backend", "mc"}, {"samples", samples}, {"seed", rseed}, {"threads", threads}}));
    };
    BeliefResult a;
    BeliefResult b;
    BeliefResult c;
    try {
      a = run("1");
    } catch (const Error&) {
      return;
    }
    try {
      b = run("4");
      c = run("3");
    } catch (const Error& e) {
      s.fail(q.text() + ": single-threaded run succeeded, multi-threaded failed: " + e.what());
      return;
    }
    auto same = [](const BeliefResult& x, const BeliefResult& y) {
      return x.value == y.value && x.numerator == y.numerator && x.gamma == y.gamma && x.std_error == y.std_error &&
             x.ess == y.ess && x.nodes == y.nodes;
    };
    s.check(same(a, b) && same(a, c), [&] {
      return q.text() + " seed " + rseed + ": " + fmt(a.value, 17) + " / " + fmt(b.value, 17) + " / " + fmt(c.value, 17);
    });
  });
}

PropertyOutcome check_actual_irrelevance(const ExampleTheories& t, std::size_t cases, std::uint64_t seed) {
  Gen g(seed);
  return run_suite("actual-argument irrelevance", cases, [&](Suite& s) {
    GenQuery with;
    do {
      with = generate(t, g, {.with_actuals = true});
    } while (with.spec != &t.noisy && with.spec != &t.window);
    GenQuery without = with;
    bool any = false;
    for (std::string& a : without.alpha) {
      const std::string b = strip_actual(a);
      any = any || b != a;
      a = b;
    }
    if (!any) with.alpha.push_back(with.spec == &t.noisy ? "nmove(1 ~ 3.5)" : "setwin(1 ~ 0)");
    if (!any) without.alpha.push_back(with.spec == &t.noisy ? "nmove(1)" : "setwin(1)");
    for (const ConfigOverrides& cfg : {overrides({{"grid", "201"}}),
                                       overrides({{"backend", "mc"}, {"samples", "4000"}, {"seed", "11"}})}) {
      std::string ra;
      std::string rb;
      double a = 0.0;
      double b = 0.0;
      try {
        a = bel_value(*with.spec, with.text(), cfg);
      } catch (const Error& e) {
        ra = e.what();
      }
      try {
        b = bel_value(*without.spec, without.text(), cfg);
      } catch (const Error& e) {
        rb = e.what();
      }
      if (ra != rb || a != b) {
        s.fail(with.text() + " vs " + without.text() + ": " + (ra.empty() ? fmt(a, 17) : ra) + " / " +
               (rb.empty() ? fmt(b, 17) : rb));
        return;
      }
    }
    s.pass();
  });
}

PropertyOutcome check_frame_invariance(const ExampleTheories& t, std::size_t cases, std::uint64_t seed) {
  Gen g(seed);
  const TheorySpec* specs[] = {&t.robot1d, &t.noisy, &t.sensewall, &t.window, &t.window_discrete};
  std::size_t n = 0;
  return run_suite("frame invariance", cases, [&](Suite& s) {
    if (n++ % 2 == 0) {
      // Point level: fluents without an update, and all fluents under
      // sensing, keep their exact values.
      const TheorySpec& spec = *specs[g.pick(std::size(specs))];
      auto draw = [&](const Domain& d) {
        return d.finite ? Value::sym(d.values[g.pick(d.values.size())]) : Value::real(g.uni(-20, 20));
      };
      WorldPoint w(std::vector<Value>(spec.fluents.size()));
      for (std::size_t f = 0; f < spec.fluents.size(); ++f) w[f] = draw(spec.fluents[f].domain);
      const auto ai = static_cast<std::uint32_t>(g.pick(spec.actions.size()));
      const ActionDecl& a = spec.actions[ai];
      BoundAction ba{ai, {}};
      for (std::size_t i = 0; i < a.arity(); ++i) ba.args.push_back(draw(a.param(i).domain));
      const WorldPoint next = progress(spec, w, ba);
      bool ok = next.size() == w.size();
      for (std::size_t f = 0; ok && f < w.size(); ++f) {
        if (a.kind == ActionKind::Sensing || !a.ssa_for(static_cast<std::uint32_t>(f))) ok = next[f].identical(w[f]);
      }
      s.check(ok, [&] { return spec.name + ": " + a.name + " changed a fluent it does not update"; });
      return;
    }
    // Belief level: an action that does not touch the fluents of phi leaves
    // the belief bitwise unchanged.
    const bool on_v = g.coin();
    const std::string phi = g.formula([&] { return on_v ? g.real_atom("v", -10, 10) : g.real_atom("h", 0, 14); });
    const std::string act = (on_v ? "move(" : "up(") + format_real(g.uni(-5, 5)) + ")";
    const double before = bel_value(t.robot1d, "bel(" + phi + ")");
    const double after = bel_value(t.robot1d, "bel(" + phi + ") after [" + act + "]");
    s.check(before == after, [&] { return phi + " after " + act + ": " + fmt(before, 17) + " vs " + fmt(after, 17); });
  });
}

std::vector<CriterionResult> run_paper_table(const std::string& dir,
                                             const std::function<void(const CriterionResult&)>& on_row) {
  std::vector<CriterionResult> rows;
  std::optional<ExampleTheories> loaded;
  std::string load_error;
  try {
    loaded = load_example_theories(dir);
  } catch (const Error& e) {
    load_error = e.what();
  }

  auto row = [&](int id, std::string title, const std::function<bool(std::string&)>& body) {
    CriterionResult r;
    r.id = id;
    r.title = std::move(title);
    const auto t0 = std::chrono::steady_clock::now();
    if (!loaded) {
      r.detail = load_error;
    } else {
      try {
        r.pass = body(r.detail);
      } catch (const std::exception& e) {
        r.pass = false;
        r.detail += (r.detail.empty() ? "" : "; ") + std::string(e.what());
      }
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_row) on_row(r);
    rows.push_back(std::move(r));
  };
  const ExampleTheories* t = loaded ? &*loaded : nullptr;
  // Appends "name=value" to the detail and checks |value - want| <= tol.
  auto expect = [](std::string& d, const std::string& name, double got, double want, double tol) {
    d += (d.empty() ? "" : ", ") + name + "=" + fmt(got);
    return near(got, want, tol);
  };
  auto expect_mc = [](std::string& d, const std::string& name, const BeliefResult& r, double want) {
    const double se = r.std_error.value_or(0.0);
    d += (d.empty() ? "" : ", ") + name + "=" + fmt(r.value) + "+-" + fmt(se, 2);
    return near(r.value, want, std::max(3.0 * se, 1e-12));
  };
  const ConfigOverrides mc = overrides({{"backend", "mc"}, {"seed", "7"}, {"samples", "200000"}});

  row(1, "robot1d: bel(h <= 9) = 0.7", [&](std::string& d) {
    bool ok = expect(d, "quad", bel_value(t->robot1d, "bel(h <= 9)"), 0.7, 1e-3);
    ok = expect_mc(d, "mc", run_bel(t->robot1d, "bel(h <= 9)", mc), 0.7) && ok;
    return ok;
  });
  row(2, "robot1d: bel(h = 3 or h = 4 or h = 7) ~ 0", [&](std::string& d) {
    const std::string q = "bel(h = 3 or h = 4 or h = 7)";
    bool ok = expect(d, "grid 2001", bel_value(t->robot1d, q), 0.0, 2e-3);
    ok = expect(d, "grid 20001", bel_value(t->robot1d, q, overrides({{"grid", "20001"}})), 0.0, 2e-4) && ok;
    return ok;
  });
  row(3, "robot1d: bel(h > 7 * v) ~ 0.6", [&](std::string& d) {
    return expect(d, "quad", bel_value(t->robot1d, "bel(h > 7 * v)"), 0.6, 0.01);
  });
  row(4, "robot1d: after [move(4)], h = 0 is 0.2 and h <= 3 is 0.5", [&](std::string& d) {
    bool ok = expect(d, "h=0", bel_value(t->robot1d, "bel(h = 0) after [move(4)]"), 0.2, 1e-3);
    ok = expect(d, "h<=3", bel_value(t->robot1d, "bel(h <= 3) after [move(4)]"), 0.5, 1e-3) && ok;
    return ok;
  });
  row(5, "robot1d: bel(h@0 > 1) after [move(4)] = 1 exactly", [&](std::string& d) {
    const double v = bel_value(t->robot1d, "bel(h@0 > 1) after [move(4)]");
    d = "value=" + fmt(v, 17);
    return v == 1.0;
  });
  row(6, "robot1d: imaging is order sensitive", [&](std::string& d) {
    bool ok = expect(d, "[move(4),move(-4)]", bel_value(t->robot1d, "bel(h = 4) after [move(4), move(-4)]"), 0.2, 1e-3);
    ok = expect(d, "[move(-4),move(4)]", bel_value(t->robot1d, "bel(h = 4) after [move(-4), move(4)]"), 0.0, 2e-3) && ok;
    return ok;
  });
  row(7, "robot1d: actions leave unrelated beliefs unchanged", [&](std::string& d) {
    const double a = bel_value(t->robot1d, "bel(-1 <= v and v <= 1) after [move(4)]");
    const double b = bel_value(t->robot1d, "bel(-1 <= v and v <= 1)");
    const double c = bel_value(t->robot1d, "bel(v <= 7) after [up(2.5)]");
    const double e = bel_value(t->robot1d, "bel(v <= 4.5)");
    d = "window diff=" + fmt(a - b) + ", shift diff=" + fmt(c - e);
    return a == b && near(c, e, 1e-6);
  });
  row(8, "robot1d: sonar(5) readings raise bel(h <= 9)", [&](std::string& d) {
    const double p0 = bel_value(t->robot1d, "bel(h <= 9)");
    const double p1 = bel_value(t->robot1d, "bel(h <= 9) after [sonar(5)]");
    const double p2 = bel_value(t->robot1d, "bel(h <= 9) after [sonar(5), sonar(5)]");
    bool ok = expect(d, "one", p1, 0.97, 0.01);
    ok = expect(d, "two", p2, 0.99, 0.01) && ok;
    return ok && p0 < p1 && p1 < p2;
  });
  row(9, "engine agrees with Bayesian conditioning", [&](std::string& d) {
    const TheorySpec& r = t->robot1d;
    const ErrFn sonar = make_err_fn(r, *r.find_action("sonar"));
    const PriorGrid prior = make_prior_grid(r, {{*r.find_fluent("h"), 2, 12, 4000}, {*r.find_fluent("v"), -32, 32, 8}});
    const Value five = Value::real(5.0);
    const Query q1 = parse_query(r, "bel(h <= 9) after [sonar(5)]");
    const Query q2 = parse_query(r, "bel(h <= 9) after [sonar(5), sonar(5)]");
    const double o1 = bayes_posterior(prior, sonar, five, q1.pool, q1.formula);
    const double o2 = bayes_posterior(bayes_update(prior, sonar, five), sonar, five, q2.pool, q2.formula);
    const TheorySpec& w = t->sensewall;
    const Query q3 = parse_query(w, "bel(h <= 4) after [sensewall(close)]");
    const PriorGrid wall = make_prior_grid(w, {{*w.find_fluent("h"), 2, 12, 4000}});
    const double o3 = bayes_posterior(wall, make_err_fn(w, *w.find_action("sensewall")),
                                      q3.alpha[0].nominal[0], q3.pool, q3.formula);
    bool ok = expect(d, "sonar x1 delta", bel_value(r, q1.text) - o1, 0.0, 2e-3);
    ok = expect(d, "sonar x2 delta", bel_value(r, q2.text) - o2, 0.0, 2e-3) && ok;
    ok = expect(d, "sensewall delta", bel_value(w, q3.text) - o3, 0.0, 2e-3) && ok;
    return ok;
  });
  row(10, "noisy: effector noise and sensing", [&](std::string& d) {
    const TheorySpec& n = t->noisy;
    bool ok = expect(d, "item1", bel_value(n, "bel(h >= 11) after [nmove(-2)]"), 0.95, 0.01);
    ok = expect(d, "item2", bel_value(n, "bel(h >= 10) after [nmove(-2), nmove(2)]"), 0.74, 0.01) && ok;
    ok = expect(d, "item3", bel_value(n, "bel(h >= 11) after [nmove(-2), sonar2(11.5)]"), 0.94, 0.01) && ok;
    ok = expect(d, "item4", bel_value(n, "bel(h >= 11) after [nmove(-2), sonar2(11.5), sonar2(12.6)]"), 0.99, 0.01) &&
         ok;
    const BeliefResult quad = run_bel(n, "bel(h >= 11) after [nmove(-2)]");
    ok = expect_mc(d, "item1 mc", run_bel(n, "bel(h >= 11) after [nmove(-2)]", mc), quad.value) && ok;
    return ok;
  });
  row(11, "sensewall: discrete sensor over a continuous fluent", [&](std::string& d) {
    const TheorySpec& w = t->sensewall;
    bool ok = expect(d, "[sensewall(close)]", bel_value(w, "bel(h <= 4) after [sensewall(close)]"), 3.0 / 11.0, 1e-3);
    ok = expect(d, "[move(1),sensewall(close)]", bel_value(w, "bel(h <= 4) after [move(1), sensewall(close)]"),
                5.0 / 12.0, 1e-3) &&
         ok;
    try {
      enumerate_bel(w, parse_query(w, "bel(h <= 4) after [sensewall(close)]"));
      d += ", enumeration unexpectedly available";
      ok = false;
    } catch (const Error& e) {
      ok = e.code() == ErrorCode::InfiniteDomain && ok;
    }
    return ok;
  });
  row(12, "window: noisy setter and sensor over a finite fluent", [&](std::string& d) {
    const TheorySpec& w = t->window;
    bool ok = expect(d, "[]", bel_value(w, "bel(win = 0)"), 0.4, 1e-6);
    ok = expect(d, "[move(1)]", bel_value(w, "bel(win = 0) after [move(1)]"), 0.4, 1e-6) && ok;
    ok = expect(d, "[setwin(0)]", bel_value(w, "bel(win = 0) after [setwin(0)]"), 0.75, 1e-6) && ok;
    ok = expect(d, "[setwin(0),seewin(0)]", bel_value(w, "bel(win = 0) after [setwin(0), seewin(0)]"), 0.875, 1e-6) && ok;
    const TheorySpec& f = t->window_discrete;
    ok = expect(d, "enum []", enumerate_bel(f, parse_query(f, "bel(win = 0)")), 0.4, 1e-12) && ok;
    ok = expect(d, "enum [setwin(0)]", enumerate_bel(f, parse_query(f, "bel(win = 0) after [setwin(0)]")), 0.75, 1e-12) &&
         ok;
    ok = expect(d, "enum [setwin(0),seewin(0)]",
                enumerate_bel(f, parse_query(f, "bel(win = 0) after [setwin(0), seewin(0)]")), 0.875, 1e-12) &&
         ok;
    return ok;
  });
  row(13, "property suites", [&](std::string& d) {
    const PropertyOutcome outs[] = {
        check_complementarity(*t, 100, 1), check_backend_agreement(*t, 100, 2), check_seed_determinism(*t, 100, 3),
        check_actual_irrelevance(*t, 100, 4), check_frame_invariance(*t, 200, 5)};
    bool ok = true;
    for (const PropertyOutcome& o : outs) {
      d += (d.empty() ? "" : ", ") + o.name + " " + std::to_string(o.cases - o.failures) + "/" + std::to_string(o.cases);
      if (o.failures) d += " (" + o.first_failure + ")";
      ok = ok && o.failures == 0 && o.cases >= 100;
    }
    return ok;
  });
  row(14, "marginal data: atom at the wall, uniform elsewhere", [&](std::string& d) {
    const TheorySpec& r = t->robot1d;
    const EngineConfig cfg;
    const Histogram h = marginal(r, parse_query(r, "marginal h after [move(4)] range=0,8 bins=8"), cfg);
    double atom0 = -1.0;
    for (const auto& [v, m] : h.atoms) {
      if (v == 0.0) atom0 = m;
    }
    bool ok = expect(d, "atom(0)", atom0, 0.2, 1e-3);
    double worst = 0.0;
    for (double m : h.mass) worst = std::max(worst, std::fabs(m / h.bin_width() - 0.1));
    d += ", max |density - 0.1|=" + fmt(worst);
    ok = ok && worst <= 2e-3;
    const char* others[] = {"marginal h after [move(4)]", "marginal h bins=10 range=2,12", "marginal v after [up(1)]",
                            "marginal h after [move(4)] range=3,5"};
    double worst_total = std::fabs(h.total() - 1.0);
    for (const char* q : others) worst_total = std::max(worst_total, std::fabs(marginal(r, parse_query(r, q), cfg).total() - 1.0));
    const Histogram hn = marginal(t->noisy, parse_query(t->noisy, "marginal h after [nmove(-2), sonar2(11.5)]"), cfg);
    worst_total = std::max(worst_total, std::fabs(hn.total() - 1.0));
    EngineConfig mc_cfg;
    mc_cfg.backend = Backend::MonteCarlo;
    mc_cfg.seed = 7;
    worst_total = std::max(worst_total, std::fabs(marginal(r, parse_query(r, "marginal h after [move(4)]"), mc_cfg).total() - 1.0));
    d += ", max |total - 1|=" + fmt(worst_total);
    return ok && worst_total <= 1e-6;
  });
  return rows;
}

}  // namespace belcal
