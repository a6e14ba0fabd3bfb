#include "belcal/oracle.hpp"

#include <cmath>

#include "belcal/support.hpp"

namespace belcal {

namespace {

// Kahan-Babuska sum, kept separate from the engine's accumulator.
class Total {
 public:
  void add(double x) {
    const double t = s_ + x;
    comp_ += std::fabs(s_) >= std::fabs(x) ? (s_ - t) + x : (x - t) + s_;
    s_ = t;
  }
  double get() const { return s_ + comp_; }

 private:
  double s_ = 0.0;
  double comp_ = 0.0;
};

double init_at(const TheorySpec& spec, const WorldPoint& w) {
  const double p = eval_real(spec.pool, spec.init_p, Env{std::span<const WorldPoint>(&w, 1), {}, 0, 0.0});
  if (p < 0.0) throw Error(ErrorCode::NegativeWeight, "initial density is negative");
  return p;
}

}  // namespace

PriorGrid make_prior_grid(const TheorySpec& spec, const std::vector<BoxAxis>& box) {
  std::vector<const BoxAxis*> axis_of(spec.fluents.size(), nullptr);
  for (const BoxAxis& a : box) {
    if (a.fluent >= spec.fluents.size() || a.points == 0 || !(a.lo < a.hi)) {
      throw Error(ErrorCode::ConfigError, "bad oracle box axis");
    }
    axis_of[a.fluent] = &a;
  }
  for (std::size_t f = 0; f < spec.fluents.size(); ++f) {
    if (!spec.fluents[f].domain.finite && !axis_of[f]) {
      throw Error(ErrorCode::OracleNotApplicable, "oracle box misses fluent " + spec.fluents[f].name);
    }
  }
  // Odometer over every fluent: finite values or axis cells.
  std::vector<std::size_t> size(spec.fluents.size());
  double volume = 1.0;
  for (std::size_t f = 0; f < spec.fluents.size(); ++f) {
    if (spec.fluents[f].domain.finite) {
      size[f] = spec.fluents[f].domain.values.size();
    } else {
      size[f] = axis_of[f]->points;
      volume *= (axis_of[f]->hi - axis_of[f]->lo) / axis_of[f]->points;
    }
  }
  PriorGrid grid;
  std::vector<std::size_t> idx(spec.fluents.size(), 0);
  WorldPoint w(std::vector<Value>(spec.fluents.size()));
  while (true) {
    for (std::size_t f = 0; f < spec.fluents.size(); ++f) {
      if (spec.fluents[f].domain.finite) {
        w[f] = Value::sym(spec.fluents[f].domain.values[idx[f]]);
      } else {
        const BoxAxis& a = *axis_of[f];
        w[f] = Value::real(a.lo + (static_cast<double>(idx[f]) + 0.5) * (a.hi - a.lo) / a.points);
      }
    }
    const double m = init_at(spec, w) * volume;
    if (m > 0.0) {
      grid.points.push_back(w);
      grid.mass.push_back(m);
    }
    std::size_t k = spec.fluents.size();
    bool done = true;
    while (k-- > 0) {
      if (++idx[k] < size[k]) {
        done = false;
        break;
      }
      idx[k] = 0;
    }
    if (done) break;
  }
  return grid;
}

std::vector<BoxAxis> default_box(const TheorySpec& spec, std::uint32_t points_per_axis, double sigmas) {
  InitForm form;
  try {
    form = analyze_init(spec);
  } catch (const Error& e) {
    throw Error(ErrorCode::OracleNotApplicable, "no bounded box for the initial density: " + e.detail());
  }
  std::vector<BoxAxis> box;
  for (std::uint32_t f : form.continuous_fluents) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& c : form.combos) {
      auto [a, b] = c.form.factors[f].range(sigmas);
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
    if (!(lo < hi)) throw Error(ErrorCode::OracleNotApplicable, "empty initial support");
    box.push_back({f, lo, hi, points_per_axis});
  }
  return box;
}

ErrFn make_err_fn(const TheorySpec& spec, std::uint32_t action) {
  if (action >= spec.actions.size()) throw Error(ErrorCode::OracleNotApplicable, "unknown action");
  const ActionDecl& a = spec.actions[action];
  if (a.kind != ActionKind::Sensing || a.nominal.size() != 1 || !a.likelihood.valid()) {
    throw Error(ErrorCode::OracleNotApplicable, a.name + " is not a one-reading sensing action");
  }
  const Refs r = refs_of(spec.pool, a.likelihood);
  if (r.fluents.size() != 1) {
    throw Error(ErrorCode::OracleNotApplicable, "likelihood of " + a.name + " does not read exactly one fluent");
  }
  return ErrFn{&spec, action, *r.fluents.begin()};
}

double ErrFn::operator()(const Value& z, const Value& u) const {
  WorldPoint w(std::vector<Value>(spec->fluents.size(), Value::real(0.0)));
  w[fluent] = u;
  const Value params[] = {z};
  const double e = eval_real(spec->pool, spec->actions[action].likelihood, Env{std::span<const WorldPoint>(&w, 1), params, 0, 0.0});
  if (e < 0.0) throw Error(ErrorCode::NegativeLikelihood, "sensor error profile is negative");
  return e;
}

PriorGrid bayes_update(const PriorGrid& prior, const ErrFn& err, const Value& z) {
  PriorGrid post = prior;
  for (std::size_t i = 0; i < post.points.size(); ++i) post.mass[i] *= err(z, post.points[i][err.fluent]);
  return post;
}

double grid_belief(const PriorGrid& grid, const ExprPool& pool, ExprId phi) {
  Total num;
  Total den;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const double m = grid.mass[i];
    if (m == 0.0) continue;
    den.add(m);
    if (eval_formula(pool, phi, Env{std::span<const WorldPoint>(&grid.points[i], 1), {}, 0, 0.0})) num.add(m);
  }
  if (!(den.get() > 0.0)) throw Error(ErrorCode::ZeroEvidence, "the readings have zero likelihood everywhere");
  return num.get() / den.get();
}

double bayes_posterior(const PriorGrid& prior, const ErrFn& err, const Value& z, const ExprPool& pool, ExprId phi) {
  return grid_belief(bayes_update(prior, err, z), pool, phi);
}

namespace {

struct Enumerator {
  const TheorySpec& spec;
  const Query& q;
  std::vector<WorldPoint> traj;
  Total num;
  Total den;

  void step(std::size_t j, double w) {
    if (j == q.alpha.size()) {
      den.add(w);
      if (eval_formula(q.pool, q.formula, Env{traj, {}, j, 0.0})) num.add(w);
      return;
    }
    const GroundAction& g = q.alpha[j];
    const ActionDecl& a = spec.actions[g.action];
    std::vector<const Domain*> doms;
    for (const ParamDecl& p : a.actual) doms.push_back(&p.domain);
    for (const auto& outcome : enumerate_domains(doms)) {
      std::vector<Value> args = g.nominal;
      for (SymbolId s : outcome) args.push_back(Value::sym(s));
      const Env env{std::span<const WorldPoint>(&traj[j], 1), args, 0, 0.0};
      if (a.precondition.valid() && !eval_formula(spec.pool, a.precondition, env)) continue;
      const double l = a.likelihood.valid() ? eval_real(spec.pool, a.likelihood, env) : 1.0;
      if (l < 0.0) throw Error(ErrorCode::NegativeLikelihood, "likelihood of " + a.name + " is negative");
      if (l == 0.0) continue;
      WorldPoint next = traj[j];
      if (a.kind != ActionKind::Sensing) {
        for (const SsaEntry& e : a.ssa) next[e.fluent] = eval_expr(spec.pool, e.value, env);
      }
      traj[j + 1] = std::move(next);
      step(j + 1, w * l);
    }
  }
};

}  // namespace

double enumerate_bel(const TheorySpec& spec, const Query& q) {
  if (!spec.all_finite()) throw Error(ErrorCode::InfiniteDomain, "enumeration needs every fluent and outcome domain finite");
  if (q.kind == QueryKind::Marginal || !q.formula.valid()) throw Error(ErrorCode::OracleNotApplicable, "not a belief query");
  Enumerator en{spec, q, std::vector<WorldPoint>(q.alpha.size() + 1), {}, {}};
  std::vector<const Domain*> doms;
  for (const FluentDecl& f : spec.fluents) doms.push_back(&f.domain);
  for (const auto& row : enumerate_domains(doms)) {
    std::vector<Value> vals;
    for (SymbolId s : row) vals.push_back(Value::sym(s));
    en.traj[0] = WorldPoint(std::move(vals));
    const double w = init_at(spec, en.traj[0]);
    if (w > 0.0) en.step(0, w);
  }
  if (!(en.den.get() > 0.0)) throw Error(ErrorCode::ZeroEvidence, "every combination has zero weight");
  return en.num.get() / en.den.get();
}

OracleAnswer oracle_bel(const TheorySpec& spec, const Query& q, std::uint32_t points_per_axis, double sigmas) {
  if (q.kind == QueryKind::Marginal || !q.formula.valid()) throw Error(ErrorCode::OracleNotApplicable, "not a belief query");
  if (spec.all_finite()) return {enumerate_bel(spec, q), OracleAnswer::Method::Enumerate};
  if (refs_of(q.pool, q.formula).history) {
    throw Error(ErrorCode::OracleNotApplicable, "history references are outside the conditioning oracle");
  }
  std::vector<ErrFn> errs;
  for (const GroundAction& g : q.alpha) errs.push_back(make_err_fn(spec, g.action));
  const auto box = default_box(spec, points_per_axis, sigmas);
  std::vector<BoxAxis> capped = box;
  // Keep multi-dimensional priors at about a million nodes.
  if (capped.size() > 1) {
    const auto per = static_cast<std::uint32_t>(std::pow(1.0e6, 1.0 / static_cast<double>(capped.size())));
    for (BoxAxis& a : capped) a.points = std::min(a.points, std::max<std::uint32_t>(per, 2));
  }
  PriorGrid grid = make_prior_grid(spec, capped);
  for (std::size_t j = 0; j < q.alpha.size(); ++j) grid = bayes_update(grid, errs[j], q.alpha[j].nominal.front());
  return {grid_belief(grid, q.pool, q.formula), OracleAnswer::Method::Bayes};
}

}  // namespace belcal
