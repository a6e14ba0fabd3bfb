#include "belcal/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>

#include "parallel.hpp"

namespace belcal {

namespace {

using detail::Sum;

constexpr std::uint64_t kLeavesPerChunk = std::uint64_t{1} << 14;
constexpr std::uint64_t kParticlesPerChunk = 4096;
constexpr std::size_t kAtomCandidates = 256;

// ---------------------------------------------------------------------------
// Shared planning

struct Step {
  const ActionDecl* decl = nullptr;
  BoundAction bound;  // nominal args filled in; actual slots are overwritten per outcome
  bool noisy = false;
  std::string label;
};

std::vector<Step> make_steps(const TheorySpec& spec, const std::vector<GroundAction>& alpha) {
  std::vector<Step> steps;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    const GroundAction& g = alpha[j];
    if (g.action >= spec.actions.size()) throw Error(ErrorCode::UnknownIdentifier, "unknown action index", g.span);
    const ActionDecl& d = spec.actions[g.action];
    if (g.nominal.size() != d.nominal.size()) {
      throw Error(ErrorCode::ArityMismatch, d.name + " expects " + std::to_string(d.nominal.size()) + " argument(s)",
                  g.span);
    }
    for (std::size_t i = 0; i < g.nominal.size(); ++i) {
      const Domain& dom = d.nominal[i].domain;
      const bool ok = dom.finite ? dom.contains(g.nominal[i]) : g.nominal[i].is_real();
      if (!ok) throw Error(ErrorCode::DomainMismatch, "argument " + d.nominal[i].name + " of " + d.name + " is outside its domain", g.span);
    }
    Step s;
    s.decl = &d;
    s.noisy = d.kind == ActionKind::Noisy && !d.actual.empty();
    s.bound.action = g.action;
    s.bound.args = g.nominal;
    for (const ParamDecl& p : d.actual) {
      s.bound.args.push_back(p.domain.finite ? Value::sym(p.domain.values.front()) : Value::real(0.0));
    }
    s.label = d.name + "@" + std::to_string(j + 1);
    steps.push_back(std::move(s));
  }
  return steps;
}

// Fluents that can influence the query: the seeds, everything read by the
// likelihoods and preconditions of the actions, closed under their updates.
std::set<std::uint32_t> relevant_fluents(const TheorySpec& spec, const std::vector<Step>& steps,
                                         std::set<std::uint32_t> rel) {
  for (const Step& s : steps) {
    for (ExprId id : {s.decl->likelihood, s.decl->precondition}) {
      if (!id.valid()) continue;
      for (std::uint32_t f : refs_of(spec.pool, id).fluents) rel.insert(f);
    }
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Step& s : steps) {
      for (const SsaEntry& e : s.decl->ssa) {
        if (!rel.contains(e.fluent)) continue;
        for (std::uint32_t f : refs_of(spec.pool, e.value).fluents) changed = rel.insert(f).second || changed;
      }
    }
  }
  return rel;
}

VarSupport outcome_support(const TheorySpec& spec, const Step& s, std::size_t actual_index, double sigmas) {
  const ActionDecl& d = *s.decl;
  SupportScope scope;
  scope.fluents.resize(spec.fluents.size());
  scope.params.resize(d.arity());
  for (std::size_t i = 0; i < d.nominal.size(); ++i) scope.params[i] = s.bound.args[i];
  scope.target_is_param = true;
  scope.target = static_cast<std::uint32_t>(d.nominal.size() + actual_index);
  scope.sigmas = sigmas;
  if (!d.likelihood.valid()) return VarSupport::unbounded();
  return analyze_support(spec.pool, d.likelihood, scope);
}

std::pair<double, double> bounded_outcome_range(const TheorySpec& spec, const Step& s, std::size_t i, double sigmas) {
  const VarSupport sup = outcome_support(spec, s, i, sigmas);
  const std::string name = s.decl->name + "." + s.decl->actual[i].name;
  if (sup.kind == VarSupport::Kind::Empty) {
    throw Error(ErrorCode::DegenerateBelief, "likelihood of " + name + " is zero for every outcome");
  }
  const auto [lo, hi] = sup.range(sigmas);
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::UnboundedSupport, "cannot bound the outcomes of " + name + " from its likelihood");
  }
  if (!(lo < hi)) throw Error(ErrorCode::DegenerateBelief, "outcomes of " + name + " are confined to a single point");
  return {lo, hi};
}

std::uint32_t points_per_dim(std::uint32_t grid, std::uint64_t max_nodes, std::size_t d) {
  if (d == 0) return grid;
  const double full = std::pow(static_cast<double>(grid), static_cast<double>(d));
  if (full <= static_cast<double>(max_nodes)) return grid;
  auto fits = [&](std::uint64_t n) {
    double p = 1.0;
    for (std::size_t i = 0; i < d; ++i) p *= static_cast<double>(n);
    return p <= static_cast<double>(max_nodes);
  };
  std::uint64_t n = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(max_nodes), 1.0 / static_cast<double>(d))));
  while (n > 1 && !fits(n)) --n;
  while (fits(n + 1)) ++n;
  return static_cast<std::uint32_t>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(n, grid)));
}

// ---------------------------------------------------------------------------
// Quadrature plan

struct OutcomeCell {
  std::vector<Value> actual;
  double width = 1.0;
};

struct QuadDim {
  std::uint32_t fluent = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::uint32_t n = 1;
  double step = 0.0;
};

struct QuadCombo {
  WorldPoint base;
  double constant = 1.0;
  std::vector<std::vector<double>> factor;  // per dim, per node
};

struct QuadPlan {
  const TheorySpec* spec = nullptr;
  double eps = 0.0;
  std::vector<Step> steps;
  std::vector<std::vector<OutcomeCell>> cells;  // per step; empty for non-noisy steps
  std::vector<QuadDim> dims;
  std::vector<QuadCombo> combos;
  bool ast_weight = false;
  std::uint64_t per_combo = 1;
  std::uint64_t leaves_per_initial = 1;
  std::vector<DimInfo> info;
  std::vector<std::string> notes;
};

std::vector<OutcomeCell> cartesian(const std::vector<std::vector<std::pair<Value, double>>>& lists) {
  std::vector<OutcomeCell> out{OutcomeCell{}};
  for (const auto& list : lists) {
    std::vector<OutcomeCell> next;
    next.reserve(out.size() * list.size());
    for (const OutcomeCell& c : out) {
      for (const auto& [v, w] : list) {
        OutcomeCell n = c;
        n.actual.push_back(v);
        n.width *= w;
        next.push_back(std::move(n));
      }
    }
    out = std::move(next);
  }
  return out;
}

QuadPlan make_quad_plan(const TheorySpec& spec, const std::vector<GroundAction>& alpha,
                        const std::set<std::uint32_t>& seeds, const EngineConfig& cfg) {
  QuadPlan plan;
  plan.spec = &spec;
  plan.eps = cfg.equality_epsilon;
  plan.steps = make_steps(spec, alpha);
  const double T = cfg.gauss_truncation_sigmas;

  struct PendingReal {
    std::size_t step;
    std::size_t index;
    double lo;
    double hi;
  };
  std::vector<PendingReal> pending;
  for (std::size_t j = 0; j < plan.steps.size(); ++j) {
    const Step& s = plan.steps[j];
    if (!s.noisy) continue;
    for (std::size_t i = 0; i < s.decl->actual.size(); ++i) {
      if (s.decl->actual[i].domain.finite) continue;
      auto [lo, hi] = bounded_outcome_range(spec, s, i, T);
      pending.push_back({j, i, lo, hi});
    }
  }

  std::optional<InitForm> form;
  try {
    form = analyze_init(spec);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnrecognizedInitForm) throw;
    plan.notes.push_back("initial density evaluated on the grid only: " + e.detail());
  }

  std::set<std::uint32_t> dim_fluents;
  if (form) {
    const auto rel = relevant_fluents(spec, plan.steps, seeds);
    for (std::uint32_t f : form->continuous_fluents) {
      if (rel.contains(f)) dim_fluents.insert(f);
    }
  } else {
    for (std::uint32_t f = 0; f < spec.fluents.size(); ++f) {
      if (!spec.fluents[f].domain.finite) dim_fluents.insert(f);
    }
  }

  for (std::uint32_t f : dim_fluents) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    if (form) {
      for (const auto& c : form->combos) {
        auto [a, b] = c.form.factors[f].range(T);
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
    } else {
      SupportScope scope;
      scope.fluents.resize(spec.fluents.size());
      scope.target = f;
      scope.sigmas = T;
      const VarSupport sup = analyze_support(spec.pool, spec.init_p, scope);
      if (sup.kind == VarSupport::Kind::Empty) throw Error(ErrorCode::DegenerateBelief, "initial density is zero everywhere");
      std::tie(lo, hi) = sup.range(T);
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      throw Error(ErrorCode::UnboundedSupport, "cannot bound the initial support of " + spec.fluents[f].name);
    }
    if (!(lo < hi)) throw Error(ErrorCode::DegenerateBelief, "initial support of " + spec.fluents[f].name + " is a point");
    plan.dims.push_back({f, lo, hi, 0, 0.0});
  }
  if (form && form->combos.empty()) throw Error(ErrorCode::DegenerateBelief, "initial density has zero mass");

  const std::size_t d = plan.dims.size() + pending.size();
  if (d > cfg.max_quad_dims) {
    throw Error(ErrorCode::DimensionLimit, "query needs " + std::to_string(d) + " continuous dimensions; max_quad_dims is " +
                                               std::to_string(cfg.max_quad_dims));
  }
  const std::uint32_t n = points_per_dim(cfg.quad_points_per_dim, cfg.max_quad_nodes, d);
  if (n < cfg.quad_points_per_dim) {
    plan.notes.push_back("grid reduced to " + std::to_string(n) + " points per dimension to stay within " +
                         std::to_string(cfg.max_quad_nodes) + " nodes");
  }
  double volume = 1.0;
  for (QuadDim& q : plan.dims) {
    q.n = n;
    q.step = (q.hi - q.lo) / n;
    volume *= q.step;
    plan.per_combo *= n;
    plan.info.push_back({spec.fluents[q.fluent].name, q.lo, q.hi, n});
  }

  plan.cells.resize(plan.steps.size());
  for (std::size_t j = 0; j < plan.steps.size(); ++j) {
    const Step& s = plan.steps[j];
    if (!s.noisy) continue;
    std::vector<std::vector<std::pair<Value, double>>> lists;
    for (std::size_t i = 0; i < s.decl->actual.size(); ++i) {
      std::vector<std::pair<Value, double>> list;
      const ParamDecl& p = s.decl->actual[i];
      if (p.domain.finite) {
        for (SymbolId v : p.domain.values) list.push_back({Value::sym(v), 1.0});
      } else {
        auto it = std::find_if(pending.begin(), pending.end(), [&](const PendingReal& r) { return r.step == j && r.index == i; });
        const double step = (it->hi - it->lo) / n;
        for (std::uint32_t k = 0; k < n; ++k) list.push_back({Value::real(it->lo + (k + 0.5) * step), step});
        plan.info.push_back({s.label + "." + p.name, it->lo, it->hi, n});
      }
      lists.push_back(std::move(list));
    }
    plan.cells[j] = cartesian(lists);
    plan.leaves_per_initial *= plan.cells[j].size();
  }

  if (form) {
    for (const auto& c : form->combos) {
      QuadCombo qc;
      qc.base = WorldPoint(c.values);
      qc.constant = c.form.constant * volume;
      for (std::uint32_t f : form->continuous_fluents) {
        if (dim_fluents.contains(f)) continue;
        const Factor& fac = c.form.factors[f];
        if (fac.kind == Factor::Kind::Uniform) {
          qc.base[f] = Value::real(0.5 * (fac.lo + fac.hi));
          qc.constant *= fac.hi - fac.lo;
        } else {
          qc.base[f] = Value::real(fac.mean);
        }
      }
      for (const QuadDim& q : plan.dims) {
        const Factor& fac = c.form.factors[q.fluent];
        std::vector<double> vals(q.n);
        for (std::uint32_t k = 0; k < q.n; ++k) vals[k] = fac.density(q.lo + (k + 0.5) * q.step);
        qc.factor.push_back(std::move(vals));
      }
      plan.combos.push_back(std::move(qc));
    }
  } else {
    plan.ast_weight = true;
    std::vector<const Domain*> doms;
    std::vector<std::uint32_t> finite;
    for (std::uint32_t f = 0; f < spec.fluents.size(); ++f) {
      if (spec.fluents[f].domain.finite) {
        finite.push_back(f);
        doms.push_back(&spec.fluents[f].domain);
      }
    }
    for (const auto& row : enumerate_domains(doms)) {
      QuadCombo qc;
      qc.base = WorldPoint(std::vector<Value>(spec.fluents.size(), Value::real(0.0)));
      for (std::size_t k = 0; k < row.size(); ++k) qc.base[finite[k]] = Value::sym(row[k]);
      qc.constant = volume;
      plan.combos.push_back(std::move(qc));
    }
  }
  return plan;
}

template <class Acc, class Leaf>
class QuadWalker {
 public:
  QuadWalker(const QuadPlan& plan, Leaf& leaf, Acc& acc)
      : plan_(plan), spec_(*plan.spec), leaf_(leaf), acc_(acc), traj_(plan.steps.size() + 1), idx_(plan.dims.size()) {
    for (const Step& s : plan.steps) bound_.push_back(s.bound);
  }

  void run(std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t node = begin; node < end; ++node) {
      const QuadCombo& combo = plan_.combos[node / plan_.per_combo];
      std::uint64_t r = node % plan_.per_combo;
      for (std::size_t d = plan_.dims.size(); d-- > 0;) {
        idx_[d] = static_cast<std::uint32_t>(r % plan_.dims[d].n);
        r /= plan_.dims[d].n;
      }
      traj_[0] = combo.base;
      double w = combo.constant;
      for (std::size_t d = 0; d < plan_.dims.size(); ++d) {
        const QuadDim& q = plan_.dims[d];
        traj_[0][q.fluent] = Value::real(q.lo + (idx_[d] + 0.5) * q.step);
        if (!plan_.ast_weight) w *= combo.factor[d][idx_[d]];
      }
      if (plan_.ast_weight && w != 0.0) {
        const double p = eval_real(spec_.pool, spec_.init_p, Env{std::span<const WorldPoint>(traj_.data(), 1), {}, 0, plan_.eps});
        if (p < 0.0) throw Error(ErrorCode::NegativeWeight, "initial density is negative at a grid node", spec_.init_span);
        w *= p;
      }
      if (w == 0.0) continue;
      descend(0, w);
    }
  }

 private:
  void descend(std::size_t j, double w) {
    if (j == plan_.steps.size()) {
      leaf_(acc_, std::span<const WorldPoint>(traj_.data(), j + 1), w);
      return;
    }
    BoundAction& b = bound_[j];
    if (!plan_.steps[j].noisy) {
      advance(j, b, w);
      return;
    }
    const std::size_t base = plan_.steps[j].decl->nominal.size();
    for (const OutcomeCell& cell : plan_.cells[j]) {
      for (std::size_t i = 0; i < cell.actual.size(); ++i) b.args[base + i] = cell.actual[i];
      advance(j, b, w * cell.width);
    }
  }

  void advance(std::size_t j, const BoundAction& b, double w) {
    if (!poss(spec_, traj_[j], b, plan_.eps)) return;
    const double l = likelihood(spec_, traj_[j], b, plan_.eps);
    const double w2 = w * l;
    if (w2 == 0.0) return;
    progress_into(spec_, traj_[j], b, traj_[j + 1], plan_.eps);
    descend(j + 1, w2);
  }

  const QuadPlan& plan_;
  const TheorySpec& spec_;
  Leaf& leaf_;
  Acc& acc_;
  std::vector<WorldPoint> traj_;
  std::vector<BoundAction> bound_;
  std::vector<std::uint32_t> idx_;
};

template <class Acc, class Leaf>
std::vector<Acc> run_quad(const QuadPlan& plan, unsigned threads, Leaf leaf) {
  const std::uint64_t total = plan.combos.size() * plan.per_combo;
  const std::uint64_t per_chunk = std::max<std::uint64_t>(1, kLeavesPerChunk / std::max<std::uint64_t>(1, plan.leaves_per_initial));
  const std::uint64_t chunks = (total + per_chunk - 1) / per_chunk;
  std::vector<Acc> accs(chunks);
  detail::parallel_chunks(chunks, threads, [&](std::size_t c) {
    QuadWalker<Acc, Leaf> walker(plan, leaf, accs[c]);
    walker.run(c * per_chunk, std::min(total, (c + 1) * per_chunk));
  });
  return accs;
}

// ---------------------------------------------------------------------------
// Monte Carlo plan

class OutcomeSampler {
 public:
  OutcomeSampler(const TheorySpec& spec, const Step& s, double sigmas) {
    const ActionDecl& d = *s.decl;
    std::vector<const Domain*> finite_domains;
    for (std::size_t i = 0; i < d.actual.size(); ++i) {
      const std::size_t slot = d.nominal.size() + i;
      if (d.actual[i].domain.finite) {
        finite_slots_.push_back(slot);
        finite_domains.push_back(&d.actual[i].domain);
        continue;
      }
      const VarSupport sup = outcome_support(spec, s, i, sigmas);
      const std::string name = d.name + "." + d.actual[i].name;
      if (sup.kind == VarSupport::Kind::Gauss) {
        reals_.push_back({slot, true, sup.mean, sup.sd});
      } else if (sup.kind == VarSupport::Kind::Interval && std::isfinite(sup.lo) && std::isfinite(sup.hi) && sup.lo < sup.hi) {
        reals_.push_back({slot, false, sup.lo, sup.hi});
      } else if (sup.kind == VarSupport::Kind::Empty) {
        throw Error(ErrorCode::DegenerateBelief, "likelihood of " + name + " is zero for every outcome");
      } else {
        throw Error(ErrorCode::UnrecognizedLikelihoodForm,
                    "likelihood of " + name + " gives no bounded or gaussian proposal for its outcome");
      }
    }
    if (!finite_slots_.empty()) combos_ = enumerate_domains(finite_domains);
  }

  // Draws the actual arguments into b; returns likelihood / proposal density.
  double sample(const TheorySpec& spec, const WorldPoint& w, BoundAction& b, std::mt19937_64& rng, double eps,
                std::vector<double>& scratch) const {
    double q = 1.0;
    for (const RealProposal& r : reals_) {
      double x;
      if (r.gauss) {
        x = std::normal_distribution<double>(r.a, r.b)(rng);
        q *= gauss_density(x, r.a, r.b * r.b);
      } else {
        x = std::uniform_real_distribution<double>(r.a, r.b)(rng);
        q *= 1.0 / (r.b - r.a);
      }
      b.args[r.slot] = Value::real(x);
    }
    if (q == 0.0) return 0.0;
    if (combos_.empty()) {
      if (!poss(spec, w, b, eps)) return 0.0;
      return likelihood(spec, w, b, eps) / q;
    }
    scratch.assign(combos_.size(), 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < combos_.size(); ++c) {
      set_combo(b, c);
      if (poss(spec, w, b, eps)) scratch[c] = likelihood(spec, w, b, eps);
      total += scratch[c];
    }
    if (total == 0.0) return 0.0;
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    std::size_t pick = combos_.size() - 1;
    for (std::size_t c = 0; c < combos_.size(); ++c) {
      acc += scratch[c];
      if (u < acc && scratch[c] > 0.0) {
        pick = c;
        break;
      }
    }
    while (scratch[pick] == 0.0 && pick > 0) --pick;
    set_combo(b, pick);
    return total / q;
  }

 private:
  struct RealProposal {
    std::size_t slot;
    bool gauss;
    double a;  // mean or lo
    double b;  // sd or hi
  };

  void set_combo(BoundAction& b, std::size_t c) const {
    for (std::size_t i = 0; i < finite_slots_.size(); ++i) b.args[finite_slots_[i]] = Value::sym(combos_[c][i]);
  }

  std::vector<RealProposal> reals_;
  std::vector<std::size_t> finite_slots_;
  std::vector<std::vector<SymbolId>> combos_;
};

struct McPlan {
  const TheorySpec* spec = nullptr;
  double eps = 0.0;
  std::vector<Step> steps;
  std::vector<std::optional<OutcomeSampler>> samplers;
  InitForm init;
  std::vector<double> cumulative;  // combo masses, running sum
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> notes;
};

std::vector<double> cumulative_masses(const InitForm& form) {
  std::vector<double> out;
  double run = 0.0;
  for (const auto& c : form.combos) {
    run += c.form.mass();
    out.push_back(run);
  }
  return out;
}

std::pair<WorldPoint, double> draw_initial(const TheorySpec& spec, const InitForm& form,
                                           const std::vector<double>& cumulative, std::mt19937_64& rng, double eps) {
  if (form.combos.empty() || !(form.total_mass > 0.0)) {
    throw Error(ErrorCode::DegenerateBelief, "initial density has zero mass");
  }
  const double u = std::uniform_real_distribution<double>(0.0, cumulative.back())(rng);
  std::size_t c = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
  c = std::min(c, form.combos.size() - 1);
  const auto& combo = form.combos[c];
  WorldPoint w(combo.values);
  double q = combo.form.mass() / form.total_mass;
  for (std::uint32_t f : form.continuous_fluents) {
    const Factor& fac = combo.form.factors[f];
    double x;
    if (fac.kind == Factor::Kind::Uniform) {
      x = std::uniform_real_distribution<double>(fac.lo, fac.hi)(rng);
      q /= fac.hi - fac.lo;
    } else {
      x = std::normal_distribution<double>(fac.mean, std::sqrt(fac.var))(rng);
      q *= gauss_density(x, fac.mean, fac.var);
    }
    w[f] = Value::real(x);
  }
  if (!(q > 0.0)) return {std::move(w), 0.0};
  const double p = eval_real(spec.pool, spec.init_p, Env{std::span<const WorldPoint>(&w, 1), {}, 0, eps});
  if (p < 0.0) throw Error(ErrorCode::NegativeWeight, "initial density is negative at a sampled point", spec.init_span);
  return {std::move(w), p / q};
}

McPlan make_mc_plan(const TheorySpec& spec, const std::vector<GroundAction>& alpha, const EngineConfig& cfg,
                    InitForm form) {
  McPlan plan;
  plan.spec = &spec;
  plan.eps = cfg.equality_epsilon;
  plan.steps = make_steps(spec, alpha);
  for (const Step& s : plan.steps) {
    if (s.noisy) {
      plan.samplers.emplace_back(OutcomeSampler(spec, s, cfg.gauss_truncation_sigmas));
    } else {
      plan.samplers.emplace_back(std::nullopt);
    }
  }
  plan.init = std::move(form);
  plan.cumulative = cumulative_masses(plan.init);
  plan.samples = cfg.mc_samples;
  plan.seed = cfg.seed;
  return plan;
}

template <class Acc, class Leaf>
std::vector<Acc> run_mc(const McPlan& plan, unsigned threads, Leaf leaf) {
  const std::uint64_t chunks = (plan.samples + kParticlesPerChunk - 1) / kParticlesPerChunk;
  std::vector<Acc> accs(chunks);
  const TheorySpec& spec = *plan.spec;
  detail::parallel_chunks(chunks, threads, [&](std::size_t c) {
    std::mt19937_64 rng(detail::chunk_seed(plan.seed, c));
    std::vector<WorldPoint> traj(plan.steps.size() + 1);
    std::vector<BoundAction> bound;
    for (const Step& s : plan.steps) bound.push_back(s.bound);
    std::vector<double> scratch;
    const std::uint64_t end = std::min(plan.samples, (c + 1) * kParticlesPerChunk);
    for (std::uint64_t i = c * kParticlesPerChunk; i < end; ++i) {
      auto [w0, w] = draw_initial(spec, plan.init, plan.cumulative, rng, plan.eps);
      traj[0] = std::move(w0);
      std::size_t j = 0;
      for (; j < plan.steps.size() && w > 0.0; ++j) {
        BoundAction& b = bound[j];
        if (plan.samplers[j]) {
          w *= plan.samplers[j]->sample(spec, traj[j], b, rng, plan.eps, scratch);
        } else if (poss(spec, traj[j], b, plan.eps)) {
          w *= likelihood(spec, traj[j], b, plan.eps);
        } else {
          w = 0.0;
        }
        if (w > 0.0) progress_into(spec, traj[j], b, traj[j + 1], plan.eps);
      }
      if (w > 0.0 && j == plan.steps.size()) leaf(accs[c], std::span<const WorldPoint>(traj.data(), j + 1), w);
    }
  });
  return accs;
}

// ---------------------------------------------------------------------------
// Backend selection

struct Context {
  Backend backend = Backend::Quad;
  std::optional<QuadPlan> quad;
  std::optional<McPlan> mc;
  std::vector<std::string> notes;
  unsigned threads = 1;
};

Context make_context(const TheorySpec& spec, const std::vector<GroundAction>& alpha, const std::set<std::uint32_t>& seeds,
                     const EngineConfig& cfg) {
  cfg.check();
  Context ctx;
  ctx.threads = worker_count(cfg);
  if (cfg.backend == Backend::MonteCarlo) {
    std::optional<InitForm> form;
    try {
      form = analyze_init(spec);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnrecognizedInitForm) throw;
      ctx.notes.push_back("initial density has no sampler (" + e.detail() + "); fell back to quadrature");
    }
    if (form) {
      ctx.backend = Backend::MonteCarlo;
      ctx.mc = make_mc_plan(spec, alpha, cfg, std::move(*form));
      return ctx;
    }
  }
  ctx.backend = Backend::Quad;
  ctx.quad = make_quad_plan(spec, alpha, seeds, cfg);
  for (const auto& n : ctx.quad->notes) ctx.notes.push_back(n);
  return ctx;
}

template <class Acc, class Leaf>
std::vector<Acc> integrate(const Context& ctx, Leaf leaf) {
  if (ctx.mc) return run_mc<Acc>(*ctx.mc, ctx.threads, leaf);
  return run_quad<Acc>(*ctx.quad, ctx.threads, leaf);
}

std::set<std::uint32_t> formula_seeds(const Query& q) {
  const Refs r = refs_of(q.pool, q.formula);
  return {r.fluents.begin(), r.fluents.end()};
}

// ---------------------------------------------------------------------------
// Atom candidates: weighted SpaceSaving summary over bit patterns.

class HeavyHitters {
 public:
  void add(std::uint64_t key, double w) {
    auto it = counts_.find(key);
    if (it != counts_.end()) {
      order_.erase({it->second, key});
      it->second += w;
      order_.insert({it->second, key});
      return;
    }
    if (counts_.size() < kAtomCandidates) {
      counts_.emplace(key, w);
      order_.insert({w, key});
      return;
    }
    auto smallest = order_.begin();
    const double base = smallest->first;
    counts_.erase(smallest->second);
    order_.erase(smallest);
    counts_.emplace(key, base + w);
    order_.insert({base + w, key});
  }

  void merge(const HeavyHitters& o) {
    std::map<std::uint64_t, double> all(counts_.begin(), counts_.end());
    for (const auto& [k, c] : o.counts_) all[k] += c;
    std::vector<std::pair<double, std::uint64_t>> ranked;
    for (const auto& [k, c] : all) ranked.push_back({c, k});
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (ranked.size() > kAtomCandidates) ranked.resize(kAtomCandidates);
    counts_.clear();
    order_.clear();
    for (const auto& [c, k] : ranked) {
      counts_.emplace(k, c);
      order_.insert({c, k});
    }
  }

  std::vector<std::uint64_t> keys() const {
    std::vector<std::uint64_t> out;
    for (const auto& [k, c] : counts_) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::unordered_map<std::uint64_t, double> counts_;
  std::set<std::pair<double, std::uint64_t>> order_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Public API

unsigned worker_count(const EngineConfig& cfg) {
  unsigned n = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BELCAL_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

EngineConfig effective_config(const TheorySpec& spec, const Query& q, const EngineConfig& base,
                              const ConfigOverrides& flags) {
  EngineConfig cfg = base;
  spec.defaults.apply_to(cfg);
  q.overrides.apply_to(cfg);
  flags.apply_to(cfg);
  cfg.check();
  return cfg;
}

double Histogram::total() const {
  Sum s;
  for (double m : mass) s.add(m);
  for (const auto& a : atoms) s.add(a.second);
  s.add(below);
  s.add(above);
  return s.value();
}

BeliefResult bel(const TheorySpec& spec, const Query& q, const EngineConfig& cfg) {
  if (q.kind == QueryKind::Marginal || !q.formula.valid()) {
    throw Error(ErrorCode::ConfigError, "bel needs a formula query");
  }
  const Context ctx = make_context(spec, q.alpha, formula_seeds(q), cfg);
  BeliefResult res;
  res.backend = ctx.backend;
  res.notes = ctx.notes;
  const double eps = cfg.equality_epsilon;
  const auto k = q.alpha.size();

  struct Acc {
    Sum w, wi, w2, w2i;
    std::uint64_t leaves = 0;
  };
  auto accs = integrate<Acc>(ctx, [&](Acc& a, std::span<const WorldPoint> traj, double w) {
    const bool hit = eval_formula(q.pool, q.formula, Env{traj, {}, k, eps});
    a.w.add(w);
    a.w2.add(w * w);
    if (hit) {
      a.wi.add(w);
      a.w2i.add(w * w);
    }
    ++a.leaves;
  });
  Acc tot;
  for (const Acc& a : accs) {
    tot.w.add(a.w);
    tot.wi.add(a.wi);
    tot.w2.add(a.w2);
    tot.w2i.add(a.w2i);
    tot.leaves += a.leaves;
  }
  res.gamma = tot.w.value();
  res.numerator = tot.wi.value();
  if (!(res.gamma > 0.0) || !std::isfinite(res.gamma)) {
    throw Error(ErrorCode::DegenerateBelief, "normalizer is zero: no initial point and outcome is consistent with the actions");
  }
  res.value = std::clamp(res.numerator / res.gamma, 0.0, 1.0);
  if (ctx.mc) {
    const double R = res.value;
    const double s2 = tot.w2.value();
    const double var = (tot.w2i.value() * (1.0 - 2.0 * R) + R * R * s2) / (res.gamma * res.gamma);
    res.std_error = std::sqrt(std::max(0.0, var));
    res.ess = res.gamma * res.gamma / s2;
    res.nodes = ctx.mc->samples;
    if (*res.ess < 0.1 * static_cast<double>(ctx.mc->samples)) {
      res.notes.push_back("effective sample size " + format_real(std::round(*res.ess)) + " is below 10% of the samples");
    }
  } else {
    res.nodes = tot.leaves;
    res.dims = ctx.quad->info;
  }
  return res;
}

KnowsResult knows(const TheorySpec& spec, const Query& q, const EngineConfig& cfg) {
  if (q.kind == QueryKind::Marginal || !q.formula.valid()) {
    throw Error(ErrorCode::ConfigError, "knows needs a formula query");
  }
  const Context ctx = make_context(spec, q.alpha, formula_seeds(q), cfg);
  const double eps = cfg.equality_epsilon;
  const auto k = q.alpha.size();
  struct Acc {
    bool violated = false;
    std::uint64_t positive = 0;
  };
  auto accs = integrate<Acc>(ctx, [&](Acc& a, std::span<const WorldPoint> traj, double w) {
    if (!(w > 0.0)) return;
    ++a.positive;
    if (!a.violated && !eval_formula(q.pool, q.formula, Env{traj, {}, k, eps})) a.violated = true;
  });
  KnowsResult res;
  res.backend = ctx.backend;
  res.notes = ctx.notes;
  res.known = true;
  std::uint64_t positive = 0;
  for (const Acc& a : accs) {
    positive += a.positive;
    if (a.violated) res.known = false;
  }
  if (positive == 0) throw Error(ErrorCode::DegenerateBelief, "no point has positive weight");
  res.nodes = ctx.mc ? ctx.mc->samples : positive;
  return res;
}

Histogram marginal(const TheorySpec& spec, const MarginalRequest& req, const EngineConfig& cfg) {
  if (req.fluent >= spec.fluents.size()) throw Error(ErrorCode::UnknownIdentifier, "unknown fluent index");
  if (spec.fluents[req.fluent].domain.finite) {
    throw Error(ErrorCode::FiniteFluentMarginal,
                "marginal over finite fluent " + spec.fluents[req.fluent].name + "; query bel per value instead");
  }
  if (req.bins == 0) throw Error(ErrorCode::ConfigError, "bins must be positive");
  if (req.range && !(req.range->first < req.range->second)) throw Error(ErrorCode::ConfigError, "range needs lo < hi");
  const Context ctx = make_context(spec, req.alpha, {req.fluent}, cfg);
  const std::uint32_t f = req.fluent;

  // Pass 1: total weight, value range and atom candidates.
  struct Scan {
    Sum w;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    HeavyHitters heavy;
    std::uint64_t leaves = 0;
  };
  auto scans = integrate<Scan>(ctx, [&](Scan& s, std::span<const WorldPoint> traj, double w) {
    const double v = traj.back()[f].as_real();
    s.w.add(w);
    s.lo = std::min(s.lo, v);
    s.hi = std::max(s.hi, v);
    s.heavy.add(std::bit_cast<std::uint64_t>(v), w);
    ++s.leaves;
  });
  Scan all;
  for (const Scan& s : scans) {
    all.w.add(s.w);
    all.lo = std::min(all.lo, s.lo);
    all.hi = std::max(all.hi, s.hi);
    all.heavy.merge(s.heavy);
    all.leaves += s.leaves;
  }
  const double W = all.w.value();
  if (!(W > 0.0) || !std::isfinite(W)) throw Error(ErrorCode::DegenerateBelief, "normalizer is zero");

  Histogram h;
  h.backend = ctx.backend;
  h.notes = ctx.notes;
  h.nodes = ctx.mc ? ctx.mc->samples : all.leaves;
  if (req.range) {
    h.lo = req.range->first;
    h.hi = req.range->second;
  } else {
    h.lo = all.lo;
    h.hi = all.hi;
    if (!(h.lo < h.hi)) {
      h.lo -= 0.5;
      h.hi += 0.5;
    }
  }
  const std::uint32_t bins = req.bins;
  const double width = (h.hi - h.lo) / bins;
  const std::vector<std::uint64_t> cand = all.heavy.keys();
  std::unordered_map<std::uint64_t, std::size_t> cand_index;
  for (std::size_t i = 0; i < cand.size(); ++i) cand_index.emplace(cand[i], i);

  // Bin index, or -1 below / bins above the range.
  auto bin_of = [&](double v) -> std::int64_t {
    if (v < h.lo) return -1;
    if (v > h.hi) return bins;
    const auto b = static_cast<std::int64_t>(std::floor((v - h.lo) / width));
    return std::clamp<std::int64_t>(b, 0, bins - 1);
  };

  // Pass 2: exact candidate masses and binned mass of everything else.
  struct Bins {
    std::vector<Sum> bin;
    Sum below, above;
    std::vector<Sum> cand;
  };
  auto parts = integrate<Bins>(ctx, [&](Bins& b, std::span<const WorldPoint> traj, double w) {
    if (b.bin.empty()) {
      b.bin.resize(bins);
      b.cand.resize(cand.size());
    }
    const double v = traj.back()[f].as_real();
    auto it = cand_index.find(std::bit_cast<std::uint64_t>(v));
    if (it != cand_index.end()) {
      b.cand[it->second].add(w);
      return;
    }
    const std::int64_t k = bin_of(v);
    if (k < 0) {
      b.below.add(w);
    } else if (k >= static_cast<std::int64_t>(bins)) {
      b.above.add(w);
    } else {
      b.bin[static_cast<std::size_t>(k)].add(w);
    }
  });
  std::vector<Sum> bin_sum(bins);
  std::vector<Sum> cand_sum(cand.size());
  Sum below, above;
  for (const Bins& b : parts) {
    if (b.bin.empty()) continue;
    for (std::uint32_t i = 0; i < bins; ++i) bin_sum[i].add(b.bin[i]);
    for (std::size_t i = 0; i < cand.size(); ++i) cand_sum[i].add(b.cand[i]);
    below.add(b.below);
    above.add(b.above);
  }
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const double m = cand_sum[i].value();
    if (m == 0.0) continue;
    const double v = std::bit_cast<double>(cand[i]);
    if (m / W >= cfg.atom_threshold) {
      h.atoms.push_back({v, m / W});
      continue;
    }
    const std::int64_t k = bin_of(v);
    if (k < 0) {
      below.add(m);
    } else if (k >= static_cast<std::int64_t>(bins)) {
      above.add(m);
    } else {
      bin_sum[static_cast<std::size_t>(k)].add(m);
    }
  }
  std::sort(h.atoms.begin(), h.atoms.end());
  h.mass.resize(bins);
  for (std::uint32_t i = 0; i < bins; ++i) h.mass[i] = bin_sum[i].value() / W;
  h.below = below.value() / W;
  h.above = above.value() / W;
  return h;
}

Histogram marginal(const TheorySpec& spec, const Query& q, const EngineConfig& cfg) {
  if (q.kind != QueryKind::Marginal) throw Error(ErrorCode::ConfigError, "not a marginal query");
  MarginalRequest req;
  req.fluent = q.marginal_fluent;
  req.alpha = q.alpha;
  req.bins = q.bins.value_or(50);
  if (q.range_lo && q.range_hi) req.range = std::pair{*q.range_lo, *q.range_hi};
  return marginal(spec, req, cfg);
}

std::pair<WorldPoint, double> sample_initial(const TheorySpec& spec, const InitForm& form, std::mt19937_64& rng) {
  return draw_initial(spec, form, cumulative_masses(form), rng, 0.0);
}

std::pair<std::vector<Value>, double> sample_outcome(const TheorySpec& spec, const GroundAction& intended,
                                                     const WorldPoint& w, std::mt19937_64& rng,
                                                     const EngineConfig& cfg) {
  std::vector<Step> steps = make_steps(spec, {intended});
  Step& s = steps.front();
  double weight = 1.0;
  if (s.noisy) {
    OutcomeSampler sampler(spec, s, cfg.gauss_truncation_sigmas);
    std::vector<double> scratch;
    weight = sampler.sample(spec, w, s.bound, rng, cfg.equality_epsilon, scratch);
  } else {
    weight = poss(spec, w, s.bound, cfg.equality_epsilon) ? likelihood(spec, w, s.bound, cfg.equality_epsilon) : 0.0;
  }
  const std::size_t n = s.decl->nominal.size();
  return {std::vector<Value>(s.bound.args.begin() + static_cast<std::ptrdiff_t>(n), s.bound.args.end()), weight};
}

}  // namespace belcal
