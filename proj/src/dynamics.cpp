#include "belcal/dynamics.hpp"

#include <cmath>

namespace belcal {

namespace {

Env point_env(const WorldPoint& w, const BoundAction& a, double eps) {
  return Env{std::span<const WorldPoint>(&w, 1), a.args, 0, eps};
}

const ActionDecl& decl_of(const TheorySpec& spec, const BoundAction& a) {
  if (a.action >= spec.actions.size()) throw Error(ErrorCode::UnboundReference, "unknown action index");
  return spec.actions[a.action];
}

void check_args(const ActionDecl& d, const BoundAction& a) {
  if (a.args.size() != d.arity()) {
    throw Error(ErrorCode::ArityMismatch, d.name + " expects " + std::to_string(d.arity()) + " bound arguments, got " +
                                              std::to_string(a.args.size()));
  }
}

}  // namespace

void progress_into(const TheorySpec& spec, const WorldPoint& w, const BoundAction& a, WorldPoint& out, double eps) {
  const ActionDecl& d = decl_of(spec, a);
  check_args(d, a);
  out = w;
  if (d.kind == ActionKind::Sensing) return;
  const Env env = point_env(w, a, eps);
  for (const SsaEntry& e : d.ssa) {
    const FluentDecl& f = spec.fluents[e.fluent];
    Value v = eval_expr(spec.pool, e.value, env);
    if (f.domain.finite) {
      if (!f.domain.contains(v)) {
        throw Error(ErrorCode::DomainViolation, "update of " + f.name + " by " + d.name + " leaves its domain", e.span);
      }
    } else if (!v.is_real()) {
      throw Error(ErrorCode::TypeError, "update of real fluent " + f.name + " produced a symbol", e.span);
    }
    out[e.fluent] = v;
  }
}

WorldPoint progress(const TheorySpec& spec, const WorldPoint& w, const BoundAction& a, double eps) {
  WorldPoint out;
  progress_into(spec, w, a, out, eps);
  return out;
}

bool poss(const TheorySpec& spec, const WorldPoint& w, const BoundAction& a, double eps) {
  const ActionDecl& d = decl_of(spec, a);
  check_args(d, a);
  if (!d.precondition.valid()) return true;
  return eval_formula(spec.pool, d.precondition, point_env(w, a, eps));
}

double likelihood(const TheorySpec& spec, const WorldPoint& w, const BoundAction& a, double eps) {
  const ActionDecl& d = decl_of(spec, a);
  check_args(d, a);
  if (!d.likelihood.valid()) return 1.0;
  const double l = eval_real(spec.pool, d.likelihood, point_env(w, a, eps));
  if (l < 0.0) {
    throw Error(ErrorCode::NegativeLikelihood, "likelihood of " + d.name + " is negative (" + format_real(l) + ")",
                spec.pool.node(d.likelihood).span);
  }
  return l;
}

BoundAction ground_alt(const TheorySpec& spec, const GroundAction& intended, std::span<const Value> outcome) {
  if (intended.action >= spec.actions.size()) throw Error(ErrorCode::UnboundReference, "unknown action index");
  const ActionDecl& d = spec.actions[intended.action];
  if (intended.nominal.size() != d.nominal.size() || outcome.size() != d.actual.size()) {
    throw Error(ErrorCode::ArityMismatch, d.name + " takes " + std::to_string(d.nominal.size()) + " nominal and " +
                                              std::to_string(d.actual.size()) + " actual arguments");
  }
  BoundAction out{intended.action, intended.nominal};
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    const Value& v = outcome[i];
    const ParamDecl& p = d.actual[i];
    const bool ok = p.domain.finite ? p.domain.contains(v) : (v.is_real() && std::isfinite(v.as_real()));
    if (!ok) throw Error(ErrorCode::DomainMismatch, "outcome for " + d.name + "." + p.name + " is outside its domain");
    out.args.push_back(v);
  }
  return out;
}

Trajectory simulate(const TheorySpec& spec, const WorldPoint& w0, std::span<const BoundAction> beta, double eps) {
  Trajectory t;
  t.points.push_back(w0);
  for (std::size_t k = 0; k < beta.size(); ++k) {
    t.actions.push_back(beta[k]);
    try {
      if (!poss(spec, t.points.back(), beta[k], eps)) {
        t.inexecutable_at = k;
        return t;
      }
      t.points.push_back(progress(spec, t.points.back(), beta[k], eps));
    } catch (const Error& e) {
      throw Error(e.code(), "at action " + std::to_string(k + 1) + ": " + e.detail(), e.span());
    }
  }
  return t;
}

}  // namespace belcal
