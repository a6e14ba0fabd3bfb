#include <cmath>
#include <random>

#include "belcal/parser.hpp"
#include "belcal/support.hpp"
#include "typing.hpp"

namespace belcal {

namespace {

constexpr std::size_t kExhaustiveLimit = 4096;
constexpr std::size_t kRandomSamples = 256;

void add(std::vector<Diagnostic>& out, ErrorCode code, SourceSpan span, std::string message,
         Severity sev = Severity::Error) {
  out.push_back(Diagnostic{sev, code, span, std::move(message)});
}

bool closed(const ExprPool& pool, ExprId id) {
  const Refs r = refs_of(pool, id);
  return r.fluents.empty() && r.params.empty();
}

// Constant-foldable gauss variances must be positive.
void check_variances(const ExprPool& pool, ExprId id, std::vector<Diagnostic>& out) {
  const Node& n = pool.node(id);
  switch (n.op) {
    case Op::Const:
    case Op::Fluent:
    case Op::Param:
    case Op::True:
    case Op::False:
      return;
    case Op::Gauss:
      check_variances(pool, ExprId{n.a}, out);
      check_variances(pool, ExprId{n.b}, out);
      check_variances(pool, ExprId{n.c}, out);
      if (closed(pool, ExprId{n.c})) {
        try {
          const double v = eval_real(pool, ExprId{n.c}, Env{});
          if (!(v > 0.0)) {
            add(out, ErrorCode::NonPositiveVariance, pool.node(ExprId{n.c}).span.valid() ? pool.node(ExprId{n.c}).span : n.span,
                "gauss variance " + format_real(v) + " is not positive");
          }
        } catch (const Error& e) {
          add(out, e.code(), n.span, e.detail());
        }
      }
      return;
    case Op::Cases:
      for (const Branch& br : pool.branches(id)) {
        check_variances(pool, br.guard, out);
        check_variances(pool, br.value, out);
      }
      check_variances(pool, ExprId{n.c}, out);
      return;
    case Op::Neg:
    case Op::Abs:
    case Op::Not:
      check_variances(pool, ExprId{n.a}, out);
      return;
    default:
      check_variances(pool, ExprId{n.a}, out);
      check_variances(pool, ExprId{n.b}, out);
      return;
  }
}

bool has_history(const ExprPool& pool, ExprId id) { return id.valid() && refs_of(pool, id).history; }

// Real values used to probe expressions for sign and domain violations.
double probe_real(std::mt19937_64& rng) {
  static constexpr double kSpecial[] = {0.0, 1.0, -1.0, 0.5, 2.0, 10.0, -10.0, 100.0};
  std::uniform_int_distribution<int> pick(0, 3);
  switch (pick(rng)) {
    case 0: return kSpecial[std::uniform_int_distribution<int>(0, 7)(rng)];
    case 1: return std::uniform_real_distribution<double>(-20.0, 20.0)(rng);
    case 2: return std::normal_distribution<double>(0.0, 100.0)(rng);
    default: return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  }
}

// Calls `fn(point, params)` over all assignments when small, else randomly.
template <class Fn>
void for_probes(const std::vector<FluentDecl>& fluents, const std::vector<const ParamDecl*>& params, Fn&& fn) {
  std::vector<const Domain*> doms;
  for (const FluentDecl& f : fluents) doms.push_back(&f.domain);
  for (const ParamDecl* p : params) doms.push_back(&p->domain);
  bool all_finite = true;
  std::size_t product = 1;
  for (const Domain* d : doms) {
    if (!d->finite) {
      all_finite = false;
      break;
    }
    product *= d->values.size();
    if (product > kExhaustiveLimit) break;
  }
  std::vector<Value> vals(doms.size());
  auto emit = [&] {
    WorldPoint w(std::vector<Value>(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(fluents.size())));
    std::vector<Value> ps(vals.begin() + static_cast<std::ptrdiff_t>(fluents.size()), vals.end());
    fn(w, ps);
  };
  if (all_finite && product <= kExhaustiveLimit) {
    for (const auto& row : enumerate_domains(doms)) {
      for (std::size_t i = 0; i < row.size(); ++i) vals[i] = Value::sym(row[i]);
      emit();
    }
    return;
  }
  std::mt19937_64 rng(0x5eed5eedULL);
  for (std::size_t s = 0; s < kRandomSamples; ++s) {
    for (std::size_t i = 0; i < doms.size(); ++i) {
      if (doms[i]->finite) {
        std::uniform_int_distribution<std::size_t> pick(0, doms[i]->values.size() - 1);
        vals[i] = Value::sym(doms[i]->values[pick(rng)]);
      } else {
        vals[i] = Value::real(probe_real(rng));
      }
    }
    emit();
  }
}

void check_action(const TheorySpec& spec, const ActionDecl& a, std::vector<Diagnostic>& out) {
  const std::size_t before = out.size();
  detail::Typer typer(nullptr, spec.pool, spec.fluents, &a, &out);
  for (const SsaEntry& e : a.ssa) {
    const detail::Ty t = typer.expr(e.value);
    const bool finite = spec.fluents[e.fluent].domain.finite;
    if ((t == detail::Ty::Real && finite) || (t == detail::Ty::Sym && !finite)) {
      add(out, ErrorCode::TypeError, e.span,
          "update of " + spec.fluents[e.fluent].name + " does not match its domain (" + (finite ? "finite" : "real") + ")");
    }
  }
  if (a.likelihood.valid() && typer.expr(a.likelihood) == detail::Ty::Sym) {
    add(out, ErrorCode::TypeError, spec.pool.node(a.likelihood).span, "likelihood of " + a.name + " is not real-valued");
  }
  if (a.precondition.valid()) typer.formula(a.precondition);

  if (a.kind == ActionKind::Sensing && !a.ssa.empty()) {
    add(out, ErrorCode::ValidationFailed, a.ssa.front().span, "sensing action mutates fluent");
  }
  if (a.kind == ActionKind::Noisy) {
    bool uses_actual = false;
    if (a.likelihood.valid()) {
      for (std::uint32_t p : refs_of(spec.pool, a.likelihood).params) uses_actual = uses_actual || p >= a.nominal.size();
    }
    if (!uses_actual) {
      add(out, ErrorCode::ValidationFailed, a.span, "noisy action " + a.name + " has a likelihood that ignores its actual parameters");
    }
    for (const SsaEntry& e : a.ssa) {
      for (std::uint32_t p : refs_of(spec.pool, e.value).params) {
        if (p < a.nominal.size()) {
          add(out, ErrorCode::ValidationFailed, e.span,
              "update in noisy action " + a.name + " reads nominal parameter " + a.nominal[p].name);
        }
      }
    }
  }
  for (ExprId id : {a.likelihood, a.precondition}) {
    if (id.valid()) check_variances(spec.pool, id, out);
    if (has_history(spec.pool, id)) add(out, ErrorCode::SyntaxError, spec.pool.node(id).span, "history reference outside a query");
  }
  for (const SsaEntry& e : a.ssa) check_variances(spec.pool, e.value, out);
  if (out.size() != before) return;

  // Sign and domain checks by probing.
  std::vector<const ParamDecl*> params;
  for (std::size_t i = 0; i < a.arity(); ++i) params.push_back(&a.param(i));
  bool negative = false;
  bool violation = false;
  for_probes(spec.fluents, params, [&](const WorldPoint& w, const std::vector<Value>& ps) {
    const Env env{std::span<const WorldPoint>(&w, 1), ps, 0, 0.0};
    if (a.likelihood.valid() && !negative) {
      try {
        if (eval_real(spec.pool, a.likelihood, env) < 0.0) {
          negative = true;
          add(out, ErrorCode::NegativeLikelihood, spec.pool.node(a.likelihood).span,
              "likelihood of " + a.name + " can be negative");
        }
      } catch (const Error&) {
      }
    }
    for (const SsaEntry& e : a.ssa) {
      const Domain& d = spec.fluents[e.fluent].domain;
      if (!d.finite || violation) continue;
      try {
        if (!d.contains(eval_expr(spec.pool, e.value, env))) {
          violation = true;
          add(out, ErrorCode::DomainViolation, e.span,
              "update of " + spec.fluents[e.fluent].name + " can leave its domain");
        }
      } catch (const Error&) {
      }
    }
  });
}

}  // namespace

std::vector<Diagnostic> validate(const TheorySpec& spec) {
  std::vector<Diagnostic> out;
  if (!spec.init_p.valid()) {
    add(out, ErrorCode::ValidationFailed, spec.init_span, "missing initial density");
    return out;
  }
  const std::size_t before = out.size();
  detail::Typer typer(nullptr, spec.pool, spec.fluents, nullptr, &out);
  if (typer.expr(spec.init_p) == detail::Ty::Sym) {
    add(out, ErrorCode::TypeError, spec.init_span, "initial density is not real-valued");
  }
  check_variances(spec.pool, spec.init_p, out);
  if (has_history(spec.pool, spec.init_p)) add(out, ErrorCode::SyntaxError, spec.init_span, "history reference outside a query");
  if (!refs_of(spec.pool, spec.init_p).params.empty()) {
    add(out, ErrorCode::UnboundReference, spec.init_span, "initial density mentions an action parameter");
  }
  if (out.size() == before) {
    bool negative = false;
    for_probes(spec.fluents, {}, [&](const WorldPoint& w, const std::vector<Value>&) {
      if (negative) return;
      try {
        const Env env{std::span<const WorldPoint>(&w, 1), {}, 0, 0.0};
        if (eval_real(spec.pool, spec.init_p, env) < 0.0) {
          negative = true;
          add(out, ErrorCode::NegativeWeight, spec.init_span, "initial density can be negative");
        }
      } catch (const Error&) {
      }
    });
    try {
      analyze_init(spec);
    } catch (const Error& e) {
      add(out, ErrorCode::UnrecognizedInitForm, spec.init_span,
          "initial density is grid-only: " + e.detail(), Severity::Note);
    }
  }
  for (const ActionDecl& a : spec.actions) check_action(spec, a, out);
  return out;
}

}  // namespace belcal
