#include "belcal/support.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace belcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Bounds = std::optional<std::pair<double, double>>;

Bounds full_bounds() { return std::pair{-kInf, kInf}; }

Bounds intersect_bounds(const Bounds& a, const Bounds& b) {
  if (!a || !b) return std::nullopt;
  const double lo = std::max(a->first, b->first);
  const double hi = std::min(a->second, b->second);
  if (lo > hi) return std::nullopt;
  return std::pair{lo, hi};
}

Bounds hull_bounds(const Bounds& a, const Bounds& b) {
  if (!a) return b;
  if (!b) return a;
  return std::pair{std::min(a->first, b->first), std::max(a->second, b->second)};
}

// Evaluates subtrees under partial knowledge of fluents and parameters, with
// one real-valued target variable that can be substituted.
class Analyzer {
 public:
  Analyzer(const ExprPool& pool, const SupportScope& scope) : pool_(pool), scope_(scope) {
    std::vector<Value> vals(scope.fluents.size(), Value::real(0.0));
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (scope.fluents[i]) vals[i] = *scope.fluents[i];
    }
    point_ = WorldPoint(std::move(vals));
    params_.assign(scope.params.size(), Value::real(0.0));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (scope.params[i]) params_[i] = *scope.params[i];
    }
  }

  void set_target(bool is_param, std::uint32_t index) {
    target_is_param_ = is_param;
    target_ = index;
  }

  bool is_target(const Node& n) const {
    if (n.op == Op::Param) return target_is_param_ && n.a == target_;
    if (n.op == Op::Fluent) return !target_is_param_ && n.a == target_ && n.b == kNoHistory;
    return false;
  }

  // True when the subtree depends on known values only.
  bool known(ExprId id) const {
    const Refs r = refs_of(pool_, id);
    if (r.history) return false;
    for (std::uint32_t f : r.fluents) {
      if (!target_is_param_ && f == target_) return false;
      if (f >= scope_.fluents.size() || !scope_.fluents[f]) return false;
    }
    for (std::uint32_t p : r.params) {
      if (target_is_param_ && p == target_) return false;
      if (p >= scope_.params.size() || !scope_.params[p]) return false;
    }
    return true;
  }

  bool mentions_target(ExprId id) const {
    const Refs r = refs_of(pool_, id);
    return target_is_param_ ? r.params.contains(target_) : r.fluents.contains(target_);
  }

  std::optional<Value> eval(ExprId id, std::optional<double> t = std::nullopt) {
    if (t) slot() = Value::real(*t);
    try {
      Env env{std::span<const WorldPoint>(&point_, 1), params_, 0, 0.0};
      return eval_expr(pool_, id, env);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  std::optional<double> eval_real(ExprId id, std::optional<double> t = std::nullopt) {
    auto v = eval(id, t);
    if (!v || !v->is_real()) return std::nullopt;
    return v->as_real();
  }

  std::optional<bool> eval_bool(ExprId id) {
    try {
      Env env{std::span<const WorldPoint>(&point_, 1), params_, 0, 0.0};
      return eval_formula(pool_, id, env);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  // Slope and intercept when the subtree is affine in the target.
  std::optional<std::pair<double, double>> affine(ExprId id) {
    if (!affine_shape(id)) return std::nullopt;
    auto c = eval_real(id, 0.0);
    auto one = eval_real(id, 1.0);
    if (!c || !one) return std::nullopt;
    return std::pair{*one - *c, *c};
  }

  Bounds formula_bounds(ExprId id) {
    const Node& n = pool_.node(id);
    if (known(id)) {
      auto b = eval_bool(id);
      if (!b) return full_bounds();
      return *b ? full_bounds() : std::nullopt;
    }
    switch (n.op) {
      case Op::True: return full_bounds();
      case Op::False: return std::nullopt;
      case Op::And: return intersect_bounds(formula_bounds(ExprId{n.a}), formula_bounds(ExprId{n.b}));
      case Op::Or: return hull_bounds(formula_bounds(ExprId{n.a}), formula_bounds(ExprId{n.b}));
      case Op::Compare: {
        auto a = affine(ExprId{n.a});
        auto b = affine(ExprId{n.b});
        if (!a || !b) return full_bounds();
        const double k = a->first - b->first;
        const double c = a->second - b->second;
        if (k == 0.0 || !std::isfinite(k)) return full_bounds();
        const double r = -c / k;
        switch (n.cmp) {
          case CmpOp::Eq: return std::pair{r, r};
          case CmpOp::Ne: return full_bounds();
          case CmpOp::Lt:
          case CmpOp::Le: return k > 0 ? std::pair{-kInf, r} : std::pair{r, kInf};
          case CmpOp::Gt:
          case CmpOp::Ge: return k > 0 ? std::pair{r, kInf} : std::pair{-kInf, r};
        }
        return full_bounds();
      }
      default: return full_bounds();
    }
  }

  VarSupport support(ExprId id) {
    const Node& n = pool_.node(id);
    if (known(id)) {
      auto v = eval_real(id);
      if (v && *v == 0.0) return VarSupport::empty();
      return VarSupport::unbounded();
    }
    if (!mentions_target(id)) return VarSupport::unbounded();
    switch (n.op) {
      case Op::Mul: return intersect(support(ExprId{n.a}), support(ExprId{n.b}));
      case Op::Div:
      case Op::Neg:
      case Op::Abs: return support(ExprId{n.a});
      case Op::Add:
      case Op::Sub: return hull(support(ExprId{n.a}), support(ExprId{n.b}));
      case Op::Gauss: {
        if (!known(ExprId{n.b}) || !known(ExprId{n.c})) return VarSupport::unbounded();
        auto aff = affine(ExprId{n.a});
        auto m = eval_real(ExprId{n.b});
        auto v = eval_real(ExprId{n.c});
        if (!aff || !m || !v || !(*v > 0.0) || aff->first == 0.0) return VarSupport::unbounded();
        return VarSupport::gauss((*m - aff->second) / aff->first, std::sqrt(*v) / std::fabs(aff->first));
      }
      case Op::Cases: {
        VarSupport out = VarSupport::empty();
        for (const Branch& br : pool_.branches(id)) {
          if (known(br.guard)) {
            auto g = eval_bool(br.guard);
            if (g && !*g) continue;
            if (g && *g) return hull(out, support(br.value));
          }
          Bounds b = formula_bounds(br.guard);
          if (!b) continue;
          out = hull(out, intersect(VarSupport::interval(b->first, b->second), support(br.value)));
        }
        return hull(out, support(ExprId{n.c}));
      }
      default: return VarSupport::unbounded();
    }
  }

  VarSupport intersect(const VarSupport& a, const VarSupport& b) const {
    using K = VarSupport::Kind;
    if (a.kind == K::Empty || b.kind == K::Empty) return VarSupport::empty();
    if (a.kind == K::Unbounded) return b;
    if (b.kind == K::Unbounded) return a;
    if (a.kind == K::Gauss && b.kind == K::Gauss && a.mean == b.mean && a.sd == b.sd) return a;
    const auto [alo, ahi] = a.range(scope_.sigmas);
    const auto [blo, bhi] = b.range(scope_.sigmas);
    return VarSupport::interval(std::max(alo, blo), std::min(ahi, bhi));
  }

  VarSupport hull(const VarSupport& a, const VarSupport& b) const {
    using K = VarSupport::Kind;
    if (a.kind == K::Empty) return b;
    if (b.kind == K::Empty) return a;
    if (a.kind == K::Unbounded || b.kind == K::Unbounded) return VarSupport::unbounded();
    if (a.kind == K::Gauss && b.kind == K::Gauss && a.mean == b.mean && a.sd == b.sd) return a;
    const auto [alo, ahi] = a.range(scope_.sigmas);
    const auto [blo, bhi] = b.range(scope_.sigmas);
    return VarSupport::interval(std::min(alo, blo), std::max(ahi, bhi));
  }

 private:
  Value& slot() { return target_is_param_ ? params_.at(target_) : point_[target_]; }

  bool affine_shape(ExprId id) const {
    const Node& n = pool_.node(id);
    if (is_target(n)) return true;
    if (known(id)) return true;
    switch (n.op) {
      case Op::Neg: return affine_shape(ExprId{n.a});
      case Op::Add:
      case Op::Sub: return affine_shape(ExprId{n.a}) && affine_shape(ExprId{n.b});
      case Op::Mul:
        return (known(ExprId{n.a}) && affine_shape(ExprId{n.b})) || (known(ExprId{n.b}) && affine_shape(ExprId{n.a}));
      case Op::Div: return known(ExprId{n.b}) && affine_shape(ExprId{n.a});
      default: return false;
    }
  }

  const ExprPool& pool_;
  const SupportScope& scope_;
  WorldPoint point_;
  std::vector<Value> params_;
  bool target_is_param_ = false;
  std::uint32_t target_ = 0;
};

}  // namespace

VarSupport VarSupport::interval(double lo, double hi) {
  if (!(lo <= hi)) return empty();
  if (std::isinf(lo) && std::isinf(hi)) return unbounded();
  return {Kind::Interval, lo, hi, 0.0, 0.0};
}

std::pair<double, double> VarSupport::range(double sigmas) const {
  switch (kind) {
    case Kind::Interval: return {lo, hi};
    case Kind::Gauss: return {mean - sigmas * sd, mean + sigmas * sd};
    case Kind::Unbounded: return {-kInf, kInf};
    case Kind::Empty: break;
  }
  return {0.0, 0.0};
}

VarSupport analyze_support(const ExprPool& pool, ExprId id, const SupportScope& scope) {
  Analyzer a(pool, scope);
  a.set_target(scope.target_is_param, scope.target);
  return a.support(id);
}

std::optional<std::pair<double, double>> formula_bounds(const ExprPool& pool, ExprId id, const SupportScope& scope) {
  Analyzer a(pool, scope);
  a.set_target(scope.target_is_param, scope.target);
  return a.formula_bounds(id);
}

double Factor::density(double x) const {
  switch (kind) {
    case Kind::Uniform: return lo <= x && x <= hi ? 1.0 : 0.0;
    case Kind::Gauss: return gauss_density(x, mean, var);
    case Kind::None: break;
  }
  return 1.0;
}

std::pair<double, double> Factor::range(double sigmas) const {
  if (kind == Kind::Gauss) {
    const double sd = std::sqrt(var);
    return {mean - sigmas * sd, mean + sigmas * sd};
  }
  return {lo, hi};
}

double ProductForm::mass() const {
  double m = constant;
  for (const Factor& f : factors) {
    if (f.kind == Factor::Kind::Uniform) m *= f.hi - f.lo;
  }
  return m;
}

namespace {

class ProductRecognizer {
 public:
  ProductRecognizer(const TheorySpec& spec, const SupportScope& scope)
      : spec_(spec), analyzer_(spec.pool, scope), scope_(scope) {}

  std::optional<ProductForm> walk(ExprId id) {
    const ExprPool& pool = spec_.pool;
    const Node& n = pool.node(id);
    if (known_all(id)) {
      auto v = analyzer_.eval_real(id);
      if (!v) return std::nullopt;
      return constant(*v);
    }
    switch (n.op) {
      case Op::Mul: {
        auto a = walk(ExprId{n.a});
        if (!a) return std::nullopt;
        auto b = walk(ExprId{n.b});
        if (!b) return std::nullopt;
        return merge(*a, *b);
      }
      case Op::Div: {
        if (!known_all(ExprId{n.b})) return std::nullopt;
        auto d = analyzer_.eval_real(ExprId{n.b});
        if (!d || *d == 0.0) return std::nullopt;
        auto a = walk(ExprId{n.a});
        if (!a) return std::nullopt;
        a->constant /= *d;
        return a;
      }
      case Op::Gauss: {
        if (!known_all(ExprId{n.b}) || !known_all(ExprId{n.c})) return std::nullopt;
        auto f = single_fluent(ExprId{n.a});
        if (!f) return std::nullopt;
        analyzer_.set_target(false, *f);
        auto aff = analyzer_.affine(ExprId{n.a});
        auto m = analyzer_.eval_real(ExprId{n.b});
        auto v = analyzer_.eval_real(ExprId{n.c});
        if (!aff || !m || !v || !(*v > 0.0) || aff->first == 0.0 || !std::isfinite(aff->first)) return std::nullopt;
        ProductForm out = constant(1.0 / std::fabs(aff->first));
        Factor& fac = out.factors[*f];
        fac.kind = Factor::Kind::Gauss;
        fac.mean = (*m - aff->second) / aff->first;
        fac.var = *v / (aff->first * aff->first);
        return out;
      }
      case Op::Cases: return walk_cases(id);
      default: return std::nullopt;
    }
  }

 private:
  struct GuardClass {
    enum Kind { False, True, Intervals, Unknown } kind = True;
    std::map<std::uint32_t, std::pair<double, double>> intervals;
  };

  ProductForm constant(double c) const {
    ProductForm p;
    p.constant = c;
    p.factors.assign(spec_.fluents.size(), Factor{});
    return p;
  }

  bool known_all(ExprId id) const {
    const Refs r = refs_of(spec_.pool, id);
    if (r.history || !r.params.empty()) return false;
    for (std::uint32_t f : r.fluents) {
      if (!scope_.fluents[f]) return false;
    }
    return true;
  }

  std::optional<std::uint32_t> single_fluent(ExprId id) const {
    const Refs r = refs_of(spec_.pool, id);
    if (r.history || !r.params.empty()) return std::nullopt;
    std::optional<std::uint32_t> out;
    for (std::uint32_t f : r.fluents) {
      if (scope_.fluents[f]) continue;
      if (out) return std::nullopt;
      out = f;
    }
    return out;
  }

  static std::optional<ProductForm> merge(const ProductForm& a, const ProductForm& b) {
    ProductForm out = a;
    out.constant *= b.constant;
    for (std::size_t i = 0; i < out.factors.size(); ++i) {
      if (b.factors[i].kind == Factor::Kind::None) continue;
      if (out.factors[i].kind != Factor::Kind::None) return std::nullopt;
      out.factors[i] = b.factors[i];
    }
    return out;
  }

  void classify_into(ExprId id, GuardClass& out) {
    if (out.kind == GuardClass::False || out.kind == GuardClass::Unknown) return;
    const Node& n = spec_.pool.node(id);
    if (known_all(id)) {
      auto b = analyzer_.eval_bool(id);
      if (!b) {
        out.kind = GuardClass::Unknown;
      } else if (!*b) {
        out.kind = GuardClass::False;
      }
      return;
    }
    if (n.op == Op::And) {
      classify_into(ExprId{n.a}, out);
      classify_into(ExprId{n.b}, out);
      return;
    }
    if (n.op == Op::Compare && n.cmp != CmpOp::Eq && n.cmp != CmpOp::Ne) {
      auto f = single_fluent(id);
      if (f) {
        analyzer_.set_target(false, *f);
        auto a = analyzer_.affine(ExprId{n.a});
        auto b = analyzer_.affine(ExprId{n.b});
        if (a && b && a->first != b->first) {
          Bounds bounds = analyzer_.formula_bounds(id);
          if (!bounds) {
            out.kind = GuardClass::False;
            return;
          }
          auto it = out.intervals.find(*f);
          Bounds merged = it == out.intervals.end() ? bounds : intersect_bounds(it->second, bounds);
          if (!merged) {
            out.kind = GuardClass::False;
            return;
          }
          out.intervals[*f] = *merged;
          out.kind = GuardClass::Intervals;
          return;
        }
      }
    }
    out.kind = GuardClass::Unknown;
  }

  GuardClass classify(ExprId guard) {
    GuardClass c;
    classify_into(guard, c);
    return c;
  }

  bool is_zero(ExprId id) {
    if (!known_all(id)) return false;
    auto v = analyzer_.eval_real(id);
    return v && *v == 0.0;
  }

  std::optional<ProductForm> walk_cases(ExprId id) {
    const auto branches = spec_.pool.branches(id);
    const ExprId otherwise{spec_.pool.node(id).c};
    for (std::size_t i = 0; i < branches.size(); ++i) {
      GuardClass g = classify(branches[i].guard);
      if (g.kind == GuardClass::False) continue;
      if (g.kind == GuardClass::Unknown) return std::nullopt;
      if (g.kind == GuardClass::True) return walk(branches[i].value);
      for (std::size_t j = i + 1; j < branches.size(); ++j) {
        if (classify(branches[j].guard).kind == GuardClass::False) continue;
        if (!is_zero(branches[j].value)) return std::nullopt;
      }
      if (!is_zero(otherwise)) return std::nullopt;
      auto form = walk(branches[i].value);
      if (!form) return std::nullopt;
      for (const auto& [f, b] : g.intervals) {
        if (!std::isfinite(b.first) || !std::isfinite(b.second)) return std::nullopt;
        Factor& fac = form->factors[f];
        if (fac.kind == Factor::Kind::Gauss) return std::nullopt;
        if (fac.kind == Factor::Kind::None) {
          fac = Factor{Factor::Kind::Uniform, b.first, b.second, 0.0, 0.0};
        } else {
          fac.lo = std::max(fac.lo, b.first);
          fac.hi = std::min(fac.hi, b.second);
        }
        if (!(fac.lo < fac.hi)) return constant(0.0);
      }
      return form;
    }
    return walk(otherwise);
  }

  const TheorySpec& spec_;
  Analyzer analyzer_;
  const SupportScope& scope_;
};

}  // namespace

std::optional<ProductForm> recognize_product(const TheorySpec& spec, std::span<const Value> finite_values) {
  SupportScope scope;
  scope.fluents.resize(spec.fluents.size());
  for (std::size_t i = 0; i < spec.fluents.size(); ++i) {
    if (spec.fluents[i].domain.finite) scope.fluents[i] = finite_values[i];
  }
  ProductRecognizer rec(spec, scope);
  auto form = rec.walk(spec.init_p);
  if (!form || !(form->constant >= 0.0) || !std::isfinite(form->constant)) return std::nullopt;
  if (form->constant == 0.0) return form;
  for (std::size_t i = 0; i < spec.fluents.size(); ++i) {
    if (!spec.fluents[i].domain.finite && form->factors[i].kind == Factor::Kind::None) return std::nullopt;
  }
  return form;
}

std::vector<std::vector<SymbolId>> enumerate_domains(const std::vector<const Domain*>& domains) {
  std::vector<std::vector<SymbolId>> out;
  std::vector<std::size_t> idx(domains.size(), 0);
  for (const Domain* d : domains) {
    if (d->values.empty()) return out;
  }
  while (true) {
    std::vector<SymbolId> row;
    row.reserve(domains.size());
    for (std::size_t i = 0; i < domains.size(); ++i) row.push_back(domains[i]->values[idx[i]]);
    out.push_back(std::move(row));
    std::size_t k = domains.size();
    while (k > 0) {
      --k;
      if (++idx[k] < domains[k]->values.size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (domains.empty()) return out;
  }
}

InitForm analyze_init(const TheorySpec& spec, std::size_t max_combos) {
  InitForm out;
  std::vector<const Domain*> domains;
  std::size_t combos = 1;
  for (std::uint32_t i = 0; i < spec.fluents.size(); ++i) {
    if (spec.fluents[i].domain.finite) {
      out.finite_fluents.push_back(i);
      domains.push_back(&spec.fluents[i].domain);
      combos *= spec.fluents[i].domain.values.size();
      if (combos > max_combos) {
        throw Error(ErrorCode::UnrecognizedInitForm, "too many finite fluent combinations for a product form",
                    spec.init_span);
      }
    } else {
      out.continuous_fluents.push_back(i);
    }
  }
  for (const auto& row : enumerate_domains(domains)) {
    std::vector<Value> values(spec.fluents.size(), Value::real(0.0));
    for (std::size_t k = 0; k < row.size(); ++k) values[out.finite_fluents[k]] = Value::sym(row[k]);
    auto form = recognize_product(spec, values);
    if (!form) {
      throw Error(ErrorCode::UnrecognizedInitForm, "initial density is not a product of interval, gauss and table factors",
                  spec.init_span);
    }
    const double m = form->mass();
    if (m > 0.0) {
      out.total_mass += m;
      out.combos.push_back({std::move(values), std::move(*form)});
    }
  }
  return out;
}

}  // namespace belcal
