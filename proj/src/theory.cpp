#include "belcal/theory.hpp"

#include <algorithm>

namespace belcal {

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::Deterministic: return "deterministic";
    case ActionKind::Sensing: return "sensing";
    case ActionKind::Noisy: return "noisy";
  }
  return "?";
}

std::string_view to_string(QueryKind k) {
  switch (k) {
    case QueryKind::Bel: return "bel";
    case QueryKind::Knows: return "knows";
    case QueryKind::Marginal: return "marginal";
  }
  return "?";
}

std::vector<std::string> ActionDecl::param_names() const {
  std::vector<std::string> out;
  out.reserve(arity());
  for (const auto& p : nominal) out.push_back(p.name);
  for (const auto& p : actual) out.push_back(p.name);
  return out;
}

const SsaEntry* ActionDecl::ssa_for(std::uint32_t fluent) const {
  for (const auto& e : ssa) {
    if (e.fluent == fluent) return &e;
  }
  return nullptr;
}

std::optional<std::uint32_t> TheorySpec::find_fluent(std::string_view n) const {
  for (std::size_t i = 0; i < fluents.size(); ++i) {
    if (fluents[i].name == n) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

std::optional<std::uint32_t> TheorySpec::find_action(std::string_view n) const {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].name == n) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

std::vector<std::string> TheorySpec::fluent_names() const {
  std::vector<std::string> out;
  for (const auto& f : fluents) out.push_back(f.name);
  return out;
}

bool TheorySpec::all_finite() const {
  for (const auto& f : fluents) {
    if (!f.domain.finite) return false;
  }
  for (const auto& a : actions) {
    for (const auto& p : a.actual) {
      if (!p.domain.finite) return false;
    }
  }
  return true;
}

std::uint64_t TheorySpec::digest() const {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : source) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

bool same_params(const std::vector<ParamDecl>& a, const std::vector<ParamDecl>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].domain.finite != b[i].domain.finite) return false;
    if (a[i].domain.values.size() != b[i].domain.values.size()) return false;
  }
  return true;
}

bool same_optional_expr(const ExprPool& pa, ExprId x, const ExprPool& pb, ExprId y) {
  if (x.valid() != y.valid()) return false;
  return !x.valid() || same_structure(pa, x, pb, y);
}

bool same_domain_names(const Domain& a, const SymbolTable& sa, const Domain& b, const SymbolTable& sb) {
  if (a.finite != b.finite || a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (sa.name(a.values[i]) != sb.name(b.values[i])) return false;
  }
  return true;
}

}  // namespace

bool same_structure(const TheorySpec& a, const TheorySpec& b) {
  if (a.name != b.name || a.fluents.size() != b.fluents.size() || a.actions.size() != b.actions.size()) return false;
  // Symbol ids are only comparable when both tables agree.
  if (a.symbols.size() != b.symbols.size()) return false;
  for (std::uint32_t i = 0; i < a.symbols.size(); ++i) {
    if (a.symbols.name(SymbolId{i}) != b.symbols.name(SymbolId{i})) return false;
  }
  for (std::size_t i = 0; i < a.fluents.size(); ++i) {
    if (a.fluents[i].name != b.fluents[i].name) return false;
    if (!same_domain_names(a.fluents[i].domain, a.symbols, b.fluents[i].domain, b.symbols)) return false;
  }
  for (std::size_t i = 0; i < a.actions.size(); ++i) {
    const ActionDecl& x = a.actions[i];
    const ActionDecl& y = b.actions[i];
    if (x.name != y.name || x.kind != y.kind) return false;
    if (!same_params(x.nominal, y.nominal) || !same_params(x.actual, y.actual)) return false;
    if (!same_optional_expr(a.pool, x.precondition, b.pool, y.precondition)) return false;
    if (!same_optional_expr(a.pool, x.likelihood, b.pool, y.likelihood)) return false;
    if (x.ssa.size() != y.ssa.size()) return false;
    for (std::size_t k = 0; k < x.ssa.size(); ++k) {
      if (x.ssa[k].fluent != y.ssa[k].fluent) return false;
      if (!same_structure(a.pool, x.ssa[k].value, b.pool, y.ssa[k].value)) return false;
    }
  }
  return same_optional_expr(a.pool, a.init_p, b.pool, b.init_p);
}

}  // namespace belcal
