#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "belcal/expr.hpp"
#include "belcal/theory.hpp"

namespace belcal {

// Where an expression can be nonzero, as a function of one variable.
struct VarSupport {
  enum class Kind : std::uint8_t { Empty, Interval, Gauss, Unbounded };
  Kind kind = Kind::Unbounded;
  double lo = 0.0;
  double hi = 0.0;
  double mean = 0.0;
  double sd = 0.0;

  static VarSupport empty() { return {Kind::Empty}; }
  static VarSupport unbounded() { return {Kind::Unbounded}; }
  static VarSupport interval(double lo, double hi);
  static VarSupport gauss(double mean, double sd) { return {Kind::Gauss, 0.0, 0.0, mean, sd}; }

  // Bounded range, truncating gauss supports at +-sigmas standard deviations.
  std::pair<double, double> range(double sigmas) const;
};

// Known values for fluents and parameters; everything else is unknown. The
// target is the variable the support is computed for.
struct SupportScope {
  std::vector<std::optional<Value>> fluents;
  std::vector<std::optional<Value>> params;
  bool target_is_param = false;
  std::uint32_t target = 0;
  double sigmas = 8.0;
};

VarSupport analyze_support(const ExprPool& pool, ExprId id, const SupportScope& scope);

// Interval of target values where a formula can hold ([-inf, inf] if unknown,
// nullopt if it can never hold).
std::optional<std::pair<double, double>> formula_bounds(const ExprPool& pool, ExprId id, const SupportScope& scope);

// A density over the continuous fluents that is a constant times one factor
// per fluent, for one fixed assignment of the finite fluents.
struct Factor {
  enum class Kind : std::uint8_t { None, Uniform, Gauss };
  Kind kind = Kind::None;
  double lo = 0.0;
  double hi = 0.0;
  double mean = 0.0;
  double var = 0.0;

  double density(double x) const;  // 1 on [lo, hi] for Uniform
  std::pair<double, double> range(double sigmas) const;
};

struct ProductForm {
  double constant = 0.0;
  std::vector<Factor> factors;  // indexed by fluent; None for finite fluents
  double mass() const;          // integral over the continuous fluents
};

// `finite_values` holds one value per fluent; entries of continuous fluents
// are ignored. Returns nullopt when init_p is not in product form there.
std::optional<ProductForm> recognize_product(const TheorySpec& spec, std::span<const Value> finite_values);

// The initial density broken into one product form per assignment of the
// finite fluents.
struct InitForm {
  std::vector<std::uint32_t> finite_fluents;
  std::vector<std::uint32_t> continuous_fluents;
  struct Combo {
    std::vector<Value> values;  // per fluent; continuous entries are placeholders
    ProductForm form;
  };
  std::vector<Combo> combos;  // only those with positive mass
  double total_mass = 0.0;
};

// Throws UnrecognizedInitForm when some combination is not a product form or
// the number of finite combinations exceeds `max_combos`.
InitForm analyze_init(const TheorySpec& spec, std::size_t max_combos = 1 << 16);

// Enumerates every assignment of the given finite domains (odometer order).
std::vector<std::vector<SymbolId>> enumerate_domains(const std::vector<const Domain*>& domains);

}  // namespace belcal
