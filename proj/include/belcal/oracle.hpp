#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "belcal/theory.hpp"

namespace belcal {

// Reference computations that share the expression evaluator with the
// engine but none of its integration code.

struct PriorGrid {
  std::vector<WorldPoint> points;
  std::vector<double> mass;  // init_p(x) times cell volume
};

// One axis of an explicit box; every continuous fluent needs one.
struct BoxAxis {
  std::uint32_t fluent = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::uint32_t points = 0;
};

// Midpoint grid over the box; finite fluents are enumerated.
PriorGrid make_prior_grid(const TheorySpec& spec, const std::vector<BoxAxis>& box);

// Box from the initial density's product form (throws OracleNotApplicable
// when the density has no bounded product form).
std::vector<BoxAxis> default_box(const TheorySpec& spec, std::uint32_t points_per_axis, double sigmas);

// Err(z, u): the likelihood of a one-parameter sensing action whose
// likelihood reads a single fluent.
struct ErrFn {
  const TheorySpec* spec = nullptr;
  std::uint32_t action = 0;
  std::uint32_t fluent = 0;

  double operator()(const Value& z, const Value& u) const;
};
// Throws OracleNotApplicable when the action is not such a sensor.
ErrFn make_err_fn(const TheorySpec& spec, std::uint32_t action);

// Multiplies every node mass by Err(z, f(node)).
PriorGrid bayes_update(const PriorGrid& prior, const ErrFn& err, const Value& z);

// Posterior belief in phi after one reading. Throws ZeroEvidence.
double bayes_posterior(const PriorGrid& prior, const ErrFn& err, const Value& z, const ExprPool& pool, ExprId phi);
// Normalized belief in phi under the grid masses. Throws ZeroEvidence.
double grid_belief(const PriorGrid& grid, const ExprPool& pool, ExprId phi);

// Exhaustive sum over all fluent vectors and outcome vectors. Requires every
// fluent and actual parameter domain to be finite (else InfiniteDomain).
double enumerate_bel(const TheorySpec& spec, const Query& q);

struct OracleAnswer {
  double value = 0.0;
  enum class Method : std::uint8_t { Enumerate, Bayes } method = Method::Enumerate;
};
// Chooses enumerate_bel for all-finite theories, Bayesian conditioning for
// sensing-only queries; throws OracleNotApplicable otherwise.
OracleAnswer oracle_bel(const TheorySpec& spec, const Query& q, std::uint32_t points_per_axis = 2001,
                        double sigmas = 8.0);

}  // namespace belcal
