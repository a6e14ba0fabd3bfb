#pragma once

#include <optional>
#include <span>
#include <vector>

#include "belcal/theory.hpp"

namespace belcal {

// An action with every parameter slot bound (nominal first, then actual).
struct BoundAction {
  std::uint32_t action = 0;
  std::vector<Value> args;
};

struct Trajectory {
  std::vector<WorldPoint> points;  // points.size() == actions.size() + 1 unless inexecutable
  std::vector<BoundAction> actions;
  // Index of the first action whose precondition failed; points stop there.
  std::optional<std::size_t> inexecutable_at;
};

// Successor state: SSA right-hand sides all read `w`; unlisted fluents keep
// their value. Throws DomainViolation for a finite fluent leaving its domain.
WorldPoint progress(const TheorySpec& spec, const WorldPoint& w, const BoundAction& a, double eps = 0.0);
// Allocation-free variant; `out` must not alias `w`.
void progress_into(const TheorySpec& spec, const WorldPoint& w, const BoundAction& a, WorldPoint& out,
                   double eps = 0.0);

bool poss(const TheorySpec& spec, const WorldPoint& w, const BoundAction& a, double eps = 0.0);

// Throws NegativeLikelihood if the likelihood expression is negative.
double likelihood(const TheorySpec& spec, const WorldPoint& w, const BoundAction& a, double eps = 0.0);

// Same action type and nominal arguments, actual arguments = outcome.
BoundAction ground_alt(const TheorySpec& spec, const GroundAction& intended, std::span<const Value> outcome);

Trajectory simulate(const TheorySpec& spec, const WorldPoint& w0, std::span<const BoundAction> beta, double eps = 0.0);

}  // namespace belcal
