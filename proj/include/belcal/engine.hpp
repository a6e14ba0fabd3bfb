#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "belcal/config.hpp"
#include "belcal/dynamics.hpp"
#include "belcal/support.hpp"
#include "belcal/theory.hpp"

namespace belcal {

// One integration dimension as laid out by the quadrature backend.
struct DimInfo {
  std::string name;  // fluent name, or action.param@step for outcome dims
  double lo = 0.0;
  double hi = 0.0;
  std::uint32_t points = 0;
};

struct BeliefResult {
  double value = 0.0;
  double numerator = 0.0;
  double gamma = 0.0;
  std::optional<double> std_error;  // MC only
  Backend backend = Backend::Quad;
  std::uint64_t nodes = 0;          // quadrature leaves or particles
  std::optional<double> ess;        // MC only
  std::vector<DimInfo> dims;        // quadrature only
  std::vector<std::string> notes;
};

struct KnowsResult {
  bool known = false;
  Backend backend = Backend::Quad;
  std::uint64_t nodes = 0;
  std::vector<std::string> notes;
};

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> mass;  // per bin, normalized
  double below = 0.0;        // normalized mass below lo
  double above = 0.0;        // normalized mass above hi
  std::vector<std::pair<double, double>> atoms;  // (value, normalized mass)
  Backend backend = Backend::Quad;
  std::uint64_t nodes = 0;
  std::vector<std::string> notes;

  double bin_width() const { return mass.empty() ? 0.0 : (hi - lo) / static_cast<double>(mass.size()); }
  double total() const;
};

// Resolves the effective configuration: theory defaults < query < overrides.
EngineConfig effective_config(const TheorySpec& spec, const Query& q, const EngineConfig& base,
                              const ConfigOverrides& flags = {});

BeliefResult bel(const TheorySpec& spec, const Query& q, const EngineConfig& cfg);
KnowsResult knows(const TheorySpec& spec, const Query& q, const EngineConfig& cfg);

struct MarginalRequest {
  std::uint32_t fluent = 0;
  std::vector<GroundAction> alpha;
  std::uint32_t bins = 50;
  std::optional<std::pair<double, double>> range;
};
Histogram marginal(const TheorySpec& spec, const MarginalRequest& req, const EngineConfig& cfg);
// Uses the query's fluent, actions, bins and range.
Histogram marginal(const TheorySpec& spec, const Query& q, const EngineConfig& cfg);

// Draws an initial world point from the normalized initial density. The
// returned weight is init_p(x) / proposal density(x).
std::pair<WorldPoint, double> sample_initial(const TheorySpec& spec, const InitForm& form, std::mt19937_64& rng);

// Draws actual arguments for an intended action at world point w. Returns the
// outcome and its importance weight likelihood / proposal density, which
// already includes the likelihood of the drawn outcome.
std::pair<std::vector<Value>, double> sample_outcome(const TheorySpec& spec, const GroundAction& intended,
                                                     const WorldPoint& w, std::mt19937_64& rng,
                                                     const EngineConfig& cfg);

// Worker threads used for a configuration (honours BELCAL_THREADS).
unsigned worker_count(const EngineConfig& cfg);

}  // namespace belcal
