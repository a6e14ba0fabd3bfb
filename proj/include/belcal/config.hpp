#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace belcal {

enum class Backend : std::uint8_t { Quad, MonteCarlo };

std::string_view to_string(Backend b);

struct EngineConfig {
  Backend backend = Backend::Quad;
  std::uint64_t mc_samples = 200000;
  std::uint64_t seed = 0;
  std::uint32_t quad_points_per_dim = 2001;
  double gauss_truncation_sigmas = 8.0;
  std::uint32_t max_quad_dims = 4;
  double equality_epsilon = 0.0;
  // Upper bound on quadrature leaves; points per continuous dimension are
  // reduced to floor(max_quad_nodes^(1/d)) when the full grid would exceed it.
  std::uint64_t max_quad_nodes = std::uint64_t{1} << 22;
  // Fraction of normalized weight that must land on one value for marginal()
  // to report it as an atom.
  double atom_threshold = 0.01;
  // 0 = hardware concurrency, further capped by BELCAL_THREADS.
  std::uint32_t threads = 0;

  // Throws ConfigError when a field is out of range.
  void check() const;
};

// Partial configuration used for layering: flags > query file > theory.
struct ConfigOverrides {
  std::optional<Backend> backend;
  std::optional<std::uint64_t> mc_samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> quad_points_per_dim;
  std::optional<double> gauss_truncation_sigmas;
  std::optional<std::uint32_t> max_quad_dims;
  std::optional<double> equality_epsilon;
  std::optional<std::uint64_t> max_quad_nodes;
  std::optional<double> atom_threshold;
  std::optional<std::uint32_t> threads;

  void apply_to(EngineConfig& cfg) const;
  // Later layers win.
  void merge_from(const ConfigOverrides& higher);
  // Parses one `key=value` setting; returns false for an unknown key and
  // throws ConfigError for a malformed value.
  bool set(std::string_view key, std::string_view value);
};

}  // namespace belcal
