#include "belcal/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "belcal/error.hpp"

namespace belcal {

std::string_view to_string(Backend b) { return b == Backend::Quad ? "quad" : "mc"; }

void EngineConfig::check() const {
  if (mc_samples == 0) throw Error(ErrorCode::ConfigError, "mc samples must be positive");
  if (quad_points_per_dim == 0) throw Error(ErrorCode::ConfigError, "quadrature points per dimension must be positive");
  if (!(gauss_truncation_sigmas > 0.0) || !std::isfinite(gauss_truncation_sigmas)) {
    throw Error(ErrorCode::ConfigError, "truncation sigmas must be a positive real");
  }
  if (max_quad_dims == 0) throw Error(ErrorCode::ConfigError, "max quadrature dimensions must be positive");
  if (!(equality_epsilon >= 0.0) || !std::isfinite(equality_epsilon)) {
    throw Error(ErrorCode::ConfigError, "equality epsilon must be a non-negative real");
  }
  if (max_quad_nodes == 0) throw Error(ErrorCode::ConfigError, "max quadrature nodes must be positive");
  if (!(atom_threshold > 0.0 && atom_threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "atom threshold must lie in (0, 1]");
  }
}

void ConfigOverrides::apply_to(EngineConfig& cfg) const {
  if (backend) cfg.backend = *backend;
  if (mc_samples) cfg.mc_samples = *mc_samples;
  if (seed) cfg.seed = *seed;
  if (quad_points_per_dim) cfg.quad_points_per_dim = *quad_points_per_dim;
  if (gauss_truncation_sigmas) cfg.gauss_truncation_sigmas = *gauss_truncation_sigmas;
  if (max_quad_dims) cfg.max_quad_dims = *max_quad_dims;
  if (equality_epsilon) cfg.equality_epsilon = *equality_epsilon;
  if (max_quad_nodes) cfg.max_quad_nodes = *max_quad_nodes;
  if (atom_threshold) cfg.atom_threshold = *atom_threshold;
  if (threads) cfg.threads = *threads;
}

void ConfigOverrides::merge_from(const ConfigOverrides& h) {
  if (h.backend) backend = h.backend;
  if (h.mc_samples) mc_samples = h.mc_samples;
  if (h.seed) seed = h.seed;
  if (h.quad_points_per_dim) quad_points_per_dim = h.quad_points_per_dim;
  if (h.gauss_truncation_sigmas) gauss_truncation_sigmas = h.gauss_truncation_sigmas;
  if (h.max_quad_dims) max_quad_dims = h.max_quad_dims;
  if (h.equality_epsilon) equality_epsilon = h.equality_epsilon;
  if (h.max_quad_nodes) max_quad_nodes = h.max_quad_nodes;
  if (h.atom_threshold) atom_threshold = h.atom_threshold;
  if (h.threads) threads = h.threads;
}

namespace {

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T out{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ConfigError, "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return out;
}

}  // namespace

bool ConfigOverrides::set(std::string_view raw_key, std::string_view value) {
  std::string normalized(raw_key);
  std::replace(normalized.begin(), normalized.end(), '_', '-');
  const std::string_view key = normalized;
  if (key == "backend") {
    if (value == "quad") {
      backend = Backend::Quad;
    } else if (value == "mc") {
      backend = Backend::MonteCarlo;
    } else {
      throw Error(ErrorCode::ConfigError, "backend must be quad or mc, got '" + std::string(value) + "'");
    }
  } else if (key == "samples") {
    mc_samples = parse_number<std::uint64_t>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "grid") {
    quad_points_per_dim = parse_number<std::uint32_t>(key, value);
  } else if (key == "trunc-sigmas" || key == "trunc") {
    gauss_truncation_sigmas = parse_number<double>(key, value);
  } else if (key == "max-dims") {
    max_quad_dims = parse_number<std::uint32_t>(key, value);
  } else if (key == "eps") {
    equality_epsilon = parse_number<double>(key, value);
  } else if (key == "max-nodes") {
    max_quad_nodes = parse_number<std::uint64_t>(key, value);
  } else if (key == "atom-threshold") {
    atom_threshold = parse_number<double>(key, value);
  } else if (key == "threads") {
    threads = parse_number<std::uint32_t>(key, value);
  } else {
    return false;
  }
  return true;
}

}  // namespace belcal
