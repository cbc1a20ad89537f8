#pragma once

#include <qmc/mcmc/coordinator.hpp>

#include <cmath>
#include <span>
#include <vector>

namespace qmc::mcmc {

/// Read-only view of chains × draws × dim samples stored contiguously.
struct SampleView {
  std::span<const double> data;
  std::size_t chains = 0;
  std::size_t draws = 0;
  std::size_t dim = 0;
  std::size_t stride = 0; // draws stored per chain (>= offset + draws)
  std::size_t offset = 0; // first draw used

  double at(std::size_t c, std::size_t n, std::size_t d) const {
    return data[(c * stride + offset + n) * dim + d];
  }
};

inline constexpr double default_burn_in = 0.2;

/// Drops the first `burn_in` fraction of every chain.
SampleView post_burn_in(const ChainOutput& out, double burn_in = default_burn_in);

/// Split-R̂ per coordinate. NaN marks a coordinate whose within-chain
/// variance is zero.
std::vector<double> rhat(const SampleView& samples);

inline bool is_degenerate(double rhat_value) { return std::isnan(rhat_value); }

/// Multi-chain effective sample size per coordinate, using the combined
/// autocorrelation truncated at the first non-positive pair sum.
std::vector<double> effective_sample_size(const SampleView& samples);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Pooled moments of one coordinate over all chains and draws.
Moments pooled_moments(const SampleView& samples, std::size_t coordinate);

/// Acceptance fraction per walker, counting iterations after the initial
/// evaluation.
std::vector<double> acceptance_rates(const ChainOutput& out);

} // namespace qmc::mcmc
