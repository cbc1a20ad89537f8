#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qmc::mcmc {

/// Parameter vector of the two-level model: C per-cluster coefficient rows,
/// then the population mean mu and log std log_s (each D+1 long).
struct HierarchicalLayout {
  std::size_t clusters = 1;
  std::size_t coeffs = 4;

  std::size_t dim() const { return (clusters + 2) * coeffs; }
  std::size_t theta_count() const { return clusters * coeffs; }

  std::span<const double> thetas(std::span<const double> position) const {
    return position.first(theta_count());
  }
  std::span<const double> mu(std::span<const double> position) const {
    return position.subspan(theta_count(), coeffs);
  }
  std::span<const double> log_s(std::span<const double> position) const {
    return position.subspan(theta_count() + coeffs, coeffs);
  }
};

/// Σ_c Σ_k [-(θ_ck - μ_k)² / (2 s_k²) - ln s_k]  -  Σ_k log_s_k² / 2
/// with s = exp(log_s); flat prior on μ, standard normal on log_s, additive
/// constants dropped.
double hierarchical_log_prior(std::span<const double> position, const HierarchicalLayout& layout);

/// Initial point: truths plus small noise for the cluster rows, their mean for
/// mu, and log of `population_std` for log_s.
std::vector<double> initial_position(const std::vector<std::vector<double>>& truths,
                                     double population_std, double noise, std::uint64_t seed,
                                     std::uint64_t walker);

} // namespace qmc::mcmc
