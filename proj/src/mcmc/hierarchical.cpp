#include <qmc/mcmc/hierarchical.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace qmc::mcmc {

double hierarchical_log_prior(std::span<const double> position, const HierarchicalLayout& layout) {
  if (position.size() != layout.dim())
    throw std::invalid_argument("position length does not match the hierarchical layout");
  const auto thetas = layout.thetas(position);
  const auto mu = layout.mu(position);
  const auto log_s = layout.log_s(position);

  double lp = 0.0;
  for (std::size_t k = 0; k < layout.coeffs; ++k) {
    const double inv_var = std::exp(-2.0 * log_s[k]);
    double acc = 0.0;
    for (std::size_t c = 0; c < layout.clusters; ++c) {
      const double d = thetas[c * layout.coeffs + k] - mu[k];
      acc += d * d;
    }
    lp += -0.5 * acc * inv_var - static_cast<double>(layout.clusters) * log_s[k];
    lp += -0.5 * log_s[k] * log_s[k];
  }
  return lp;
}

std::vector<double> initial_position(const std::vector<std::vector<double>>& truths,
                                     double population_std, double noise, std::uint64_t seed,
                                     std::uint64_t walker) {
  if (truths.empty())
    throw std::invalid_argument("need at least one cluster truth");
  const std::size_t coeffs = truths.front().size();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(walker), 0x5bd1e995u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> pos;
  pos.reserve((truths.size() + 2) * coeffs);
  std::vector<double> mean(coeffs, 0.0);
  for (const auto& t : truths) {
    if (t.size() != coeffs)
      throw std::invalid_argument("cluster truths differ in length");
    for (std::size_t k = 0; k < coeffs; ++k) {
      pos.push_back(t[k] + noise * normal(rng));
      mean[k] += t[k] / static_cast<double>(truths.size());
    }
  }
  for (std::size_t k = 0; k < coeffs; ++k)
    pos.push_back(mean[k] + noise * normal(rng));
  for (std::size_t k = 0; k < coeffs; ++k)
    pos.push_back(std::log(population_std) + noise * normal(rng));
  return pos;
}

} // namespace qmc::mcmc
