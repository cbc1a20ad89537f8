#include <qmc/kernel/errors.hpp>
#include <qmc/kernel/likelihood.hpp>
#include <qmc/kernel/synth.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace qmc::kernel {

SyntheticData synthesize(const SynthConfig& config) {
  if (config.clusters == 0)
    throw KernelError("need at least one cluster");
  if (config.grid < 2 || config.grid % 2 != 0)
    throw KernelError("grid size must be even and at least 2");
  if (config.population_mean.size() != config.population_std.size() ||
      config.population_mean.empty())
    throw KernelError("population mean and std must have the same non-zero length");
  if (!(config.noise_fraction > 0.0))
    throw KernelError("noise fraction must be positive");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t g = config.grid;
  const std::size_t m = config.radial_points == 0 ? 2 * g : config.radial_points;
  const double r_max = config.pixel_size * static_cast<double>(g) / 2.0;

  std::vector<double> radial(m);
  for (std::size_t i = 0; i < m; ++i)
    radial[i] = r_max * static_cast<double>(i) / static_cast<double>(m);

  SyntheticData out;
  for (std::size_t c = 0; c < config.clusters; ++c) {
    std::vector<double> truth(config.population_mean.size());
    for (std::size_t k = 0; k < truth.size(); ++k)
      truth[k] = config.population_mean[k] + config.population_std[k] * normal(rng);

    ClusterDataset ds;
    ds.cluster_id = "cl" + std::to_string(c);
    ds.pixel_size = config.pixel_size;
    ds.beam_fwhm = config.beam_fwhm_pixels * config.pixel_size;
    ds.r_max = r_max;
    ds.radial_grid = radial;
    ds.obs_map = Map(g, g);
    ds.sigma_map = Map(g, g, 1.0);

    Map model = model_map(truth, ds, config.n_quad);
    double peak = 0.0;
    for (double v : model.values())
      peak = std::max(peak, std::abs(v));
    const double sigma = peak > 0.0 ? config.noise_fraction * peak : 1.0;
    ds.sigma_map = Map(g, g, sigma);
    ds.obs_map = model;
    if (config.add_noise)
      for (double& v : ds.obs_map.values())
        v += sigma * normal(rng);

    out.clusters.push_back(std::move(ds));
    out.truths.push_back(std::move(truth));
  }
  return out;
}

} // namespace qmc::kernel
