#pragma once

#include <qmc/kernel/dataset.hpp>

#include <cstdint>
#include <vector>

namespace qmc::kernel {

struct SynthConfig {
  std::size_t clusters = 1;
  std::size_t grid = 32;         // even
  std::uint64_t seed = 1;
  std::size_t radial_points = 0; // 0 -> 2·grid
  double pixel_size = 1.0;
  double beam_fwhm_pixels = 3.0;
  double noise_fraction = 0.05;  // sigma relative to the cluster's peak model value
  bool add_noise = true;
  int n_quad = 512;
  std::vector<double> population_mean = {1.0, 0.0, -1.5, 0.5};
  std::vector<double> population_std = {0.1, 0.1, 0.1, 0.05};
};

struct SyntheticData {
  std::vector<ClusterDataset> clusters;
  std::vector<std::vector<double>> truths;
};

/// Truth coefficients drawn per cluster from the population Gaussian; the
/// observed map is the noiseless model plus Gaussian noise of sigma_map.
SyntheticData synthesize(const SynthConfig& config);

} // namespace qmc::kernel
