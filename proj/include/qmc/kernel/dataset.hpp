#pragma once

#include <qmc/kernel/map.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qmc::kernel {

struct ClusterDataset {
  std::string cluster_id;
  Map obs_map;
  Map sigma_map;
  double pixel_size = 1.0;
  double beam_fwhm = 1.0;
  double r_max = 1.0;
  std::vector<double> radial_grid;

  std::size_t grid_size() const { return obs_map.rows(); }

  friend bool operator==(const ClusterDataset&, const ClusterDataset&) = default;
};

/// Throws DataFormatError describing the first violated invariant.
void validate(const ClusterDataset& ds);

// Little-endian container:
//   "QMC1" | u32 C | C × { u32 id_len, id bytes, u32 G, u32 M,
//                         f64 pixel_size, f64 beam_fwhm, f64 r_max,
//                         M × f64 radial_grid, G·G × f64 obs, G·G × f64 sigma }
std::vector<std::uint8_t> encode_container(std::span<const ClusterDataset> clusters);
std::vector<ClusterDataset> decode_container(std::span<const std::uint8_t> bytes);

} // namespace qmc::kernel
