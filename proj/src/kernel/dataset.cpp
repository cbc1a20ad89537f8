#include <qmc/io/bytes.hpp>
#include <qmc/kernel/dataset.hpp>
#include <qmc/kernel/errors.hpp>

namespace qmc::kernel {

namespace {

constexpr std::string_view magic = "QMC1";

} // namespace

void validate(const ClusterDataset& ds) {
  const std::string who = "cluster '" + ds.cluster_id + "': ";
  const std::size_t g = ds.obs_map.rows();
  if (g == 0 || ds.obs_map.cols() != g)
    throw DataFormatError(who + "observed map must be non-empty and square");
  if (g % 2 != 0)
    throw DataFormatError(who + "map size must be even");
  if (!ds.sigma_map.same_shape(ds.obs_map))
    throw DataFormatError(who + "noise map shape differs from observed map");
  for (double s : ds.sigma_map.values())
    if (!(s > 0.0))
      throw DataFormatError(who + "noise map entries must be positive");
  if (!(ds.pixel_size > 0.0) || !(ds.beam_fwhm > 0.0) || !(ds.r_max > 0.0))
    throw DataFormatError(who + "pixel_size, beam_fwhm and r_max must be positive");
  if (ds.radial_grid.size() < 2)
    throw DataFormatError(who + "radial grid needs at least two points");
  if (ds.radial_grid.front() < 0.0 || ds.radial_grid.back() > ds.r_max)
    throw DataFormatError(who + "radial grid must lie within [0, r_max]");
  for (std::size_t i = 1; i < ds.radial_grid.size(); ++i)
    if (!(ds.radial_grid[i] > ds.radial_grid[i - 1]))
      throw DataFormatError(who + "radial grid must be strictly increasing");
}

std::vector<std::uint8_t> encode_container(std::span<const ClusterDataset> clusters) {
  io::ByteWriter w;
  std::size_t estimate = 8;
  for (const auto& c : clusters)
    estimate += 64 + c.cluster_id.size() + 8 * (c.radial_grid.size() + 2 * c.obs_map.size());
  w.reserve(estimate);

  w.raw(magic);
  w.u32(static_cast<std::uint32_t>(clusters.size()));
  for (const auto& c : clusters) {
    validate(c);
    w.string(c.cluster_id);
    w.u32(static_cast<std::uint32_t>(c.grid_size()));
    w.u32(static_cast<std::uint32_t>(c.radial_grid.size()));
    w.f64(c.pixel_size);
    w.f64(c.beam_fwhm);
    w.f64(c.r_max);
    w.f64s(c.radial_grid);
    w.f64s(c.obs_map.values());
    w.f64s(c.sigma_map.values());
  }
  return w.take();
}

std::vector<ClusterDataset> decode_container(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  try {
    if (r.raw(4) != magic)
      throw DataFormatError("not a dataset container (bad magic)");
    const std::uint32_t count = r.u32();
    std::vector<ClusterDataset> out;
    for (std::uint32_t c = 0; c < count; ++c) {
      ClusterDataset ds;
      ds.cluster_id = r.string();
      const std::size_t g = r.u32();
      const std::size_t m = r.u32();
      ds.pixel_size = r.f64();
      ds.beam_fwhm = r.f64();
      ds.r_max = r.f64();
      ds.radial_grid = r.f64s(m);
      if (g > 0 && g * g / g != g)
        throw DataFormatError("map size overflow");
      ds.obs_map = Map(g, g);
      ds.obs_map.values() = r.f64s(g * g);
      ds.sigma_map = Map(g, g);
      ds.sigma_map.values() = r.f64s(g * g);
      validate(ds);
      out.push_back(std::move(ds));
    }
    if (!r.done())
      throw DataFormatError("trailing bytes after dataset container");
    return out;
  } catch (const io::TruncatedInput&) {
    throw DataFormatError("truncated dataset container");
  }
}

} // namespace qmc::kernel
