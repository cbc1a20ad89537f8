#include <qmc/kernel/errors.hpp>
#include <qmc/kernel/projection.hpp>

#include <algorithm>
#include <cmath>

namespace qmc::kernel {

Map project_to_map(std::span<const double> values, std::span<const double> radial_grid,
                   std::size_t grid_size, double pixel_size) {
  if (values.size() != radial_grid.size() || radial_grid.empty())
    throw ShapeMismatchError("radial values and grid differ in length");
  if (grid_size % 2 != 0)
    throw InvalidGridError("map size must be even");

  Map map(grid_size, grid_size);
  const double c = (static_cast<double>(grid_size) - 1.0) / 2.0;
  const double last = radial_grid.back();
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double di = static_cast<double>(i) - c;
    for (std::size_t j = 0; j < grid_size; ++j) {
      const double dj = static_cast<double>(j) - c;
      const double rho = pixel_size * std::sqrt(di * di + dj * dj);
      double v = 0.0;
      if (rho <= radial_grid.front()) {
        v = values.front();
      } else if (rho <= last) {
        auto hi = std::upper_bound(radial_grid.begin(), radial_grid.end(), rho);
        if (hi == radial_grid.end())
          --hi;
        auto k = static_cast<std::size_t>(hi - radial_grid.begin());
        const double r0 = radial_grid[k - 1];
        const double r1 = radial_grid[k];
        const double w = (rho - r0) / (r1 - r0);
        v = values[k - 1] + w * (values[k] - values[k - 1]);
      }
      map(i, j) = v;
    }
  }
  return map;
}

} // namespace qmc::kernel
