#pragma once

#include <qmc/kernel/map.hpp>

#include <span>

namespace qmc::kernel {

/// Paints a radial function onto a G×G image centred at ((G-1)/2, (G-1)/2)
/// by linear interpolation in ρ = pixel_size · distance. Radii past the last
/// grid point are zero, radii before the first take the first value.
Map project_to_map(std::span<const double> values, std::span<const double> radial_grid,
                   std::size_t grid_size, double pixel_size);

} // namespace qmc::kernel
