#pragma once

#include <qmc/kernel/map.hpp>

namespace qmc::kernel {

/// Gaussian standard deviation in pixels for a FWHM in radius units.
double beam_sigma_pixels(double beam_fwhm, double pixel_size);

/// Unit-sum Gaussian sampled on integer offsets |dx|, |dy| <= half_width.
/// Row-major, (2·half_width+1)² entries, centre at the middle.
Map gaussian_kernel(double sigma_pixels, std::size_t half_width);

/// Linear convolution with the beam through real FFTs on a (2G)×(2G) zero
/// padded grid, cropped back to G×G. The kernel support is |d| <= G/2.
Map convolve_beam(const Map& map, double beam_fwhm, double pixel_size);

} // namespace qmc::kernel
