#pragma once

#include <qmc/kernel/profile.hpp>

#include <functional>
#include <span>
#include <vector>

namespace qmc::kernel {

inline constexpr int default_n_quad = 512;

using RadialProfile = std::function<double(double)>;

// Projection of a spherically symmetric profile supported on [0, r_max]:
//
//   F(y) = 2 ∫_y^{r_max} p(r) r dr / sqrt(r² - y²)
//        = 2 ∫_0^{sqrt(r_max² - y²)} p(sqrt(y² + t²)) dt        (r² = y² + t²)
//
// The second form has no endpoint singularity and is integrated with
// composite Simpson on n_quad intervals (rounded up to even).

/// Single abscissa; zero for y >= r_max.
double abel_at(const RadialProfile& profile, double r_max, double y, int n_quad);

/// Throws InvalidGridError unless y_grid is strictly increasing, non-negative
/// and below r_max, or when n_quad < 16.
std::vector<double> forward_abel(const RadialProfile& profile, double r_max,
                                 std::span<const double> y_grid, int n_quad = default_n_quad);

std::vector<double> forward_abel(const ProfileParams& params, std::span<const double> y_grid,
                                 int n_quad = default_n_quad);

} // namespace qmc::kernel
