#pragma once

#include <span>
#include <vector>

namespace qmc::kernel {

inline constexpr std::size_t default_degree = 3;

/// Polynomial pressure profile in x = r / r_max, clamped at zero and
/// truncated at r_max.
struct ProfileParams {
  std::vector<double> theta; // low-to-high degree coefficients
  double r_max = 1.0;
};

double profile_value(std::span<const double> theta, double r_max, double r);

std::vector<double> eval_profile(const ProfileParams& params, std::span<const double> radii);

} // namespace qmc::kernel
