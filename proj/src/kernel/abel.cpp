#include <qmc/kernel/abel.hpp>
#include <qmc/kernel/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace qmc::kernel {

namespace {

template <class Profile>
double integrate(const Profile& profile, double r_max, double y, int n_quad) {
  if (y >= r_max)
    return 0.0;
  const int n = n_quad % 2 == 0 ? n_quad : n_quad + 1;
  const double y2 = y * y;
  const double t_max = std::sqrt(r_max * r_max - y2);
  const double h = t_max / n;
  // t <= t_max means r <= r_max; the clamp keeps rounding at the last node
  // from stepping off the support.
  auto f = [&](double t) { return profile(std::min(std::sqrt(y2 + t * t), r_max)); };

  double odd = 0.0;
  double even = 0.0;
  for (int i = 1; i < n; i += 2)
    odd += f(i * h);
  for (int i = 2; i < n; i += 2)
    even += f(i * h);
  const double simpson = (f(0.0) + 4.0 * odd + 2.0 * even + f(t_max)) * h / 3.0;
  return 2.0 * simpson;
}

void check_grid(std::span<const double> y_grid, double r_max, int n_quad) {
  if (n_quad < 16)
    throw InvalidGridError("n_quad must be at least 16, got " + std::to_string(n_quad));
  if (!(r_max > 0.0))
    throw InvalidGridError("r_max must be positive");
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    if (!(y_grid[i] >= 0.0))
      throw InvalidGridError("projected radius must be non-negative");
    if (y_grid[i] >= r_max)
      throw InvalidGridError("projected radius " + std::to_string(y_grid[i]) +
                             " is not below r_max");
    if (i > 0 && !(y_grid[i] > y_grid[i - 1]))
      throw InvalidGridError("projected radii must be strictly increasing");
  }
}

} // namespace

double abel_at(const RadialProfile& profile, double r_max, double y, int n_quad) {
  return integrate(profile, r_max, y, n_quad);
}

std::vector<double> forward_abel(const RadialProfile& profile, double r_max,
                                 std::span<const double> y_grid, int n_quad) {
  check_grid(y_grid, r_max, n_quad);
  std::vector<double> out;
  out.reserve(y_grid.size());
  for (double y : y_grid)
    out.push_back(integrate(profile, r_max, y, n_quad));
  return out;
}

std::vector<double> forward_abel(const ProfileParams& params, std::span<const double> y_grid,
                                 int n_quad) {
  check_grid(y_grid, params.r_max, n_quad);
  std::span<const double> theta(params.theta);
  auto profile = [&](double r) { return profile_value(theta, params.r_max, r); };
  std::vector<double> out;
  out.reserve(y_grid.size());
  for (double y : y_grid)
    out.push_back(integrate(profile, params.r_max, y, n_quad));
  return out;
}

} // namespace qmc::kernel
