#include <qmc/kernel/profile.hpp>

#include <algorithm>

namespace qmc::kernel {

double profile_value(std::span<const double> theta, double r_max, double r) {
  if (r > r_max || theta.empty())
    return 0.0;
  const double x = r / r_max;
  double acc = theta.back();
  for (std::size_t k = theta.size() - 1; k-- > 0;)
    acc = acc * x + theta[k];
  return std::max(0.0, acc);
}

std::vector<double> eval_profile(const ProfileParams& params, std::span<const double> radii) {
  std::vector<double> out;
  out.reserve(radii.size());
  for (double r : radii)
    out.push_back(profile_value(params.theta, params.r_max, r));
  return out;
}

} // namespace qmc::kernel
