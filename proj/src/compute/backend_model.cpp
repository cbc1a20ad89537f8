#include <qmc/compute/backend_model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmc::compute {

BackendModel BackendModel::slow_ramp() {
  BackendModel m;
  m.scale_doubling_interval_s = 25.0;
  return m;
}

void BackendModel::validate() const {
  if (!(cold_start_s >= 0.0))
    throw ConfigError("cold_start_s must be >= 0");
  if (!(warm_invoke_s >= 0.0))
    throw ConfigError("warm_invoke_s must be >= 0");
  if (initial_capacity == 0)
    throw ConfigError("initial_capacity must be positive");
  if (!(scale_doubling_interval_s > 0.0))
    throw ConfigError("scale_doubling_interval_s must be > 0");
  if (max_concurrency && *max_concurrency == 0)
    throw ConfigError("max_concurrency must be positive");
  if (!(likelihood_duration_s >= 0.0))
    throw ConfigError("likelihood_duration_s must be >= 0");
  if (!(jitter_std_s >= 0.0))
    throw ConfigError("jitter_std_s must be >= 0");
}

double BackendModel::instance_available_at(std::size_t k) const {
  if (max_concurrency && k > *max_concurrency)
    return std::numeric_limits<double>::infinity();
  if (k <= initial_capacity)
    return 0.0;
  if (ramp == Ramp::continuous)
    return scale_doubling_interval_s *
           std::log2(static_cast<double>(k) / static_cast<double>(initial_capacity));
  std::size_t cap = initial_capacity;
  int doublings = 0;
  while (cap < k) {
    cap *= 2;
    ++doublings;
  }
  return scale_doubling_interval_s * doublings;
}

std::size_t BackendModel::capacity_at(double elapsed) const {
  if (elapsed < 0.0)
    return 0;
  double cap = 0.0;
  if (ramp == Ramp::continuous)
    cap = std::floor(static_cast<double>(initial_capacity) *
                     std::exp2(elapsed / scale_doubling_interval_s));
  else
    cap = static_cast<double>(initial_capacity) *
          std::exp2(std::floor(elapsed / scale_doubling_interval_s));
  const double limit = max_concurrency ? static_cast<double>(*max_concurrency) : 1e18;
  return static_cast<std::size_t>(std::min(cap, limit));
}

} // namespace qmc::compute
