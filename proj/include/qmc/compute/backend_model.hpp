#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>

namespace qmc::compute {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// How instance capacity grows after the first pending request.
enum class Ramp {
  /// capacity(t) = floor(c0 · 2^(t/τ)); instance k is available at τ·log2(k/c0).
  continuous,
  /// capacity(t) = c0 · 2^floor(t/τ); instances arrive in doubling waves.
  stepped,
};

/// Latency model of the simulated serverless platform.
struct BackendModel {
  double cold_start_s = 2.0;
  double warm_invoke_s = 0.05;
  std::size_t initial_capacity = 3;
  double scale_doubling_interval_s = 7.0;
  std::optional<std::size_t> max_concurrency; // empty means unlimited
  double likelihood_duration_s = 100.0;
  double jitter_std_s = 0.0; // Gaussian start jitter, truncated at zero
  Ramp ramp = Ramp::continuous;

  /// τ = 25 s variant that reaches "few hundred seconds" at several thousand
  /// parallel invocations.
  static BackendModel slow_ramp();

  /// Throws ConfigError.
  void validate() const;

  /// Elapsed time (since the first pending request) at which the k-th
  /// instance, 1-based, may be provisioned. Infinite past max_concurrency.
  double instance_available_at(std::size_t k) const;

  std::size_t capacity_at(double elapsed) const;
};

} // namespace qmc::compute
