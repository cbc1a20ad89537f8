#pragma once

#include <qmc/compute/backend_model.hpp>
#include <qmc/compute/records.hpp>

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace qmc::bench {

/// What overhead_ratio divides by.
enum class RatioReference {
  chain,  // n_iterations × L, the time of a whole chain
  single, // L, one likelihood evaluation
};

struct OverheadOptions {
  std::size_t iterations = 100;
  RatioReference reference = RatioReference::chain;
  std::size_t jitter_repetitions = 5; // runs per n when jitter is enabled
};

double reference_total_time(const compute::BackendModel& model, const OverheadOptions& options);

struct OverheadReport {
  std::size_t n_parallel = 0;
  double overhead_s = 0.0;
  double overhead_ratio = 0.0;
  std::uint64_t run_seed = 0;
};

struct OverheadRun {
  OverheadReport report;
  std::vector<compute::InvocationRecord> records;
};

/// One wave of n stub invocations pushed through the queue fabric onto the
/// simulated backend. Overhead is the spread of response arrival times on
/// the output queue, cross-checked against the backend's raw records.
OverheadRun run_overhead_wave(std::size_t n, const compute::BackendModel& model,
                              std::uint64_t seed, const OverheadOptions& options = {});

/// One independent run per n (and per repetition seed when jittered).
std::vector<OverheadReport> bench_overhead(std::span<const std::size_t> n_list,
                                           const compute::BackendModel& model, std::uint64_t seed,
                                           const OverheadOptions& options = {});

struct OverheadSummary {
  std::size_t n_parallel = 0;
  std::size_t runs = 0;
  double overhead_mean_s = 0.0;
  double overhead_std_s = 0.0; // sample std, 0 for a single run
  double ratio_mean = 0.0;
};

/// Groups reports by n_parallel, in first-seen order.
std::vector<OverheadSummary> summarize(std::span<const OverheadReport> reports);

void write_overhead_csv(std::ostream& os, std::span<const OverheadReport> reports);
void write_records_csv(std::ostream& os, std::span<const compute::InvocationRecord> records);

} // namespace qmc::bench
