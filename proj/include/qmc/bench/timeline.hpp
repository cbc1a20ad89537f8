#pragma once

#include <qmc/compute/backend_model.hpp>
#include <qmc/mcmc/coordinator.hpp>

#include <cstdint>
#include <ostream>
#include <vector>

namespace qmc::bench {

struct TimelineSummary {
  std::size_t walkers = 0;
  std::size_t iterations = 0;
  double total_time_s = 0.0;
  std::vector<double> quartile_times_s; // after 25, 50 and 75% of the iterations
  double max_iteration_spread_s = 0.0;
  double verticality = 0.0; // max_iteration_spread_s / total_time_s
};

TimelineSummary summarize_timeline(const mcmc::ChainOutput& chain);

struct TimelineRun {
  mcmc::ChainOutput chain;
  TimelineSummary summary;
};

/// Full lockstep sampler on the standard-normal stub, simulated backend.
TimelineRun run_timeline(std::size_t walkers, std::size_t iterations,
                         const compute::BackendModel& model, std::uint64_t seed);

void write_timeline_summary_csv(std::ostream& os, const std::vector<TimelineSummary>& rows);

} // namespace qmc::bench
