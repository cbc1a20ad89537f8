#pragma once

#include <qmc/compute/plane.hpp>
#include <qmc/mcmc/walker.hpp>
#include <qmc/queue/queue.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmc::mcmc {

struct ChainConfig {
  std::size_t n_walkers = 1;
  std::size_t n_iterations = 1;
  std::vector<double> proposal_scale; // one entry broadcasts to every coordinate
  std::optional<std::size_t> exchange_period;
  std::uint64_t seed = 0;

  void validate(std::size_t dim) const;
  double scale(std::size_t coordinate) const;
};

/// What the coordinator samples. The prior is evaluated locally; only
/// `likelihood_params(position)` is shipped to workers.
struct Target {
  std::string dataset_key;
  std::size_t dim = 1;
  std::function<double(std::span<const double>)> log_prior;
  std::function<std::vector<double>(std::span<const double>)> likelihood_params;
};

struct TimelineRecord {
  std::uint32_t walker_id = 0;
  std::uint64_t iteration = 0;
  double dispatch_ts = 0.0;
  bool first_output = false;
  double complete_ts = 0.0;
  compute::BackendKind backend = compute::BackendKind::simulated;
};

enum class FailureKind { timeout, backend, data };

struct RunFailure {
  FailureKind kind = FailureKind::backend;
  std::string message;
};

struct ChainOutput {
  std::size_t n_walkers = 0;
  std::size_t n_iterations = 0; // requested
  std::size_t dim = 0;
  std::size_t completed_iterations = 0;
  std::vector<double> samples;          // [walker][iteration][coordinate]
  std::vector<double> log_posts;        // [walker][iteration]
  std::vector<std::uint8_t> accepted;   // [walker][iteration]
  std::vector<std::size_t> accept_counts;
  std::vector<TimelineRecord> timeline; // response arrival order
  std::vector<std::vector<std::size_t>> exchanges;
  std::vector<WalkerState> final_states;
  std::uint64_t requests_pushed = 0;
  std::uint64_t responses_consumed = 0;
  std::optional<RunFailure> failure;    // set when the run aborted early

  bool complete() const { return !failure; }

  double sample(std::size_t w, std::size_t it, std::size_t d) const {
    return samples[(w * n_iterations + it) * dim + d];
  }
  double log_post(std::size_t w, std::size_t it) const { return log_posts[w * n_iterations + it]; }
};

class DuplicateResponseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  double response_timeout_s = 1000.0;
};

/// Lockstep ensemble: every iteration pushes one request per walker, waits
/// for all W responses (matched by msg_id), then applies the Metropolis step
/// walker by walker. Iteration 0 evaluates the initial positions, so the
/// run costs exactly W·N likelihood evaluations.
ChainOutput run_chains(const ChainConfig& config, const Target& target,
                       std::span<const std::vector<double>> initial_positions,
                       const compute::ComputePlane& plane, const queue::QueueHandle& input_q,
                       const queue::QueueHandle& output_q, const RunOptions& options = {});

} // namespace qmc::mcmc
