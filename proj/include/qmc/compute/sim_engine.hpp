#pragma once

#include <qmc/compute/backend_model.hpp>
#include <qmc/compute/records.hpp>

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <span>
#include <vector>

namespace qmc::compute {

/// One scheduled invocation on a simulated instance.
struct SimCompletion {
  std::size_t token = 0;
  std::size_t instance = 0;
  double dispatch_ts = 0.0;
  double start_ts = 0.0;
  double end_ts = 0.0;
  bool cold = false;
};

/// Discrete-event model of a serverless platform. Requests wait in FIFO
/// order; each event time first frees finished instances, then hands
/// pending requests to idle warm instances (lowest id first) and finally to
/// newly provisioned cold instances while the capacity ramp allows.
class SimEngine {
public:
  SimEngine(BackendModel model, std::uint64_t seed);

  /// arrival must not precede now().
  void submit(std::size_t token, double arrival, double duration);

  std::optional<double> next_event_time() const;

  /// Moves to the next event and returns the invocations that finished then.
  /// May return an empty list when the event was a capacity step or arrival.
  std::vector<SimCompletion> advance();

  std::vector<SimCompletion> run_to_completion();

  double now() const { return now_; }
  std::size_t instance_count() const { return instances_.size(); }
  bool idle() const;

private:
  struct Arrival {
    double time;
    std::uint64_t seq;
    std::size_t token;
    double duration;
    bool operator>(const Arrival& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };
  struct Running {
    SimCompletion completion;
    std::uint64_t seq;
    bool operator>(const Running& o) const {
      return completion.end_ts != o.completion.end_ts ? completion.end_ts > o.completion.end_ts
                                                       : seq > o.seq;
    }
  };

  void dispatch();
  double jitter();

  BackendModel model_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double now_ = 0.0;
  std::optional<double> origin_;
  std::uint64_t seq_ = 0;
  std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> arrivals_;
  std::deque<Arrival> pending_;
  std::priority_queue<Running, std::vector<Running>, std::greater<>> running_;
  std::vector<bool> instances_; // true while busy
  std::set<std::size_t> idle_;
};

struct SimRequest {
  double arrival = 0.0;
  double duration = 0.0;
};

/// Runs a whole request set; records are returned in request order with
/// msg_id set to the request index.
std::vector<InvocationRecord> simulate(std::span<const SimRequest> requests,
                                       const BackendModel& model, std::uint64_t seed);

/// max(end_ts) - min(end_ts); zero for fewer than two records.
double overhead_of(std::span<const InvocationRecord> records);

} // namespace qmc::compute
