#include <qmc/bench/timeline.hpp>
#include <qmc/compute/plane.hpp>
#include <qmc/mcmc/chain_io.hpp>
#include <qmc/queue/queue.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace qmc::bench {

TimelineSummary summarize_timeline(const mcmc::ChainOutput& chain) {
  TimelineSummary s;
  s.walkers = chain.n_walkers;
  s.iterations = chain.completed_iterations;
  if (chain.timeline.empty())
    return s;

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo(s.iterations, inf);
  std::vector<double> hi(s.iterations, -inf);
  double start = inf;
  for (const auto& r : chain.timeline) {
    start = std::min(start, r.dispatch_ts);
    lo[r.iteration] = std::min(lo[r.iteration], r.complete_ts);
    hi[r.iteration] = std::max(hi[r.iteration], r.complete_ts);
  }
  s.total_time_s = hi.back() - start;
  for (std::size_t it = 0; it < s.iterations; ++it)
    s.max_iteration_spread_s = std::max(s.max_iteration_spread_s, hi[it] - lo[it]);
  s.verticality = s.total_time_s > 0.0 ? s.max_iteration_spread_s / s.total_time_s : 0.0;
  for (double f : {0.25, 0.5, 0.75}) {
    auto done = static_cast<std::size_t>(std::ceil(f * static_cast<double>(s.iterations)));
    done = std::clamp<std::size_t>(done, 1, s.iterations);
    s.quartile_times_s.push_back(hi[done - 1] - start);
  }
  return s;
}

TimelineRun run_timeline(std::size_t walkers, std::size_t iterations,
                         const compute::BackendModel& model, std::uint64_t seed) {
  auto clock = std::make_shared<queue::VirtualClock>();
  queue::QueueFabric fabric(clock);
  auto input = fabric.create_queue("input");
  auto output = fabric.create_queue("output");
  compute::BackendConfig config;
  config.kind = compute::BackendKind::simulated;
  config.seed = seed;
  auto plane = compute::attach_backend(fabric, input, output, config, model, nullptr);

  mcmc::ChainConfig chain;
  chain.n_walkers = walkers;
  chain.n_iterations = iterations;
  chain.proposal_scale = {2.4};
  chain.seed = seed;

  mcmc::Target target;
  target.dataset_key = "stub:gaussian";
  target.dim = 1;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> init(walkers);
  for (auto& p : init)
    p = {normal(rng)};

  mcmc::RunOptions opts;
  opts.response_timeout_s = std::max(10.0 * model.likelihood_duration_s, 1000.0);

  TimelineRun run;
  run.chain = mcmc::run_chains(chain, target, init, *plane, input, output, opts);
  run.summary = summarize_timeline(run.chain);
  return run;
}

void write_timeline_summary_csv(std::ostream& os, const std::vector<TimelineSummary>& rows) {
  os << "walkers,iterations,total_time_s,t25_s,t50_s,t75_s,max_iteration_spread_s,verticality\n";
  for (const auto& r : rows) {
    os << r.walkers << ',' << r.iterations << ',' << mcmc::format_double(r.total_time_s);
    for (double q : r.quartile_times_s)
      os << ',' << mcmc::format_double(q);
    os << ',' << mcmc::format_double(r.max_iteration_spread_s) << ','
       << mcmc::format_double(r.verticality) << '\n';
  }
}

} // namespace qmc::bench
