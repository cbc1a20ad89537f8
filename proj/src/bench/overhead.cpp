#include <qmc/bench/overhead.hpp>
#include <qmc/compute/payload.hpp>
#include <qmc/compute/plane.hpp>
#include <qmc/compute/sim_engine.hpp>
#include <qmc/mcmc/chain_io.hpp>
#include <qmc/queue/queue.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmc::bench {

double reference_total_time(const compute::BackendModel& model, const OverheadOptions& options) {
  if (options.reference == RatioReference::single)
    return model.likelihood_duration_s;
  return static_cast<double>(options.iterations) * model.likelihood_duration_s;
}

OverheadRun run_overhead_wave(std::size_t n, const compute::BackendModel& model,
                              std::uint64_t seed, const OverheadOptions& options) {
  auto clock = std::make_shared<queue::VirtualClock>();
  queue::QueueFabric fabric(clock);
  auto input = fabric.create_queue("input");
  auto output = fabric.create_queue("output");
  compute::BackendConfig config;
  config.kind = compute::BackendKind::simulated;
  config.seed = seed;
  auto plane = compute::attach_backend(fabric, input, output, config, model, nullptr);

  for (std::size_t i = 0; i < n; ++i) {
    compute::LikelihoodRequest req;
    req.walker_id = static_cast<std::uint32_t>(i);
    req.params = {0.0};
    req.dataset_key = "stub:constant";
    queue::Message m;
    m.msg_id = "req-" + std::to_string(i);
    m.kind = queue::MessageKind::likelihood_request;
    m.walker_id = i;
    m.payload = compute::encode(req);
    m.reply_to = output->name();
    input->push(std::move(m));
  }

  double first = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto reply = output->pop(std::numeric_limits<double>::infinity());
    if (!reply)
      throw std::logic_error("simulated backend lost a response");
    if (i == 0)
      first = reply->enqueue_ts;
    first = std::min(first, reply->enqueue_ts);
    last = std::max(last, reply->enqueue_ts);
  }

  OverheadRun run;
  run.records = plane->records();
  run.report.n_parallel = n;
  run.report.overhead_s = n == 0 ? 0.0 : last - first;
  run.report.run_seed = seed;
  const double reference = reference_total_time(model, options);
  run.report.overhead_ratio = reference > 0.0 ? run.report.overhead_s / reference : 0.0;

  if (run.records.size() != n || compute::overhead_of(run.records) != run.report.overhead_s)
    throw std::logic_error("overhead from queue arrivals disagrees with invocation records");
  return run;
}

std::vector<OverheadReport> bench_overhead(std::span<const std::size_t> n_list,
                                           const compute::BackendModel& model, std::uint64_t seed,
                                           const OverheadOptions& options) {
  if (n_list.empty())
    throw compute::ConfigError("n_list must not be empty");
  model.validate();
  const std::size_t reps = model.jitter_std_s > 0.0 ? std::max<std::size_t>(1, options.jitter_repetitions) : 1;
  std::vector<OverheadReport> out;
  for (std::size_t n : n_list)
    for (std::size_t r = 0; r < reps; ++r)
      out.push_back(run_overhead_wave(n, model, seed + r, options).report);
  return out;
}

std::vector<OverheadSummary> summarize(std::span<const OverheadReport> reports) {
  std::vector<OverheadSummary> out;
  for (const auto& r : reports) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const OverheadSummary& s) { return s.n_parallel == r.n_parallel; });
    if (it == out.end()) {
      out.push_back({r.n_parallel, 0, 0.0, 0.0, 0.0});
      it = out.end() - 1;
    }
    ++it->runs;
    it->overhead_mean_s += r.overhead_s;
    it->ratio_mean += r.overhead_ratio;
  }
  for (auto& s : out) {
    s.overhead_mean_s /= static_cast<double>(s.runs);
    s.ratio_mean /= static_cast<double>(s.runs);
    if (s.runs < 2)
      continue;
    double acc = 0.0;
    for (const auto& r : reports)
      if (r.n_parallel == s.n_parallel)
        acc += (r.overhead_s - s.overhead_mean_s) * (r.overhead_s - s.overhead_mean_s);
    s.overhead_std_s = std::sqrt(acc / static_cast<double>(s.runs - 1));
  }
  return out;
}

void write_overhead_csv(std::ostream& os, std::span<const OverheadReport> reports) {
  os << "n_parallel,overhead_s,overhead_ratio,seed\n";
  for (const auto& r : reports)
    os << r.n_parallel << ',' << mcmc::format_double(r.overhead_s) << ','
       << mcmc::format_double(r.overhead_ratio) << ',' << r.run_seed << '\n';
}

void write_records_csv(std::ostream& os, std::span<const compute::InvocationRecord> records) {
  os << "msg_id,worker_id,dispatch_ts,start_ts,end_ts,cold\n";
  for (const auto& r : records)
    os << r.msg_id << ',' << r.worker_id << ',' << mcmc::format_double(r.dispatch_ts) << ','
       << mcmc::format_double(r.start_ts) << ',' << mcmc::format_double(r.end_ts) << ','
       << (r.cold ? 1 : 0) << '\n';
}

} // namespace qmc::bench
