#include <qmc/compute/sim_engine.hpp>

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace qmc::compute {

SimEngine::SimEngine(BackendModel model, std::uint64_t seed) : model_(std::move(model)), rng_(seed) {
  model_.validate();
}

void SimEngine::submit(std::size_t token, double arrival, double duration) {
  if (arrival < now_)
    throw std::logic_error("simulated request arrives in the past");
  arrivals_.push(Arrival{arrival, seq_++, token, duration});
  if (arrival == now_) {
    while (!arrivals_.empty() && arrivals_.top().time <= now_) {
      pending_.push_back(arrivals_.top());
      arrivals_.pop();
    }
    if (!origin_)
      origin_ = now_;
    dispatch();
  }
}

double SimEngine::jitter() {
  if (model_.jitter_std_s <= 0.0)
    return 0.0;
  return std::max(0.0, model_.jitter_std_s * normal_(rng_));
}

void SimEngine::dispatch() {
  while (!pending_.empty()) {
    std::size_t instance = 0;
    bool cold = false;
    if (!idle_.empty()) {
      instance = *idle_.begin();
      idle_.erase(idle_.begin());
    } else if (now_ >= *origin_ + model_.instance_available_at(instances_.size() + 1)) {
      instance = instances_.size();
      instances_.push_back(false);
      cold = true;
    } else {
      break;
    }
    const Arrival req = pending_.front();
    pending_.pop_front();
    instances_[instance] = true;

    SimCompletion c;
    c.token = req.token;
    c.instance = instance;
    c.dispatch_ts = req.time;
    c.cold = cold;
    c.start_ts = now_ + (cold ? model_.cold_start_s : 0.0) + jitter();
    c.end_ts = c.start_ts + model_.warm_invoke_s + req.duration;
    running_.push(Running{c, seq_++});
  }
}

std::optional<double> SimEngine::next_event_time() const {
  double t = std::numeric_limits<double>::infinity();
  if (!running_.empty())
    t = std::min(t, running_.top().completion.end_ts);
  if (!arrivals_.empty())
    t = std::min(t, arrivals_.top().time);
  if (!pending_.empty() && idle_.empty()) {
    const double avail = model_.instance_available_at(instances_.size() + 1);
    t = std::min(t, *origin_ + avail);
  }
  if (t == std::numeric_limits<double>::infinity())
    return std::nullopt;
  return t;
}

std::vector<SimCompletion> SimEngine::advance() {
  std::vector<SimCompletion> done;
  auto next = next_event_time();
  if (!next)
    return done;
  now_ = std::max(now_, *next);
  while (!running_.empty() && running_.top().completion.end_ts <= now_) {
    const SimCompletion& c = running_.top().completion;
    instances_[c.instance] = false;
    idle_.insert(c.instance);
    done.push_back(c);
    running_.pop();
  }
  while (!arrivals_.empty() && arrivals_.top().time <= now_) {
    pending_.push_back(arrivals_.top());
    arrivals_.pop();
    if (!origin_)
      origin_ = pending_.back().time;
  }
  dispatch();
  return done;
}

std::vector<SimCompletion> SimEngine::run_to_completion() {
  std::vector<SimCompletion> all;
  while (next_event_time()) {
    auto step = advance();
    all.insert(all.end(), step.begin(), step.end());
  }
  return all;
}

bool SimEngine::idle() const {
  return running_.empty() && arrivals_.empty() && pending_.empty();
}

std::vector<InvocationRecord> simulate(std::span<const SimRequest> requests,
                                       const BackendModel& model, std::uint64_t seed) {
  SimEngine engine(model, seed);
  // Keep submission order for requests sharing an arrival time.
  std::vector<std::size_t> order(requests.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return requests[a].arrival < requests[b].arrival;
  });
  for (std::size_t i : order)
    engine.submit(i, requests[i].arrival, requests[i].duration);

  std::vector<InvocationRecord> records(requests.size());
  for (const SimCompletion& c : engine.run_to_completion()) {
    InvocationRecord& r = records[c.token];
    r.msg_id = std::to_string(c.token);
    r.worker_id = "sim-" + std::to_string(c.instance);
    r.dispatch_ts = c.dispatch_ts;
    r.start_ts = c.start_ts;
    r.end_ts = c.end_ts;
    r.cold = c.cold;
  }
  return records;
}

double overhead_of(std::span<const InvocationRecord> records) {
  if (records.size() < 2)
    return 0.0;
  auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                      [](const auto& a, const auto& b) { return a.end_ts < b.end_ts; });
  return hi->end_ts - lo->end_ts;
}

} // namespace qmc::compute
