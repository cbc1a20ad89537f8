#include <qmc/compute/evaluator.hpp>
#include <qmc/compute/local_pool.hpp>
#include <qmc/compute/plane.hpp>
#include <qmc/compute/remote.hpp>
#include <qmc/compute/sim_engine.hpp>

#include <condition_variable>
#include <deque>
#include <map>
#include <thread>

namespace qmc::compute {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
  case BackendKind::simulated:
    return "sim";
  case BackendKind::local:
    return "local";
  case BackendKind::remote:
    return "remote";
  }
  return "sim";
}

BackendKind parse_backend(std::string_view name) {
  if (name == "sim")
    return BackendKind::simulated;
  if (name == "local")
    return BackendKind::local;
  if (name == "remote")
    return BackendKind::remote;
  throw ConfigError("unknown backend '" + std::string(name) + "'");
}

namespace {

queue::Message response_message(const queue::Message& request, const LikelihoodResponse& resp) {
  queue::Message out;
  out.msg_id = request.msg_id;
  out.kind = queue::MessageKind::likelihood_response;
  out.walker_id = request.walker_id;
  out.iteration = request.iteration;
  out.payload = encode(resp);
  out.reply_to = request.reply_to;
  return out;
}

class RecordLog {
public:
  void add(InvocationRecord r) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(r));
  }
  std::vector<InvocationRecord> snapshot() const {
    std::lock_guard lock(mutex_);
    return records_;
  }

private:
  mutable std::mutex mutex_;
  std::vector<InvocationRecord> records_;
};

// Virtual-time backend. Requests are queued in the discrete-event engine on
// delivery; the output queue's pump advances the clock to the next event
// and publishes whatever finished there.
class SimulatedPlane final : public ComputePlane {
public:
  SimulatedPlane(std::shared_ptr<queue::VirtualClock> clock, queue::QueueHandle input,
                 queue::QueueHandle output, const BackendModel& model, std::uint64_t seed,
                 std::shared_ptr<const store::ObjectStore> store, int n_quad)
      : clock_(std::move(clock)), output_(std::move(output)), model_(model), engine_(model, seed),
        evaluator_(std::move(store), n_quad) {
    input->register_trigger([this](const queue::Message& m) { on_request(m); });
    output_->set_pump([this](double deadline) { return pump(deadline); });
  }

  BackendKind kind() const override { return BackendKind::simulated; }
  std::vector<InvocationRecord> records() const override { return log_.snapshot(); }
  void shutdown() override { output_->set_pump(nullptr); }

private:
  struct InFlight {
    queue::Message request;
    WorkerTask task;
  };

  void on_request(const queue::Message& m) {
    std::lock_guard lock(mutex_);
    WorkerTask task;
    try {
      task = make_task(decode_request(m.payload), model_.likelihood_duration_s);
    } catch (const PayloadError& e) {
      output_->push(queue::make_error(m.msg_id, "bad_payload", e.what()));
      return;
    }
    const std::size_t token = next_token_++;
    in_flight_.emplace(token, InFlight{m, std::move(task)});
    engine_.submit(token, clock_->now(), model_.likelihood_duration_s);
  }

  bool pump(double deadline) {
    std::vector<queue::Message> ready;
    {
      std::lock_guard lock(mutex_);
      auto next = engine_.next_event_time();
      if (!next || *next > deadline)
        return false;
      clock_->advance_to(std::max(*next, clock_->now()));
      for (const SimCompletion& c : engine_.advance()) {
        auto it = in_flight_.find(c.token);
        InFlight f = std::move(it->second);
        in_flight_.erase(it);

        log_.add({f.request.msg_id, "sim-" + std::to_string(c.instance), c.dispatch_ts, c.start_ts,
                  c.end_ts, c.cold});
        LikelihoodResponse resp;
        resp.walker_id = f.task.request.walker_id;
        resp.iteration = f.task.request.iteration;
        resp.cold = c.cold;
        resp.compute_start_ts = c.start_ts;
        resp.compute_end_ts = c.end_ts;
        try {
          resp.log_likelihood = evaluator_.evaluate(f.task);
          ready.push_back(response_message(f.request, resp));
        } catch (const DatasetNotFoundError& e) {
          ready.push_back(queue::make_error(f.request.msg_id, "dataset_not_found", e.what()));
        } catch (const std::exception& e) {
          ready.push_back(queue::make_error(f.request.msg_id, "worker_crash", e.what()));
        }
      }
    }
    for (auto& m : ready)
      output_->push(std::move(m));
    return true;
  }

  std::shared_ptr<queue::VirtualClock> clock_;
  queue::QueueHandle output_;
  BackendModel model_;
  std::mutex mutex_;
  SimEngine engine_;
  Evaluator evaluator_;
  std::size_t next_token_ = 0;
  std::map<std::size_t, InFlight> in_flight_;
  RecordLog log_;
};

class LocalPlane final : public ComputePlane {
public:
  LocalPlane(std::shared_ptr<queue::Clock> clock, queue::QueueHandle input,
             queue::QueueHandle output, const BackendModel& model, std::size_t pool_size,
             std::shared_ptr<const store::ObjectStore> store, int n_quad)
      : output_(std::move(output)), model_(model),
        pool_(pool_size, std::move(store), std::move(clock), n_quad) {
    input->register_trigger([this](const queue::Message& m) { on_request(m); });
  }

  ~LocalPlane() override { shutdown(); }

  BackendKind kind() const override { return BackendKind::local; }
  std::vector<InvocationRecord> records() const override { return log_.snapshot(); }
  void shutdown() override { pool_.shutdown(); }

private:
  void on_request(const queue::Message& m) {
    WorkerTask task;
    try {
      task = make_task(decode_request(m.payload), model_.likelihood_duration_s);
    } catch (const PayloadError& e) {
      output_->push(queue::make_error(m.msg_id, "bad_payload", e.what()));
      return;
    }
    pool_.submit(std::move(task), [this, request = m](LocalWorkerPool::Outcome o) {
      log_.add({request.msg_id, o.worker_id, request.enqueue_ts, o.response.compute_start_ts,
                o.response.compute_end_ts, o.response.cold});
      try {
        if (o.error_code.empty())
          output_->push(response_message(request, o.response));
        else
          output_->push(queue::make_error(request.msg_id, o.error_code, o.error_detail));
      } catch (const queue::QueueClosedError&) {
        // coordinator already gave up
      }
    });
  }

  queue::QueueHandle output_;
  BackendModel model_;
  RecordLog log_;
  LocalWorkerPool pool_;
};

// Forwards each request over one of `connections` persistent client links.
class RemotePlane final : public ComputePlane {
public:
  RemotePlane(std::shared_ptr<queue::Clock> clock, queue::QueueHandle input,
              queue::QueueHandle output, const Endpoint& endpoint, std::size_t connections)
      : clock_(std::move(clock)), output_(std::move(output)) {
    if (connections == 0)
      throw ConfigError("remote backend needs at least one connection");
    for (std::size_t i = 0; i < connections; ++i)
      clients_.push_back(std::make_unique<RemoteClient>(endpoint));
    for (std::size_t i = 0; i < connections; ++i)
      threads_.emplace_back([this, i] { run(i); });
    input->register_trigger([this](const queue::Message& m) { on_request(m); });
  }

  ~RemotePlane() override { shutdown(); }

  BackendKind kind() const override { return BackendKind::remote; }
  std::vector<InvocationRecord> records() const override { return log_.snapshot(); }

  void shutdown() override {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_)
      if (t.joinable())
        t.join();
    threads_.clear();
  }

private:
  void on_request(const queue::Message& m) {
    {
      std::lock_guard lock(mutex_);
      jobs_.push_back(m);
    }
    cv_.notify_one();
  }

  void publish(queue::Message m) {
    try {
      output_->push(std::move(m));
    } catch (const queue::QueueClosedError&) {
    }
  }

  void run(std::size_t index) {
    RemoteClient* client = clients_[index].get();
    bool broken = false;
    bool warm = false;
    for (;;) {
      queue::Message request;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stopping_ || !jobs_.empty(); });
        if (jobs_.empty())
          return;
        request = std::move(jobs_.front());
        jobs_.pop_front();
      }
      if (broken) {
        publish(queue::make_error(request.msg_id, "backend", "remote connection lost"));
        continue;
      }
      const double start = clock_->now();
      try {
        queue::Message reply = client->call(request);
        const double end = clock_->now();
        log_.add({request.msg_id, "remote-" + std::to_string(index), request.enqueue_ts, start,
                  end, !warm});
        warm = true;
        reply.msg_id = request.msg_id;
        publish(std::move(reply));
      } catch (const std::exception& e) {
        broken = true;
        publish(queue::make_error(request.msg_id, "backend", e.what()));
      }
    }
  }

  std::shared_ptr<queue::Clock> clock_;
  queue::QueueHandle output_;
  std::vector<std::unique_ptr<RemoteClient>> clients_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<queue::Message> jobs_;
  bool stopping_ = false;
  RecordLog log_;
};

} // namespace

std::unique_ptr<ComputePlane> attach_backend(queue::QueueFabric& fabric,
                                             const queue::QueueHandle& input_q,
                                             const queue::QueueHandle& output_q,
                                             const BackendConfig& config,
                                             const BackendModel& model,
                                             std::shared_ptr<const store::ObjectStore> store) {
  model.validate();
  if (!input_q || !output_q)
    throw ConfigError("input and output queues are required");
  if (config.n_quad < 16)
    throw ConfigError("n_quad must be at least 16");
  switch (config.kind) {
  case BackendKind::simulated: {
    auto clock = std::dynamic_pointer_cast<queue::VirtualClock>(fabric.clock());
    if (!clock)
      throw ConfigError("simulated backend needs a fabric running on a virtual clock");
    return std::make_unique<SimulatedPlane>(clock, input_q, output_q, model, config.seed,
                                            std::move(store), config.n_quad);
  }
  case BackendKind::local:
    if (fabric.clock()->is_virtual())
      throw ConfigError("local backend needs a wall clock");
    return std::make_unique<LocalPlane>(fabric.clock(), input_q, output_q, model, config.pool_size,
                                        std::move(store), config.n_quad);
  case BackendKind::remote:
    if (fabric.clock()->is_virtual())
      throw ConfigError("remote backend needs a wall clock");
    return std::make_unique<RemotePlane>(fabric.clock(), input_q, output_q,
                                         Endpoint::parse(config.remote_addr), config.pool_size);
  }
  throw ConfigError("unknown backend");
}

} // namespace qmc::compute
