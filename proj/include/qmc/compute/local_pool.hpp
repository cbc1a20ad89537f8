#pragma once

#include <qmc/compute/evaluator.hpp>
#include <qmc/compute/payload.hpp>
#include <qmc/queue/clock.hpp>
#include <qmc/queue/message.hpp>

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace qmc::compute {

class WorkerCrashError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Fixed set of worker threads, each with its own dataset cache. Failed tasks
/// are reported, never retried.
class LocalWorkerPool {
public:
  LocalWorkerPool(std::size_t pool_size, std::shared_ptr<const store::ObjectStore> store,
                  std::shared_ptr<queue::Clock> clock, int n_quad = kernel::default_n_quad);
  ~LocalWorkerPool();

  LocalWorkerPool(const LocalWorkerPool&) = delete;
  LocalWorkerPool& operator=(const LocalWorkerPool&) = delete;

  /// Throws (through the future) DatasetNotFoundError or WorkerCrashError.
  std::future<LikelihoodResponse> submit(WorkerTask task);

  struct Outcome {
    LikelihoodResponse response;
    std::string worker_id;
    std::string error_code; // empty on success
    std::string error_detail;
  };

  void submit(WorkerTask task, std::function<void(Outcome)> on_done);

  std::size_t size() const { return threads_.size(); }

  /// Stops accepting work, finishes queued tasks and joins.
  void shutdown();

private:
  struct Worker {
    Worker(std::string worker_id, std::shared_ptr<const store::ObjectStore> store, int n_quad)
        : id(std::move(worker_id)), evaluator(std::move(store), n_quad) {}
    std::string id;
    Evaluator evaluator;
    bool warm = false;
  };
  using Job = std::function<void(Worker&)>;

  void enqueue(Job job);
  void run(std::size_t index);
  Outcome execute(Worker& worker, const WorkerTask& task);

  std::shared_ptr<queue::Clock> clock_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Job> jobs_;
  bool stopping_ = false;
};

/// Runs one task on a temporary pool.
LikelihoodResponse local_pool_execute(const WorkerTask& task, std::size_t pool_size,
                                      std::shared_ptr<const store::ObjectStore> store);

} // namespace qmc::compute
