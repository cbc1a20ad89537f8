#include <qmc/compute/local_pool.hpp>

#include <chrono>

namespace qmc::compute {

LocalWorkerPool::LocalWorkerPool(std::size_t pool_size,
                                 std::shared_ptr<const store::ObjectStore> store,
                                 std::shared_ptr<queue::Clock> clock, int n_quad)
    : clock_(std::move(clock)) {
  if (pool_size == 0)
    throw ConfigError("pool_size must be positive");
  if (!clock_)
    clock_ = std::make_shared<queue::WallClock>();
  for (std::size_t i = 0; i < pool_size; ++i)
    workers_.push_back(
        std::make_unique<Worker>("local-" + std::to_string(i), store, n_quad));
  for (std::size_t i = 0; i < pool_size; ++i)
    threads_.emplace_back([this, i] { run(i); });
}

LocalWorkerPool::~LocalWorkerPool() { shutdown(); }

void LocalWorkerPool::shutdown() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_ && threads_.empty())
      return;
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_)
    if (t.joinable())
      t.join();
  threads_.clear();
}

void LocalWorkerPool::enqueue(Job job) {
  {
    std::lock_guard lock(mutex_);
    if (stopping_)
      throw WorkerCrashError("worker pool is shut down");
    jobs_.push_back(std::move(job));
  }
  cv_.notify_one();
}

void LocalWorkerPool::run(std::size_t index) {
  Worker& worker = *workers_[index];
  for (;;) {
    Job job;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [&] { return stopping_ || !jobs_.empty(); });
      if (jobs_.empty())
        return;
      job = std::move(jobs_.front());
      jobs_.pop_front();
    }
    job(worker);
  }
}

LocalWorkerPool::Outcome LocalWorkerPool::execute(Worker& worker, const WorkerTask& task) {
  Outcome out;
  out.worker_id = worker.id;
  out.response.walker_id = task.request.walker_id;
  out.response.iteration = task.request.iteration;
  out.response.cold = !worker.warm;
  worker.warm = true;
  out.response.compute_start_ts = clock_->now();
  try {
    if (task.task_kind == TaskKind::stub && task.stub_duration_s > 0.0)
      std::this_thread::sleep_for(std::chrono::duration<double>(task.stub_duration_s));
    out.response.log_likelihood = worker.evaluator.evaluate(task);
  } catch (const DatasetNotFoundError& e) {
    out.error_code = "dataset_not_found";
    out.error_detail = e.what();
  } catch (const std::exception& e) {
    out.error_code = "worker_crash";
    out.error_detail = e.what();
  }
  out.response.compute_end_ts = clock_->now();
  return out;
}

std::future<LikelihoodResponse> LocalWorkerPool::submit(WorkerTask task) {
  auto promise = std::make_shared<std::promise<LikelihoodResponse>>();
  auto future = promise->get_future();
  enqueue([this, promise, task = std::move(task)](Worker& w) {
    Outcome o = execute(w, task);
    if (o.error_code.empty())
      promise->set_value(o.response);
    else if (o.error_code == "dataset_not_found")
      promise->set_exception(std::make_exception_ptr(DatasetNotFoundError(o.error_detail)));
    else
      promise->set_exception(std::make_exception_ptr(WorkerCrashError(o.error_detail)));
  });
  return future;
}

void LocalWorkerPool::submit(WorkerTask task, std::function<void(Outcome)> on_done) {
  enqueue([this, task = std::move(task), on_done = std::move(on_done)](Worker& w) {
    on_done(execute(w, task));
  });
}

LikelihoodResponse local_pool_execute(const WorkerTask& task, std::size_t pool_size,
                                      std::shared_ptr<const store::ObjectStore> store) {
  LocalWorkerPool pool(pool_size, std::move(store), nullptr);
  return pool.submit(task).get();
}

} // namespace qmc::compute
