#include <qmc/compute/evaluator.hpp>
#include <qmc/kernel/likelihood.hpp>

namespace qmc::compute {

WorkerTask make_task(LikelihoodRequest request, double stub_duration_s) {
  WorkerTask t;
  t.dataset_key = request.dataset_key;
  if (t.dataset_key.starts_with(stub_prefix)) {
    t.task_kind = TaskKind::stub;
    t.stub_duration_s = stub_duration_s;
  }
  t.request = std::move(request);
  return t;
}

double stub_log_likelihood(std::string_view key, std::span<const double> params) {
  if (key == "stub:gaussian") {
    double acc = 0.0;
    for (double x : params)
      acc += x * x;
    return -0.5 * acc;
  }
  if (key == "stub:constant")
    return 0.0;
  throw std::invalid_argument("unknown stub likelihood '" + std::string(key) + "'");
}

Evaluator::Evaluator(std::shared_ptr<const store::ObjectStore> store, int n_quad)
    : store_(std::move(store)), n_quad_(n_quad) {}

std::shared_ptr<const std::vector<kernel::ClusterDataset>>
Evaluator::dataset(const std::string& key) {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end())
      return it->second;
  }
  if (!store_)
    throw DatasetNotFoundError("no object store attached for dataset '" + key + "'");
  store::Bytes bytes;
  try {
    bytes = store_->get(key);
  } catch (const store::NotFoundError& e) {
    throw DatasetNotFoundError(e.what());
  }
  auto parsed =
      std::make_shared<const std::vector<kernel::ClusterDataset>>(kernel::decode_container(bytes));
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(parsed)).first->second;
}

double Evaluator::evaluate(const WorkerTask& task) {
  if (task.task_kind == TaskKind::stub)
    return stub_log_likelihood(task.dataset_key, task.request.params);
  auto clusters = dataset(task.dataset_key);
  return kernel::evaluate(task.request.params, *clusters, n_quad_);
}

std::size_t Evaluator::cached_datasets() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

} // namespace qmc::compute
