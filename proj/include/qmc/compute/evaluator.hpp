#pragma once

#include <qmc/compute/backend_model.hpp>
#include <qmc/compute/payload.hpp>
#include <qmc/kernel/abel.hpp>
#include <qmc/kernel/dataset.hpp>
#include <qmc/store/object_store.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qmc::compute {

/// Keys with this prefix name built-in cheap likelihoods instead of datasets:
///   stub:gaussian   -0.5 · Σ x²
///   stub:constant   0
inline constexpr std::string_view stub_prefix = "stub:";

enum class TaskKind { kernel, stub };

struct WorkerTask {
  LikelihoodRequest request;
  std::string dataset_key;
  TaskKind task_kind = TaskKind::kernel;
  double stub_duration_s = 0.0;
};

WorkerTask make_task(LikelihoodRequest request, double stub_duration_s);

class DatasetNotFoundError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Evaluates likelihood tasks against a shared object store, keeping parsed
/// datasets cached for reuse by later invocations on the same instance.
class Evaluator {
public:
  explicit Evaluator(std::shared_ptr<const store::ObjectStore> store,
                     int n_quad = kernel::default_n_quad);

  /// Throws DatasetNotFoundError, kernel errors, or std::invalid_argument for
  /// an unknown stub.
  double evaluate(const WorkerTask& task);

  std::shared_ptr<const std::vector<kernel::ClusterDataset>> dataset(const std::string& key);

  std::size_t cached_datasets() const;

private:
  std::shared_ptr<const store::ObjectStore> store_;
  int n_quad_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const std::vector<kernel::ClusterDataset>>> cache_;
};

double stub_log_likelihood(std::string_view key, std::span<const double> params);

} // namespace qmc::compute
