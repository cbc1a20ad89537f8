#pragma once

#include <qmc/kernel/abel.hpp>
#include <qmc/kernel/dataset.hpp>
#include <qmc/kernel/map.hpp>

#include <span>

namespace qmc::kernel {

double chi_square(const Map& model, const ClusterDataset& data);

/// Profile -> Abel projection -> 2D map -> beam convolution.
Map model_map(std::span<const double> theta, const ClusterDataset& data,
              int n_quad = default_n_quad);

/// -χ²/2 for one cluster.
double cluster_log_likelihood(std::span<const double> theta, const ClusterDataset& data,
                              int n_quad = default_n_quad);

/// Sum of per-cluster log-likelihoods, clusters in list order. `thetas` is
/// row-major C × (D+1). Failures are rethrown as ClusterError.
double evaluate(std::span<const double> thetas, std::span<const ClusterDataset> datasets,
                int n_quad = default_n_quad);

} // namespace qmc::kernel
