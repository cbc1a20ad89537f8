#include <qmc/kernel/beam.hpp>
#include <qmc/kernel/errors.hpp>
#include <qmc/kernel/likelihood.hpp>
#include <qmc/kernel/projection.hpp>

namespace qmc::kernel {

double chi_square(const Map& model, const ClusterDataset& data) {
  if (!model.same_shape(data.obs_map) || !model.same_shape(data.sigma_map))
    throw ShapeMismatchError("model and observed maps differ in shape");
  const auto& m = model.values();
  const auto& obs = data.obs_map.values();
  const auto& sigma = data.sigma_map.values();
  double chi2 = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double r = (obs[i] - m[i]) / sigma[i];
    chi2 += r * r;
  }
  return chi2;
}

Map model_map(std::span<const double> theta, const ClusterDataset& data, int n_quad) {
  ProfileParams params{std::vector<double>(theta.begin(), theta.end()), data.r_max};
  const std::vector<double> projected = forward_abel(params, data.radial_grid, n_quad);
  const Map sky = project_to_map(projected, data.radial_grid, data.grid_size(), data.pixel_size);
  return convolve_beam(sky, data.beam_fwhm, data.pixel_size);
}

double cluster_log_likelihood(std::span<const double> theta, const ClusterDataset& data,
                              int n_quad) {
  return -0.5 * chi_square(model_map(theta, data, n_quad), data);
}

double evaluate(std::span<const double> thetas, std::span<const ClusterDataset> datasets,
                int n_quad) {
  if (datasets.empty())
    throw KernelError("evaluate needs at least one cluster");
  if (thetas.empty() || thetas.size() % datasets.size() != 0)
    throw ShapeMismatchError("parameter count " + std::to_string(thetas.size()) +
                             " is not a multiple of the cluster count " +
                             std::to_string(datasets.size()));
  const std::size_t per = thetas.size() / datasets.size();
  double total = 0.0;
  for (std::size_t c = 0; c < datasets.size(); ++c) {
    try {
      total += cluster_log_likelihood(thetas.subspan(c * per, per), datasets[c], n_quad);
    } catch (const ClusterError&) {
      throw;
    } catch (const std::exception& e) {
      throw ClusterError(datasets[c].cluster_id, e.what());
    }
  }
  return total;
}

} // namespace qmc::kernel
