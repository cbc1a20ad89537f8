#include <qmc/bench/fit.hpp>
#include <qmc/kernel/dataset.hpp>
#include <qmc/kernel/errors.hpp>
#include <qmc/mcmc/chain_io.hpp>
#include <qmc/mcmc/diagnostics.hpp>
#include <qmc/mcmc/hierarchical.hpp>
#include <qmc/queue/queue.hpp>
#include <qmc/store/digest.hpp>
#include <qmc/store/object_store.hpp>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace qmc::bench {

namespace fs = std::filesystem;

std::string_view to_string(ErrorCategory c) {
  switch (c) {
  case ErrorCategory::config: return "config";
  case ErrorCategory::data: return "data";
  case ErrorCategory::backend: return "backend";
  case ErrorCategory::timeout: return "timeout";
  }
  return "unknown";
}

fs::path truth_path(const fs::path& dataset) {
  fs::path p = dataset;
  p += ".truth.csv";
  return p;
}

void write_truths(const fs::path& path, const std::vector<std::vector<double>>& truths) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw CommandError(ErrorCategory::data, "cannot write " + path.string());
  os << "cluster";
  if (!truths.empty())
    for (std::size_t k = 0; k < truths.front().size(); ++k)
      os << ",theta_" << k;
  os << '\n';
  for (std::size_t c = 0; c < truths.size(); ++c) {
    os << c;
    for (double v : truths[c])
      os << ',' << mcmc::format_double(v);
    os << '\n';
  }
}

std::vector<std::vector<double>> read_truths(const fs::path& path) {
  std::ifstream is(path);
  if (!is)
    throw CommandError(ErrorCategory::data, "cannot read " + path.string());
  std::string line;
  std::getline(is, line); // header
  std::vector<std::vector<double>> out;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw CommandError(ErrorCategory::data, "bad value '" + cell + "' in " + path.string());
      }
    }
    if (!out.empty() && row.size() != out.front().size())
      throw CommandError(ErrorCategory::data, "ragged truth file " + path.string());
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

store::Bytes read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw CommandError(ErrorCategory::data, "dataset not found: " + path.string());
  return store::Bytes(std::istreambuf_iterator<char>(is), {});
}

std::shared_ptr<store::ObjectStore> stage_dataset(const FitOptions& o, const std::string& key,
                                                  const store::Bytes& bytes) {
  if (o.backend != compute::BackendKind::remote) {
    auto s = std::make_shared<store::MemoryObjectStore>();
    s->put(key, bytes);
    return s;
  }
  // The remote worker reads from its own data root; when it is reachable
  // from here the dataset is staged into it.
  if (!o.store_root)
    return nullptr;
  auto s = std::make_shared<store::DiskObjectStore>(*o.store_root);
  if (s->contains(key)) {
    if (s->info(key).content_hash != store::content_digest(bytes))
      throw CommandError(ErrorCategory::data, "store already holds a different '" + key + "'");
  } else {
    s->put(key, bytes);
  }
  return s;
}

void write_outputs(const FitOptions& o, FitResult& r) {
  if (std::ofstream os(o.out_dir / "chain.csv", std::ios::binary); os)
    mcmc::write_chain_csv(os, r.chain);
  else
    throw CommandError(ErrorCategory::config, "cannot write into " + o.out_dir.string());
  std::ofstream tl(o.out_dir / "timeline.csv", std::ios::binary);
  mcmc::write_timeline_csv(tl, r.chain);

  nlohmann::ordered_json j;
  j["walkers"] = r.chain.n_walkers;
  j["iterations"] = r.chain.completed_iterations;
  j["burn_in"] = mcmc::default_burn_in;
  auto nullable = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v)
      a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return a;
  };
  j["rhat"] = nullable(r.rhat);
  j["ess"] = nullable(r.ess);
  j["acceptance_rates"] = nullable(r.acceptance);
  if (r.chain.failure)
    j["failure"] = r.chain.failure->message;
  std::ofstream dj(o.out_dir / "diagnostics.json", std::ios::binary);
  dj << j.dump(2) << '\n';
}

} // namespace

FitResult run_fit(const FitOptions& o) {
  if (o.walkers == 0 || o.iterations == 0)
    throw CommandError(ErrorCategory::config, "walkers and iterations must be positive");
  if (o.backend == compute::BackendKind::remote && o.remote_addr.empty())
    throw CommandError(ErrorCategory::config, "--remote-addr is required for the remote backend");

  const store::Bytes bytes = read_file(o.dataset);
  std::vector<kernel::ClusterDataset> clusters;
  try {
    clusters = kernel::decode_container(bytes);
    for (const auto& c : clusters)
      kernel::validate(c);
  } catch (const kernel::KernelError& e) {
    throw CommandError(ErrorCategory::data, e.what());
  }
  if (clusters.empty())
    throw CommandError(ErrorCategory::data, "dataset holds no clusters");

  std::vector<std::vector<double>> truths;
  if (fs::exists(truth_path(o.dataset)))
    truths = read_truths(truth_path(o.dataset));
  else
    truths.assign(clusters.size(), {1.0, 0.0, -1.5, 0.5});
  if (truths.size() != clusters.size() || truths.front().empty())
    throw CommandError(ErrorCategory::data, "truth file does not match the dataset");

  const mcmc::HierarchicalLayout layout{clusters.size(), truths.front().size()};
  const std::string key = "datasets/" + o.dataset.filename().string();

  mcmc::ChainConfig chain;
  chain.n_walkers = o.walkers;
  chain.n_iterations = o.iterations;
  chain.proposal_scale = o.proposal_scale;
  chain.exchange_period = o.exchange_period;
  chain.seed = o.seed;
  try {
    chain.validate(layout.dim());
    o.model.validate();
  } catch (const std::exception& e) {
    throw CommandError(ErrorCategory::config, e.what());
  }

  std::shared_ptr<store::ObjectStore> store;
  try {
    store = stage_dataset(o, key, bytes);
  } catch (const store::StoreError& e) {
    throw CommandError(ErrorCategory::data, e.what());
  }

  std::shared_ptr<queue::Clock> clock;
  if (o.backend == compute::BackendKind::simulated)
    clock = std::make_shared<queue::VirtualClock>();
  else
    clock = std::make_shared<queue::WallClock>();
  queue::QueueFabric fabric(clock);
  auto input = fabric.create_queue("likelihood-requests");
  auto output = fabric.create_queue("likelihood-responses");

  compute::BackendConfig bc;
  bc.kind = o.backend;
  bc.pool_size = o.pool_size;
  bc.remote_addr = o.remote_addr;
  bc.seed = o.seed;
  bc.n_quad = o.n_quad;

  std::unique_ptr<compute::ComputePlane> plane;
  try {
    plane = compute::attach_backend(fabric, input, output, bc, o.model, store);
  } catch (const compute::ConfigError& e) {
    throw CommandError(ErrorCategory::config, e.what());
  } catch (const std::exception& e) {
    throw CommandError(ErrorCategory::backend, e.what());
  }

  mcmc::Target target;
  target.dataset_key = key;
  target.dim = layout.dim();
  target.log_prior = [layout](std::span<const double> p) {
    return mcmc::hierarchical_log_prior(p, layout);
  };
  target.likelihood_params = [layout](std::span<const double> p) {
    auto t = layout.thetas(p);
    return std::vector<double>(t.begin(), t.end());
  };

  std::vector<std::vector<double>> init;
  for (std::size_t w = 0; w < o.walkers; ++w)
    init.push_back(mcmc::initial_position(truths, 0.1, 0.01, o.seed, w));

  mcmc::RunOptions ro;
  // Kernel evaluations dominate on real backends; the simulated one charges L.
  ro.response_timeout_s = std::max(1000.0, 10.0 * o.model.likelihood_duration_s);

  spdlog::info("fit: {} clusters, dim {}, {} walkers x {} iterations on {}", clusters.size(),
               layout.dim(), o.walkers, o.iterations, compute::to_string(o.backend));

  FitResult r;
  r.chain = mcmc::run_chains(chain, target, init, *plane, input, output, ro);
  plane->shutdown();

  if (r.chain.completed_iterations > 0) {
    const auto view = mcmc::post_burn_in(r.chain);
    if (view.chains >= 2 && view.draws >= 4) {
      r.rhat = mcmc::rhat(view);
      r.ess = mcmc::effective_sample_size(view);
    }
    r.acceptance = mcmc::acceptance_rates(r.chain);
  }
  write_outputs(o, r);

  if (r.chain.failure) {
    const auto& f = *r.chain.failure;
    const auto cat = f.kind == mcmc::FailureKind::timeout ? ErrorCategory::timeout
                     : f.kind == mcmc::FailureKind::data  ? ErrorCategory::data
                                                          : ErrorCategory::backend;
    throw CommandError(cat, f.message);
  }
  spdlog::info("fit: wrote {}", o.out_dir.string());
  return r;
}

} // namespace qmc::bench
