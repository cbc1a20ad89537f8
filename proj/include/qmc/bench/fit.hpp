#pragma once

#include <qmc/compute/backend_model.hpp>
#include <qmc/compute/plane.hpp>
#include <qmc/mcmc/coordinator.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmc::bench {

/// Exit codes of the command line.
enum class ErrorCategory { config = 1, data = 2, backend = 3, timeout = 4 };

std::string_view to_string(ErrorCategory c);

class CommandError : public std::runtime_error {
public:
  CommandError(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const { return category_; }
  int exit_code() const { return static_cast<int>(category_); }

private:
  ErrorCategory category_;
};

struct FitOptions {
  std::filesystem::path dataset;
  std::size_t walkers = 4;
  std::size_t iterations = 10;
  compute::BackendKind backend = compute::BackendKind::local;
  std::string remote_addr;
  std::optional<std::filesystem::path> store_root; // remote backend: the worker's --data-root
  std::vector<double> proposal_scale = {0.01};
  std::optional<std::size_t> exchange_period;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
  compute::BackendModel model;
  std::size_t pool_size = 4;
  int n_quad = kernel::default_n_quad;
};

struct FitResult {
  mcmc::ChainOutput chain;
  std::vector<double> rhat;
  std::vector<double> ess;
  std::vector<double> acceptance;
};

/// Runs the hierarchical fit and writes chain.csv, timeline.csv and
/// diagnostics.json into out_dir. Throws CommandError.
FitResult run_fit(const FitOptions& options);

/// `<dataset>.truth.csv`, written next to synthesized datasets.
std::filesystem::path truth_path(const std::filesystem::path& dataset);

void write_truths(const std::filesystem::path& path, const std::vector<std::vector<double>>& truths);
std::vector<std::vector<double>> read_truths(const std::filesystem::path& path);

} // namespace qmc::bench
