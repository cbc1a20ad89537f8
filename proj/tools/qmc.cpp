#include <qmc/bench/fit.hpp>
#include <qmc/bench/overhead.hpp>
#include <qmc/bench/timeline.hpp>
#include <qmc/compute/remote.hpp>
#include <qmc/kernel/dataset.hpp>
#include <qmc/kernel/synth.hpp>
#include <qmc/mcmc/chain_io.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using qmc::bench::CommandError;
using qmc::bench::ErrorCategory;

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("qmc");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("QMC_LOG")) {
    const std::string v = env;
    if (v == "error")
      spdlog::set_level(spdlog::level::err);
    else if (v == "debug")
      spdlog::set_level(spdlog::level::debug);
    else if (v != "info")
      spdlog::warn("QMC_LOG='{}' not recognized, using info", v);
  }
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_floating_point_v<T>)
        out.push_back(std::stod(cell, &used));
      else
        out.push_back(static_cast<T>(std::stoull(cell, &used)));
      if (used != cell.size())
        throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw CommandError(ErrorCategory::config, std::string("bad value '") + cell + "' for " + flag);
    }
  }
  if (out.empty())
    throw CommandError(ErrorCategory::config, std::string(flag) + " must not be empty");
  return out;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw CommandError(ErrorCategory::config, "cannot write " + path.string());
  return os;
}

qmc::bench::RatioReference parse_reference(const std::string& s) {
  if (s == "chain")
    return qmc::bench::RatioReference::chain;
  if (s == "single")
    return qmc::bench::RatioReference::single;
  throw CommandError(ErrorCategory::config, "--ratio-reference must be chain or single");
}

qmc::compute::RemoteWorkerServer* active_server = nullptr;

extern "C" void on_signal(int) {
  if (active_server)
    active_server->stop();
}

} // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Lockstep MCMC over a serverless compute model"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Sample the hierarchical cluster model");
  qmc::bench::FitOptions fo;
  std::string backend = "local";
  std::string scale = "0.01";
  std::size_t exchange = 0;
  std::string store_root;
  fit->add_option("--dataset", fo.dataset, "Dataset container")->required();
  fit->add_option("--walkers", fo.walkers)->capture_default_str();
  fit->add_option("--iterations", fo.iterations)->capture_default_str();
  fit->add_option("--backend", backend, "sim | local | remote")->capture_default_str();
  fit->add_option("--remote-addr", fo.remote_addr, "host:port of a worker server");
  fit->add_option("--store-root", store_root, "Stage the dataset into this worker data root");
  fit->add_option("--proposal-scale", scale, "Comma-separated step sizes")->capture_default_str();
  fit->add_option("--exchange-period", exchange, "Exchange walker states every K iterations");
  fit->add_option("--seed", fo.seed)->capture_default_str();
  fit->add_option("--out-dir", fo.out_dir)->capture_default_str();
  fit->add_option("--pool-size", fo.pool_size, "Local workers or remote connections")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "Overhead and timeline experiments");
  bench->require_subcommand(1);
  auto* overhead = bench->add_subcommand("overhead", "Overhead of parallel likelihood waves");
  qmc::compute::BackendModel om;
  std::string n_list;
  std::uint64_t o_seed = 1;
  std::string o_out = "overhead.csv";
  std::string reference = "chain";
  std::string records_out;
  qmc::bench::OverheadOptions oo;
  overhead->add_option("--n", n_list, "Comma-separated wave sizes")->required();
  overhead->add_option("--tau", om.scale_doubling_interval_s)->capture_default_str();
  overhead->add_option("--c0", om.initial_capacity)->capture_default_str();
  overhead->add_option("--cold-start", om.cold_start_s)->capture_default_str();
  overhead->add_option("--warm", om.warm_invoke_s)->capture_default_str();
  overhead->add_option("--jitter", om.jitter_std_s)->capture_default_str();
  overhead->add_option("--duration", om.likelihood_duration_s)->capture_default_str();
  overhead->add_option("--seed", o_seed)->capture_default_str();
  overhead->add_option("--out", o_out)->capture_default_str();
  overhead->add_option("--iterations", oo.iterations, "Chain length for the ratio reference")
      ->capture_default_str();
  overhead->add_option("--ratio-reference", reference, "chain | single")->capture_default_str();
  overhead->add_option("--records", records_out, "Also write raw invocation records here");
  bool stepped = false;
  overhead->add_flag("--stepped", stepped, "Discrete doubling ramp");

  auto* timeline = bench->add_subcommand("timeline", "Per-walker completion timeline");
  qmc::compute::BackendModel tm;
  std::string w_list;
  std::size_t t_iter = 100;
  std::uint64_t t_seed = 1;
  fs::path t_out = ".";
  timeline->add_option("--walkers", w_list, "Comma-separated walker counts")->required();
  timeline->add_option("--iterations", t_iter)->capture_default_str();
  timeline->add_option("--duration", tm.likelihood_duration_s)->capture_default_str();
  timeline->add_option("--seed", t_seed)->capture_default_str();
  timeline->add_option("--out-dir", t_out)->capture_default_str();

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Dataset utilities");
  dataset->require_subcommand(1);
  auto* synth = dataset->add_subcommand("synth", "Write a synthetic dataset container");
  qmc::kernel::SynthConfig sc;
  fs::path s_out;
  synth->add_option("--clusters", sc.clusters)->capture_default_str();
  synth->add_option("--grid", sc.grid)->capture_default_str();
  synth->add_option("--seed", sc.seed)->capture_default_str();
  synth->add_option("--out", s_out)->required();

  // worker
  auto* worker = app.add_subcommand("worker", "Remote worker");
  worker->require_subcommand(1);
  auto* serve = worker->add_subcommand("serve", "Serve likelihood requests over TCP");
  std::string listen = "127.0.0.1:7700";
  fs::path data_root;
  serve->add_option("--listen", listen)->capture_default_str();
  serve->add_option("--data-root", data_root)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCategory::config);
  }

  try {
    if (*fit) {
      fo.backend = qmc::compute::parse_backend(backend);
      fo.proposal_scale = parse_list<double>(scale, "--proposal-scale");
      if (exchange > 0)
        fo.exchange_period = exchange;
      if (!store_root.empty())
        fo.store_root = store_root;
      fs::create_directories(fo.out_dir);
      qmc::bench::run_fit(fo);
    } else if (*overhead) {
      if (stepped)
        om.ramp = qmc::compute::Ramp::stepped;
      oo.reference = parse_reference(reference);
      const auto ns = parse_list<std::size_t>(n_list, "--n");
      auto reports = [&] {
        try {
          return qmc::bench::bench_overhead(ns, om, o_seed, oo);
        } catch (const qmc::compute::ConfigError& e) {
          throw CommandError(ErrorCategory::config, e.what());
        }
      }();
      auto os = open_out(o_out);
      qmc::bench::write_overhead_csv(os, reports);
      for (const auto& s : qmc::bench::summarize(reports))
        spdlog::info("n={} overhead={:.6g}s (std {:.3g}, {} runs) ratio={:.4g}%", s.n_parallel,
                     s.overhead_mean_s, s.overhead_std_s, s.runs, 100.0 * s.ratio_mean);
      if (!records_out.empty()) {
        auto rs = open_out(records_out);
        for (std::size_t n : ns)
          qmc::bench::write_records_csv(rs, qmc::bench::run_overhead_wave(n, om, o_seed, oo).records);
      }
    } else if (*timeline) {
      fs::create_directories(t_out);
      std::vector<qmc::bench::TimelineSummary> rows;
      for (std::size_t w : parse_list<std::size_t>(w_list, "--walkers")) {
        auto run = qmc::bench::run_timeline(w, t_iter, tm, t_seed);
        if (run.chain.failure)
          throw CommandError(ErrorCategory::timeout, run.chain.failure->message);
        auto os = open_out(t_out / ("timeline_w" + std::to_string(w) + ".csv"));
        qmc::mcmc::write_timeline_csv(os, run.chain);
        spdlog::info("W={} total={:.6g}s verticality={:.4g}%", w, run.summary.total_time_s,
                     100.0 * run.summary.verticality);
        rows.push_back(run.summary);
      }
      auto os = open_out(t_out / "summary.csv");
      qmc::bench::write_timeline_summary_csv(os, rows);
    } else if (*synth) {
      auto data = qmc::kernel::synthesize(sc);
      auto os = open_out(s_out);
      const auto bytes = qmc::kernel::encode_container(data.clusters);
      os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      qmc::bench::write_truths(qmc::bench::truth_path(s_out), data.truths);
      spdlog::info("wrote {} clusters to {}", data.clusters.size(), s_out.string());
    } else if (*serve) {
      qmc::compute::RemoteWorkerServer server(listen, data_root);
      const auto port = server.start();
      active_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("worker listening on port {}", port);
      std::cout << port << std::endl;
      server.serve();
      active_server = nullptr;
    }
  } catch (const CommandError& e) {
    spdlog::error("{}: {}", qmc::bench::to_string(e.category()), e.what());
    return e.exit_code();
  } catch (const qmc::compute::ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return static_cast<int>(ErrorCategory::config);
  } catch (const std::invalid_argument& e) {
    spdlog::error("config: {}", e.what());
    return static_cast<int>(ErrorCategory::config);
  } catch (const qmc::compute::RemoteError& e) {
    spdlog::error("backend: {}", e.what());
    return static_cast<int>(ErrorCategory::backend);
  } catch (const std::exception& e) {
    spdlog::error("data: {}", e.what());
    return static_cast<int>(ErrorCategory::data);
  }
  return 0;
}
