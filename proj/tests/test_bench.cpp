#include <doctest.h>

#include "support.hpp"

#include <qmc/bench/fit.hpp>
#include <qmc/bench/overhead.hpp>
#include <qmc/bench/timeline.hpp>
#include <qmc/compute/sim_engine.hpp>
#include <qmc/kernel/dataset.hpp>
#include <qmc/kernel/synth.hpp>
#include <qmc/store/digest.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace qmc;
using namespace qmc::bench;
namespace fs = std::filesystem;

namespace {

compute::BackendModel zero_jitter() {
  compute::BackendModel m;
  m.jitter_std_s = 0.0;
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path write_dataset(const fs::path& dir, std::size_t clusters, std::size_t grid, std::uint64_t seed) {
  kernel::SynthConfig cfg;
  cfg.clusters = clusters;
  cfg.grid = grid;
  cfg.seed = seed;
  const auto data = kernel::synthesize(cfg);
  const auto bytes = kernel::encode_container(data.clusters);
  const fs::path p = dir / "data.bin";
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                           static_cast<std::streamsize>(bytes.size()));
  write_truths(truth_path(p), data.truths);
  return p;
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("QMC_CLI");
  REQUIRE_MESSAGE(cli, "QMC_CLI must point at the qmc binary");
  const std::string cmd = std::string("QMC_LOG=error ") + cli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_CASE("overhead: degenerate and capacity-sufficient waves") {
  const std::vector<std::size_t> one{1};
  const auto r1 = bench_overhead(one, zero_jitter(), 1);
  REQUIRE(r1.size() == 1);
  CHECK(r1[0].overhead_s == 0.0);
  const std::vector<std::size_t> c0{3};
  CHECK(bench_overhead(c0, zero_jitter(), 1)[0].overhead_s == 0.0);
  CHECK_THROWS_AS(bench_overhead(std::vector<std::size_t>{}, zero_jitter(), 1), compute::ConfigError);
  auto bad = zero_jitter();
  bad.scale_doubling_interval_s = 0;
  CHECK_THROWS_AS(bench_overhead(one, bad, 1), compute::ConfigError);
}

TEST_CASE("overhead: doubling sweep adds tau per step") {
  const std::vector<std::size_t> ns{250, 500, 1000, 2000, 4000};
  const auto m = zero_jitter();
  const auto reports = bench_overhead(ns, m, 1);
  REQUIRE(reports.size() == 5);
  for (std::size_t i = 1; i < reports.size(); ++i)
    CHECK(std::abs(reports[i].overhead_s - reports[i - 1].overhead_s - m.scale_doubling_interval_s) < 1e-9);
  // Chain-time reference by default, single-evaluation on request.
  CHECK(reports[2].overhead_ratio == doctest::Approx(reports[2].overhead_s / (100 * 100.0)));
  OverheadOptions single;
  single.reference = RatioReference::single;
  CHECK(bench_overhead(std::vector<std::size_t>{1000}, m, 1, single)[0].overhead_ratio ==
        doctest::Approx(reports[2].overhead_s / 100.0));
}

TEST_CASE("overhead: monotone and logarithmic") {
  const auto m = zero_jitter();
  std::vector<std::size_t> ns;
  for (std::size_t n = 1; n <= 3000; n = n * 5 / 4 + 1)
    ns.push_back(n);
  const auto reports = bench_overhead(ns, m, 1);
  for (std::size_t i = 1; i < reports.size(); ++i)
    CHECK(reports[i].overhead_s >= reports[i - 1].overhead_s);

  // Least-squares a·log2(n) + b over n >= 8·c0.
  std::vector<double> x, y;
  for (const auto& r : reports)
    if (r.n_parallel >= 8 * m.initial_capacity) {
      x.push_back(std::log2(static_cast<double>(r.n_parallel)));
      y.push_back(r.overhead_s);
    }
  REQUIRE(x.size() > 5);
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double a = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double b = (sy - a * sx) / k;
  const double range = *std::max_element(y.begin(), y.end()) - *std::min_element(y.begin(), y.end());
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(a * x[i] + b - y[i]));
  CHECK(worst < 0.05 * range);
  CHECK(a == doctest::Approx(m.scale_doubling_interval_s).epsilon(1e-6));
}

TEST_CASE("overhead: stepped ramp is exact stepwise log") {
  auto m = zero_jitter();
  m.ramp = compute::Ramp::stepped;
  const std::vector<std::size_t> ns{24, 48, 96, 192, 384};
  const auto reports = bench_overhead(ns, m, 1);
  for (std::size_t i = 0; i < reports.size(); ++i)
    CHECK(std::abs(reports[i].overhead_s - m.scale_doubling_interval_s * static_cast<double>(i + 3)) < 1e-9);
}

TEST_CASE("overhead: rows recompute from raw records") {
  auto m = zero_jitter();
  m.jitter_std_s = 0.5;
  for (std::size_t n : {2, 10, 300}) {
    const auto run = run_overhead_wave(n, m, 9);
    CHECK(run.records.size() == n);
    CHECK(compute::overhead_of(run.records) == run.report.overhead_s);
  }
  // Jitter runs five seeds per n.
  const auto reports = bench_overhead(std::vector<std::size_t>{100, 200}, m, 40);
  CHECK(reports.size() == 10);
  const auto summary = summarize(reports);
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].runs == 5);
  CHECK(summary[0].overhead_std_s > 0.0);
  std::ostringstream os;
  write_overhead_csv(os, reports);
  const auto csv = os.str();
  CHECK(csv.rfind("n_parallel,overhead_s,overhead_ratio,seed\n", 0) == 0);
  CHECK(line_count(csv) == 11);
  // Each CSV value parses back to the report it came from.
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  for (const auto& r : reports) {
    std::getline(is, line);
    std::stringstream ss(line);
    std::string n, o, ratio, seed;
    std::getline(ss, n, ',');
    std::getline(ss, o, ',');
    std::getline(ss, ratio, ',');
    std::getline(ss, seed, ',');
    CHECK(std::stoul(n) == r.n_parallel);
    CHECK(std::stod(o) == r.overhead_s);
    CHECK(std::stoull(seed) == r.run_seed);
  }
}

TEST_CASE("timeline") {
  const compute::BackendModel m;
  const auto small = run_timeline(10, 100, m, 1);
  const auto big = run_timeline(100, 100, m, 1);
  REQUIRE(small.chain.complete());
  REQUIRE(big.chain.complete());
  CHECK(small.chain.timeline.size() == 1000);
  CHECK(big.chain.timeline.size() == 10000);
  CHECK(std::abs(big.summary.total_time_s - small.summary.total_time_s) <
        0.1 * small.summary.total_time_s);
  CHECK(big.summary.verticality < 0.02);
  REQUIRE(big.summary.quartile_times_s.size() == 3);
  CHECK(big.summary.quartile_times_s[0] < big.summary.quartile_times_s[1]);
  CHECK(big.summary.quartile_times_s[1] < big.summary.quartile_times_s[2]);
  CHECK(big.summary.quartile_times_s[2] < big.summary.total_time_s);
  // Each iteration costs at least one likelihood duration.
  CHECK(big.summary.quartile_times_s[0] >= 25 * m.likelihood_duration_s);
  std::ostringstream os;
  write_timeline_summary_csv(os, {small.summary, big.summary});
  CHECK(line_count(os.str()) == 3);
}

TEST_CASE("timeline summary by hand") {
  mcmc::ChainOutput c;
  c.n_walkers = 2;
  c.n_iterations = 4;
  c.completed_iterations = 4;
  // iteration i completes at 10i+10 (walker 0) and 10i+12 (walker 1)
  for (std::uint64_t it = 0; it < 4; ++it)
    for (std::uint32_t w = 0; w < 2; ++w)
      c.timeline.push_back({w, it, 10.0 * it, false, 10.0 * it + 10 + 2 * w, compute::BackendKind::simulated});
  const auto s = summarize_timeline(c);
  CHECK(s.total_time_s == 42.0);
  CHECK(s.max_iteration_spread_s == 2.0);
  CHECK(s.verticality == doctest::Approx(2.0 / 42.0));
  CHECK(s.quartile_times_s == std::vector<double>{12.0, 22.0, 32.0});
}

TEST_CASE("truth files round trip") {
  qmc::testing::TempDir dir;
  const std::vector<std::vector<double>> t{{1.0, 0.1 + 0.2}, {-3e-9, 1e300}};
  write_truths(dir.path / "t.csv", t);
  CHECK(read_truths(dir.path / "t.csv") == t);
  CHECK(truth_path("a/b.bin") == fs::path("a/b.bin.truth.csv"));
}

TEST_CASE("fit") {
  qmc::testing::TempDir dir;
  const auto ds = write_dataset(dir.path, 2, 16, 3);

  SUBCASE("local backend budget") {
    FitOptions o;
    o.dataset = ds;
    o.walkers = 4;
    o.iterations = 10;
    o.backend = compute::BackendKind::local;
    o.out_dir = dir.path;
    const auto r = run_fit(o);
    CHECK(r.chain.complete());
    const auto csv = slurp(dir.path / "chain.csv");
    CHECK(line_count(csv) == 41);
    CHECK(csv.rfind("walker,iteration,accepted,log_post,param_0,", 0) == 0);
    CHECK(line_count(slurp(dir.path / "timeline.csv")) == 41);
    const auto diag = nlohmann::json::parse(slurp(dir.path / "diagnostics.json"));
    CHECK(diag["rhat"].size() == 16);
    CHECK(diag["acceptance_rates"].size() == 4);
  }
  SUBCASE("simulated runs are byte-identical") {
    FitOptions o;
    o.dataset = ds;
    o.walkers = 3;
    o.iterations = 8;
    o.backend = compute::BackendKind::simulated;
    o.exchange_period = 3;
    o.out_dir = dir.path / "a";
    fs::create_directories(o.out_dir);
    run_fit(o);
    o.out_dir = dir.path / "b";
    fs::create_directories(o.out_dir);
    run_fit(o);
    const auto a = slurp(dir.path / "a" / "chain.csv");
    const auto b = slurp(dir.path / "b" / "chain.csv");
    CHECK(store::content_digest(std::vector<std::uint8_t>(a.begin(), a.end())) ==
          store::content_digest(std::vector<std::uint8_t>(b.begin(), b.end())));
    CHECK(a == b);
    // The local backend gives the same chain.
    o.backend = compute::BackendKind::local;
    o.out_dir = dir.path / "c";
    fs::create_directories(o.out_dir);
    run_fit(o);
    CHECK(slurp(dir.path / "c" / "chain.csv") == a);
  }
  SUBCASE("error categories") {
    FitOptions o;
    o.dataset = dir.path / "missing.bin";
    o.out_dir = dir.path;
    try {
      run_fit(o);
      FAIL("expected an error");
    } catch (const CommandError& e) {
      CHECK(e.category() == ErrorCategory::data);
      CHECK(e.exit_code() == 2);
    }
    std::ofstream(dir.path / "junk.bin") << "QMC1 but not really";
    o.dataset = dir.path / "junk.bin";
    try {
      run_fit(o);
      FAIL("expected an error");
    } catch (const CommandError& e) {
      CHECK(e.category() == ErrorCategory::data);
    }
    o.dataset = ds;
    o.walkers = 0;
    try {
      run_fit(o);
      FAIL("expected an error");
    } catch (const CommandError& e) {
      CHECK(e.category() == ErrorCategory::config);
    }
    o.walkers = 2;
    o.proposal_scale = {1.0, 2.0};
    try {
      run_fit(o);
      FAIL("expected an error");
    } catch (const CommandError& e) {
      CHECK(e.category() == ErrorCategory::config);
    }
    o.proposal_scale = {0.01};
    o.backend = compute::BackendKind::remote;
    try {
      run_fit(o);
      FAIL("expected an error");
    } catch (const CommandError& e) {
      CHECK(e.category() == ErrorCategory::config);
    }
  }
}

TEST_CASE("command line") {
  qmc::testing::TempDir dir;
  const auto p = dir.path.string();
  CHECK(run_cli("dataset synth --clusters 2 --grid 8 --seed 4 --out " + p + "/d.bin") == 0);
  CHECK(fs::exists(dir.path / "d.bin"));
  CHECK(fs::exists(dir.path / "d.bin.truth.csv"));

  CHECK(run_cli("fit --dataset " + p + "/d.bin --walkers 4 --iterations 10 --backend local --out-dir " + p + "/fit") == 0);
  CHECK(line_count(slurp(dir.path / "fit" / "chain.csv")) == 41);
  CHECK(run_cli("fit --dataset " + p + "/d.bin --walkers 2 --iterations 5 --backend sim --proposal-scale 0.02 --exchange-period 2 --seed 3 --out-dir " + p + "/s1") == 0);
  CHECK(run_cli("fit --dataset " + p + "/d.bin --walkers 2 --iterations 5 --backend sim --proposal-scale 0.02 --exchange-period 2 --seed 3 --out-dir " + p + "/s2") == 0);
  CHECK(slurp(dir.path / "s1" / "chain.csv") == slurp(dir.path / "s2" / "chain.csv"));

  CHECK(run_cli("fit --dataset " + p + "/nope.bin --out-dir " + p + "/x") == 2);
  CHECK(run_cli("fit --dataset " + p + "/d.bin --backend aws --out-dir " + p + "/x") == 1);
  CHECK(run_cli("fit --dataset " + p + "/d.bin --proposal-scale 1,x --out-dir " + p + "/x") == 1);
  CHECK(run_cli("fit --dataset " + p + "/d.bin --backend remote --remote-addr 127.0.0.1:1 --out-dir " + p + "/x") == 3);
  CHECK(run_cli("fit --walkers 3") == 1);

  CHECK(run_cli("bench overhead --n 250,500 --tau 7 --c0 3 --cold-start 2 --warm 0.05 --jitter 0 --duration 100 --seed 1 --out " + p + "/o.csv") == 0);
  const auto o = slurp(dir.path / "o.csv");
  CHECK(o.rfind("n_parallel,overhead_s,overhead_ratio,seed\n", 0) == 0);
  CHECK(line_count(o) == 3);
  CHECK(run_cli("bench overhead --n 10 --tau 0 --out " + p + "/bad.csv") == 1);
  CHECK(run_cli("bench overhead --n 10 --ratio-reference single --out " + p + "/s.csv") == 0);

  CHECK(run_cli("bench timeline --walkers 2,4 --iterations 8 --duration 10 --seed 1 --out-dir " + p + "/tl") == 0);
  CHECK(line_count(slurp(dir.path / "tl" / "summary.csv")) == 3);
  CHECK(line_count(slurp(dir.path / "tl" / "timeline_w4.csv")) == 33);
}
