#include <doctest.h>

#include "support.hpp"

#include <qmc/compute/backend_model.hpp>
#include <qmc/compute/evaluator.hpp>
#include <qmc/compute/local_pool.hpp>
#include <qmc/compute/payload.hpp>
#include <qmc/compute/plane.hpp>
#include <qmc/compute/remote.hpp>
#include <qmc/compute/sim_engine.hpp>
#include <qmc/kernel/dataset.hpp>
#include <qmc/kernel/likelihood.hpp>
#include <qmc/kernel/synth.hpp>
#include <qmc/queue/wire.hpp>

#include <sys/socket.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <thread>

using namespace qmc;
using namespace qmc::compute;

namespace {

queue::Message request_message(std::string id, const LikelihoodRequest& req) {
  queue::Message m;
  m.msg_id = std::move(id);
  m.kind = queue::MessageKind::likelihood_request;
  m.walker_id = req.walker_id;
  m.iteration = req.iteration;
  m.payload = encode(req);
  m.reply_to = "output";
  return m;
}

LikelihoodRequest stub_request(std::uint32_t walker, std::string key = "stub:constant") {
  LikelihoodRequest r;
  r.walker_id = walker;
  r.params = {0.5 * walker};
  r.dataset_key = std::move(key);
  return r;
}

struct SimWave {
  std::vector<queue::Message> responses;
  std::vector<InvocationRecord> records;
};

SimWave run_sim_wave(std::size_t n, const BackendModel& model, std::uint64_t seed = 1) {
  auto clock = std::make_shared<queue::VirtualClock>();
  queue::QueueFabric fabric(clock);
  auto in = fabric.create_queue("input");
  auto out = fabric.create_queue("output");
  BackendConfig cfg;
  cfg.seed = seed;
  auto plane = attach_backend(fabric, in, out, cfg, model, nullptr);
  for (std::size_t i = 0; i < n; ++i)
    in->push(request_message("r" + std::to_string(i), stub_request(static_cast<std::uint32_t>(i))));
  SimWave w;
  while (auto m = out->pop(std::numeric_limits<double>::infinity()))
    w.responses.push_back(*m);
  w.records = plane->records();
  return w;
}

// Event-by-event reference scheduler, written independently of SimEngine:
// FIFO requests, a warm instance (freed at or before the candidate time) wins
// over provisioning, new instance k becomes available at origin + avail(k).
std::vector<InvocationRecord> brute_force_schedule(const std::vector<SimRequest>& reqs,
                                                   const BackendModel& m) {
  std::vector<std::size_t> order(reqs.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return reqs[a].arrival < reqs[b].arrival; });
  auto avail = [&](std::size_t k) -> double {
    if (m.max_concurrency && k > *m.max_concurrency)
      return std::numeric_limits<double>::infinity();
    if (k <= m.initial_capacity)
      return 0.0;
    const double ratio = static_cast<double>(k) / static_cast<double>(m.initial_capacity);
    if (m.ramp == Ramp::stepped)
      return m.scale_doubling_interval_s * std::ceil(std::log2(ratio) - 1e-12);
    return m.scale_doubling_interval_s * std::log2(ratio);
  };
  std::vector<double> free_at;
  std::vector<InvocationRecord> out(reqs.size());
  const double origin = reqs.empty() ? 0.0 : reqs[order.front()].arrival;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t idx : order) {
    const double ready = std::max(reqs[idx].arrival, prev);
    std::size_t best = free_at.size();
    for (std::size_t j = 0; j < free_at.size(); ++j)
      if (best == free_at.size() || free_at[j] < free_at[best])
        best = j;
    const double t_warm = best < free_at.size() ? std::max(ready, free_at[best])
                                                : std::numeric_limits<double>::infinity();
    const double t_new = std::max(ready, origin + avail(free_at.size() + 1));
    InvocationRecord& r = out[idx];
    r.dispatch_ts = reqs[idx].arrival;
    if (t_warm <= t_new) {
      r.start_ts = t_warm;
      r.cold = false;
      prev = t_warm;
    } else {
      best = free_at.size();
      free_at.push_back(0.0);
      r.start_ts = t_new + m.cold_start_s;
      r.cold = true;
      prev = t_new;
    }
    r.end_ts = r.start_ts + m.warm_invoke_s + reqs[idx].duration;
    free_at[best] = r.end_ts;
  }
  return out;
}

BackendModel zero_jitter() {
  BackendModel m;
  m.jitter_std_s = 0.0;
  return m;
}

struct KernelFixture {
  kernel::SyntheticData data;
  store::Bytes container;
  std::shared_ptr<store::MemoryObjectStore> store = std::make_shared<store::MemoryObjectStore>();
  std::string key = "datasets/four.bin";

  explicit KernelFixture(std::size_t clusters = 4, std::size_t grid = 32) {
    kernel::SynthConfig cfg;
    cfg.clusters = clusters;
    cfg.grid = grid;
    cfg.seed = 21;
    data = kernel::synthesize(cfg);
    container = kernel::encode_container(data.clusters);
    store->put(key, container);
  }

  std::vector<double> random_params(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 0.05);
    std::vector<double> p;
    for (const auto& t : data.truths)
      for (double v : t)
        p.push_back(v + n(rng));
    return p;
  }
};

} // namespace

TEST_CASE("backend model") {
  BackendModel m;
  CHECK(m.cold_start_s == 2.0);
  CHECK(m.warm_invoke_s == 0.05);
  CHECK(m.initial_capacity == 3);
  CHECK(m.scale_doubling_interval_s == 7.0);
  CHECK(m.likelihood_duration_s == 100.0);
  CHECK_FALSE(m.max_concurrency.has_value());
  CHECK_NOTHROW(m.validate());

  CHECK(m.instance_available_at(1) == 0.0);
  CHECK(m.instance_available_at(3) == 0.0);
  CHECK(m.instance_available_at(6) == doctest::Approx(7.0));
  CHECK(m.instance_available_at(12) == doctest::Approx(14.0));
  CHECK(m.capacity_at(0.0) == 3);
  CHECK(m.capacity_at(7.0) == 6);
  CHECK(m.capacity_at(14.0) == 12);

  BackendModel s = m;
  s.ramp = Ramp::stepped;
  CHECK(s.instance_available_at(4) == 7.0);
  CHECK(s.instance_available_at(6) == 7.0);
  CHECK(s.instance_available_at(7) == 14.0);
  // Stepped capacity is c0·2^⌊t/τ⌋.
  for (double t : {0.0, 3.0, 6.99, 7.0, 13.9, 14.0, 40.0})
    CHECK(s.capacity_at(t) == 3u << static_cast<unsigned>(std::floor(t / 7.0)));

  BackendModel cap = m;
  cap.max_concurrency = 5;
  CHECK(std::isinf(cap.instance_available_at(6)));
  CHECK(cap.capacity_at(1e9) == 5);

  CHECK(BackendModel::slow_ramp().scale_doubling_interval_s == 25.0);

  auto bad = m;
  bad.scale_doubling_interval_s = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m;
  bad.initial_capacity = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m;
  bad.cold_start_s = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = m;
  bad.max_concurrency = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("payloads") {
  LikelihoodRequest req{3, 9, {1.5, -2.0, 1e-300}, "datasets/x"};
  CHECK(decode_request(encode(req)) == req);
  LikelihoodResponse resp{3, 9, -123.456, true, 1.0, 2.5};
  CHECK(decode_response(encode(resp)) == resp);
  auto b = encode(req);
  b.pop_back();
  CHECK_THROWS_AS(decode_request(b), PayloadError);
  auto t = encode(resp);
  t.push_back(0);
  CHECK_THROWS_AS(decode_response(t), PayloadError);
  CHECK_THROWS_AS(decode_request(std::vector<std::uint8_t>{}), PayloadError);
}

TEST_CASE("stub likelihoods") {
  CHECK(stub_log_likelihood("stub:gaussian", std::vector<double>{1.0, 2.0}) == -2.5);
  CHECK(stub_log_likelihood("stub:constant", std::vector<double>{7.0}) == 0.0);
  CHECK_THROWS_AS(stub_log_likelihood("stub:nope", std::vector<double>{}), std::invalid_argument);
  auto task = make_task(stub_request(0), 0.25);
  CHECK(task.task_kind == TaskKind::stub);
  CHECK(task.stub_duration_s == 0.25);
  auto kt = make_task(LikelihoodRequest{0, 0, {}, "datasets/x"}, 0.25);
  CHECK(kt.task_kind == TaskKind::kernel);
  CHECK(kt.dataset_key == "datasets/x");
}

TEST_CASE("simulated: single stub invocation") {
  BackendModel m = zero_jitter();
  m.likelihood_duration_s = 1.0;
  const auto w = run_sim_wave(1, m);
  REQUIRE(w.responses.size() == 1);
  REQUIRE(w.records.size() == 1);
  const auto& r = w.records[0];
  CHECK(r.end_ts - r.dispatch_ts >= 1.0 + m.cold_start_s + m.warm_invoke_s);
  CHECK(r.cold);
  CHECK(w.responses[0].msg_id == "r0");
  CHECK(w.responses[0].kind == queue::MessageKind::likelihood_response);
  const auto resp = decode_response(w.responses[0].payload);
  CHECK(resp.log_likelihood == 0.0);
  CHECK(resp.cold);
  CHECK(resp.compute_end_ts == r.end_ts);
  CHECK(w.responses[0].enqueue_ts == r.end_ts);
}

TEST_CASE("simulated: zero requests") {
  const auto w = run_sim_wave(0, zero_jitter());
  CHECK(w.responses.empty());
  CHECK(w.records.empty());
}

TEST_CASE("simulated: capacity-sufficient and two-wave cases") {
  const BackendModel m = zero_jitter();
  const auto one = run_sim_wave(3, m);
  REQUIRE(one.records.size() == 3);
  for (const auto& r : one.records)
    CHECK(r.start_ts == m.cold_start_s);
  CHECK(overhead_of(one.records) == 0.0);

  const auto two = run_sim_wave(6, m);
  CHECK(overhead_of(two.records) == doctest::Approx(m.scale_doubling_interval_s).epsilon(1e-12));
  BackendModel stepped = m;
  stepped.ramp = Ramp::stepped;
  const auto two_stepped = run_sim_wave(6, stepped);
  CHECK(overhead_of(two_stepped.records) == m.scale_doubling_interval_s);
  std::size_t late = 0;
  for (const auto& r : two_stepped.records)
    late += r.start_ts == m.cold_start_s + 7.0;
  CHECK(late == 3);
}

TEST_CASE("simulated: 1000 requests follow the ramp closed form") {
  const BackendModel m = zero_jitter();
  const auto w = run_sim_wave(1000, m);
  REQUIRE(w.records.size() == 1000);
  const double closed = m.scale_doubling_interval_s * std::log2(1000.0 / 3.0);
  CHECK(std::abs(overhead_of(w.records) - closed) <= 0.25 * closed);
  CHECK(overhead_of(w.records) == doctest::Approx(closed).epsilon(1e-12));

  std::vector<SimRequest> reqs(1000, SimRequest{0.0, m.likelihood_duration_s});
  const auto oracle = brute_force_schedule(reqs, m);
  CHECK(overhead_of(oracle) == overhead_of(w.records));
}

TEST_CASE("simulated schedule matches the brute-force scheduler") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    BackendModel m = zero_jitter();
    m.initial_capacity = 1 + rng() % 4;
    m.scale_doubling_interval_s = 0.5 + (rng() % 100) / 10.0;
    m.cold_start_s = (rng() % 30) / 10.0;
    m.ramp = trial % 3 == 0 ? Ramp::stepped : Ramp::continuous;
    if (trial % 4 == 0)
      m.max_concurrency = 2 + rng() % 10;
    std::vector<SimRequest> reqs;
    const std::size_t n = rng() % 150;
    std::uniform_real_distribution<double> arrive(0.0, 60.0);
    std::uniform_real_distribution<double> dur(0.0, 12.0);
    for (std::size_t i = 0; i < n; ++i)
      reqs.push_back({i % 5 == 0 ? 0.0 : std::round(arrive(rng) * 4) / 4, dur(rng)});
    const auto got = simulate(reqs, m, 7);
    const auto want = brute_force_schedule(reqs, m);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(got[i].start_ts == doctest::Approx(want[i].start_ts).epsilon(1e-12));
      CHECK(got[i].end_ts == doctest::Approx(want[i].end_ts).epsilon(1e-12));
      CHECK(got[i].cold == want[i].cold);
    }
  }
}

TEST_CASE("simulated records respect causality") {
  BackendModel m;
  m.jitter_std_s = 0.5;
  const auto w = run_sim_wave(300, m, 4);
  std::set<std::string> workers;
  for (const auto& r : w.records) {
    CHECK(r.dispatch_ts <= r.start_ts);
    CHECK(r.start_ts <= r.end_ts);
    if (r.cold)
      CHECK(r.start_ts - r.dispatch_ts >= m.cold_start_s);
    workers.insert(r.worker_id);
  }
  // Enough instances are provisioned for everyone; nobody waits for reuse.
  CHECK(workers.size() == 300);
  // Busy periods on one instance never overlap.
  std::vector<SimRequest> reqs;
  for (int i = 0; i < 50; ++i)
    reqs.push_back({i * 0.3, 2.0});
  auto recs = simulate(reqs, m, 2);
  std::map<std::string, std::vector<std::pair<double, double>>> by_worker;
  for (const auto& r : recs)
    by_worker[r.worker_id].push_back({r.start_ts, r.end_ts});
  for (auto& [id, spans] : by_worker) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
      CHECK(spans[i].first >= spans[i - 1].second);
  }
}

TEST_CASE("simulated overhead doubles by one tau") {
  const BackendModel m = zero_jitter();
  for (std::size_t n : {24, 50, 250, 1000, 2000}) {
    const double a = overhead_of(run_sim_wave(n, m).records);
    const double b = overhead_of(run_sim_wave(2 * n, m).records);
    CHECK(std::abs((b - a) - m.scale_doubling_interval_s) < 1e-9);
  }
  // Monotone in n.
  double prev = 0.0;
  for (std::size_t n = 1; n < 200; n += 7) {
    const double o = overhead_of(run_sim_wave(n, m).records);
    CHECK(o >= prev);
    prev = o;
  }
}

TEST_CASE("simulated backend is deterministic") {
  BackendModel m;
  m.jitter_std_s = 0.5;
  const auto a = run_sim_wave(200, m, 17);
  const auto b = run_sim_wave(200, m, 17);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].msg_id == b.records[i].msg_id);
    CHECK(a.records[i].worker_id == b.records[i].worker_id);
    CHECK(a.records[i].start_ts == b.records[i].start_ts);
    CHECK(a.records[i].end_ts == b.records[i].end_ts);
  }
  const auto c = run_sim_wave(200, m, 18);
  bool differs = false;
  for (std::size_t i = 0; i < a.records.size(); ++i)
    differs |= a.records[i].end_ts != c.records[i].end_ts;
  CHECK(differs);
}

TEST_CASE("simulated responses form a bijection with requests") {
  const auto w = run_sim_wave(500, zero_jitter());
  std::set<std::string> ids;
  for (const auto& m : w.responses)
    ids.insert(m.msg_id);
  CHECK(ids.size() == 500);
  for (int i = 0; i < 500; ++i)
    CHECK(ids.count("r" + std::to_string(i)) == 1);
  // Arrivals are stamped in virtual time order.
  for (std::size_t i = 1; i < w.responses.size(); ++i)
    CHECK(w.responses[i - 1].enqueue_ts <= w.responses[i].enqueue_ts);
}

TEST_CASE("attach_backend validates its configuration") {
  auto vclock = std::make_shared<queue::VirtualClock>();
  queue::QueueFabric vf(vclock);
  auto vin = vf.create_queue("in");
  auto vout = vf.create_queue("out");
  BackendModel bad;
  bad.scale_doubling_interval_s = -1;
  CHECK_THROWS_AS(attach_backend(vf, vin, vout, {}, bad, nullptr), ConfigError);

  queue::QueueFabric wf(std::make_shared<queue::WallClock>());
  auto win = wf.create_queue("in");
  auto wout = wf.create_queue("out");
  CHECK_THROWS_AS(attach_backend(wf, win, wout, {}, BackendModel{}, nullptr), ConfigError);
  BackendConfig local;
  local.kind = BackendKind::local;
  CHECK_THROWS_AS(attach_backend(vf, vin, vout, local, BackendModel{}, nullptr), ConfigError);
  BackendConfig remote;
  remote.kind = BackendKind::remote;
  remote.remote_addr = "nonsense";
  CHECK_THROWS_AS(attach_backend(wf, win, wout, remote, BackendModel{}, nullptr), ConfigError);

  CHECK(parse_backend("sim") == BackendKind::simulated);
  CHECK(parse_backend("local") == BackendKind::local);
  CHECK(parse_backend("remote") == BackendKind::remote);
  CHECK_THROWS_AS(parse_backend("aws"), ConfigError);
  CHECK(to_string(BackendKind::simulated) == "sim");
}

TEST_CASE("simulated backend reports unknown datasets as errors") {
  KernelFixture fx(1, 8);
  auto clock = std::make_shared<queue::VirtualClock>();
  queue::QueueFabric fabric(clock);
  auto in = fabric.create_queue("input");
  auto out = fabric.create_queue("output");
  auto plane = attach_backend(fabric, in, out, {}, zero_jitter(), fx.store);
  in->push(request_message("good", LikelihoodRequest{0, 0, fx.random_params(1), fx.key}));
  in->push(request_message("bad", LikelihoodRequest{1, 0, {1, 0, 0, 0}, "datasets/missing"}));
  std::map<std::string, queue::Message> got;
  while (auto m = out->pop(1e9))
    got[m->msg_id] = *m;
  REQUIRE(got.size() == 2);
  CHECK(got["good"].kind == queue::MessageKind::likelihood_response);
  auto err = queue::parse_error(got["bad"]);
  REQUIRE(err);
  CHECK(err->code == "dataset_not_found");
}

TEST_CASE("evaluator caches parsed datasets") {
  KernelFixture fx(2, 8);
  Evaluator ev(fx.store);
  WorkerTask t = make_task(LikelihoodRequest{0, 0, fx.random_params(2), fx.key}, 0.0);
  const double a = ev.evaluate(t);
  CHECK(ev.cached_datasets() == 1);
  CHECK(ev.evaluate(t) == a);
  CHECK(ev.cached_datasets() == 1);
  CHECK(a == kernel::evaluate(t.request.params, fx.data.clusters));
  WorkerTask missing = t;
  missing.dataset_key = missing.request.dataset_key = "nope";
  CHECK_THROWS_AS(ev.evaluate(missing), DatasetNotFoundError);
}

TEST_CASE("local pool") {
  KernelFixture fx(2, 16);
  auto clock = std::make_shared<queue::WallClock>();

  SUBCASE("stub smoke") {
    LocalWorkerPool pool(2, fx.store, clock);
    const auto t0 = std::chrono::steady_clock::now();
    auto f = pool.submit(make_task(stub_request(3, "stub:gaussian"), 0.01));
    const auto r = f.get();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    CHECK(r.walker_id == 3);
    CHECK(r.log_likelihood == -0.5 * 1.5 * 1.5);
    CHECK(dt.count() >= 0.01);
    CHECK(dt.count() < 1.0);
    CHECK(r.cold);
    CHECK(r.compute_end_ts >= r.compute_start_ts);
  }
  SUBCASE("kernel task equals in-process evaluation") {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto params = fx.random_params(s);
      const auto r = local_pool_execute(make_task(LikelihoodRequest{0, 0, params, fx.key}, 0.0), 2, fx.store);
      const double direct = kernel::evaluate(params, fx.data.clusters);
      CHECK(std::abs(r.log_likelihood - direct) <= 1e-12 * std::abs(direct));
    }
  }
  SUBCASE("pigeonhole bound") {
    LocalWorkerPool pool(4, fx.store, clock);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::future<LikelihoodResponse>> fs;
    for (int i = 0; i < 16; ++i)
      fs.push_back(pool.submit(make_task(stub_request(i), 0.1)));
    for (auto& f : fs)
      f.get();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    CHECK(dt.count() >= 0.4);
  }
  SUBCASE("failures surface, once") {
    LocalWorkerPool pool(2, fx.store, clock);
    auto missing = pool.submit(make_task(LikelihoodRequest{0, 0, {1, 0, 0, 0}, "datasets/none"}, 0));
    CHECK_THROWS_AS(missing.get(), DatasetNotFoundError);
    auto bad_shape = pool.submit(make_task(LikelihoodRequest{0, 0, {1, 0, 0}, fx.key}, 0));
    CHECK_THROWS_AS(bad_shape.get(), WorkerCrashError);
    // The pool keeps working afterwards.
    CHECK(pool.submit(make_task(stub_request(1), 0)).get().walker_id == 1);
    pool.shutdown();
    CHECK_THROWS(pool.submit(make_task(stub_request(1), 0)));
  }
  SUBCASE("cold on first use only per worker") {
    LocalWorkerPool pool(1, fx.store, clock);
    CHECK(pool.submit(make_task(stub_request(0), 0)).get().cold);
    CHECK_FALSE(pool.submit(make_task(stub_request(0), 0)).get().cold);
  }
}

TEST_CASE("local backend through queues") {
  KernelFixture fx(2, 16);
  queue::QueueFabric fabric(std::make_shared<queue::WallClock>());
  auto in = fabric.create_queue("input");
  auto out = fabric.create_queue("output");
  BackendConfig cfg;
  cfg.kind = BackendKind::local;
  cfg.pool_size = 3;
  auto plane = attach_backend(fabric, in, out, cfg, BackendModel{}, fx.store);
  std::map<std::string, double> expect;
  for (int i = 0; i < 12; ++i) {
    const auto p = fx.random_params(100 + i);
    expect["k" + std::to_string(i)] = kernel::evaluate(p, fx.data.clusters);
    in->push(request_message("k" + std::to_string(i), LikelihoodRequest{std::uint32_t(i), 0, p, fx.key}));
  }
  in->push(request_message("missing", LikelihoodRequest{0, 0, {1, 0, 0, 0}, "x"}));
  std::map<std::string, queue::Message> got;
  while (got.size() < 13) {
    auto m = out->pop(10.0);
    REQUIRE(m);
    CHECK(got.count(m->msg_id) == 0);
    got[m->msg_id] = *m;
  }
  for (auto& [id, v] : expect)
    CHECK(decode_response(got[id].payload).log_likelihood == v);
  CHECK(queue::parse_error(got["missing"])->code == "dataset_not_found");
  const auto recs = plane->records();
  CHECK(recs.size() == 13);
  plane->shutdown();
}

TEST_CASE("endpoint parsing") {
  auto e = Endpoint::parse("127.0.0.1:8080");
  CHECK(e.host == "127.0.0.1");
  CHECK(e.port == 8080);
  CHECK(e.str() == "127.0.0.1:8080");
  CHECK_THROWS_AS(Endpoint::parse("nohost"), ConfigError);
  CHECK_THROWS_AS(Endpoint::parse("h:99999"), ConfigError);
  CHECK_THROWS_AS(Endpoint::parse("h:abc"), ConfigError);
  CHECK_THROWS_AS(Endpoint::parse(":80"), ConfigError);
}

namespace {

struct ServerFixture {
  qmc::testing::TempDir dir{"qmc-remote"};
  KernelFixture fx;
  std::unique_ptr<RemoteWorkerServer> server;
  std::thread loop;
  Endpoint ep;

  ServerFixture() : fx(4, 32) {
    store::DiskObjectStore disk(dir.path);
    disk.put(fx.key, fx.container);
    server = std::make_unique<RemoteWorkerServer>("127.0.0.1:0", dir.path);
    ep = {"127.0.0.1", server->start()};
    loop = std::thread([this] { server->serve(); });
  }
  ~ServerFixture() {
    server->stop();
    loop.join();
  }
};

} // namespace

TEST_CASE("remote worker") {
  ServerFixture sf;

  SUBCASE("request frame gets a response with the same id") {
    RemoteClient client(sf.ep);
    const auto params = sf.fx.random_params(5);
    const auto reply = client.call(request_message("echo-me", LikelihoodRequest{2, 7, params, sf.fx.key}));
    CHECK(reply.msg_id == "echo-me");
    CHECK(reply.kind == queue::MessageKind::likelihood_response);
    const auto r = decode_response(reply.payload);
    CHECK(r.walker_id == 2);
    CHECK(r.iteration == 7);
    const double direct = kernel::evaluate(params, sf.fx.data.clusters);
    CHECK(std::abs(r.log_likelihood - direct) <= 1e-12 * std::abs(direct));
    // Same connection, second request.
    const auto again = client.call(request_message("second", LikelihoodRequest{2, 8, params, sf.fx.key}));
    CHECK(again.msg_id == "second");
    CHECK_FALSE(decode_response(again.payload).cold);
  }
  SUBCASE("missing dataset is an error frame, connection stays usable") {
    RemoteClient client(sf.ep);
    const auto reply = client.call(request_message("m1", LikelihoodRequest{0, 0, {1, 0, 0, 0}, "nope"}));
    CHECK(reply.msg_id == "m1");
    REQUIRE(queue::parse_error(reply));
    CHECK(queue::parse_error(reply)->code == "dataset_not_found");
    const auto ok = client.call(request_message("m2", stub_request(1, "stub:gaussian")));
    CHECK(ok.kind == queue::MessageKind::likelihood_response);
  }
  SUBCASE("wrong kind and bad payload") {
    RemoteClient client(sf.ep);
    auto m = request_message("k", stub_request(0));
    m.kind = queue::MessageKind::control;
    CHECK(queue::parse_error(client.call(m))->code == "bad_request");
    auto p = request_message("p", stub_request(0));
    p.payload = {1, 2, 3};
    CHECK(queue::parse_error(client.call(p))->code == "bad_payload");
  }
  SUBCASE("truncated frame gets an error frame and a closed connection") {
    Socket s = connect_to(sf.ep);
    const auto frame = queue::encode_frame(request_message("t", stub_request(0)));
    write_all(s.fd(), frame.data(), frame.size() / 2);
    ::shutdown(s.fd(), SHUT_WR);
    auto r = read_frame(s.fd());
    REQUIRE(r.status == FrameStatus::ok);
    auto err = queue::parse_error(*r.message);
    REQUIRE(err);
    CHECK(err->code == "malformed_frame");
    CHECK(read_frame(s.fd()).status == FrameStatus::closed);
  }
  SUBCASE("garbage body") {
    Socket s = connect_to(sf.ep);
    const std::string body = "{not json";
    auto h = queue::frame_header(static_cast<std::uint32_t>(body.size()));
    write_all(s.fd(), h.data(), h.size());
    write_all(s.fd(), reinterpret_cast<const std::uint8_t*>(body.data()), body.size());
    auto r = read_frame(s.fd());
    REQUIRE(r.status == FrameStatus::ok);
    CHECK(queue::parse_error(*r.message)->code == "malformed_frame");
    CHECK(read_frame(s.fd()).status == FrameStatus::closed);
  }
  SUBCASE("oversized length") {
    Socket s = connect_to(sf.ep);
    auto h = queue::frame_header(queue::max_frame_bytes + 1);
    write_all(s.fd(), h.data(), h.size());
    auto r = read_frame(s.fd());
    REQUIRE(r.status == FrameStatus::ok);
    CHECK(queue::parse_error(*r.message)->code == "malformed_frame");
  }
  SUBCASE("concurrent connections") {
    std::vector<std::thread> ts;
    std::atomic<int> ok{0};
    for (int c = 0; c < 6; ++c)
      ts.emplace_back([&, c] {
        RemoteClient client(sf.ep);
        for (int i = 0; i < 10; ++i) {
          const auto id = "c" + std::to_string(c) + "-" + std::to_string(i);
          if (client.call(request_message(id, stub_request(c, "stub:gaussian"))).msg_id == id)
            ++ok;
        }
      });
    for (auto& t : ts)
      t.join();
    CHECK(ok == 60);
  }
}

TEST_CASE("remote backend through queues and cross-backend equality") {
  ServerFixture sf;
  queue::QueueFabric fabric(std::make_shared<queue::WallClock>());
  auto in = fabric.create_queue("input");
  auto out = fabric.create_queue("output");
  BackendConfig cfg;
  cfg.kind = BackendKind::remote;
  cfg.remote_addr = sf.ep.str();
  cfg.pool_size = 2;
  auto plane = attach_backend(fabric, in, out, cfg, BackendModel{}, nullptr);
  std::vector<std::vector<double>> params;
  for (int i = 0; i < 5; ++i) {
    params.push_back(sf.fx.random_params(500 + i));
    in->push(request_message("x" + std::to_string(i), LikelihoodRequest{std::uint32_t(i), 0, params.back(), sf.fx.key}));
  }
  std::map<std::string, double> remote;
  while (remote.size() < 5) {
    auto m = out->pop(20.0);
    REQUIRE(m);
    remote[m->msg_id] = decode_response(m->payload).log_likelihood;
  }
  for (int i = 0; i < 5; ++i) {
    const double direct = kernel::evaluate(params[i], sf.fx.data.clusters);
    const double local =
        local_pool_execute(make_task(LikelihoodRequest{0, 0, params[i], sf.fx.key}, 0), 2, sf.fx.store)
            .log_likelihood;
    CHECK(std::abs(remote["x" + std::to_string(i)] - direct) <= 1e-12 * std::abs(direct));
    CHECK(std::abs(local - direct) <= 1e-12 * std::abs(direct));
  }
  CHECK(plane->records().size() == 5);
  plane->shutdown();
}

TEST_CASE("remote backend failures") {
  SUBCASE("nothing listening") {
    std::uint16_t port = 0;
    {
      qmc::testing::TempDir d;
      RemoteWorkerServer s("127.0.0.1:0", d.path);
      port = s.start();
      s.stop();
    }
    queue::QueueFabric fabric(std::make_shared<queue::WallClock>());
    auto in = fabric.create_queue("input");
    auto out = fabric.create_queue("output");
    BackendConfig cfg;
    cfg.kind = BackendKind::remote;
    cfg.remote_addr = "127.0.0.1:" + std::to_string(port);
    CHECK_THROWS_AS(attach_backend(fabric, in, out, cfg, BackendModel{}, nullptr), RemoteError);
  }
  SUBCASE("server goes away mid-run") {
    auto sf = std::make_unique<ServerFixture>();
    queue::QueueFabric fabric(std::make_shared<queue::WallClock>());
    auto in = fabric.create_queue("input");
    auto out = fabric.create_queue("output");
    BackendConfig cfg;
    cfg.kind = BackendKind::remote;
    cfg.remote_addr = sf->ep.str();
    cfg.pool_size = 1;
    auto plane = attach_backend(fabric, in, out, cfg, BackendModel{}, nullptr);
    in->push(request_message("before", stub_request(0)));
    auto first = out->pop(10.0);
    REQUIRE(first);
    CHECK(first->kind == queue::MessageKind::likelihood_response);
    sf.reset();
    in->push(request_message("after", stub_request(0)));
    auto m = out->pop(10.0);
    REQUIRE(m);
    CHECK(m->msg_id == "after");
    REQUIRE(queue::parse_error(*m));
    CHECK(queue::parse_error(*m)->code == "backend");
    plane->shutdown();
  }
}
