#include <qmc/compute/payload.hpp>
#include <qmc/mcmc/coordinator.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace qmc::mcmc {

void ChainConfig::validate(std::size_t dim) const {
  if (n_walkers == 0)
    throw std::invalid_argument("n_walkers must be positive");
  if (n_iterations == 0)
    throw std::invalid_argument("n_iterations must be positive");
  if (proposal_scale.size() != 1 && proposal_scale.size() != dim)
    throw std::invalid_argument("proposal_scale needs 1 or " + std::to_string(dim) + " entries");
  for (double s : proposal_scale)
    if (!(s > 0.0))
      throw std::invalid_argument("proposal_scale entries must be positive");
  if (exchange_period && *exchange_period == 0)
    throw std::invalid_argument("exchange_period must be positive when enabled");
}

double ChainConfig::scale(std::size_t coordinate) const {
  return proposal_scale.size() == 1 ? proposal_scale[0] : proposal_scale[coordinate];
}

namespace {

std::string request_id(std::size_t walker, std::size_t iteration) {
  return "w" + std::to_string(walker) + "-i" + std::to_string(iteration);
}

FailureKind failure_kind(const std::string& code) {
  if (code == "dataset_not_found" || code == "bad_payload")
    return FailureKind::data;
  return FailureKind::backend;
}

} // namespace

ChainOutput run_chains(const ChainConfig& config, const Target& target,
                       std::span<const std::vector<double>> initial_positions,
                       const compute::ComputePlane& plane, const queue::QueueHandle& input_q,
                       const queue::QueueHandle& output_q, const RunOptions& options) {
  config.validate(target.dim);
  const std::size_t W = config.n_walkers;
  const std::size_t N = config.n_iterations;
  const std::size_t D = target.dim;
  if (initial_positions.size() != W)
    throw std::invalid_argument("need one initial position per walker");
  for (const auto& p : initial_positions)
    if (p.size() != D)
      throw std::invalid_argument("initial position has the wrong dimension");

  auto log_prior = [&](std::span<const double> x) {
    return target.log_prior ? target.log_prior(x) : 0.0;
  };
  auto shipped = [&](std::span<const double> x) {
    return target.likelihood_params ? target.likelihood_params(x)
                                    : std::vector<double>(x.begin(), x.end());
  };

  ChainOutput out;
  out.n_walkers = W;
  out.n_iterations = N;
  out.dim = D;
  out.samples.assign(W * N * D, std::numeric_limits<double>::quiet_NaN());
  out.log_posts.assign(W * N, std::numeric_limits<double>::quiet_NaN());
  out.accepted.assign(W * N, 0);
  out.accept_counts.assign(W, 0);
  out.timeline.reserve(W * N);

  std::vector<WalkerState> states(W);
  std::vector<WalkerRng> rngs;
  rngs.reserve(W);
  for (std::size_t w = 0; w < W; ++w) {
    states[w].walker_id = static_cast<std::uint32_t>(w);
    states[w].position = initial_positions[w];
    states[w].log_post = -std::numeric_limits<double>::infinity();
    states[w].rng_stream = w;
    rngs.emplace_back(config.seed, w);
  }
  std::mt19937_64 exchange_rng(config.seed ^ 0xd1b54a32d192ed03ull);

  std::vector<std::vector<double>> proposals(W);
  std::vector<double> proposal_prior(W);
  std::vector<double> loglik(W);
  std::vector<char> received(W);
  std::vector<double> dispatch_ts(W);
  std::unordered_map<std::string, std::size_t> in_flight;

  for (std::size_t it = 0; it < N; ++it) {
    in_flight.clear();
    for (std::size_t w = 0; w < W; ++w) {
      proposals[w] = it == 0 ? states[w].position
                             : propose(states[w], config.proposal_scale, rngs[w]);
      proposal_prior[w] = log_prior(proposals[w]);

      compute::LikelihoodRequest req;
      req.walker_id = static_cast<std::uint32_t>(w);
      req.iteration = static_cast<std::uint32_t>(it);
      req.params = shipped(proposals[w]);
      req.dataset_key = target.dataset_key;

      queue::Message m;
      m.msg_id = request_id(w, it);
      m.kind = queue::MessageKind::likelihood_request;
      m.walker_id = w;
      m.iteration = it;
      m.payload = compute::encode(req);
      m.reply_to = output_q->name();
      states[w].pending_msg = m.msg_id;
      in_flight.emplace(m.msg_id, w);
      dispatch_ts[w] = input_q->push(std::move(m));
      ++out.requests_pushed;
    }

    std::fill(received.begin(), received.end(), 0);
    for (std::size_t got = 0; got < W; ++got) {
      std::optional<queue::Message> reply = output_q->pop(options.response_timeout_s);
      if (!reply) {
        out.failure = RunFailure{FailureKind::timeout,
                                 "missing " + std::to_string(W - got) + " responses at iteration " +
                                     std::to_string(it)};
        out.final_states = states;
        return out;
      }
      ++out.responses_consumed;
      auto slot = in_flight.find(reply->msg_id);
      if (slot == in_flight.end())
        throw DuplicateResponseError("response '" + reply->msg_id +
                                     "' matches no outstanding request");
      const std::size_t w = slot->second;
      if (received[w])
        throw DuplicateResponseError("second response for '" + reply->msg_id + "'");
      received[w] = 1;

      if (auto err = queue::parse_error(*reply)) {
        out.failure = RunFailure{failure_kind(err->code),
                                 "walker " + std::to_string(w) + ": " + err->code + ": " +
                                     err->detail};
        out.final_states = states;
        return out;
      }
      const compute::LikelihoodResponse resp = compute::decode_response(reply->payload);
      loglik[w] = resp.log_likelihood;

      TimelineRecord rec;
      rec.walker_id = static_cast<std::uint32_t>(w);
      rec.iteration = it;
      rec.dispatch_ts = dispatch_ts[w];
      rec.first_output = got == 0;
      rec.complete_ts = reply->enqueue_ts;
      rec.backend = plane.kind();
      out.timeline.push_back(rec);
    }

    for (std::size_t w = 0; w < W; ++w) {
      const double proposed = proposal_prior[w] + loglik[w];
      const double u = rngs[w].uniform();
      StepResult step = mh_step(states[w], std::move(proposals[w]), proposed, u);
      states[w] = std::move(step.state);
      if (step.accepted)
        ++out.accept_counts[w];
      out.accepted[w * N + it] = step.accepted ? 1 : 0;
      out.log_posts[w * N + it] = states[w].log_post;
      std::copy(states[w].position.begin(), states[w].position.end(),
                out.samples.begin() + static_cast<std::ptrdiff_t>((w * N + it) * D));
    }
    out.completed_iterations = it + 1;

    if (config.exchange_period && (it + 1) % *config.exchange_period == 0 && it + 1 < N)
      out.exchanges.push_back(exchange_step(states, exchange_rng));
  }
  out.final_states = std::move(states);
  return out;
}

} // namespace qmc::mcmc
