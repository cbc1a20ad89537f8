#include <qmc/mcmc/walker.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmc::mcmc {

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

} // namespace

WalkerRng::WalkerRng(std::uint64_t seed, std::uint64_t stream) : engine_(seeded(seed, stream)) {}

StepResult mh_step(const WalkerState& state, std::vector<double> proposal,
                   double proposed_log_post, double u) {
  StepResult r{state, false};
  // NaN differences (both -inf) compare false and reject.
  if (std::log(u) < proposed_log_post - state.log_post) {
    r.accepted = true;
    r.state.position = std::move(proposal);
    r.state.log_post = proposed_log_post;
  }
  ++r.state.iteration;
  r.state.pending_msg.reset();
  return r;
}

std::vector<double> propose(const WalkerState& state, std::span<const double> proposal_scale,
                            WalkerRng& rng) {
  std::vector<double> out(state.position);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = proposal_scale.size() == 1 ? proposal_scale[0] : proposal_scale[i];
    out[i] += s * rng.normal();
  }
  return out;
}

std::vector<std::size_t> exchange_step(std::vector<WalkerState>& states, std::mt19937_64& rng) {
  for (const auto& s : states)
    if (s.pending_msg)
      throw PendingRequestError("walker " + std::to_string(s.walker_id) +
                                " has a request in flight");
  std::vector<std::size_t> order(states.size());
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with an explicit draw so the permutation is reproducible
  // across standard library implementations.
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  std::vector<std::size_t> perm(states.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t p = 0; p + 1 < order.size(); p += 2) {
    const std::size_t a = order[p];
    const std::size_t b = order[p + 1];
    std::swap(states[a].position, states[b].position);
    std::swap(states[a].log_post, states[b].log_post);
    std::swap(perm[a], perm[b]);
  }
  return perm;
}

} // namespace qmc::mcmc
