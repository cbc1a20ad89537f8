#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmc::mcmc {

struct WalkerState {
  std::uint32_t walker_id = 0;
  std::vector<double> position;
  double log_post = 0.0;
  std::uint64_t iteration = 0;
  std::uint64_t rng_stream = 0;
  std::optional<std::string> pending_msg;

  friend bool operator==(const WalkerState&, const WalkerState&) = default;
};

/// Independent random stream per walker, derived from the run seed.
class WalkerRng {
public:
  WalkerRng(std::uint64_t seed, std::uint64_t stream);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

struct StepResult {
  WalkerState state;
  bool accepted = false;
};

/// Metropolis acceptance for a symmetric proposal: accept iff
/// ln(u) < proposed_log_post - state.log_post. The iteration counter advances
/// either way and any pending request is cleared.
StepResult mh_step(const WalkerState& state, std::vector<double> proposal,
                   double proposed_log_post, double u);

/// Gaussian random-walk proposal around the current position.
std::vector<double> propose(const WalkerState& state, std::span<const double> proposal_scale,
                            WalkerRng& rng);

class PendingRequestError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Pairs walkers uniformly at random and swaps position and log_post within
/// every pair; walker_id, rng_stream and iteration stay with their slot.
/// Returns the permutation applied: slot i now holds the chain state that
/// was in slot perm[i].
std::vector<std::size_t> exchange_step(std::vector<WalkerState>& states, std::mt19937_64& rng);

} // namespace qmc::mcmc
