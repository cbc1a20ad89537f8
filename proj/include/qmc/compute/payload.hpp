#pragma once

// Binary payloads carried inside queue messages (little-endian).

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmc::compute {

class PayloadError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct LikelihoodRequest {
  std::uint32_t walker_id = 0;
  std::uint32_t iteration = 0;
  std::vector<double> params;
  std::string dataset_key;

  friend bool operator==(const LikelihoodRequest&, const LikelihoodRequest&) = default;
};

struct LikelihoodResponse {
  std::uint32_t walker_id = 0;
  std::uint32_t iteration = 0;
  double log_likelihood = 0.0;
  bool cold = false;
  double compute_start_ts = 0.0;
  double compute_end_ts = 0.0;

  friend bool operator==(const LikelihoodResponse&, const LikelihoodResponse&) = default;
};

std::vector<std::uint8_t> encode(const LikelihoodRequest& r);
std::vector<std::uint8_t> encode(const LikelihoodResponse& r);

LikelihoodRequest decode_request(std::span<const std::uint8_t> bytes);
LikelihoodResponse decode_response(std::span<const std::uint8_t> bytes);

} // namespace qmc::compute
