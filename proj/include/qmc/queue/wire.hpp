#pragma once

// Serialized message format shared by trace dumps and the remote worker
// protocol: one flat JSON object per line with a fixed key order, and
// 4-byte big-endian length-prefixed frames around it on byte streams.

#include <qmc/queue/message.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace qmc::queue {

class WireFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string base64_encode(const Bytes& bytes);
Bytes base64_decode(std::string_view text);

/// Single line, no trailing newline.
std::string serialize(const Message& m);
/// Accepts an optional trailing newline. Rejects unknown, missing or
/// reordered keys.
Message deserialize(std::string_view line);

Bytes encode_frame(const Message& m);
Bytes frame_header(std::uint32_t length);
std::uint32_t parse_frame_header(const std::uint8_t* four_bytes);

inline constexpr std::uint32_t max_frame_bytes = 64u << 20;

} // namespace qmc::queue
