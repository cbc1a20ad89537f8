#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qmc::queue {

enum class MessageKind { likelihood_request, likelihood_response, control };

std::string_view to_string(MessageKind kind);
std::optional<MessageKind> parse_kind(std::string_view text);

using Bytes = std::vector<std::uint8_t>;

struct Message {
  std::string msg_id;
  MessageKind kind = MessageKind::control;
  std::uint64_t walker_id = 0;
  std::uint64_t iteration = 0;
  Bytes payload;
  double enqueue_ts = 0.0; // stamped by the queue on push
  std::string reply_to;

  friend bool operator==(const Message&, const Message&) = default;
};

// Control payloads of the form "ERR:<code>:<detail>".
Message make_error(std::string msg_id, std::string_view code, std::string_view detail);

struct ErrorInfo {
  std::string code;
  std::string detail;
};

std::optional<ErrorInfo> parse_error(const Message& m);

} // namespace qmc::queue
