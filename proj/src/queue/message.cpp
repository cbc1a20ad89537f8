#include <qmc/queue/message.hpp>

namespace qmc::queue {

std::string_view to_string(MessageKind kind) {
  switch (kind) {
  case MessageKind::likelihood_request:
    return "likelihood_request";
  case MessageKind::likelihood_response:
    return "likelihood_response";
  case MessageKind::control:
    return "control";
  }
  return "control";
}

std::optional<MessageKind> parse_kind(std::string_view text) {
  if (text == "likelihood_request")
    return MessageKind::likelihood_request;
  if (text == "likelihood_response")
    return MessageKind::likelihood_response;
  if (text == "control")
    return MessageKind::control;
  return std::nullopt;
}

Message make_error(std::string msg_id, std::string_view code, std::string_view detail) {
  Message m;
  m.msg_id = std::move(msg_id);
  m.kind = MessageKind::control;
  std::string text = "ERR:";
  text.append(code);
  text.push_back(':');
  text.append(detail);
  m.payload.assign(text.begin(), text.end());
  return m;
}

std::optional<ErrorInfo> parse_error(const Message& m) {
  if (m.kind != MessageKind::control)
    return std::nullopt;
  std::string_view text(reinterpret_cast<const char*>(m.payload.data()), m.payload.size());
  if (!text.starts_with("ERR:"))
    return std::nullopt;
  text.remove_prefix(4);
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    return ErrorInfo{std::string(text), {}};
  return ErrorInfo{std::string(text.substr(0, colon)), std::string(text.substr(colon + 1))};
}

} // namespace qmc::queue
