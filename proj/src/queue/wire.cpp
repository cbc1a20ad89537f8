#include <qmc/queue/wire.hpp>

#include <json.hpp>

#include <array>

namespace qmc::queue {

namespace {

constexpr std::string_view alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<const char*, 7> field_order = {
    "msg_id", "kind", "walker_id", "iteration", "reply_to", "enqueue_ts", "payload_b64"};

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z')
    return c - 'A';
  if (c >= 'a' && c <= 'z')
    return c - 'a' + 26;
  if (c >= '0' && c <= '9')
    return c - '0' + 52;
  if (c == '+')
    return 62;
  if (c == '/')
    return 63;
  return -1;
}

} // namespace

std::string base64_encode(const Bytes& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
  }
  std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    std::uint32_t v = bytes[i] << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (rest == 2) {
    std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0)
    throw WireFormatError("base64 length not a multiple of 4");
  Bytes out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      char c = text[i + j];
      if (c == '=') {
        // padding only in the last group, only at the end
        if (i + 4 != text.size() || j < 2)
          throw WireFormatError("misplaced base64 padding");
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0)
        throw WireFormatError("misplaced base64 padding");
      int d = decode_char(c);
      if (d < 0)
        throw WireFormatError("invalid base64 character");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2)
      out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1)
      out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::string serialize(const Message& m) {
  nlohmann::ordered_json j;
  j["msg_id"] = m.msg_id;
  j["kind"] = std::string(to_string(m.kind));
  j["walker_id"] = m.walker_id;
  j["iteration"] = m.iteration;
  j["reply_to"] = m.reply_to;
  j["enqueue_ts"] = m.enqueue_ts;
  j["payload_b64"] = base64_encode(m.payload);
  return j.dump();
}

Message deserialize(std::string_view line) {
  if (!line.empty() && line.back() == '\n')
    line.remove_suffix(1);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw WireFormatError(std::string("malformed message record: ") + e.what());
  }
  if (!j.is_object())
    throw WireFormatError("message record is not an object");
  if (j.size() != field_order.size())
    throw WireFormatError("message record has wrong number of keys");
  std::size_t idx = 0;
  for (const auto& [key, value] : j.items()) {
    if (key != field_order[idx])
      throw WireFormatError("unexpected key '" + key + "' at position " + std::to_string(idx));
    ++idx;
  }

  try {
    Message m;
    m.msg_id = j.at("msg_id").get<std::string>();
    auto kind = parse_kind(j.at("kind").get<std::string>());
    if (!kind)
      throw WireFormatError("unknown message kind");
    m.kind = *kind;
    if (!j.at("walker_id").is_number_unsigned() || !j.at("iteration").is_number_unsigned())
      throw WireFormatError("walker_id and iteration must be non-negative integers");
    m.walker_id = j.at("walker_id").get<std::uint64_t>();
    m.iteration = j.at("iteration").get<std::uint64_t>();
    m.reply_to = j.at("reply_to").get<std::string>();
    if (!j.at("enqueue_ts").is_number())
      throw WireFormatError("enqueue_ts must be a number");
    m.enqueue_ts = j.at("enqueue_ts").get<double>();
    m.payload = base64_decode(j.at("payload_b64").get<std::string>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw WireFormatError(std::string("bad field type: ") + e.what());
  }
}

Bytes frame_header(std::uint32_t length) {
  return {static_cast<std::uint8_t>(length >> 24), static_cast<std::uint8_t>(length >> 16),
          static_cast<std::uint8_t>(length >> 8), static_cast<std::uint8_t>(length)};
}

std::uint32_t parse_frame_header(const std::uint8_t* b) {
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

Bytes encode_frame(const Message& m) {
  std::string body = serialize(m);
  if (body.size() > max_frame_bytes)
    throw WireFormatError("message exceeds maximum frame size");
  Bytes out = frame_header(static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

} // namespace qmc::queue
