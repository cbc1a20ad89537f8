#include <qmc/store/digest.hpp>

#include <charconv>
#include <stdexcept>

namespace qmc::store {

std::uint64_t content_digest(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string to_hex(std::uint64_t digest) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[digest & 0xf];
    digest >>= 4;
  }
  return out;
}

std::uint64_t from_hex(std::string_view hex) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
  if (ec != std::errc() || ptr != hex.data() + hex.size())
    throw std::invalid_argument("bad hex digest");
  return v;
}

} // namespace qmc::store
