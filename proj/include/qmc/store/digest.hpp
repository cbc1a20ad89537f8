#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace qmc::store {

/// 64-bit FNV-1a.
std::uint64_t content_digest(std::span<const std::uint8_t> bytes);

std::string to_hex(std::uint64_t digest);
std::uint64_t from_hex(std::string_view hex);

} // namespace qmc::store
