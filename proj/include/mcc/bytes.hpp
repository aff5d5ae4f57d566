#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcc {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

// Little-endian scalar access. Floats are moved as raw IEEE-754 bit patterns,
// so NaN payloads survive a store/load pair unchanged.

template <typename U>
inline void store_le(std::uint8_t* dst, U value) {
  static_assert(std::is_unsigned_v<U>);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    dst[i] = static_cast<std::uint8_t>(value >> (8 * i));
  }
}

template <typename U>
inline U load_le(const std::uint8_t* src) {
  static_assert(std::is_unsigned_v<U>);
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<U>(src[i]) << (8 * i));
  }
  return value;
}

inline void store_f32(std::uint8_t* dst, float v) { store_le(dst, std::bit_cast<std::uint32_t>(v)); }
inline void store_f64(std::uint8_t* dst, double v) { store_le(dst, std::bit_cast<std::uint64_t>(v)); }
inline float load_f32(const std::uint8_t* src) { return std::bit_cast<float>(load_le<std::uint32_t>(src)); }
inline double load_f64(const std::uint8_t* src) { return std::bit_cast<double>(load_le<std::uint64_t>(src)); }

/// Lowercase hex, no separators.
std::string to_hex(ByteView bytes);

/// Accepts upper or lower case; ignores whitespace, ':' and '_' separators and
/// an optional "0x" prefix. Returns nullopt on odd digit count or bad digits.
std::optional<Bytes> from_hex(std::string_view text);

/// Number of differing bits between two equal-length sequences; extra bytes
/// of the longer one count as fully different.
std::size_t hamming_distance(ByteView a, ByteView b);

}  // namespace mcc
