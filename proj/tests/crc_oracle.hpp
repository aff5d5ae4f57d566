#pragma once

// Test-only CRC oracle: plain polynomial long division over the augmented
// message, one bit at a time. Shares nothing with the table-driven engine.

#include <cstdint>
#include <vector>

namespace oracle {

/// Remainder of (init * x^L + M(x) * x^32) mod G, L = bit length of M, with G
/// rebuilt from Koopman notation (x^32 implicit high term, +1 implicit low).
inline std::uint32_t crc32_long_division(std::uint32_t koopman, const std::uint8_t* data, std::size_t len,
                                         std::uint32_t init = 0xffffffffu) {
  const std::uint64_t g = (std::uint64_t{1} << 32) | ((std::uint64_t{koopman} << 1) & 0xffffffffu) | 1u;
  std::vector<std::uint8_t> bits;
  bits.reserve(len * 8 + 32);
  for (std::size_t i = 0; i < len; ++i) {
    for (int b = 7; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((data[i] >> b) & 1u));
  }
  bits.insert(bits.end(), 32, 0);
  for (int i = 0; i < 32; ++i) bits[static_cast<std::size_t>(i)] ^= static_cast<std::uint8_t>((init >> (31 - i)) & 1u);

  std::uint64_t rem = 0;
  for (std::uint8_t bit : bits) {
    rem = (rem << 1) | bit;
    if (rem & (std::uint64_t{1} << 32)) rem ^= g;
  }
  return static_cast<std::uint32_t>(rem);
}

template <typename Container>
std::uint32_t crc32(std::uint32_t koopman, const Container& c) {
  return crc32_long_division(koopman, reinterpret_cast<const std::uint8_t*>(c.data()), c.size());
}

}  // namespace oracle
