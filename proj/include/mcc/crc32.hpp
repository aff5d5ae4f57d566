#pragma once

#include <array>
#include <cstdint>

#include "mcc/bytes.hpp"

namespace mcc {

/// Framing polynomial for every object (HD 8 over a 448-bit payload).
inline constexpr std::uint32_t kFramePolynomial = 0xf8c9140a;
/// Polynomial protecting latitude||longitude of the reported position (HD 9).
inline constexpr std::uint32_t kPositionPolynomial = 0x9d7f97d6;

inline constexpr std::uint32_t kCrcInit = 0xffffffff;

/// Koopman notation keeps x^32 and drops the implicit +1 term; the usual
/// "normal" form keeps +1 and drops x^32.
constexpr std::uint32_t koopman_to_normal(std::uint32_t koopman) {
  return (koopman << 1) | 1u;
}

/// Table-driven CRC-32: MSB first, init 0xFFFFFFFF, no reflection, no final xor.
class Crc32 {
 public:
  constexpr explicit Crc32(std::uint32_t koopman_polynomial)
      : koopman_(koopman_polynomial), table_(make_table(koopman_to_normal(koopman_polynomial))) {}

  constexpr std::uint32_t koopman_polynomial() const { return koopman_; }

  std::uint32_t compute(ByteView data) const { return update(kCrcInit, data); }

  /// Continues a running remainder; compute(a||b) == update(compute(a), b).
  std::uint32_t update(std::uint32_t crc, ByteView data) const {
    for (std::uint8_t b : data) {
      crc = (crc << 8) ^ table_[((crc >> 24) ^ b) & 0xffu];
    }
    return crc;
  }

 private:
  static constexpr std::array<std::uint32_t, 256> make_table(std::uint32_t normal) {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t r = i << 24;
      for (int bit = 0; bit < 8; ++bit) {
        r = (r & 0x80000000u) ? (r << 1) ^ normal : (r << 1);
      }
      t[i] = r;
    }
    return t;
  }

  std::uint32_t koopman_;
  std::array<std::uint32_t, 256> table_;
};

const Crc32& frame_crc();
const Crc32& position_crc();

/// Checksum under an arbitrary Koopman-notation polynomial. The two protocol
/// polynomials use prebuilt tables; anything else builds one per call.
std::uint32_t crc32_koopman(std::uint32_t koopman_polynomial, ByteView data);

}  // namespace mcc
