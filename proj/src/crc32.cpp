#include "mcc/crc32.hpp"

namespace mcc {

namespace {
constexpr Crc32 kFrameCrc{kFramePolynomial};
constexpr Crc32 kPositionCrc{kPositionPolynomial};
}  // namespace

const Crc32& frame_crc() { return kFrameCrc; }
const Crc32& position_crc() { return kPositionCrc; }

std::uint32_t crc32_koopman(std::uint32_t koopman_polynomial, ByteView data) {
  if (koopman_polynomial == kFramePolynomial) return kFrameCrc.compute(data);
  if (koopman_polynomial == kPositionPolynomial) return kPositionCrc.compute(data);
  return Crc32{koopman_polynomial}.compute(data);
}

}  // namespace mcc
