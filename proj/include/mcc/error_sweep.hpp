#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mcc/bytes.hpp"
#include "mcc/crc32.hpp"

namespace mcc::sweep {

/// data bytes followed by their 4-byte little-endian CRC.
struct Codeword {
  ByteView bytes;
  std::size_t data_bytes;
  const Crc32* crc;

  std::size_t bits() const { return bytes.size() * 8; }
  bool verifies() const;
};

struct SweepStats {
  std::uint64_t patterns = 0;
  std::uint64_t undetected = 0;
  /// patterns_by_weight[w] = number of weight-w patterns tried.
  std::vector<std::uint64_t> patterns_by_weight;
  /// Bit positions of the first undetected pattern seen (empty if none).
  std::vector<std::uint32_t> example_undetected;

  void merge(const SweepStats& other);
};

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Sorted bit positions of the index-th pattern of a random sweep; bit i is
/// byte i/8, mask 1 << (i%8). Shared by the parallel and serial paths so both
/// evaluate the same patterns.
std::vector<std::uint32_t> random_pattern(std::uint64_t seed, std::uint64_t index, std::size_t bits,
                                          unsigned min_weight, unsigned max_weight);

/// Every error pattern of exactly `weight` bits over the codeword. OpenMP
/// parallel over the lowest flipped bit.
SweepStats exhaustive(const Codeword& cw, unsigned weight);

/// `count` random patterns with weights uniform in [min_weight, max_weight].
SweepStats random(const Codeword& cw, unsigned min_weight, unsigned max_weight, std::uint64_t count,
                  std::uint64_t seed);

/// Single-threaded reference versions: lexicographic combination walk, fresh
/// copy of the codeword per pattern.
namespace serial {
SweepStats exhaustive(const Codeword& cw, unsigned weight);
SweepStats random(const Codeword& cw, unsigned min_weight, unsigned max_weight, std::uint64_t count,
                  std::uint64_t seed);
}  // namespace serial

}  // namespace mcc::sweep
