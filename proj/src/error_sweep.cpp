#include "mcc/error_sweep.hpp"

#include <algorithm>
#include <stdexcept>

#include "mcc/rng.hpp"

namespace mcc::sweep {

namespace {

inline void flip(std::uint8_t* bytes, std::uint32_t bit) {
  bytes[bit >> 3] ^= static_cast<std::uint8_t>(1u << (bit & 7u));
}

inline bool verifies_raw(const std::uint8_t* bytes, std::size_t data_bytes, const Crc32& crc) {
  return crc.compute(ByteView(bytes, data_bytes)) == load_le<std::uint32_t>(bytes + data_bytes);
}

void check_codeword(const Codeword& cw) {
  if (cw.crc == nullptr || cw.bytes.size() != cw.data_bytes + 4) {
    throw std::invalid_argument("sweep: codeword must be data followed by a 4-byte CRC");
  }
  if (!cw.verifies()) throw std::invalid_argument("sweep: base codeword does not verify");
}

void record(SweepStats& s, unsigned weight, bool detected, const std::uint32_t* positions) {
  ++s.patterns;
  ++s.patterns_by_weight[weight];
  if (!detected) {
    if (s.undetected == 0) s.example_undetected.assign(positions, positions + weight);
    ++s.undetected;
  }
}

SweepStats empty_stats(unsigned max_weight) {
  SweepStats s;
  s.patterns_by_weight.assign(max_weight + 1, 0);
  return s;
}

}  // namespace

bool Codeword::verifies() const { return verifies_raw(bytes.data(), data_bytes, *crc); }

void SweepStats::merge(const SweepStats& other) {
  if (undetected == 0 && other.undetected != 0) example_undetected = other.example_undetected;
  patterns += other.patterns;
  undetected += other.undetected;
  if (patterns_by_weight.size() < other.patterns_by_weight.size()) {
    patterns_by_weight.resize(other.patterns_by_weight.size(), 0);
  }
  for (std::size_t w = 0; w < other.patterns_by_weight.size(); ++w) patterns_by_weight[w] += other.patterns_by_weight[w];
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::uint32_t> random_pattern(std::uint64_t seed, std::uint64_t index, std::size_t bits,
                                          unsigned min_weight, unsigned max_weight) {
  SplitMix64 rng(mix_seed(seed, index));
  const unsigned span = max_weight - min_weight + 1;
  const unsigned weight = min_weight + static_cast<unsigned>(rng.next() % span);
  std::vector<std::uint32_t> pos;
  pos.reserve(weight);
  while (pos.size() < weight) {
    const auto candidate = static_cast<std::uint32_t>(rng.next() % bits);
    if (std::find(pos.begin(), pos.end(), candidate) == pos.end()) pos.push_back(candidate);
  }
  std::sort(pos.begin(), pos.end());
  return pos;
}

SweepStats exhaustive(const Codeword& cw, unsigned weight) {
  check_codeword(cw);
  const auto bits = static_cast<std::int64_t>(cw.bits());
  if (weight == 0 || weight > cw.bits()) throw std::invalid_argument("sweep: weight out of range");

  SweepStats total = empty_stats(weight);
  const std::int64_t first_limit = bits - static_cast<std::int64_t>(weight) + 1;

#pragma omp parallel
  {
    SweepStats local = empty_stats(weight);
    Bytes work(cw.bytes.begin(), cw.bytes.end());
    std::vector<std::uint32_t> idx(weight);

#pragma omp for schedule(dynamic, 1) nowait
    for (std::int64_t first = 0; first < first_limit; ++first) {
      idx[0] = static_cast<std::uint32_t>(first);
      for (unsigned j = 1; j < weight; ++j) idx[j] = idx[j - 1] + 1;
      flip(work.data(), idx[0]);
      while (true) {
        for (unsigned j = 1; j < weight; ++j) flip(work.data(), idx[j]);
        record(local, weight, !verifies_raw(work.data(), cw.data_bytes, *cw.crc), idx.data());
        for (unsigned j = 1; j < weight; ++j) flip(work.data(), idx[j]);

        // advance idx[1..] to the next combination above idx[0]
        int j = static_cast<int>(weight) - 1;
        while (j >= 1 && idx[j] == static_cast<std::uint32_t>(bits - weight + j)) --j;
        if (j < 1) break;
        ++idx[j];
        for (unsigned m = j + 1; m < weight; ++m) idx[m] = idx[m - 1] + 1;
      }
      flip(work.data(), idx[0]);
    }

#pragma omp critical(mcc_sweep_merge)
    total.merge(local);
  }
  return total;
}

SweepStats random(const Codeword& cw, unsigned min_weight, unsigned max_weight, std::uint64_t count,
                  std::uint64_t seed) {
  check_codeword(cw);
  if (min_weight == 0 || min_weight > max_weight || max_weight > cw.bits()) {
    throw std::invalid_argument("sweep: bad weight range");
  }
  SweepStats total = empty_stats(max_weight);
  const auto n = static_cast<std::int64_t>(count);

#pragma omp parallel
  {
    SweepStats local = empty_stats(max_weight);
    Bytes work(cw.bytes.begin(), cw.bytes.end());

#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < n; ++i) {
      const auto pos = random_pattern(seed, static_cast<std::uint64_t>(i), cw.bits(), min_weight, max_weight);
      for (std::uint32_t b : pos) flip(work.data(), b);
      record(local, static_cast<unsigned>(pos.size()), !verifies_raw(work.data(), cw.data_bytes, *cw.crc),
             pos.data());
      for (std::uint32_t b : pos) flip(work.data(), b);
    }

#pragma omp critical(mcc_sweep_merge)
    total.merge(local);
  }
  return total;
}

namespace serial {

namespace {

bool detected_after(const Codeword& cw, const std::vector<std::uint32_t>& positions) {
  Bytes copy(cw.bytes.begin(), cw.bytes.end());
  for (std::uint32_t b : positions) flip(copy.data(), b);
  const ByteView data(copy.data(), cw.data_bytes);
  return cw.crc->compute(data) != load_le<std::uint32_t>(copy.data() + cw.data_bytes);
}

}  // namespace

SweepStats exhaustive(const Codeword& cw, unsigned weight) {
  check_codeword(cw);
  const std::size_t bits = cw.bits();
  if (weight == 0 || weight > bits) throw std::invalid_argument("sweep: weight out of range");
  SweepStats s = empty_stats(weight);

  std::vector<std::uint32_t> c(weight);
  for (unsigned i = 0; i < weight; ++i) c[i] = i;
  while (true) {
    record(s, weight, detected_after(cw, c), c.data());
    int i = static_cast<int>(weight) - 1;
    while (i >= 0 && c[i] == bits - weight + i) --i;
    if (i < 0) break;
    ++c[i];
    for (unsigned j = i + 1; j < weight; ++j) c[j] = c[j - 1] + 1;
  }
  return s;
}

SweepStats random(const Codeword& cw, unsigned min_weight, unsigned max_weight, std::uint64_t count,
                  std::uint64_t seed) {
  check_codeword(cw);
  if (min_weight == 0 || min_weight > max_weight || max_weight > cw.bits()) {
    throw std::invalid_argument("sweep: bad weight range");
  }
  SweepStats s = empty_stats(max_weight);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto pos = random_pattern(seed, i, cw.bits(), min_weight, max_weight);
    record(s, static_cast<unsigned>(pos.size()), detected_after(cw, pos), pos.data());
  }
  return s;
}

}  // namespace serial

}  // namespace mcc::sweep
