// Serial reference vs OpenMP error-pattern sweeps, plus raw CRC throughput.
// On a single core the two sweep paths should be close; the parallel one
// also avoids the per-pattern codeword copy.

#include <benchmark/benchmark.h>

#include "mcc/error_sweep.hpp"
#include "mcc/wire_codec.hpp"

namespace {

mcc::Bytes gps_frame() {
  mcc::GpsPositionObject g;
  g.timestamp = 4200;
  g.identifier = mcc::object_id::gps(1);
  g.status = mcc::status_bits::kValidFix;
  g.latitude = 47.5;
  g.longitude = 8.72;
  g.altitude = 64.0;
  return mcc::encode_gps(g).vector();
}

void BM_Crc(benchmark::State& state) {
  const mcc::Bytes data(static_cast<std::size_t>(state.range(0)), 0xa5);
  for (auto _ : state) benchmark::DoNotOptimize(mcc::frame_crc().compute(data));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Crc)->Arg(56)->Arg(244)->Arg(4096);

void BM_ExhaustiveParallel(benchmark::State& state) {
  const mcc::Bytes frame = gps_frame();
  const mcc::sweep::Codeword cw{frame, 56, &mcc::frame_crc()};
  for (auto _ : state) benchmark::DoNotOptimize(mcc::sweep::exhaustive(cw, static_cast<unsigned>(state.range(0))));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * mcc::sweep::binomial(480, state.range(0))));
}
BENCHMARK(BM_ExhaustiveParallel)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ExhaustiveSerial(benchmark::State& state) {
  const mcc::Bytes frame = gps_frame();
  const mcc::sweep::Codeword cw{frame, 56, &mcc::frame_crc()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mcc::sweep::serial::exhaustive(cw, static_cast<unsigned>(state.range(0))));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * mcc::sweep::binomial(480, state.range(0))));
}
BENCHMARK(BM_ExhaustiveSerial)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_RandomParallel(benchmark::State& state) {
  const mcc::Bytes frame = gps_frame();
  const mcc::sweep::Codeword cw{frame, 56, &mcc::frame_crc()};
  for (auto _ : state) benchmark::DoNotOptimize(mcc::sweep::random(cw, 4, 7, 100000, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 100000);
}
BENCHMARK(BM_RandomParallel)->Unit(benchmark::kMillisecond);

void BM_RandomSerial(benchmark::State& state) {
  const mcc::Bytes frame = gps_frame();
  const mcc::sweep::Codeword cw{frame, 56, &mcc::frame_crc()};
  for (auto _ : state) benchmark::DoNotOptimize(mcc::sweep::serial::random(cw, 4, 7, 100000, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 100000);
}
BENCHMARK(BM_RandomSerial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
