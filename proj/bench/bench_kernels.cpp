// Serial reference vs OpenMP kernels on frame-sized buffers.

#include "memtrack/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace memtrack::kernels;

namespace {

std::vector<std::uint8_t> bits(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution on(p);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = on(rng) ? 1 : 0;
  return v;
}

std::vector<std::uint8_t> labels(std::size_t n, int max_label, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, max_label);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = static_cast<std::uint8_t>(d(rng));
  return v;
}

template <OverlapCounts (*Fn)(std::span<const std::uint8_t>, std::span<const std::uint8_t>)>
void BM_MaskOverlap(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = bits(n, 0.3, 1), b = bits(n, 0.5, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(2 * n));
}

template <void (*Fn)(std::span<const FuseClaim>, std::span<std::uint8_t>)>
void BM_FuseLabels(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<std::uint8_t>> masks;
  std::vector<FuseClaim> claims;
  for (int k = 0; k < 4; ++k) masks.push_back(bits(n, 0.25, 10 + static_cast<std::uint64_t>(k)));
  for (int k = 0; k < 4; ++k) {
    claims.push_back({masks[static_cast<std::size_t>(k)], 0.5 + 0.1 * k, static_cast<std::uint8_t>(k + 1)});
  }
  std::vector<std::uint8_t> out(n);
  for (auto _ : state) {
    Fn(claims, out);
    benchmark::ClobberMemory();
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(5 * n));
}

template <void (*Fn)(std::span<const std::uint8_t>, std::span<const std::uint8_t>, LabelHistogram)>
void BM_LabelHistogram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pred = labels(n, 7, 3), gt = labels(n, 7, 4);
  std::vector<std::uint64_t> i(256), p(256), g(256);
  for (auto _ : state) {
    Fn(pred, gt, {i, p, g});
    benchmark::ClobberMemory();
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(2 * n));
}

// 128x128 synthetic frame up to a 1080p endoscope frame
#define FRAME_SIZES Arg(128 * 128)->Arg(1 << 18)->Arg(1920 * 1080)

BENCHMARK(BM_MaskOverlap<serial::mask_overlap>)->FRAME_SIZES;
BENCHMARK(BM_MaskOverlap<parallel::mask_overlap>)->FRAME_SIZES;
BENCHMARK(BM_FuseLabels<serial::fuse_labels>)->FRAME_SIZES;
BENCHMARK(BM_FuseLabels<parallel::fuse_labels>)->FRAME_SIZES;
BENCHMARK(BM_LabelHistogram<serial::label_histogram>)->FRAME_SIZES;
BENCHMARK(BM_LabelHistogram<parallel::label_histogram>)->FRAME_SIZES;

}  // namespace

BENCHMARK_MAIN();
