#include "memtrack/kernels.hpp"

#include <doctest.h>

#include <stdexcept>

#include <random>
#include <vector>

using namespace memtrack::kernels;

namespace {

std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution on(p);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = on(rng) ? 1 : 0;
  return v;
}

std::vector<std::uint8_t> random_labels(std::mt19937_64& rng, std::size_t n, int max_label) {
  std::uniform_int_distribution<int> d(0, max_label);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = static_cast<std::uint8_t>(d(rng));
  return v;
}

const std::size_t kSizes[] = {0, 1, 17, 4096, 128 * 128, (1u << 16) + 3, 300000};

}  // namespace

TEST_CASE("mask_overlap serial and parallel agree") {
  std::mt19937_64 rng(1);
  for (auto n : kSizes) {
    const auto a = random_bits(rng, n, 0.3);
    const auto b = random_bits(rng, n, 0.6);
    const auto s = serial::mask_overlap(a, b);
    CHECK(parallel::mask_overlap(a, b) == s);
    CHECK(mask_overlap(a, b) == s);
    std::uint64_t inter = 0, ca = 0, cb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      inter += a[i] && b[i];
      ca += a[i];
      cb += b[i];
    }
    CHECK(s.intersection == inter);
    CHECK(s.a_count == ca);
    CHECK(s.b_count == cb);
  }
}

TEST_CASE("fuse_labels serial and parallel agree") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> r(0.0, 1.0);
  for (auto n : kSizes) {
    std::vector<std::vector<std::uint8_t>> masks;
    std::vector<FuseClaim> claims;
    for (int k = 0; k < 4; ++k) masks.push_back(random_bits(rng, n, 0.4));
    // two claims share a reliability to exercise the tie rule
    const double shared = r(rng);
    for (int k = 0; k < 4; ++k) {
      claims.push_back({masks[static_cast<std::size_t>(k)], k < 2 ? shared : r(rng),
                        static_cast<std::uint8_t>(7 - k)});
    }
    std::vector<std::uint8_t> a(n, 99), b(n, 42);
    serial::fuse_labels(claims, a);
    parallel::fuse_labels(claims, b);
    CHECK(a == b);
    for (std::size_t i = 0; i < n; ++i) {
      int best = -1;
      for (int k = 0; k < 4; ++k) {
        if (!masks[static_cast<std::size_t>(k)][i]) continue;
        const auto& c = claims[static_cast<std::size_t>(k)];
        if (best < 0 || c.reliability > claims[static_cast<std::size_t>(best)].reliability ||
            (c.reliability == claims[static_cast<std::size_t>(best)].reliability &&
             c.label < claims[static_cast<std::size_t>(best)].label)) {
          best = k;
        }
      }
      const std::uint8_t expect = best < 0 ? 0 : claims[static_cast<std::size_t>(best)].label;
      if (a[i] != expect) {
        FAIL("pixel " << i << " fused to " << int(a[i]) << ", expected " << int(expect));
      }
    }
  }
}

TEST_CASE("label_histogram serial and parallel agree") {
  std::mt19937_64 rng(3);
  for (auto n : kSizes) {
    const auto pred = random_labels(rng, n, 5);
    const auto gt = random_labels(rng, n, 5);
    std::vector<std::uint64_t> i1(256), p1(256), g1(256), i2(256, 9), p2(256, 9), g2(256, 9);
    serial::label_histogram(pred, gt, {i1, p1, g1});
    parallel::label_histogram(pred, gt, {i2, p2, g2});
    CHECK(i1 == i2);
    CHECK(p1 == p2);
    CHECK(g1 == g2);
    std::vector<std::uint64_t> io(256), po(256), go(256);
    for (std::size_t k = 0; k < n; ++k) {
      ++po[pred[k]];
      ++go[gt[k]];
      if (pred[k] == gt[k]) ++io[pred[k]];
    }
    CHECK(i1 == io);
    CHECK(p1 == po);
    CHECK(g1 == go);
  }
}
