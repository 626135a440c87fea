#include "memtrack/posenc.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

using namespace memtrack;
using namespace memtrack::posenc;

namespace {

EncodingTable random_base(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  EncodingTable t;
  for (int j = 0; j < 7; ++j) {
    std::vector<double> v(dim);
    for (auto& x : v) x = d(rng);
    t.entries.push_back(v);
  }
  return t;
}

// Plain 1-D piecewise-linear interpolation through (j, y_j), j = 0..6.
double interp_oracle(const std::vector<double>& ys, double x) {
  std::size_t j = 0;
  while (j + 1 < ys.size() - 1 && static_cast<double>(j + 1) <= x) ++j;
  return ys[j] + (x - static_cast<double>(j)) * (ys[j + 1] - ys[j]);
}

double piecewise_position(int k, int m) {
  if (k == 0) return 0.0;
  if (k == m - 1) return 6.0;
  return 1.0 + 4.0 * (static_cast<double>(k - 1) / static_cast<double>(m - 3));
}

double uniform_position(int k, int m) { return 6.0 * static_cast<double>(k) / static_cast<double>(m - 1); }

void check_against_oracle(const EncodingTable& base, const EncodingTable& out, Scheme scheme, int m) {
  REQUIRE(out.size() == static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double x = scheme == Scheme::Piecewise ? piecewise_position(k, m) : uniform_position(k, m);
    for (std::size_t d = 0; d < base.dim(); ++d) {
      std::vector<double> ys;
      for (const auto& e : base.entries) ys.push_back(e[d]);
      const double want = interp_oracle(ys, x);
      const auto lo = static_cast<std::size_t>(std::floor(x));
      const auto hi = std::min<std::size_t>(lo + 1, 6);
      const double scale = std::max({std::abs(ys[lo]), std::abs(ys[hi]), 1e-300});
      CHECK(std::abs(out.entries[static_cast<std::size_t>(k)][d] - want) <= 1e-12 * scale);
    }
  }
}

}  // namespace

TEST_CASE("M = 7 returns the base table bit-exactly") {
  std::mt19937_64 rng(5);
  const auto base = random_base(rng, 12);
  CHECK(expand_piecewise(base, 7) == base);
  CHECK(expand_uniform(base, 7) == base);
}

TEST_CASE("piecewise slot examples at M = 15") {
  const auto s = piecewise_slots(15);
  REQUIRE(s.size() == 15);
  CHECK(s[1].lower == 1);
  CHECK(s[1].alpha == 0.0);
  CHECK(s[7].lower == 3);
  CHECK(s[7].alpha == 0.0);
  CHECK(s[12].lower == 4);
  CHECK(s[12].upper == 5);
  CHECK(s[12].alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s[13].lower == 5);
  CHECK(s[13].alpha == 0.0);
  CHECK(s[0].lower == 0);
  CHECK(s[14].lower == 6);
}

TEST_CASE("piecewise values at M = 15") {
  std::mt19937_64 rng(6);
  const auto base = random_base(rng, 8);
  const auto out = expand_piecewise(base, 15);
  CHECK(out.entries[1] == base.entries[1]);
  CHECK(out.entries[7] == base.entries[3]);
  CHECK(out.entries[13] == base.entries[5]);
  for (std::size_t d = 0; d < 8; ++d) {
    const double want = base.entries[4][d] / 3.0 + 2.0 * base.entries[5][d] / 3.0;
    CHECK(out.entries[12][d] == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("uniform value at M = 13, k = 1 is the midpoint of p0 and p1") {
  std::mt19937_64 rng(7);
  const auto base = random_base(rng, 8);
  const auto out = expand_uniform(base, 13);
  for (std::size_t d = 0; d < 8; ++d) {
    CHECK(out.entries[1][d] == doctest::Approx(0.5 * base.entries[0][d] + 0.5 * base.entries[1][d]).epsilon(1e-15));
  }
}

TEST_CASE("endpoints and piecewise boundaries are exact for every M") {
  std::mt19937_64 rng(8);
  for (int m = 7; m <= 64; ++m) {
    const auto base = random_base(rng, 6);
    const auto pw = expand_piecewise(base, m);
    const auto un = expand_uniform(base, m);
    CHECK(pw.entries.front() == base.entries[0]);
    CHECK(pw.entries.back() == base.entries[6]);
    CHECK(un.entries.front() == base.entries[0]);
    CHECK(un.entries.back() == base.entries[6]);
    CHECK(pw.entries[1] == base.entries[1]);
    CHECK(pw.entries[static_cast<std::size_t>(m - 2)] == base.entries[5]);
    if (m > 7) CHECK(un.entries[1] != base.entries[1]);
  }
}

TEST_CASE("expansions match an independent interpolation oracle") {
  std::mt19937_64 rng(9);
  for (int m : {7, 8, 9, 10, 11, 15, 20, 33, 100}) {
    const auto base = random_base(rng, 16);
    check_against_oracle(base, expand_piecewise(base, m), Scheme::Piecewise, m);
    check_against_oracle(base, expand_uniform(base, m), Scheme::Uniform, m);
  }
}

TEST_CASE("slots are convex combinations of adjacent entries") {
  for (int m = 7; m <= 40; ++m) {
    for (auto scheme : {Scheme::Piecewise, Scheme::Uniform}) {
      for (const auto& s : slots(scheme, m)) {
        CHECK(s.alpha >= 0.0);
        CHECK(s.alpha < 1.0);
        CHECK(s.lower >= 0);
        CHECK(s.upper <= 6);
        CHECK(s.upper - s.lower <= 1);
      }
    }
  }
}

TEST_CASE("uniform expansion reproduces affine sequences") {
  EncodingTable base;
  const std::vector<double> a{0.25, -1.5, 3.0}, b{0.5, 0.125, -0.75};
  for (int j = 0; j < 7; ++j) {
    std::vector<double> v(3);
    for (std::size_t d = 0; d < 3; ++d) v[d] = a[d] + j * b[d];
    base.entries.push_back(v);
  }
  for (int m : {7, 10, 13, 15, 20}) {
    const auto out = expand_uniform(base, m);
    for (int k = 0; k < m; ++k) {
      const double u = uniform_position(k, m);
      for (std::size_t d = 0; d < 3; ++d) {
        CHECK(out.entries[static_cast<std::size_t>(k)][d] == doctest::Approx(a[d] + u * b[d]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("invalid sizes are rejected") {
  std::mt19937_64 rng(10);
  const auto base = random_base(rng, 4);
  CHECK_THROWS_AS(expand_piecewise(base, 6), std::invalid_argument);
  CHECK_THROWS_AS(expand_uniform(base, 3), std::invalid_argument);
  EncodingTable short_base = base;
  short_base.entries.pop_back();
  CHECK_THROWS_AS(expand_piecewise(short_base, 10), std::invalid_argument);
  CHECK_THROWS_AS(parse_scheme("cubic"), std::invalid_argument);
  CHECK(parse_scheme("uniform") == Scheme::Uniform);
}

TEST_CASE("sinusoidal base has seven finite rows") {
  const auto t = sinusoidal_base(16);
  CHECK(t.size() == 7);
  CHECK(t.dim() == 16);
  for (const auto& e : t.entries) {
    for (double v : e) CHECK(std::isfinite(v));
  }
}
