#include "memtrack/posenc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace memtrack::posenc {

Scheme parse_scheme(std::string_view name) {
  if (name == "piecewise") return Scheme::Piecewise;
  if (name == "uniform") return Scheme::Uniform;
  throw std::invalid_argument("unknown interpolation scheme '" + std::string(name) + "'");
}

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::Piecewise ? "piecewise" : "uniform";
}

namespace {

void check_size(int m) {
  if (m < kBaseSlots) {
    throw std::invalid_argument("memory size must be >= 7, got " + std::to_string(m));
  }
}

// offset + num/den, split exactly into integer floor and fractional weight
InterpolationSlot rational_slot(int offset, int num, int den) {
  InterpolationSlot s;
  s.lower = offset + num / den;
  const int rem = num % den;
  s.alpha = static_cast<double>(rem) / static_cast<double>(den);
  s.upper = rem == 0 ? s.lower : s.lower + 1;
  return s;
}

EncodingTable apply(const EncodingTable& base, const std::vector<InterpolationSlot>& plan) {
  if (base.size() != static_cast<std::size_t>(kBaseSlots)) {
    throw std::invalid_argument("base encoding table must have exactly 7 entries, got " +
                                std::to_string(base.size()));
  }
  const std::size_t dim = base.dim();
  for (const auto& e : base.entries) {
    if (e.size() != dim) throw std::invalid_argument("base encoding table is ragged");
    for (double v : e) {
      if (!std::isfinite(v)) throw std::invalid_argument("base encoding table has non-finite values");
    }
  }

  EncodingTable out;
  out.entries.reserve(plan.size());
  for (const auto& slot : plan) {
    const auto& lo = base.entries[static_cast<std::size_t>(slot.lower)];
    if (slot.alpha == 0.0) {
      out.entries.push_back(lo);
      continue;
    }
    const auto& hi = base.entries[static_cast<std::size_t>(slot.upper)];
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d) v[d] = (1.0 - slot.alpha) * lo[d] + slot.alpha * hi[d];
    out.entries.push_back(std::move(v));
  }
  return out;
}

}  // namespace

std::vector<InterpolationSlot> piecewise_slots(int m) {
  check_size(m);
  std::vector<InterpolationSlot> plan(static_cast<std::size_t>(m));
  plan.front() = {0, 0, 0.0};
  plan.back() = {kBaseSlots - 1, kBaseSlots - 1, 0.0};
  // u_k = 1 + 4 (k - 1) / (M - 3); at k = M-2 this lands on 5 exactly
  for (int k = 1; k <= m - 2; ++k) {
    plan[static_cast<std::size_t>(k)] = rational_slot(1, 4 * (k - 1), m - 3);
  }
  return plan;
}

std::vector<InterpolationSlot> uniform_slots(int m) {
  check_size(m);
  std::vector<InterpolationSlot> plan(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    plan[static_cast<std::size_t>(k)] = rational_slot(0, (kBaseSlots - 1) * k, m - 1);
  }
  return plan;
}

std::vector<InterpolationSlot> slots(Scheme scheme, int m) {
  return scheme == Scheme::Piecewise ? piecewise_slots(m) : uniform_slots(m);
}

EncodingTable expand_piecewise(const EncodingTable& base, int m) {
  return apply(base, piecewise_slots(m));
}

EncodingTable expand_uniform(const EncodingTable& base, int m) {
  return apply(base, uniform_slots(m));
}

EncodingTable expand(const EncodingTable& base, int m, Scheme scheme) {
  return apply(base, slots(scheme, m));
}

EncodingTable sinusoidal_base(std::size_t dim) {
  EncodingTable t;
  for (int pos = 0; pos < kBaseSlots; ++pos) {
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      const double freq = std::pow(10000.0, -static_cast<double>(d / 2 * 2) / static_cast<double>(dim));
      v[d] = (d % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
    }
    t.entries.push_back(std::move(v));
  }
  return t;
}

}  // namespace memtrack::posenc
