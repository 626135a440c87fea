#pragma once

// Expansion of the 7 learned temporal position encodings to a larger memory
// size M. Encodings are opaque vectors; only their order matters here.

#include <cstddef>
#include <string_view>
#include <vector>

namespace memtrack::posenc {

inline constexpr int kBaseSlots = 7;

enum class Scheme { Piecewise, Uniform };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme);

struct EncodingTable {
  std::vector<std::vector<double>> entries;

  std::size_t size() const { return entries.size(); }
  std::size_t dim() const { return entries.empty() ? 0 : entries.front().size(); }
  bool operator==(const EncodingTable&) const = default;
};

/// Slot k of the expanded table is (1 - alpha) * base[lower] + alpha * base[upper].
/// `upper == lower` whenever alpha is zero.
struct InterpolationSlot {
  int lower = 0;
  int upper = 0;
  double alpha = 0.0;
};

/// Piecewise: slots 0 and M-1 copy p_0 and p_6, slots 1..M-2 resample the
/// interior p_1..p_5 with aligned endpoints.
std::vector<InterpolationSlot> piecewise_slots(int m);

/// Uniform: every slot k samples u = 6k / (M - 1) over the whole range.
std::vector<InterpolationSlot> uniform_slots(int m);

std::vector<InterpolationSlot> slots(Scheme scheme, int m);

EncodingTable expand_piecewise(const EncodingTable& base, int m);
EncodingTable expand_uniform(const EncodingTable& base, int m);
EncodingTable expand(const EncodingTable& base, int m, Scheme scheme);

/// Deterministic sinusoidal stand-in for the learned table (n = 7).
EncodingTable sinusoidal_base(std::size_t dim);

}  // namespace memtrack::posenc
