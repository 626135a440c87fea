#pragma once

// Pixel-parallel inner loops. Every kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::parallel`; both must
// produce identical results (all arithmetic here is integer or exact
// comparisons). The unqualified entry points pick one based on size.

#include <cstddef>
#include <cstdint>
#include <span>

namespace memtrack::kernels {

struct OverlapCounts {
  std::uint64_t intersection = 0;
  std::uint64_t a_count = 0;
  std::uint64_t b_count = 0;

  std::uint64_t union_count() const { return a_count + b_count - intersection; }
  bool operator==(const OverlapCounts&) const = default;
};

/// One track's claim on the fused label map.
struct FuseClaim {
  std::span<const std::uint8_t> mask;
  double reliability = 0.0;
  std::uint8_t label = 0;
};

/// Per-label pixel counts for a (pred, gt) label-map pair. All output spans
/// have `num_labels` entries and are overwritten.
struct LabelHistogram {
  std::span<std::uint64_t> intersection;
  std::span<std::uint64_t> pred_count;
  std::span<std::uint64_t> gt_count;
};

namespace serial {
OverlapCounts mask_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
void fuse_labels(std::span<const FuseClaim> claims, std::span<std::uint8_t> out);
void label_histogram(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                     LabelHistogram hist);
}  // namespace serial

namespace parallel {
OverlapCounts mask_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
void fuse_labels(std::span<const FuseClaim> claims, std::span<std::uint8_t> out);
void label_histogram(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                     LabelHistogram hist);
}  // namespace parallel

// Frames below this many pixels stay on the serial path.
inline constexpr std::size_t kParallelThreshold = 1u << 16;

inline OverlapCounts mask_overlap(std::span<const std::uint8_t> a,
                                  std::span<const std::uint8_t> b) {
  return a.size() >= kParallelThreshold ? parallel::mask_overlap(a, b)
                                        : serial::mask_overlap(a, b);
}

inline void fuse_labels(std::span<const FuseClaim> claims, std::span<std::uint8_t> out) {
  if (out.size() >= kParallelThreshold) {
    parallel::fuse_labels(claims, out);
  } else {
    serial::fuse_labels(claims, out);
  }
}

inline void label_histogram(std::span<const std::uint8_t> pred,
                            std::span<const std::uint8_t> gt, LabelHistogram hist) {
  if (pred.size() >= kParallelThreshold) {
    parallel::label_histogram(pred, gt, hist);
  } else {
    serial::label_histogram(pred, gt, hist);
  }
}

}  // namespace memtrack::kernels
