#include "memtrack/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace memtrack::kernels::serial {

OverlapCounts mask_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("mask_overlap: size mismatch");
  OverlapCounts out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = a[i] != 0;
    const bool in_b = b[i] != 0;
    out.a_count += in_a;
    out.b_count += in_b;
    out.intersection += (in_a && in_b);
  }
  return out;
}

void fuse_labels(std::span<const FuseClaim> claims, std::span<std::uint8_t> out) {
  for (const auto& claim : claims) {
    if (claim.mask.size() != out.size()) throw std::invalid_argument("fuse_labels: size mismatch");
  }
  for (std::size_t p = 0; p < out.size(); ++p) {
    std::uint8_t best_label = 0;
    double best_r = 0.0;
    bool claimed = false;
    for (const auto& claim : claims) {
      if (claim.mask[p] == 0) continue;
      if (!claimed || claim.reliability > best_r ||
          (claim.reliability == best_r && claim.label < best_label)) {
        best_label = claim.label;
        best_r = claim.reliability;
        claimed = true;
      }
    }
    out[p] = best_label;
  }
}

void label_histogram(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                     LabelHistogram hist) {
  if (pred.size() != gt.size()) throw std::invalid_argument("label_histogram: size mismatch");
  const std::size_t n = hist.intersection.size();
  std::fill(hist.intersection.begin(), hist.intersection.end(), 0);
  std::fill(hist.pred_count.begin(), hist.pred_count.end(), 0);
  std::fill(hist.gt_count.begin(), hist.gt_count.end(), 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::size_t p = pred[i];
    const std::size_t g = gt[i];
    if (p < n) ++hist.pred_count[p];
    if (g < n) ++hist.gt_count[g];
    if (p == g && p < n) ++hist.intersection[p];
  }
}

}  // namespace memtrack::kernels::serial
