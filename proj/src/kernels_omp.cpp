#include "memtrack/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace memtrack::kernels::parallel {

OverlapCounts mask_overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("mask_overlap: size mismatch");
  std::uint64_t inter = 0;
  std::uint64_t na = 0;
  std::uint64_t nb = 0;
  const auto n = static_cast<std::int64_t>(a.size());
  const std::uint8_t* pa = a.data();
  const std::uint8_t* pb = b.data();
#pragma omp parallel for reduction(+ : inter, na, nb) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const bool in_a = pa[i] != 0;
    const bool in_b = pb[i] != 0;
    na += in_a;
    nb += in_b;
    inter += (in_a && in_b);
  }
  return {inter, na, nb};
}

void fuse_labels(std::span<const FuseClaim> claims, std::span<std::uint8_t> out) {
  for (const auto& claim : claims) {
    if (claim.mask.size() != out.size()) throw std::invalid_argument("fuse_labels: size mismatch");
  }
  const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n; ++p) {
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
  const std::size_t labels = hist.intersection.size();
  const auto n = static_cast<std::int64_t>(pred.size());
  const int threads = omp_get_max_threads();
  // one private histogram per thread, summed afterwards
  std::vector<std::uint64_t> local(static_cast<std::size_t>(threads) * labels * 3, 0);
#pragma omp parallel
  {
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
    std::uint64_t* inter = local.data() + tid * labels * 3;
    std::uint64_t* pc = inter + labels;
    std::uint64_t* gc = pc + labels;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const std::size_t p = pred[i];
      const std::size_t g = gt[i];
      if (p < labels) ++pc[p];
      if (g < labels) ++gc[g];
      if (p == g && p < labels) ++inter[p];
    }
  }
  std::fill(hist.intersection.begin(), hist.intersection.end(), 0);
  std::fill(hist.pred_count.begin(), hist.pred_count.end(), 0);
  std::fill(hist.gt_count.begin(), hist.gt_count.end(), 0);
  for (int t = 0; t < threads; ++t) {
    const std::uint64_t* inter = local.data() + static_cast<std::size_t>(t) * labels * 3;
    for (std::size_t l = 0; l < labels; ++l) {
      hist.intersection[l] += inter[l];
      hist.pred_count[l] += inter[labels + l];
      hist.gt_count[l] += inter[2 * labels + l];
    }
  }
}

}  // namespace memtrack::kernels::parallel
