#include "memtrack/core_types.hpp"

#include "memtrack/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace memtrack {

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("BinaryMask: negative dimensions");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

BinaryMask BinaryMask::from_rle(int width, int height, std::span<const std::uint32_t> runs) {
  BinaryMask m(width, height);
  const std::uint64_t total =
      std::accumulate(runs.begin(), runs.end(), std::uint64_t{0});
  if (total != m.size()) {
    throw std::invalid_argument("BinaryMask::from_rle: runs sum to " + std::to_string(total) +
                                ", expected " + std::to_string(m.size()));
  }
  std::size_t pos = 0;
  bool foreground = false;
  for (auto run : runs) {
    if (foreground) std::fill_n(m.pixels_.begin() + static_cast<std::ptrdiff_t>(pos), run, 1);
    pos += run;
    foreground = !foreground;
  }
  return m;
}

std::vector<std::uint32_t> BinaryMask::to_rle() const {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t length = 0;
  for (auto px : pixels_) {
    if (px != current) {
      runs.push_back(length);
      current = px;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

std::size_t BinaryMask::foreground_count() const {
  return static_cast<std::size_t>(std::count(pixels_.begin(), pixels_.end(), std::uint8_t{1}));
}

bool BinaryMask::is_empty() const {
  return std::none_of(pixels_.begin(), pixels_.end(), [](std::uint8_t p) { return p != 0; });
}

std::size_t PredictionRecord::selected_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].reliability() > candidates[best].reliability()) best = i;
  }
  return best;
}

void validate(const PredictionRecord& record) {
  if (record.frame.height < 1 || record.frame.width < 1) {
    throw std::invalid_argument("record: frame dimensions must be positive");
  }
  for (const auto& cand : record.candidates) {
    for (float v : {cand.quality, cand.objectness}) {
      if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
        throw std::invalid_argument("record: score out of [0,1] for track " +
                                    std::to_string(record.track_id));
      }
    }
    if (cand.mask.width() != record.frame.width || cand.mask.height() != record.frame.height) {
      throw std::invalid_argument("record: candidate mask does not match frame size");
    }
  }
  if (record.features.empty()) throw std::invalid_argument("record: no feature scales");
  for (const auto& fm : record.features) {
    if (fm.values.size() != static_cast<std::size_t>(fm.height) * fm.width * fm.channels) {
      throw std::invalid_argument("record: feature map size mismatch");
    }
    if (!std::all_of(fm.values.begin(), fm.values.end(), [](float v) { return std::isfinite(v); })) {
      throw std::invalid_argument("record: non-finite feature value");
    }
  }
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("mask_iou: dimension mismatch");
  const auto counts = kernels::mask_overlap(a.pixels(), b.pixels());
  const auto uni = counts.union_count();
  if (uni == 0) return 1.0;  // both empty
  return static_cast<double>(counts.intersection) / static_cast<double>(uni);
}

double bbox_iou(const BBox& a, const BBox& b) {
  const int ix0 = std::max(a.x_min, b.x_min);
  const int iy0 = std::max(a.y_min, b.y_min);
  const int ix1 = std::min(a.x_max, b.x_max);
  const int iy1 = std::min(a.y_max, b.y_max);
  if (ix1 < ix0 || iy1 < iy0) return 0.0;
  const long long inter = static_cast<long long>(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<BBox> tight_bbox(const BinaryMask& m) {
  std::optional<BBox> box;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      if (!box) {
        box = BBox{x, y, x, y};
      } else {
        box->x_min = std::min(box->x_min, x);
        box->x_max = std::max(box->x_max, x);
        box->y_min = std::min(box->y_min, y);
        box->y_max = std::max(box->y_max, y);
      }
    }
  }
  return box;
}

int cell_sample_pixel(int cell, int grid_extent, int frame_extent) {
  // centre of the cell, floor((cell + 0.5) * frame / grid) in integers
  const long long num = (2LL * cell + 1) * frame_extent;
  const long long pos = num / (2LL * grid_extent);
  return static_cast<int>(std::min<long long>(pos, frame_extent - 1));
}

std::optional<std::vector<double>> masked_mean_pool(const FeatureMap& fm, const BinaryMask& m) {
  std::vector<double> sum(static_cast<std::size_t>(fm.channels), 0.0);
  std::size_t cells = 0;
  for (int gy = 0; gy < fm.height; ++gy) {
    const int py = cell_sample_pixel(gy, fm.height, m.height());
    for (int gx = 0; gx < fm.width; ++gx) {
      const int px = cell_sample_pixel(gx, fm.width, m.width());
      if (!m.at(px, py)) continue;
      ++cells;
      for (int c = 0; c < fm.channels; ++c) sum[static_cast<std::size_t>(c)] += fm.at(gy, gx, c);
    }
  }
  if (cells == 0) return std::nullopt;
  for (auto& v : sum) v /= static_cast<double>(cells);
  return sum;
}

}  // namespace memtrack
