#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace memtrack {

using ClassId = std::uint16_t;
using TrackId = std::uint32_t;

struct FrameMeta {
  std::uint32_t frame_index = 0;
  int height = 0;
  int width = 0;

  bool operator==(const FrameMeta&) const = default;
};

/// Binary mask at frame resolution.
///
/// Stored densely (one byte per pixel, 0 or 1) so the pixel kernels can run
/// over contiguous memory; `to_rle` / `from_rle` give the run-length form
/// used on the wire. Runs alternate background/foreground in row-major scan
/// order and always start with a (possibly zero-length) background run.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height);

  static BinaryMask from_rle(int width, int height, std::span<const std::uint32_t> runs);
  std::vector<std::uint32_t> to_rle() const;

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }

  bool at(int x, int y) const { return pixels_[index(x, y)] != 0; }
  void set(int x, int y, bool on = true) { pixels_[index(x, y)] = on ? 1 : 0; }

  std::size_t foreground_count() const;
  bool is_empty() const;

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  bool same_shape(const BinaryMask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const BinaryMask&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Inclusive pixel bounds.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  long long area() const {
    return static_cast<long long>(x_max - x_min + 1) * static_cast<long long>(y_max - y_min + 1);
  }
  bool operator==(const BBox&) const = default;
};

/// Dense feature grid for one backbone level. Values are laid out
/// row-major as [y][x][channel].
struct FeatureMap {
  int scale_id = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> values;

  FeatureMap() = default;
  FeatureMap(int scale, int h, int w, int c)
      : scale_id(scale), height(h), width(w), channels(c),
        values(static_cast<std::size_t>(h) * w * c, 0.0f) {}

  float& at(int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool operator==(const FeatureMap&) const = default;
};

struct CandidatePrediction {
  BinaryMask mask;
  float quality = 0.0f;     // c
  float objectness = 0.0f;  // s

  double reliability() const {
    return static_cast<double>(objectness) * static_cast<double>(quality);
  }
  bool operator==(const CandidatePrediction&) const = default;
};

/// One backend output for one track at one frame.
struct PredictionRecord {
  TrackId track_id = 0;
  FrameMeta frame;
  std::array<CandidatePrediction, 3> candidates;
  std::vector<FeatureMap> features;

  /// argmax of c*s, lowest index on ties.
  std::size_t selected_index() const;
  const CandidatePrediction& selected() const { return candidates[selected_index()]; }

  bool operator==(const PredictionRecord&) const = default;
};

/// Throws std::invalid_argument when the record breaks the score ranges or
/// candidate/frame dimension contract.
void validate(const PredictionRecord& record);

double mask_iou(const BinaryMask& a, const BinaryMask& b);
double bbox_iou(const BBox& a, const BBox& b);
std::optional<BBox> tight_bbox(const BinaryMask& m);

/// Nearest-neighbour sample position of feature cell `cell` along an axis
/// of `frame_extent` pixels split into `grid_extent` cells.
int cell_sample_pixel(int cell, int grid_extent, int frame_extent);

/// Downsamples `m` onto the feature grid and averages `fm` over the
/// foreground cells. Absent when no cell is covered.
std::optional<std::vector<double>> masked_mean_pool(const FeatureMap& fm, const BinaryMask& m);

}  // namespace memtrack
