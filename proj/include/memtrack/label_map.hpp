#pragma once

#include "memtrack/core_types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace memtrack {

/// Per-pixel class label at frame resolution, 0 = background.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return labels_.size(); }

  std::uint8_t at(int x, int y) const { return labels_[index(x, y)]; }
  void set(int x, int y, std::uint8_t label) { labels_[index(x, y)] = label; }

  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<std::uint8_t> labels() { return labels_; }

  BinaryMask mask_of(ClassId cls) const;
  bool contains(ClassId cls) const;

  bool operator==(const LabelMap&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> labels_;
};

/// Binary 8-bit PGM (P5), pixel value = class id.
void write_pgm(const std::filesystem::path& path, const LabelMap& map);
LabelMap read_pgm(const std::filesystem::path& path);

}  // namespace memtrack
