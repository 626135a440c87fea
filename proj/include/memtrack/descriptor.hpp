#pragma once

#include "memtrack/core_types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace memtrack {

/// Multi-scale appearance descriptor: one masked-average feature vector per
/// backbone level. Every scale must be finite with non-zero norm.
class FeatureDescriptor {
 public:
  FeatureDescriptor(std::uint32_t frame_index, std::vector<std::vector<double>> scales);

  std::uint32_t frame_index() const { return frame_index_; }
  const std::vector<std::vector<double>>& scales() const { return scales_; }
  std::size_t num_scales() const { return scales_.size(); }

  bool operator==(const FeatureDescriptor&) const = default;

 private:
  std::uint32_t frame_index_;
  std::vector<std::vector<double>> scales_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// Per-scale masked_mean_pool over the selected candidate's mask. Absent if
/// any scale pools to nothing or to a zero vector.
std::optional<FeatureDescriptor> extract_descriptor(const PredictionRecord& record);

}  // namespace memtrack
