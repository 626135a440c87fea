#include "memtrack/descriptor.hpp"

#include <cmath>
#include <stdexcept>

namespace memtrack {

namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

FeatureDescriptor::FeatureDescriptor(std::uint32_t frame_index,
                                     std::vector<std::vector<double>> scales)
    : frame_index_(frame_index), scales_(std::move(scales)) {
  if (scales_.empty()) throw std::invalid_argument("FeatureDescriptor: no scales");
  for (const auto& v : scales_) {
    for (double x : v) {
      if (!std::isfinite(x)) throw std::invalid_argument("FeatureDescriptor: non-finite value");
    }
    if (norm(v) == 0.0) throw std::invalid_argument("FeatureDescriptor: zero-norm scale");
  }
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: length mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  const double denom = norm(a) * norm(b);
  if (denom == 0.0) return 0.0;
  return dot / denom;
}

std::optional<FeatureDescriptor> extract_descriptor(const PredictionRecord& record) {
  const auto& mask = record.selected().mask;
  std::vector<std::vector<double>> scales;
  scales.reserve(record.features.size());
  for (const auto& fm : record.features) {
    auto pooled = masked_mean_pool(fm, mask);
    if (!pooled || norm(*pooled) == 0.0) return std::nullopt;
    scales.push_back(std::move(*pooled));
  }
  if (scales.empty()) return std::nullopt;
  return FeatureDescriptor(record.frame.frame_index, std::move(scales));
}

}  // namespace memtrack
