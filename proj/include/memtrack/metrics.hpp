#pragma once

// Challenge IoU, dataset IoU and mean class IoU over label-map streams,
// plus identity-switch counting.
//
// Per-class IoU is accumulated sum(intersection) / sum(union) over the whole
// stream. A class that is never in the ground truth and never predicted has
// a 0/0 IoU and is left out of every average; an absent class that *is*
// predicted scores 0, which is what makes mcIoU sensitive to hallucinated
// instruments.

#include "memtrack/label_map.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace memtrack {

struct EvalSummary {
  double challenge_iou = 0.0;  // percent
  double iou = 0.0;            // percent
  double mciou = 0.0;          // percent
  std::map<ClassId, std::optional<double>> per_class;  // fraction; nullopt for 0/0
  std::size_t frames = 0;
};

class EvalAccumulator {
 public:
  explicit EvalAccumulator(std::vector<ClassId> declared_classes);

  void accumulate(const LabelMap& pred, const LabelMap& gt);

  /// Sum-merge of two accumulators over disjoint frame sets.
  void merge(const EvalAccumulator& other);

  /// Throws std::logic_error when no frame has been accumulated.
  EvalSummary finalize() const;

  const std::vector<ClassId>& classes() const { return classes_; }
  std::uint64_t intersection(ClassId cls) const;
  std::uint64_t union_count(ClassId cls) const;
  bool present_in_gt(ClassId cls) const;
  std::size_t frames() const { return frames_; }
  std::size_t challenge_samples() const { return challenge_count_; }

 private:
  std::size_t slot(ClassId cls) const;

  std::vector<ClassId> classes_;
  std::vector<std::uint64_t> inter_;
  std::vector<std::uint64_t> union_;
  std::vector<bool> gt_present_;
  double challenge_sum_ = 0.0;
  std::size_t challenge_count_ = 0;
  std::size_t frames_ = 0;
};

/// Counts frames where a predicted class's best-overlap ground-truth class
/// (mask IoU >= min_iou) differs from the one it matched previously.
/// Frames with no match leave the previous assignment in place.
class IdSwitchCounter {
 public:
  IdSwitchCounter(std::vector<ClassId> classes, double min_iou = 0.5);

  void observe(const LabelMap& pred, const LabelMap& gt);
  std::size_t switches() const { return switches_; }

 private:
  std::vector<ClassId> classes_;
  double min_iou_;
  std::map<ClassId, ClassId> assigned_;
  std::size_t switches_ = 0;
};

std::size_t count_id_switches(std::span<const LabelMap> pred, std::span<const LabelMap> gt,
                              const std::vector<ClassId>& classes, double min_iou = 0.5);

}  // namespace memtrack
