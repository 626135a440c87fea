#pragma once

// Appearance-based identity verification after occlusion: per-class
// reference banks, self/cross similarity, and the K-frame vote.

#include "memtrack/core_types.hpp"
#include "memtrack/descriptor.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace memtrack::reid {

/// Capped FIFO of reference descriptors for one class.
class FeatureBank {
 public:
  static constexpr std::size_t kDefaultCap = 20;

  explicit FeatureBank(ClassId class_id, std::size_t cap = kDefaultCap);

  ClassId class_id() const { return class_id_; }
  std::size_t cap() const { return cap_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::deque<FeatureDescriptor>& entries() const { return entries_; }

  /// Appends, evicting the oldest entry past the cap. Frame indices must not
  /// decrease.
  void insert(FeatureDescriptor descriptor);

 private:
  ClassId class_id_;
  std::size_t cap_;
  std::deque<FeatureDescriptor> entries_;
};

using BankSet = std::map<ClassId, FeatureBank>;

/// Reliability of the selected candidate >= tau_rel and every pairwise
/// bounding-box IoU among the three candidates >= delta_agree.
bool bank_admit(const PredictionRecord& record, double tau_rel, double delta_agree);

/// Mean over references of the summed per-scale cosine. Absent for an empty
/// reference set; throws on a scale-count mismatch.
std::optional<double> self_similarity(const FeatureDescriptor& current,
                                      const std::deque<FeatureDescriptor>& references);
std::optional<double> self_similarity(const FeatureDescriptor& current, const FeatureBank& bank);

struct CrossMatch {
  double score = 0.0;
  ClassId class_id = 0;
};

/// Best self_similarity over non-empty banks other than `exclude`; lowest
/// class id wins ties.
std::optional<CrossMatch> cross_similarity(const FeatureDescriptor& current, const BankSet& banks,
                                           ClassId exclude);

struct WindowFrame {
  std::uint32_t frame_index = 0;
  std::optional<double> s_self;
  std::optional<double> s_other;
  std::optional<ClassId> other_class;
  double overlap_iou = 0.0;
};

struct RecoveryWindow {
  ClassId class_id = 0;
  std::size_t capacity = 5;  // K
  std::vector<WindowFrame> frames;

  bool complete() const { return frames.size() >= capacity; }
};

struct Thresholds {
  double delta_sim = 0.01;
  double delta_sim_neg = -0.01;
  double delta_iou = 0.8;
};

enum class DecisionKind { Accept, Reassign, Reject };

std::string_view to_string(DecisionKind kind);

struct Decision {
  DecisionKind kind = DecisionKind::Accept;
  ClassId target = 0;  // meaningful for Reassign only

  bool operator==(const Decision&) const = default;
};

/// Decision rule on window means; Reassign target filled in by `vote`.
DecisionKind decide(double s_self_mean, double s_other_mean, double overlap_mean,
                    const Thresholds& thresholds);

struct VoteOutcome {
  Decision decision;
  std::optional<double> s_self_mean;
  std::optional<double> s_other_mean;
  double overlap_mean = 0.0;
  std::size_t frames_used = 0;
  bool default_accept = false;  // no frame carried both similarities
};

/// Averages the window (frames lacking either similarity are skipped for
/// the similarity means) and applies `decide`. The Reassign target is the
/// modal per-frame cross-similarity class, ties going to the most recent
/// frame's class.
VoteOutcome vote(const RecoveryWindow& window, const Thresholds& thresholds);

}  // namespace memtrack::reid
