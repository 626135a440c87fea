#include "memtrack/reid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace memtrack::reid {

FeatureBank::FeatureBank(ClassId class_id, std::size_t cap) : class_id_(class_id), cap_(cap) {
  if (cap_ == 0) throw std::invalid_argument("FeatureBank: cap must be positive");
}

void FeatureBank::insert(FeatureDescriptor descriptor) {
  if (!entries_.empty() && descriptor.frame_index() < entries_.back().frame_index()) {
    throw std::invalid_argument("FeatureBank: descriptors must arrive in frame order");
  }
  entries_.push_back(std::move(descriptor));
  while (entries_.size() > cap_) entries_.pop_front();
}

bool bank_admit(const PredictionRecord& record, double tau_rel, double delta_agree) {
  if (record.selected().reliability() < tau_rel) return false;
  std::array<std::optional<BBox>, 3> boxes;
  for (std::size_t i = 0; i < 3; ++i) {
    boxes[i] = tight_bbox(record.candidates[i].mask);
    if (!boxes[i]) return false;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      if (bbox_iou(*boxes[i], *boxes[j]) < delta_agree) return false;
    }
  }
  return true;
}

std::optional<double> self_similarity(const FeatureDescriptor& current,
                                      const std::deque<FeatureDescriptor>& references) {
  if (references.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& ref : references) {
    if (ref.num_scales() != current.num_scales()) {
      throw std::invalid_argument("self_similarity: scale count mismatch");
    }
    double per_entry = 0.0;
    for (std::size_t l = 0; l < current.num_scales(); ++l) {
      per_entry += cosine(current.scales()[l], ref.scales()[l]);
    }
    total += per_entry;
  }
  return total / static_cast<double>(references.size());
}

std::optional<double> self_similarity(const FeatureDescriptor& current, const FeatureBank& bank) {
  return self_similarity(current, bank.entries());
}

std::optional<CrossMatch> cross_similarity(const FeatureDescriptor& current, const BankSet& banks,
                                           ClassId exclude) {
  std::optional<CrossMatch> best;
  // std::map iterates in ascending class order, so strict '>' keeps the lowest id on ties
  for (const auto& [cls, bank] : banks) {
    if (cls == exclude || bank.empty()) continue;
    const double score = *self_similarity(current, bank);
    if (!best || score > best->score) best = CrossMatch{score, cls};
  }
  return best;
}

std::string_view to_string(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::Accept: return "accept";
    case DecisionKind::Reassign: return "reassign";
    case DecisionKind::Reject: return "reject";
  }
  return "unknown";
}

DecisionKind decide(double s_self_mean, double s_other_mean, double overlap_mean,
                    const Thresholds& thresholds) {
  if (s_self_mean - s_other_mean >= thresholds.delta_sim && overlap_mean <= thresholds.delta_iou) {
    return DecisionKind::Accept;
  }
  if (s_other_mean - s_self_mean >= thresholds.delta_sim_neg) return DecisionKind::Reassign;
  return DecisionKind::Reject;
}

VoteOutcome vote(const RecoveryWindow& window, const Thresholds& thresholds) {
  if (window.frames.empty()) throw std::invalid_argument("vote: empty recovery window");

  VoteOutcome out;
  double self_sum = 0.0;
  double other_sum = 0.0;
  double overlap_sum = 0.0;
  std::map<ClassId, int> class_votes;
  for (const auto& f : window.frames) {
    overlap_sum += f.overlap_iou;
    if (!f.s_self || !f.s_other || !f.other_class) continue;
    self_sum += *f.s_self;
    other_sum += *f.s_other;
    ++class_votes[*f.other_class];
    ++out.frames_used;
  }
  out.overlap_mean = overlap_sum / static_cast<double>(window.frames.size());

  if (out.frames_used == 0) {
    out.default_accept = true;
    out.decision = {DecisionKind::Accept, window.class_id};
    return out;
  }
  const double n = static_cast<double>(out.frames_used);
  out.s_self_mean = self_sum / n;
  out.s_other_mean = other_sum / n;

  const auto kind = decide(*out.s_self_mean, *out.s_other_mean, out.overlap_mean, thresholds);
  out.decision.kind = kind;
  if (kind != DecisionKind::Reassign) {
    out.decision.target = window.class_id;
    return out;
  }

  int top = 0;
  for (const auto& [cls, count] : class_votes) top = std::max(top, count);
  for (auto it = window.frames.rbegin(); it != window.frames.rend(); ++it) {
    if (!it->s_self || !it->s_other || !it->other_class) continue;
    if (class_votes[*it->other_class] == top) {
      out.decision.target = *it->other_class;
      break;
    }
  }
  return out;
}

}  // namespace memtrack::reid
