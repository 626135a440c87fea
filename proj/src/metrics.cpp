#include "memtrack/metrics.hpp"

#include "memtrack/kernels.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace memtrack {

namespace {

constexpr std::size_t kLabelSpace = 256;

}  // namespace

EvalAccumulator::EvalAccumulator(std::vector<ClassId> declared_classes)
    : classes_(std::move(declared_classes)) {
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
  for (auto c : classes_) {
    if (c == 0 || c >= kLabelSpace) throw std::invalid_argument("EvalAccumulator: class ids must be in 1..255");
  }
  inter_.assign(classes_.size(), 0);
  union_.assign(classes_.size(), 0);
  gt_present_.assign(classes_.size(), false);
}

std::size_t EvalAccumulator::slot(ClassId cls) const {
  auto it = std::lower_bound(classes_.begin(), classes_.end(), cls);
  if (it == classes_.end() || *it != cls) throw std::out_of_range("undeclared class " + std::to_string(cls));
  return static_cast<std::size_t>(it - classes_.begin());
}

void EvalAccumulator::accumulate(const LabelMap& pred, const LabelMap& gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw std::invalid_argument("accumulate: prediction and ground truth differ in size");
  }
  std::vector<std::uint64_t> inter(kLabelSpace), pc(kLabelSpace), gc(kLabelSpace);
  kernels::label_histogram(pred.labels(), gt.labels(), {inter, pc, gc});
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const auto c = classes_[i];
    const std::uint64_t u = pc[c] + gc[c] - inter[c];
    inter_[i] += inter[c];
    union_[i] += u;
    if (gc[c] > 0) {
      gt_present_[i] = true;
      challenge_sum_ += static_cast<double>(inter[c]) / static_cast<double>(u);
      ++challenge_count_;
    }
  }
  ++frames_;
}

void EvalAccumulator::merge(const EvalAccumulator& other) {
  if (other.classes_ != classes_) throw std::invalid_argument("merge: class lists differ");
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    inter_[i] += other.inter_[i];
    union_[i] += other.union_[i];
    gt_present_[i] = gt_present_[i] || other.gt_present_[i];
  }
  challenge_sum_ += other.challenge_sum_;
  challenge_count_ += other.challenge_count_;
  frames_ += other.frames_;
}

std::uint64_t EvalAccumulator::intersection(ClassId cls) const { return inter_[slot(cls)]; }
std::uint64_t EvalAccumulator::union_count(ClassId cls) const { return union_[slot(cls)]; }
bool EvalAccumulator::present_in_gt(ClassId cls) const { return gt_present_[slot(cls)]; }

EvalSummary EvalAccumulator::finalize() const {
  if (frames_ == 0) throw std::logic_error("finalize: no frames accumulated");
  EvalSummary s;
  s.frames = frames_;
  // no (frame, present class) pair at all means nothing was there to miss
  s.challenge_iou = challenge_count_ ? 100.0 * challenge_sum_ / static_cast<double>(challenge_count_) : 100.0;
  double iou_sum = 0.0;
  std::size_t iou_n = 0;
  double mc_sum = 0.0;
  std::size_t mc_n = 0;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (union_[i] == 0) {
      s.per_class[classes_[i]] = std::nullopt;
      continue;
    }
    const double v = static_cast<double>(inter_[i]) / static_cast<double>(union_[i]);
    s.per_class[classes_[i]] = v;
    mc_sum += v;
    ++mc_n;
    if (gt_present_[i]) {
      iou_sum += v;
      ++iou_n;
    }
  }
  s.iou = iou_n ? 100.0 * iou_sum / static_cast<double>(iou_n) : 100.0;
  s.mciou = mc_n ? 100.0 * mc_sum / static_cast<double>(mc_n) : 100.0;
  return s;
}

IdSwitchCounter::IdSwitchCounter(std::vector<ClassId> classes, double min_iou)
    : classes_(std::move(classes)), min_iou_(min_iou) {}

void IdSwitchCounter::observe(const LabelMap& pred, const LabelMap& gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw std::invalid_argument("IdSwitchCounter: prediction and ground truth differ in size");
  }
  std::vector<BinaryMask> gt_masks;
  gt_masks.reserve(classes_.size());
  for (auto g : classes_) gt_masks.push_back(gt.mask_of(g));

  for (auto p : classes_) {
    const BinaryMask pm = pred.mask_of(p);
    if (pm.is_empty()) continue;
    std::optional<ClassId> match;
    double best = min_iou_;
    for (std::size_t gi = 0; gi < classes_.size(); ++gi) {
      if (gt_masks[gi].is_empty()) continue;
      const double iou = mask_iou(pm, gt_masks[gi]);
      if (iou >= best && (!match || iou > best)) {
        best = iou;
        match = classes_[gi];
      }
    }
    if (!match) continue;
    auto [it, fresh] = assigned_.emplace(p, *match);
    if (!fresh && it->second != *match) {
      ++switches_;
      it->second = *match;
    }
  }
}

std::size_t count_id_switches(std::span<const LabelMap> pred, std::span<const LabelMap> gt,
                              const std::vector<ClassId>& classes, double min_iou) {
  if (pred.size() != gt.size()) throw std::invalid_argument("count_id_switches: stream lengths differ");
  IdSwitchCounter counter(classes, min_iou);
  for (std::size_t i = 0; i < pred.size(); ++i) counter.observe(pred[i], gt[i]);
  return counter.switches();
}

}  // namespace memtrack
