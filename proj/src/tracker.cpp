#include "memtrack/tracker.hpp"

#include "memtrack/kernels.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace memtrack {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Pending: return "pending";
    case Phase::Active: return "active";
    case Phase::Occluded: return "occluded";
    case Phase::Recovering: return "recovering";
  }
  return "unknown";
}

namespace {

constexpr std::size_t kEncodingDim = 16;

MemoryEntry make_entry(std::uint32_t frame, double r, const BinaryMask& mask,
                       std::optional<FeatureDescriptor> descriptor) {
  return {frame, r, std::make_shared<const FrameSummary>(FrameSummary{mask, std::move(descriptor)})};
}

TrackState blank_track(const TrackDecl& decl, const EngineConfig& config) {
  return TrackState{decl.track_id,
                    decl.class_id,
                    decl.class_id,
                    Phase::Pending,
                    DualMemory(config.memory_config()),
                    UnconditionalBuffer(config.buffer_cap),
                    std::nullopt,
                    {}};
}

}  // namespace

TrackState init_track(TrackId track_id, const BinaryMask& first_mask, ClassId class_id,
                      const FrameMeta& frame, const EngineConfig& config, double reliability,
                      std::optional<FeatureDescriptor> descriptor) {
  if (first_mask.is_empty()) {
    throw std::invalid_argument("init_track: track " + std::to_string(track_id) +
                                " needs a non-empty first mask");
  }
  TrackState t = blank_track({track_id, class_id}, config.resolved());
  t.phase = Phase::Active;
  auto entry = make_entry(frame.frame_index, reliability, first_mask, std::move(descriptor));
  t.buffer.append(entry);
  t.memory.pin(std::move(entry));
  return t;
}

LabelMap fuse(std::span<const TrackMask> masks, const FrameMeta& frame) {
  LabelMap out(frame.width, frame.height);
  std::vector<kernels::FuseClaim> claims;
  claims.reserve(masks.size());
  for (const auto& m : masks) {
    if (m.mask->width() != frame.width || m.mask->height() != frame.height) {
      throw std::invalid_argument("fuse: mask does not match frame size");
    }
    claims.push_back({m.mask->pixels(), m.reliability, static_cast<std::uint8_t>(m.class_id)});
  }
  kernels::fuse_labels(claims, out.labels());
  return out;
}

Tracker::Tracker(EngineConfig config, std::vector<TrackDecl> tracks, int height, int width)
    : config_(config.resolved()), height_(height), width_(width) {
  config_.validate();
  if (height < 1 || width < 1) throw std::invalid_argument("Tracker: frame size must be positive");
  std::map<TrackId, bool> ids;
  std::map<ClassId, TrackId> classes;
  for (const auto& d : tracks) {
    if (!ids.emplace(d.track_id, true).second) {
      throw std::invalid_argument("Tracker: duplicate track id " + std::to_string(d.track_id));
    }
    if (d.class_id == 0) throw std::invalid_argument("Tracker: class id 0 is background");
    if (!classes.emplace(d.class_id, d.track_id).second) {
      throw std::invalid_argument("Tracker: tracks " + std::to_string(classes[d.class_id]) +
                                  " and " + std::to_string(d.track_id) + " share class " +
                                  std::to_string(d.class_id));
    }
    tracks_.push_back(blank_track(d, config_));
    banks_.emplace(d.class_id, reid::FeatureBank(d.class_id, static_cast<std::size_t>(config_.bank_cap)));
  }
  encodings_ = posenc::expand(posenc::sinusoidal_base(kEncodingDim), config_.memory_size, config_.scheme);
}

const TrackState& Tracker::track(TrackId id) const {
  for (const auto& t : tracks_) {
    if (t.track_id == id) return t;
  }
  throw std::out_of_range("unknown track " + std::to_string(id));
}

void Tracker::emit_event(std::uint32_t frame, const TrackState& track, std::string_view type,
                         nlohmann::json extra) {
  if (!trace_) return;
  nlohmann::json rec = {{"frame", frame},
                        {"track", track.track_id},
                        {"class", track.class_id},
                        {"type", std::string(type)}};
  for (auto& [k, v] : extra.items()) rec[k] = v;
  trace_->event(rec);
}

std::optional<double> Tracker::recovery_self_similarity(const TrackState& track,
                                                        const FeatureDescriptor& current) const {
  std::optional<double> best;
  if (auto it = banks_.find(track.class_id); it != banks_.end()) {
    best = reid::self_similarity(current, it->second);
  }
  if (config_.occlusion_memory) {
    std::deque<FeatureDescriptor> occ_refs;
    for (const auto& e : track.memory.occ_entries()) {
      if (e.summary && e.summary->descriptor) occ_refs.push_back(*e.summary->descriptor);
    }
    if (auto occ = reid::self_similarity(current, occ_refs)) {
      best = best ? std::max(*best, *occ) : *occ;
    }
  }
  return best;
}

std::vector<FrameResult> Tracker::step(const FrameMeta& frame, std::span<const PredictionRecord> records) {
  if (frame.height != height_ || frame.width != width_) {
    throw std::invalid_argument("step: frame size does not match the stream");
  }
  if (last_frame_ && frame.frame_index <= *last_frame_) {
    throw std::invalid_argument("step: frame index " + std::to_string(frame.frame_index) +
                                " does not follow " + std::to_string(*last_frame_));
  }

  std::vector<const PredictionRecord*> by_track(tracks_.size(), nullptr);
  for (const auto& rec : records) {
    if (rec.frame != frame) throw std::invalid_argument("step: record frame differs from the step frame");
    validate(rec);
    bool matched = false;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      if (tracks_[i].track_id != rec.track_id) continue;
      if (by_track[i]) {
        throw std::invalid_argument("step: two records for track " + std::to_string(rec.track_id));
      }
      by_track[i] = &rec;
      matched = true;
    }
    if (!matched) throw std::invalid_argument("step: record for undeclared track " + std::to_string(rec.track_id));
  }
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (!by_track[i]) {
      throw std::invalid_argument("step: missing record for track " + std::to_string(tracks_[i].track_id));
    }
  }
  last_frame_ = frame.frame_index;
  const std::uint32_t t = frame.frame_index;
  pending_.push_back({frame, {}});
  auto& outputs = pending_.back().outputs;

  struct ToScore {
    std::size_t track;
    const BinaryMask* mask;
    std::optional<FeatureDescriptor> descriptor;
  };
  std::vector<ToScore> to_score;

  // Phase 1: per-track transitions, memory and bank updates.
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    TrackState& tr = tracks_[i];
    const PredictionRecord& rec = *by_track[i];
    const CandidatePrediction& sel = rec.selected();
    const double r = sel.reliability();
    const bool absent = sel.objectness <= config_.occlusion_epsilon || sel.mask.is_empty();
    std::optional<FeatureDescriptor> desc;
    if (!absent) desc = extract_descriptor(rec);
    const bool admissible = config_.reid && !absent && desc &&
                            reid::bank_admit(rec, config_.tau_rel, config_.delta_agree);

    bool admitted_rel = false;
    bool occ_refresh = false;
    auto observe_frame = [&] {
      admitted_rel = observe(tr.memory, tr.buffer, make_entry(t, r, sel.mask, desc)).admitted_rel;
    };

    switch (tr.phase) {
      case Phase::Pending:
        if (absent) break;
        tr = init_track(tr.track_id, sel.mask, tr.declared_class, frame, config_, r, desc);
        if (admissible) banks_.at(tr.class_id).insert(*desc);
        outputs.push_back({tr.track_id, tr.class_id, sel.mask, r, false});
        emit_event(t, tr, "track_start");
        break;

      case Phase::Active:
        observe_frame();
        if (absent) {
          tr.phase = Phase::Occluded;
          emit_event(t, tr, "occlusion_start");
          break;
        }
        if (admissible) banks_.at(tr.class_id).insert(*desc);
        outputs.push_back({tr.track_id, tr.class_id, sel.mask, r, false});
        break;

      case Phase::Occluded:
        if (absent) {
          observe_frame();
          break;
        }
        if (config_.occlusion_memory) {
          tr.memory.populate_occlusion(tr.buffer, t);
          occ_refresh = true;
        }
        observe_frame();
        emit_event(t, tr, "recovery_start",
                   {{"occlusion_memory", tr.memory.occ_entries().size()}});
        if (config_.reid) {
          tr.phase = Phase::Recovering;
          tr.window = reid::RecoveryWindow{tr.class_id, static_cast<std::size_t>(config_.window), {}};
          tr.window_bank_candidates.clear();
          if (admissible) tr.window_bank_candidates.push_back(*desc);
          outputs.push_back({tr.track_id, tr.class_id, sel.mask, r, true});
          to_score.push_back({i, &sel.mask, desc});
        } else {
          tr.phase = Phase::Active;
          outputs.push_back({tr.track_id, tr.class_id, sel.mask, r, false});
        }
        break;

      case Phase::Recovering:
        observe_frame();
        if (absent) {
          // occluded again before the vote: drop the partial window
          withdraw_window(tr);
          tr.phase = Phase::Occluded;
          emit_event(t, tr, "withdrawal", {{"reason", "occluded_during_recovery"}});
          break;
        }
        if (admissible) tr.window_bank_candidates.push_back(*desc);
        outputs.push_back({tr.track_id, tr.class_id, sel.mask, r, true});
        to_score.push_back({i, &sel.mask, desc});
        break;
    }

    if (trace_ && tr.phase != Phase::Pending) {
      nlohmann::json snap = nlohmann::json::array();
      for (const auto& slot : tr.memory.snapshot()) snap.push_back(slot.entry.frame_index);
      trace_->memory({{"frame", t},
                      {"track", tr.track_id},
                      {"class", tr.class_id},
                      {"phase", std::string(to_string(tr.phase))},
                      {"r", r},
                      {"admitted_rel", admitted_rel},
                      {"occ_refresh", occ_refresh},
                      {"snapshot_frames", snap},
                      {"pinned_frame", tr.memory.pinned() ? nlohmann::json(tr.memory.pinned()->frame_index)
                                                          : nlohmann::json(nullptr)}});
    }
  }

  // Phase 2: re-ID scoring reads every bank after all updates for this frame.
  for (auto& item : to_score) {
    TrackState& tr = tracks_[item.track];
    reid::WindowFrame wf;
    wf.frame_index = t;
    if (item.descriptor) {
      wf.s_self = recovery_self_similarity(tr, *item.descriptor);
      if (auto cross = reid::cross_similarity(*item.descriptor, banks_, tr.class_id)) {
        wf.s_other = cross->score;
        wf.other_class = cross->class_id;
      }
    }
    for (std::size_t j = 0; j < tracks_.size(); ++j) {
      if (j == item.track || tracks_[j].phase != Phase::Active) continue;
      for (const auto& out : outputs) {
        if (out.track_id == tracks_[j].track_id && !out.provisional) {
          wf.overlap_iou = std::max(wf.overlap_iou, mask_iou(*item.mask, out.mask));
        }
      }
    }
    tr.window->frames.push_back(wf);
    if (tr.window->complete()) resolve_window(tr, t);
  }

  return release(false);
}

void Tracker::resolve_window(TrackState& tr, std::uint32_t frame_index) {
  const auto outcome = reid::vote(*tr.window, config_.thresholds());
  reid::Decision decision = outcome.decision;
  bool target_unavailable = false;
  if (decision.kind == reid::DecisionKind::Reassign) {
    auto it = banks_.find(decision.target);
    if (it == banks_.end() || it->second.empty()) {
      decision = {reid::DecisionKind::Reject, tr.class_id};
      target_unavailable = true;
    }
  }

  if (trace_) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : tr.window->frames) frames.push_back(f.frame_index);
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    trace_->reid({{"frame", frame_index},
                  {"track", tr.track_id},
                  {"class", tr.class_id},
                  {"window_frames", frames},
                  {"s_self_mean", opt(outcome.s_self_mean)},
                  {"s_other_mean", opt(outcome.s_other_mean)},
                  {"overlap_mean", outcome.overlap_mean},
                  {"decision", std::string(reid::to_string(decision.kind))},
                  {"target", decision.target},
                  {"default_accept", outcome.default_accept},
                  {"target_unavailable", target_unavailable}});
  }
  emit_event(frame_index, tr, "reid_decision",
             {{"decision", std::string(reid::to_string(decision.kind))}, {"target", decision.target}});

  switch (decision.kind) {
    case reid::DecisionKind::Accept: {
      for (auto& pf : pending_) {
        for (auto& out : pf.outputs) {
          if (out.track_id == tr.track_id && out.provisional) out.provisional = false;
        }
      }
      auto& bank = banks_.at(tr.class_id);
      for (auto& d : tr.window_bank_candidates) {
        if (bank.empty() || d.frame_index() >= bank.entries().back().frame_index()) bank.insert(std::move(d));
      }
      tr.phase = Phase::Active;
      break;
    }
    case reid::DecisionKind::Reassign: {
      const ClassId from = tr.class_id;
      std::size_t relabeled = 0;
      for (auto& pf : pending_) {
        for (auto& out : pf.outputs) {
          if (out.track_id == tr.track_id && out.provisional) {
            out.class_id = decision.target;
            out.provisional = false;
            ++relabeled;
          }
        }
      }
      tr.class_id = decision.target;
      tr.phase = Phase::Active;
      emit_event(frame_index, tr, "relabel", {{"from", from}, {"to", decision.target}, {"frames", relabeled}});
      break;
    }
    case reid::DecisionKind::Reject:
      withdraw_window(tr);
      tr.phase = Phase::Occluded;
      emit_event(frame_index, tr, "withdrawal", {{"reason", "rejected"}});
      break;
  }
  tr.window.reset();
  tr.window_bank_candidates.clear();
}

void Tracker::withdraw_window(TrackState& tr) {
  for (auto& pf : pending_) {
    std::erase_if(pf.outputs, [&](const TrackOutput& o) { return o.track_id == tr.track_id && o.provisional; });
  }
  tr.window.reset();
  tr.window_bank_candidates.clear();
}

std::vector<FrameResult> Tracker::flush() {
  for (auto& tr : tracks_) {
    if (tr.phase == Phase::Recovering && tr.window && !tr.window->frames.empty()) {
      resolve_window(tr, last_frame_.value_or(0));
    }
  }
  return release(true);
}

std::vector<FrameResult> Tracker::release(bool all) {
  std::vector<FrameResult> out;
  while (!pending_.empty()) {
    const auto& front = pending_.front();
    const bool waiting = std::any_of(front.outputs.begin(), front.outputs.end(),
                                     [](const TrackOutput& o) { return o.provisional; });
    if (waiting && !all) break;
    out.push_back(finalize(std::move(pending_.front())));
    pending_.pop_front();
  }
  return out;
}

FrameResult Tracker::finalize(PendingFrame&& pending) const {
  FrameResult res;
  res.frame = pending.frame;
  // one mask per class: a relabeled track duplicating a live one keeps only the higher r
  std::map<ClassId, std::size_t> best;
  for (std::size_t i = 0; i < pending.outputs.size(); ++i) {
    const auto& o = pending.outputs[i];
    if (o.provisional) continue;
    auto [it, inserted] = best.emplace(o.class_id, i);
    if (!inserted) {
      const auto& cur = pending.outputs[it->second];
      if (o.reliability > cur.reliability ||
          (o.reliability == cur.reliability && o.track_id < cur.track_id)) {
        it->second = i;
      }
    }
  }
  for (const auto& [cls, idx] : best) res.outputs.push_back(std::move(pending.outputs[idx]));
  std::vector<TrackMask> masks;
  masks.reserve(res.outputs.size());
  for (const auto& o : res.outputs) masks.push_back({o.class_id, &o.mask, o.reliability});
  res.labels = fuse(masks, res.frame);
  return res;
}

}  // namespace memtrack
