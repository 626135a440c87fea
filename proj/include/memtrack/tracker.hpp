#pragma once

// Per-instrument tracking engine: lifecycle state machine, gated memory
// updates, post-occlusion re-identification and per-frame fusion.
//
// Masks emitted while a track is Recovering are provisional. They sit in an
// output delay buffer until the K-frame vote confirms, relabels or
// withdraws them, so finalized frames lag the input by at most K frames.

#include "memtrack/core_types.hpp"
#include "memtrack/engine_config.hpp"
#include "memtrack/label_map.hpp"
#include "memtrack/memory_bank.hpp"
#include "memtrack/reid.hpp"

#include <json.hpp>

#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace memtrack {

enum class Phase { Pending, Active, Occluded, Recovering };

std::string_view to_string(Phase phase);

struct TrackDecl {
  TrackId track_id = 0;
  ClassId class_id = 0;
};

struct TrackState {
  TrackId track_id = 0;
  ClassId declared_class = 0;
  ClassId class_id = 0;  // current output identity; changes on Reassign
  Phase phase = Phase::Pending;
  DualMemory memory;
  UnconditionalBuffer buffer;
  std::optional<reid::RecoveryWindow> window;
  // admissible descriptors seen during the open window; banked on Accept only
  std::vector<FeatureDescriptor> window_bank_candidates;

  std::size_t frames_collected() const { return window ? window->frames.size() : 0; }
};

/// Builds an Active track from its first visible mask; the frame is pinned
/// in memory. Throws std::invalid_argument for an empty mask.
TrackState init_track(TrackId track_id, const BinaryMask& first_mask, ClassId class_id,
                      const FrameMeta& frame, const EngineConfig& config,
                      double reliability = 1.0,
                      std::optional<FeatureDescriptor> descriptor = std::nullopt);

struct TrackMask {
  ClassId class_id = 0;
  const BinaryMask* mask = nullptr;
  double reliability = 0.0;
};

/// Per pixel, the claiming track with the highest reliability wins; ties go
/// to the lower class id; unclaimed pixels are background.
LabelMap fuse(std::span<const TrackMask> masks, const FrameMeta& frame);

struct TrackOutput {
  TrackId track_id = 0;
  ClassId class_id = 0;
  BinaryMask mask;
  double reliability = 0.0;
  bool provisional = false;
};

struct FrameResult {
  FrameMeta frame;
  LabelMap labels;
  std::vector<TrackOutput> outputs;  // final, after duplicate suppression
};

/// Receives JSON-lines trace records. Default methods drop everything.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void memory(const nlohmann::json& record) { (void)record; }
  virtual void reid(const nlohmann::json& record) { (void)record; }
  virtual void event(const nlohmann::json& record) { (void)record; }
};

class Tracker {
 public:
  /// Throws std::invalid_argument for duplicate track ids or two tracks
  /// declaring the same class.
  Tracker(EngineConfig config, std::vector<TrackDecl> tracks, int height, int width);

  void set_trace(TraceSink* sink) { trace_ = sink; }

  /// Consumes one record per declared track for the next frame and returns
  /// the frames that became final.
  std::vector<FrameResult> step(const FrameMeta& frame, std::span<const PredictionRecord> records);

  /// Resolves open recovery windows with the frames collected so far and
  /// releases every buffered frame.
  std::vector<FrameResult> flush();

  const EngineConfig& config() const { return config_; }
  const std::vector<TrackState>& tracks() const { return tracks_; }
  const TrackState& track(TrackId id) const;
  const reid::BankSet& banks() const { return banks_; }
  const posenc::EncodingTable& encodings() const { return encodings_; }
  std::size_t pending_frames() const { return pending_.size(); }

 private:
  struct PendingFrame {
    FrameMeta frame;
    std::vector<TrackOutput> outputs;
  };

  void resolve_window(TrackState& track, std::uint32_t frame_index);
  void withdraw_window(TrackState& track);
  std::optional<double> recovery_self_similarity(const TrackState& track,
                                                 const FeatureDescriptor& current) const;
  std::vector<FrameResult> release(bool all);
  FrameResult finalize(PendingFrame&& pending) const;
  void emit_event(std::uint32_t frame, const TrackState& track, std::string_view type,
                  nlohmann::json extra = nlohmann::json::object());

  EngineConfig config_;
  int height_;
  int width_;
  std::vector<TrackState> tracks_;
  reid::BankSet banks_;
  posenc::EncodingTable encodings_;
  std::deque<PendingFrame> pending_;
  std::optional<std::uint32_t> last_frame_;
  TraceSink* trace_ = nullptr;
};

}  // namespace memtrack
