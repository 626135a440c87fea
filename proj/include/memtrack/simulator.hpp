#pragma once

// Scripted multi-object scenes and a synthetic backend that turns them into
// PredictionRecords.
//
// Scenario script schema (key = value, see kv_file.hpp):
//
//   [scenario]
//   name = S1
//   description = free text
//   frames = 60                  # T
//   height = 128                 # canvas H
//   width = 128                  # canvas W
//   channels = 16                # feature channels per scale
//   score_jitter = 0.01          # sigma of Gaussian score jitter
//   feature_jitter = 0.05        # sigma of Gaussian feature jitter
//   mask_jitter = 1              # max dilate/erode radius and shift, px
//   confusion_probability = 0    # p of a confused first re-entry frame
//   confusion_score = mirror     # scripted confusion scores: mirror | value
//   separation = 0.2             # min cosine separation of prototypes
//   occlusion_band = false       # assert a pre-occlusion frame with
//   band_low = 0.65              #   band_low <= r < band_high
//   band_high = 0.95
//
//   [object NAME]                # painter's order = declaration order
//   tracked = true               # false: occluder, gt background
//   track = 1                    # track id (tracked objects)
//   class = 1                    # class id (tracked objects)
//   label = bipolar_forceps      # class name
//   shape = rect | ellipse
//   size = 32 24                 # nominal width height
//   path = 0: 40 64; 20: 60 64 30 20   # t: cx cy [w h], linear in between
//   hidden = 20-30, 40-41        # inclusive frame ranges not rendered
//   confuse = 30-59 OTHER        # track reports OTHER's prediction
//
//   [expect PRESET]              # checked after replay with that preset
//   decisions.TRACK = reassign:2, accept   # recovery decisions in order
//   id_switches = 0 | >=1
//   silent_after.CLASS = FRAME   # class has no pixels after FRAME

#include "memtrack/core_types.hpp"
#include "memtrack/label_map.hpp"
#include "memtrack/record_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace memtrack::sim {

enum class Shape { Rect, Ellipse };

struct Keyframe {
  int t = 0;
  double cx = 0.0;
  double cy = 0.0;
  std::optional<double> w;
  std::optional<double> h;
};

struct FrameRange {
  int first = 0;
  int last = 0;  // inclusive
  bool contains(int t) const { return t >= first && t <= last; }
};

struct Confusion {
  FrameRange frames;
  std::string target;
};

struct ObjectScript {
  std::string name;
  bool tracked = true;
  TrackId track_id = 0;
  ClassId class_id = 0;
  std::string label;
  Shape shape = Shape::Rect;
  double width = 0.0;
  double height = 0.0;
  std::vector<Keyframe> path;
  std::vector<FrameRange> hidden;
  std::vector<Confusion> confusions;
};

struct Pose {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;
};

struct DecisionExpectation {
  TrackId track_id = 0;
  std::vector<std::string> decisions;  // "accept", "reject", "reassign:<class>"
};

struct Expectation {
  std::string preset;
  std::vector<DecisionExpectation> decisions;
  std::optional<std::size_t> id_switches_exact;
  std::optional<std::size_t> id_switches_min;
  std::vector<std::pair<ClassId, int>> silent_after;
};

struct ScenarioScript {
  std::string name;
  std::string description;
  int frames = 60;
  int height = 128;
  int width = 128;
  int channels = 16;
  double score_jitter = 0.01;
  double feature_jitter = 0.05;
  int mask_jitter = 1;
  double confusion_probability = 0.0;
  std::optional<double> confusion_score;  // empty: mirror the target's scores
  double separation = 0.2;
  bool occlusion_band = false;
  double band_low = 0.65;
  double band_high = 0.95;
  std::vector<ObjectScript> objects;
  std::vector<Expectation> expectations;

  /// Throws std::invalid_argument on inconsistent scripts.
  void validate() const;
  Pose pose(std::size_t object, int t) const;
  bool rendered(std::size_t object, int t) const;
  std::size_t index_of(std::string_view object_name) const;
  std::vector<std::size_t> tracked_objects() const;
  std::vector<ClassDecl> class_table() const;
  std::vector<TrackDecl> track_table() const;
  const Expectation* expectation(std::string_view preset) const;
};

ScenarioScript parse_scenario(std::string_view text, std::string_view origin = "<text>");
ScenarioScript load_scenario(const std::filesystem::path& path);

/// Built-in catalog: S1 occlusion and re-entry, S2 turnover, S3 post-exit
/// hallucination, S4 simultaneous exit with swapped re-entry, S5
/// low-visibility frames before an occlusion.
const std::vector<std::string>& catalog_names();
std::string_view catalog_text(std::string_view name);
ScenarioScript catalog(std::string_view name);

/// A catalog name or a path to a script file.
ScenarioScript resolve_scenario(std::string_view name_or_path);

/// Rasterizes one object at a pose onto an unbounded pixel grid. Pixel
/// (x, y) is inside if its center (x + 0.5, y + 0.5) is.
bool inside(Shape shape, const Pose& pose, double px, double py);
std::size_t nominal_area(Shape shape, const Pose& pose);

struct SyntheticFrame {
  int t = 0;
  LabelMap gt;
  std::vector<BinaryMask> masks;   // visible part, one per object
  std::vector<double> visibility;  // visible / nominal, one per object
  std::vector<int> owner;          // object index per pixel, -1 background
};

SyntheticFrame render(const ScenarioScript& script, int t);

/// Morphological dilation (radius > 0) or erosion (radius < 0) with a
/// square structuring element.
BinaryMask morph(const BinaryMask& mask, int radius);
BinaryMask shift(const BinaryMask& mask, int dx, int dy);

/// Deterministic generator for one (script, seed) pair. Frame t depends only
/// on (script, seed, t).
class Generator {
 public:
  Generator(ScenarioScript script, std::uint64_t seed);

  const ScenarioScript& script() const { return script_; }
  std::uint64_t seed() const { return seed_; }
  StreamHeader header() const;

  /// Per object and scale, the appearance prototype.
  const std::vector<std::vector<std::vector<double>>>& prototypes() const { return prototypes_; }
  const std::vector<double>& visibility(int t) const { return visibility_.at(static_cast<std::size_t>(t)); }

  SyntheticFrame frame(int t) const;
  FrameBlock predict(const SyntheticFrame& frame) const;

  /// Object whose prediction the given tracked object's record reports.
  std::size_t source_of(std::size_t object, int t) const;

 private:
  std::mt19937_64 frame_rng(int t, std::uint64_t stream) const;
  std::vector<FeatureMap> features(const SyntheticFrame& frame) const;
  bool scripted_confusion(std::size_t object, int t, std::size_t* target) const;
  bool reentry(std::size_t object, int t) const;

  ScenarioScript script_;
  std::uint64_t seed_;
  std::vector<std::vector<std::vector<double>>> prototypes_;  // object, scale, channel
  std::vector<std::vector<double>> background_;             // scale, channel
  std::vector<std::vector<double>> visibility_;             // t, object
};

inline constexpr int kScaleStrides[2] = {8, 16};

struct SimulatedStream {
  RecordStream records;
  std::vector<LabelMap> gt;
};

/// Generates every frame. Throws std::runtime_error if the script asks for
/// an occlusion-band frame and none occurs.
SimulatedStream generate(const ScenarioScript& script, std::uint64_t seed);

}  // namespace memtrack::sim
