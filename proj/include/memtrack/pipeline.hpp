#pragma once

// End-to-end plumbing shared by the CLI and the tests: replay a record
// stream through the tracker, score it, run the five-arm ablation, and
// check a scenario's expected events.

#include "memtrack/engine_config.hpp"
#include "memtrack/metrics.hpp"
#include "memtrack/record_io.hpp"
#include "memtrack/simulator.hpp"
#include "memtrack/tracker.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

namespace memtrack {

/// Writes memory.jsonl, reid.jsonl and events.jsonl into a directory.
class JsonlTrace : public TraceSink {
 public:
  explicit JsonlTrace(const std::filesystem::path& dir);
  void memory(const nlohmann::json& record) override;
  void reid(const nlohmann::json& record) override;
  void event(const nlohmann::json& record) override;

 private:
  std::ofstream memory_;
  std::ofstream reid_;
  std::ofstream events_;
};

/// Keeps every trace record in memory.
class RecordingTrace : public TraceSink {
 public:
  void memory(const nlohmann::json& record) override { memory_records.push_back(record); }
  void reid(const nlohmann::json& record) override { reid_records.push_back(record); }
  void event(const nlohmann::json& record) override { event_records.push_back(record); }

  /// Recovery decisions of one track in order: "accept", "reject" or
  /// "reassign:<class>".
  std::vector<std::string> decisions(TrackId track) const;

  std::vector<nlohmann::json> memory_records;
  std::vector<nlohmann::json> reid_records;
  std::vector<nlohmann::json> event_records;
};

struct ReplayResult {
  std::vector<FrameResult> frames;  // one per input frame, in order
  std::vector<LabelMap> labels() const;
};

/// Replays frames in order. Blocks must list exactly the header's tracks.
ReplayResult replay(RecordReader& reader, const EngineConfig& config, TraceSink* trace = nullptr);
ReplayResult replay(const RecordStream& stream, const EngineConfig& config, TraceSink* trace = nullptr);

struct RunMetrics {
  EvalSummary summary;
  std::size_t id_switches = 0;
};

RunMetrics evaluate(std::span<const LabelMap> pred, std::span<const LabelMap> gt,
                    const std::vector<ClassId>& classes);

struct ScenarioRun {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string config_name;
  EngineConfig config;
  ReplayResult result;
  RunMetrics metrics;
  RecordingTrace trace;
};

ScenarioRun run_scenario(const sim::ScenarioScript& script, const sim::SimulatedStream& stream,
                         std::uint64_t seed, const std::string& config_name, const EngineConfig& config);

/// Human-readable failures; empty when every expectation holds.
std::vector<std::string> check_expectations(const sim::Expectation& expect, const ScenarioRun& run);

struct AblationRow {
  std::string config;
  std::uint64_t config_hash = 0;
  std::string scenarios;  // space-separated names
  std::size_t runs = 0;
  double challenge_iou = 0.0;  // means over runs
  double iou = 0.0;
  double mciou = 0.0;
  double id_switches = 0.0;
};

/// Runs every preset on every (scenario, seed) pair with seeds
/// first_seed .. first_seed + seeds - 1. Rows follow preset_names().
std::vector<AblationRow> ablate(const std::vector<sim::ScenarioScript>& scenarios, int seeds,
                                std::uint64_t first_seed = 0);

/// CSV columns: config_hash,challenge_iou,iou,mciou,id_switches,frames,
/// then iou_class_<id> per declared class (empty when excluded).
void write_eval_csv(std::ostream& out, std::uint64_t config_hash, const RunMetrics& metrics,
                    const std::vector<ClassId>& classes);

/// CSV columns: config,config_hash,scenarios,runs,challenge_iou,iou,mciou,
/// id_switches.
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

std::string hex64(std::uint64_t value);
std::string frame_file_name(std::uint32_t frame_index);

}  // namespace memtrack
