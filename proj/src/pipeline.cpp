#include "memtrack/pipeline.hpp"

#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace memtrack {

namespace {

std::ofstream open_trace(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file " + path.string());
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void step_into(Tracker& tracker, const StreamHeader& header, const FrameBlock& block, ReplayResult& out) {
  if (block.records.size() != header.tracks.size()) {
    throw std::invalid_argument("frame " + std::to_string(block.frame.frame_index) + " has " +
                                std::to_string(block.records.size()) + " records for " +
                                std::to_string(header.tracks.size()) + " tracks");
  }
  for (auto& r : tracker.step(block.frame, block.records)) out.frames.push_back(std::move(r));
}

}  // namespace

JsonlTrace::JsonlTrace(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  memory_ = open_trace(dir / "memory.jsonl");
  reid_ = open_trace(dir / "reid.jsonl");
  events_ = open_trace(dir / "events.jsonl");
}

void JsonlTrace::memory(const nlohmann::json& record) { memory_ << record.dump() << '\n'; }
void JsonlTrace::reid(const nlohmann::json& record) { reid_ << record.dump() << '\n'; }
void JsonlTrace::event(const nlohmann::json& record) { events_ << record.dump() << '\n'; }

std::vector<std::string> RecordingTrace::decisions(TrackId track) const {
  std::vector<std::string> out;
  for (const auto& r : reid_records) {
    if (r.at("track").get<TrackId>() != track) continue;
    std::string d = r.at("decision").get<std::string>();
    if (d == "reassign") d += ":" + std::to_string(r.at("target").get<int>());
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<LabelMap> ReplayResult::labels() const {
  std::vector<LabelMap> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.labels);
  return out;
}

ReplayResult replay(RecordReader& reader, const EngineConfig& config, TraceSink* trace) {
  const auto& header = reader.header();
  Tracker tracker(config, header.tracks, header.height, header.width);
  tracker.set_trace(trace);
  ReplayResult out;
  while (auto block = reader.next()) step_into(tracker, header, *block, out);
  for (auto& r : tracker.flush()) out.frames.push_back(std::move(r));
  return out;
}

ReplayResult replay(const RecordStream& stream, const EngineConfig& config, TraceSink* trace) {
  Tracker tracker(config, stream.header.tracks, stream.header.height, stream.header.width);
  tracker.set_trace(trace);
  ReplayResult out;
  for (const auto& block : stream.blocks) step_into(tracker, stream.header, block, out);
  for (auto& r : tracker.flush()) out.frames.push_back(std::move(r));
  return out;
}

RunMetrics evaluate(std::span<const LabelMap> pred, std::span<const LabelMap> gt,
                    const std::vector<ClassId>& classes) {
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(pred.size()) + " predicted frames for " +
                                std::to_string(gt.size()) + " ground-truth frames");
  }
  EvalAccumulator acc(classes);
  for (std::size_t i = 0; i < pred.size(); ++i) acc.accumulate(pred[i], gt[i]);
  return {acc.finalize(), count_id_switches(pred, gt, classes)};
}

ScenarioRun run_scenario(const sim::ScenarioScript& script, const sim::SimulatedStream& stream,
                         std::uint64_t seed, const std::string& config_name, const EngineConfig& config) {
  ScenarioRun run;
  run.scenario = script.name;
  run.seed = seed;
  run.config_name = config_name;
  run.config = config;
  run.result = replay(stream.records, config, &run.trace);
  const auto labels = run.result.labels();
  run.metrics = evaluate(labels, stream.gt, stream.records.header.class_ids());
  return run;
}

std::vector<std::string> check_expectations(const sim::Expectation& expect, const ScenarioRun& run) {
  std::vector<std::string> failures;
  const std::string where = run.scenario + " seed " + std::to_string(run.seed) + " [" + run.config_name + "]: ";
  for (const auto& d : expect.decisions) {
    const auto got = run.trace.decisions(d.track_id);
    if (got != d.decisions) {
      std::string g, w;
      for (const auto& x : got) g += (g.empty() ? "" : ",") + x;
      for (const auto& x : d.decisions) w += (w.empty() ? "" : ",") + x;
      failures.push_back(where + "track " + std::to_string(d.track_id) + " decisions [" + g + "], expected [" + w + "]");
    }
  }
  if (expect.id_switches_exact && run.metrics.id_switches != *expect.id_switches_exact) {
    failures.push_back(where + "id switches " + std::to_string(run.metrics.id_switches) + ", expected " +
                       std::to_string(*expect.id_switches_exact));
  }
  if (expect.id_switches_min && run.metrics.id_switches < *expect.id_switches_min) {
    failures.push_back(where + "id switches " + std::to_string(run.metrics.id_switches) + ", expected at least " +
                       std::to_string(*expect.id_switches_min));
  }
  for (const auto& [cls, after] : expect.silent_after) {
    for (const auto& f : run.result.frames) {
      if (static_cast<int>(f.frame.frame_index) > after && f.labels.contains(cls)) {
        failures.push_back(where + "class " + std::to_string(cls) + " predicted at frame " +
                           std::to_string(f.frame.frame_index));
        break;
      }
    }
  }
  return failures;
}

std::vector<AblationRow> ablate(const std::vector<sim::ScenarioScript>& scenarios, int seeds,
                                std::uint64_t first_seed) {
  if (seeds < 1) throw std::invalid_argument("ablate: seeds must be positive");
  if (scenarios.empty()) throw std::invalid_argument("ablate: no scenarios");
  const auto& names = preset_names();
  std::vector<AblationRow> rows(names.size());
  std::string scenario_list;
  for (const auto& s : scenarios) scenario_list += (scenario_list.empty() ? "" : " ") + s.name;
  for (std::size_t p = 0; p < names.size(); ++p) {
    rows[p].config = names[p];
    rows[p].config_hash = preset(names[p]).hash();
    rows[p].scenarios = scenario_list;
  }
  for (const auto& script : scenarios) {
    for (int k = 0; k < seeds; ++k) {
      const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(k);
      const auto stream = sim::generate(script, seed);
      for (std::size_t p = 0; p < names.size(); ++p) {
        const auto run = run_scenario(script, stream, seed, names[p], preset(names[p]));
        auto& row = rows[p];
        row.challenge_iou += run.metrics.summary.challenge_iou;
        row.iou += run.metrics.summary.iou;
        row.mciou += run.metrics.summary.mciou;
        row.id_switches += static_cast<double>(run.metrics.id_switches);
        ++row.runs;
      }
    }
  }
  for (auto& row : rows) {
    const double n = static_cast<double>(row.runs);
    row.challenge_iou /= n;
    row.iou /= n;
    row.mciou /= n;
    row.id_switches /= n;
  }
  return rows;
}

void write_eval_csv(std::ostream& out, std::uint64_t config_hash, const RunMetrics& metrics,
                    const std::vector<ClassId>& classes) {
  out << "config_hash,challenge_iou,iou,mciou,id_switches,frames";
  for (auto c : classes) out << ",iou_class_" << c;
  out << '\n';
  out << hex64(config_hash) << ',' << fmt(metrics.summary.challenge_iou) << ',' << fmt(metrics.summary.iou) << ','
      << fmt(metrics.summary.mciou) << ',' << metrics.id_switches << ',' << metrics.summary.frames;
  for (auto c : classes) {
    out << ',';
    for (const auto& [cls, v] : metrics.summary.per_class) {
      if (cls == c && v) out << fmt(*v);
    }
  }
  out << '\n';
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
  out << "config,config_hash,scenarios,runs,challenge_iou,iou,mciou,id_switches\n";
  for (const auto& r : rows) {
    out << r.config << ',' << hex64(r.config_hash) << ',' << r.scenarios << ',' << r.runs << ','
        << fmt(r.challenge_iou) << ',' << fmt(r.iou) << ',' << fmt(r.mciou) << ',' << fmt(r.id_switches) << '\n';
  }
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string frame_file_name(std::uint32_t frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06u.pgm", frame_index);
  return buf;
}

}  // namespace memtrack
