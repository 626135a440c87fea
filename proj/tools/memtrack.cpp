// memtrack command-line tool: simulate, replay, eval, ablate, posenc-dump.

#include "memtrack/pipeline.hpp"
#include "memtrack/posenc.hpp"
#include "memtrack/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>

namespace fs = std::filesystem;
using namespace memtrack;

namespace {

fs::path sibling_dir(const fs::path& file, const std::string& suffix) {
  return file.parent_path() / (file.stem().string() + suffix);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

nlohmann::json class_json(const std::vector<ClassDecl>& classes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : classes) arr.push_back({{"id", c.id}, {"name", c.name}});
  return arr;
}

std::vector<ClassId> classes_from_json(const nlohmann::json& arr) {
  std::vector<ClassId> out;
  for (const auto& c : arr) out.push_back(c.at("id").get<ClassId>());
  return out;
}

std::map<std::string, fs::path> frame_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  static const std::regex pattern(R"(frame_\d+\.pgm)");
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (std::regex_match(name, pattern)) out.emplace(name, e.path());
  }
  return out;
}

void reset_dir(const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, path] : frame_files(dir)) fs::remove(path);
}

struct SimulateArgs {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string out;
  std::string gt;
  bool print_script = false;
};

int run_simulate(const SimulateArgs& a) {
  if (a.print_script) {
    std::cout << sim::catalog_text(a.scenario);
    return 0;
  }
  if (a.out.empty()) throw CLI::RequiredError("--out");
  const auto script = sim::resolve_scenario(a.scenario);
  const auto stream = sim::generate(script, a.seed);
  write_stream(a.out, stream.records);
  const fs::path gt_dir = a.gt.empty() ? sibling_dir(a.out, "_gt") : fs::path(a.gt);
  reset_dir(gt_dir);
  for (std::size_t i = 0; i < stream.gt.size(); ++i) {
    write_pgm(gt_dir / frame_file_name(stream.records.blocks[i].frame.frame_index), stream.gt[i]);
  }
  write_json(gt_dir / "classes.json", {{"scenario", script.name},
                                       {"seed", a.seed},
                                       {"classes", class_json(stream.records.header.classes)}});
  std::cerr << "wrote " << stream.records.blocks.size() << " frames to " << a.out << ", ground truth in "
            << gt_dir.string() << '\n';
  return 0;
}

struct ReplayArgs {
  std::string in;
  std::string config = "full";
  std::string trace;
  std::string out;
};

int run_replay(const ReplayArgs& a) {
  const EngineConfig config = resolve_config(a.config);
  std::ifstream in(a.in, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + a.in);
  RecordReader reader(in);
  std::unique_ptr<JsonlTrace> trace;
  if (!a.trace.empty()) trace = std::make_unique<JsonlTrace>(a.trace);
  const auto result = replay(reader, config, trace.get());
  const fs::path out_dir = a.out.empty() ? sibling_dir(a.in, "_pred") : fs::path(a.out);
  reset_dir(out_dir);
  for (const auto& f : result.frames) write_pgm(out_dir / frame_file_name(f.frame.frame_index), f.labels);
  write_json(out_dir / "run.json", {{"input", a.in},
                                    {"config", config.to_kv()},
                                    {"config_hash", hex64(config.hash())},
                                    {"frames", result.frames.size()},
                                    {"classes", class_json(reader.header().classes)}});
  std::cerr << "replayed " << result.frames.size() << " frames into " << out_dir.string() << '\n';
  return 0;
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string csv;
};

int run_eval(const EvalArgs& a) {
  const auto pred_files = frame_files(a.pred);
  const auto gt_files = frame_files(a.gt);
  if (gt_files.empty()) throw std::runtime_error("no ground-truth frames in " + a.gt);
  std::vector<LabelMap> pred, gt;
  for (const auto& [name, path] : gt_files) {
    const auto it = pred_files.find(name);
    if (it == pred_files.end()) throw std::runtime_error("prediction missing for " + name);
    gt.push_back(read_pgm(path));
    pred.push_back(read_pgm(it->second));
  }
  if (pred_files.size() != gt_files.size()) throw std::runtime_error("prediction has frames without ground truth");

  std::vector<ClassId> classes;
  std::uint64_t hash = 0;
  const fs::path run_json = fs::path(a.pred) / "run.json";
  const fs::path classes_json = fs::path(a.gt) / "classes.json";
  if (fs::exists(run_json)) {
    const auto j = read_json(run_json);
    classes = classes_from_json(j.at("classes"));
    hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
  } else if (fs::exists(classes_json)) {
    classes = classes_from_json(read_json(classes_json).at("classes"));
  } else {
    std::set<ClassId> seen;
    for (const auto* maps : {&pred, &gt}) {
      for (const auto& m : *maps) {
        for (auto v : m.labels()) {
          if (v) seen.insert(v);
        }
      }
    }
    classes.assign(seen.begin(), seen.end());
  }
  const auto metrics = evaluate(pred, gt, classes);
  if (a.csv.empty() || a.csv == "-") {
    write_eval_csv(std::cout, hash, metrics, classes);
  } else {
    std::ofstream out(a.csv);
    if (!out) throw std::runtime_error("cannot write " + a.csv);
    write_eval_csv(out, hash, metrics, classes);
  }
  return 0;
}

struct AblateArgs {
  std::vector<std::string> scenarios{"all"};
  int seeds = 5;
  std::uint64_t first_seed = 0;
  std::string csv;
};

int run_ablate(const AblateArgs& a) {
  std::vector<sim::ScenarioScript> scripts;
  for (const auto& s : a.scenarios) {
    if (s == "all") {
      for (const auto& n : sim::catalog_names()) scripts.push_back(sim::catalog(n));
    } else {
      scripts.push_back(sim::resolve_scenario(s));
    }
  }
  const auto rows = ablate(scripts, a.seeds, a.first_seed);
  if (a.csv.empty() || a.csv == "-") {
    write_ablation_csv(std::cout, rows);
  } else {
    std::ofstream out(a.csv);
    if (!out) throw std::runtime_error("cannot write " + a.csv);
    write_ablation_csv(out, rows);
  }
  return 0;
}

struct PosencArgs {
  std::string scheme = "piecewise";
  int m = 15;
  int dim = 0;
};

int run_posenc(const PosencArgs& a) {
  const auto scheme = posenc::parse_scheme(a.scheme);
  const auto s = posenc::slots(scheme, a.m);
  std::cout << "slot,lower,upper,alpha";
  posenc::EncodingTable table;
  if (a.dim > 0) {
    table = posenc::expand(posenc::sinusoidal_base(static_cast<std::size_t>(a.dim)), a.m, scheme);
    for (int d = 0; d < a.dim; ++d) std::cout << ",p" << d;
  }
  std::cout << '\n';
  for (std::size_t k = 0; k < s.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", s[k].alpha);
    std::cout << k << ',' << s[k].lower << ',' << s[k].upper << ',' << buf;
    if (a.dim > 0) {
      for (double v : table.entries[k]) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        std::cout << ',' << buf;
      }
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memtrack: gated memory and re-identification for multi-instance tracking"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic record stream and its ground truth");
  simulate->add_option("--scenario", sim_args.scenario, "Catalog name (S1..S5) or script path")->required();
  simulate->add_option("--seed", sim_args.seed, "Random seed");
  simulate->add_option("--out", sim_args.out, "Output record file (.rmdi)");
  simulate->add_option("--gt", sim_args.gt, "Ground-truth directory (default <out stem>_gt)");
  simulate->add_flag("--print-script", sim_args.print_script, "Print the catalog script and exit");

  ReplayArgs replay_args;
  auto* replay_cmd = app.add_subcommand("replay", "Run the tracker over a record stream");
  replay_cmd->add_option("--in", replay_args.in, "Input record file")->required();
  replay_cmd->add_option("--config", replay_args.config, "Preset name or config file")->capture_default_str();
  replay_cmd->add_option("--trace", replay_args.trace, "Trace directory for JSON-lines output");
  replay_cmd->add_option("--out", replay_args.out, "Prediction directory (default <in stem>_pred)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted label maps against ground truth");
  eval_cmd->add_option("--pred", eval_args.pred, "Prediction directory")->required();
  eval_cmd->add_option("--gt", eval_args.gt, "Ground-truth directory")->required();
  eval_cmd->add_option("--csv", eval_args.csv, "Output CSV (default stdout)");

  AblateArgs ablate_args;
  auto* ablate_cmd = app.add_subcommand("ablate", "Compare the five configurations on scenarios");
  ablate_cmd->add_option("--scenario", ablate_args.scenarios, "Scenario names or paths, or 'all'")->capture_default_str();
  ablate_cmd->add_option("--seeds", ablate_args.seeds, "Seeds per scenario")->capture_default_str()->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--first-seed", ablate_args.first_seed, "First seed")->capture_default_str();
  ablate_cmd->add_option("--csv", ablate_args.csv, "Output CSV (default stdout)");

  PosencArgs posenc_args;
  auto* posenc_cmd = app.add_subcommand("posenc-dump", "Print the interpolation slots of an expanded table");
  posenc_cmd->add_option("--scheme", posenc_args.scheme, "piecewise or uniform")->capture_default_str();
  posenc_cmd->add_option("--m", posenc_args.m, "Memory size")->capture_default_str();
  posenc_cmd->add_option("--dim", posenc_args.dim, "Also print a sinusoidal table of this width");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim_args);
    if (replay_cmd->parsed()) return run_replay(replay_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (ablate_cmd->parsed()) return run_ablate(ablate_args);
    if (posenc_cmd->parsed()) return run_posenc(posenc_args);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "memtrack: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
