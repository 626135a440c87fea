#include "memtrack/engine_config.hpp"

#include "memtrack/kv_file.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace memtrack {

EngineConfig EngineConfig::resolved() const {
  EngineConfig c = *this;
  if (c.baseline_mode) {
    c.memory_size = 7;
    c.tau_rel = 0.01;
    c.occlusion_memory = false;
    c.reid = false;
  }
  return c;
}

void EngineConfig::validate() const {
  const EngineConfig c = resolved();
  if (c.memory_size < posenc::kBaseSlots) throw std::invalid_argument("memory_size must be >= 7");
  if (c.window < 1) throw std::invalid_argument("window must be >= 1");
  if (c.bank_cap < 1) throw std::invalid_argument("bank_cap must be >= 1");
  if (c.occlusion_memory && !(c.tau_occ < c.tau_rel)) {
    throw std::invalid_argument("tau_occ must be below tau_rel");
  }
  if (c.occlusion_epsilon < 0.0) throw std::invalid_argument("occlusion_epsilon must be >= 0");
  c.memory_config().validate();
}

MemoryConfig EngineConfig::memory_config() const {
  const EngineConfig c = resolved();
  return {c.memory_size, c.tau_rel, c.tau_occ, c.occlusion_memory};
}

reid::Thresholds EngineConfig::thresholds() const {
  return {delta_sim, delta_sim_neg, delta_iou};
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string EngineConfig::to_kv() const {
  std::ostringstream os;
  os << "memory_size = " << memory_size << '\n'
     << "tau_rel = " << fmt_double(tau_rel) << '\n'
     << "tau_occ = " << fmt_double(tau_occ) << '\n'
     << "window = " << window << '\n'
     << "bank_cap = " << bank_cap << '\n'
     << "delta_sim = " << fmt_double(delta_sim) << '\n'
     << "delta_sim_neg = " << fmt_double(delta_sim_neg) << '\n'
     << "delta_iou = " << fmt_double(delta_iou) << '\n'
     << "delta_agree = " << fmt_double(delta_agree) << '\n'
     << "scheme = " << posenc::to_string(scheme) << '\n'
     << "occlusion_memory = " << (occlusion_memory ? "true" : "false") << '\n'
     << "reid = " << (reid ? "true" : "false") << '\n'
     << "baseline_mode = " << (baseline_mode ? "true" : "false") << '\n'
     << "occlusion_epsilon = " << fmt_double(occlusion_epsilon) << '\n'
     << "buffer_cap = " << (buffer_cap ? std::to_string(*buffer_cap) : "none") << '\n';
  return os.str();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t EngineConfig::hash() const { return fnv1a64(to_kv()); }

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"baseline", "rm", "rm-me", "reid", "full"};
  return names;
}

EngineConfig preset(std::string_view name) {
  EngineConfig c;
  if (name == "full") return c;
  if (name == "baseline") {
    c.baseline_mode = true;
    return c.resolved();
  }
  c.occlusion_memory = false;
  if (name == "reid") return c;
  c.reid = false;
  if (name == "rm-me") return c;
  if (name == "rm") {
    c.memory_size = 7;
    return c;
  }
  throw std::invalid_argument("unknown config preset '" + std::string(name) + "'");
}

EngineConfig parse_config(std::string_view text, std::string_view origin) {
  const KvDocument doc = parse_kv(text, origin);
  if (doc.sections.size() != 1) throw KvError(std::string(origin) + ": config files have no sections");
  const KvSection& s = doc.sections.front();
  EngineConfig c = preset(s.get("preset").value_or("full"));
  for (const auto& [key, value] : s.entries) {
    if (key == "preset") continue;
    if (key == "memory_size") c.memory_size = parse_int(value, key);
    else if (key == "tau_rel") c.tau_rel = parse_double(value, key);
    else if (key == "tau_occ") c.tau_occ = parse_double(value, key);
    else if (key == "window") c.window = parse_int(value, key);
    else if (key == "bank_cap") c.bank_cap = parse_int(value, key);
    else if (key == "delta_sim") c.delta_sim = parse_double(value, key);
    else if (key == "delta_sim_neg") c.delta_sim_neg = parse_double(value, key);
    else if (key == "delta_iou") c.delta_iou = parse_double(value, key);
    else if (key == "delta_agree") c.delta_agree = parse_double(value, key);
    else if (key == "scheme") c.scheme = posenc::parse_scheme(value);
    else if (key == "occlusion_memory") c.occlusion_memory = parse_bool(value, key);
    else if (key == "reid") c.reid = parse_bool(value, key);
    else if (key == "baseline_mode") c.baseline_mode = parse_bool(value, key);
    else if (key == "occlusion_epsilon") c.occlusion_epsilon = parse_double(value, key);
    else if (key == "buffer_cap") {
      if (value == "none") c.buffer_cap.reset();
      else c.buffer_cap = static_cast<std::size_t>(parse_int(value, key));
    } else {
      throw KvError(std::string(origin) + ": unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw KvError("cannot open config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path.string());
}

EngineConfig resolve_config(std::string_view name_or_path) {
  for (const auto& n : preset_names()) {
    if (n == name_or_path) return preset(n);
  }
  return load_config(std::filesystem::path(name_or_path));
}

}  // namespace memtrack
