#pragma once

#include "memtrack/memory_bank.hpp"
#include "memtrack/posenc.hpp"
#include "memtrack/reid.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memtrack {

struct EngineConfig {
  int memory_size = 15;
  double tau_rel = 0.95;
  double tau_occ = 0.65;
  int window = 5;  // K
  int bank_cap = 20;
  double delta_sim = 0.01;
  double delta_sim_neg = -0.01;
  double delta_iou = 0.8;
  double delta_agree = 0.8;
  posenc::Scheme scheme = posenc::Scheme::Piecewise;
  bool occlusion_memory = true;
  bool reid = true;
  // Forces the vanilla FIFO arm: M = 7, tau_rel = 0.01, no occlusion memory, no re-ID.
  bool baseline_mode = false;
  double occlusion_epsilon = 1e-6;
  std::optional<std::size_t> buffer_cap;

  /// Copy with baseline_mode overrides applied.
  EngineConfig resolved() const;
  void validate() const;

  MemoryConfig memory_config() const;
  reid::Thresholds thresholds() const;

  /// Canonical "key = value" text; identical configs give identical text.
  std::string to_kv() const;
  std::uint64_t hash() const;

  bool operator==(const EngineConfig&) const = default;
};

/// Ablation arms in order: baseline, rm, rm-me, reid, full.
const std::vector<std::string>& preset_names();
EngineConfig preset(std::string_view name);

/// Reads a config file. An optional `preset = name` key picks the starting
/// point; every other key overrides one EngineConfig field.
EngineConfig parse_config(std::string_view text, std::string_view origin = "<text>");
EngineConfig load_config(const std::filesystem::path& path);

/// A preset name or a path to a config file.
EngineConfig resolve_config(std::string_view name_or_path);

std::uint64_t fnv1a64(std::string_view data);

}  // namespace memtrack
