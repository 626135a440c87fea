#pragma once

// Minimal INI-style key/value documents shared by engine configs and
// scenario scripts:
//
//   # comment
//   key = value
//   [section name]
//   key = value
//
// Keys before the first header belong to the unnamed section "".

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace memtrack {

class KvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KvSection {
  std::string name;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> get(std::string_view key) const;
  std::string require(std::string_view key) const;
  double get_double(std::string_view key, double fallback) const;
  int get_int(std::string_view key, int fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
};

struct KvDocument {
  std::vector<KvSection> sections;

  const KvSection* find(std::string_view name) const;
};

KvDocument parse_kv(std::string_view text, std::string_view origin = "<text>");
KvDocument load_kv(const std::filesystem::path& path);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

double parse_double(std::string_view s, std::string_view what);
int parse_int(std::string_view s, std::string_view what);
bool parse_bool(std::string_view s, std::string_view what);

}  // namespace memtrack
