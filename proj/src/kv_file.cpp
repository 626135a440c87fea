#include "memtrack/kv_file.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace memtrack {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::string_view what) {
  const std::string t = trim(s);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw KvError("expected a number for '" + std::string(what) + "', got '" + t + "'");
}

int parse_int(std::string_view s, std::string_view what) {
  const std::string t = trim(s);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw KvError("expected an integer for '" + std::string(what) + "', got '" + t + "'");
  }
  return v;
}

bool parse_bool(std::string_view s, std::string_view what) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return false;
  throw KvError("expected a boolean for '" + std::string(what) + "', got '" + t + "'");
}

std::optional<std::string> KvSection::get(std::string_view key) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  return std::nullopt;
}

std::string KvSection::require(std::string_view key) const {
  auto v = get(key);
  if (!v) {
    throw KvError("section [" + name + "] (line " + std::to_string(line) + ") is missing '" +
                  std::string(key) + "'");
  }
  return *v;
}

double KvSection::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

int KvSection::get_int(std::string_view key, int fallback) const {
  auto v = get(key);
  return v ? parse_int(*v, key) : fallback;
}

bool KvSection::get_bool(std::string_view key, bool fallback) const {
  auto v = get(key);
  return v ? parse_bool(*v, key) : fallback;
}

const KvSection* KvDocument::find(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

KvDocument parse_kv(std::string_view text, std::string_view origin) {
  KvDocument doc;
  doc.sections.push_back({"", 0, {}});
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw KvError(std::string(origin) + ":" + std::to_string(line_no) + ": unterminated section header");
      }
      doc.sections.push_back({trim(std::string_view(line).substr(1, line.size() - 2)), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw KvError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    doc.sections.back().entries.emplace_back(trim(std::string_view(line).substr(0, eq)),
                                             trim(std::string_view(line).substr(eq + 1)));
  }
  return doc;
}

KvDocument load_kv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw KvError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kv(ss.str(), path.string());
}

}  // namespace memtrack
