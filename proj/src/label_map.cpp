#include "memtrack/label_map.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>

namespace memtrack {

LabelMap::LabelMap(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("LabelMap: negative dimensions");
  labels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

BinaryMask LabelMap::mask_of(ClassId cls) const {
  BinaryMask m(width_, height_);
  auto px = m.pixels();
  for (std::size_t i = 0; i < labels_.size(); ++i) px[i] = labels_[i] == cls ? 1 : 0;
  return m;
}

bool LabelMap::contains(ClassId cls) const {
  return std::find(labels_.begin(), labels_.end(), static_cast<std::uint8_t>(cls)) != labels_.end();
}

void write_pgm(const std::filesystem::path& path, const LabelMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P5\n" << map.width() << ' ' << map.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(map.labels().data()),
            static_cast<std::streamsize>(map.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

// next header token, skipping whitespace and '#' comments
std::string pgm_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

LabelMap read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (pgm_token(in) != "P5") throw std::runtime_error(path.string() + ": not a binary PGM");
  const int w = std::stoi(pgm_token(in));
  const int h = std::stoi(pgm_token(in));
  const int maxval = std::stoi(pgm_token(in));
  if (maxval > 255) throw std::runtime_error(path.string() + ": 16-bit PGM not supported");
  LabelMap map(w, h);
  in.read(reinterpret_cast<char*>(map.labels().data()), static_cast<std::streamsize>(map.size()));
  if (in.gcount() != static_cast<std::streamsize>(map.size())) {
    throw std::runtime_error(path.string() + ": truncated pixel data");
  }
  return map;
}

}  // namespace memtrack
