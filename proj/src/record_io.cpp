#include "memtrack/record_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace memtrack {

namespace {

constexpr char kMagic[4] = {'R', 'M', 'D', 'I'};
// sanity bound on a single block; a real frame is far smaller
constexpr std::uint32_t kMaxBlockBytes = 1u << 30;

class ByteWriter {
 public:
  void u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& data() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::optional<std::size_t> block)
      : data_(data), block_(block) {}

  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw FormatError("truncated data", block_);
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::optional<std::size_t> block_;
};

std::uint32_t read_u32(std::istream& in, bool& eof_clean, std::optional<std::size_t> block) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  const auto got = in.gcount();
  if (got == 0 && in.eof()) {
    eof_clean = true;
    return 0;
  }
  if (got != 4) throw FormatError("truncated data", block);
  eof_clean = false;
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::vector<std::uint8_t> read_exact(std::istream& in, std::size_t n, std::optional<std::size_t> block) {
  std::vector<std::uint8_t> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw FormatError("truncated data", block);
  return buf;
}

void encode_header(ByteWriter& w, const StreamHeader& h) {
  w.u16(h.version);
  w.u32(static_cast<std::uint32_t>(h.height));
  w.u32(static_cast<std::uint32_t>(h.width));
  w.u16(static_cast<std::uint16_t>(h.scales.size()));
  for (const auto& s : h.scales) {
    w.u32(s.height);
    w.u32(s.width);
    w.u32(s.channels);
  }
  w.u16(static_cast<std::uint16_t>(h.classes.size()));
  for (const auto& c : h.classes) {
    w.u16(c.id);
    w.u16(static_cast<std::uint16_t>(c.name.size()));
    w.bytes(c.name.data(), c.name.size());
  }
  w.u16(static_cast<std::uint16_t>(h.tracks.size()));
  for (const auto& t : h.tracks) {
    w.u32(t.track_id);
    w.u16(t.class_id);
  }
}

void check_header(const StreamHeader& h) {
  if (h.height < 1 || h.width < 1) throw std::invalid_argument("header: frame size must be positive");
  if (h.scales.empty()) throw std::invalid_argument("header: at least one feature scale is required");
  if (h.scales.size() > 0xffff || h.classes.size() > 0xffff || h.tracks.size() > 0xffff) {
    throw std::invalid_argument("header: table too large");
  }
  for (const auto& c : h.classes) {
    if (c.name.size() > 0xffff) throw std::invalid_argument("header: class name too long");
  }
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<ClassId> StreamHeader::class_ids() const {
  std::vector<ClassId> ids;
  for (const auto& c : classes) ids.push_back(c.id);
  return ids;
}

bool StreamHeader::operator==(const StreamHeader& o) const {
  if (version != o.version || height != o.height || width != o.width || scales != o.scales ||
      classes != o.classes || tracks.size() != o.tracks.size()) {
    return false;
  }
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].track_id != o.tracks[i].track_id || tracks[i].class_id != o.tracks[i].class_id) return false;
  }
  return true;
}

FormatError::FormatError(const std::string& what, std::optional<std::size_t> block)
    : std::runtime_error(block ? "block " + std::to_string(*block) + ": " + what : "header: " + what),
      block_(block) {}

RecordWriter::RecordWriter(std::ostream& out, StreamHeader header)
    : out_(out), header_(std::move(header)) {
  check_header(header_);
  ByteWriter w;
  encode_header(w, header_);
  const std::uint32_t crc = crc32(w.data());
  out_.write(kMagic, 4);
  out_.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.data().size()));
  ByteWriter tail;
  tail.u32(crc);
  out_.write(reinterpret_cast<const char*>(tail.data().data()), 4);
  if (!out_) throw std::runtime_error("RecordWriter: write failed");
}

void RecordWriter::write(const FrameBlock& block) {
  if (last_frame_ && block.frame.frame_index <= *last_frame_) {
    throw std::invalid_argument("RecordWriter: frame indices must increase");
  }
  if (block.frame.height != header_.height || block.frame.width != header_.width) {
    throw std::invalid_argument("RecordWriter: frame size does not match header");
  }
  if (block.records.size() != header_.tracks.size()) {
    throw std::invalid_argument("RecordWriter: block must hold one record per declared track");
  }
  for (std::size_t i = 0; i < block.records.size(); ++i) {
    if (block.records[i].track_id != header_.tracks[i].track_id) {
      throw std::invalid_argument("RecordWriter: records must follow the header's track order");
    }
  }
  ByteWriter w;
  w.u32(block.frame.frame_index);
  w.u16(static_cast<std::uint16_t>(block.records.size()));
  for (const auto& rec : block.records) {
    if (rec.frame != block.frame) throw std::invalid_argument("RecordWriter: record frame differs from block");
    w.u32(rec.track_id);
    for (const auto& cand : rec.candidates) {
      if (cand.mask.width() != header_.width || cand.mask.height() != header_.height) {
        throw std::invalid_argument("RecordWriter: mask size does not match header");
      }
      w.f32(cand.quality);
      w.f32(cand.objectness);
      const auto runs = cand.mask.to_rle();
      w.u32(static_cast<std::uint32_t>(runs.size()));
      for (auto r : runs) w.u32(r);
    }
    if (rec.features.size() != header_.scales.size()) {
      throw std::invalid_argument("RecordWriter: record has the wrong number of feature scales");
    }
    for (std::size_t l = 0; l < rec.features.size(); ++l) {
      const auto& fm = rec.features[l];
      const auto& spec = header_.scales[l];
      if (static_cast<std::uint32_t>(fm.height) != spec.height ||
          static_cast<std::uint32_t>(fm.width) != spec.width ||
          static_cast<std::uint32_t>(fm.channels) != spec.channels ||
          fm.values.size() != static_cast<std::size_t>(spec.height) * spec.width * spec.channels) {
        throw std::invalid_argument("RecordWriter: feature map does not match header scale " + std::to_string(l));
      }
      for (float v : fm.values) w.f32(v);
    }
  }
  const auto& payload = w.data();
  ByteWriter frame;
  frame.u32(static_cast<std::uint32_t>(payload.size()));
  out_.write(reinterpret_cast<const char*>(frame.data().data()), 4);
  out_.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  ByteWriter tail;
  tail.u32(crc32(payload));
  out_.write(reinterpret_cast<const char*>(tail.data().data()), 4);
  if (!out_) throw std::runtime_error("RecordWriter: write failed");
  last_frame_ = block.frame.frame_index;
  ++blocks_;
}

RecordReader::RecordReader(std::istream& in) : in_(in) {
  char magic[4] = {};
  in_.read(magic, 4);
  if (in_.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic");

  // The header has variable length; read the fixed prefix, then the tables.
  ByteWriter raw;
  auto pull = [&](std::size_t n) {
    auto bytes = read_exact(in_, n, std::nullopt);
    raw.bytes(bytes.data(), bytes.size());
    return bytes;
  };
  auto le16 = [](const std::vector<std::uint8_t>& b) { return static_cast<std::uint16_t>(b[0] | (b[1] << 8)); };
  auto le32 = [](const std::vector<std::uint8_t>& b) {
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };

  header_.version = le16(pull(2));
  if (header_.version != kRecordVersion) {
    throw FormatError("unsupported version " + std::to_string(header_.version));
  }
  header_.height = static_cast<int>(le32(pull(4)));
  header_.width = static_cast<int>(le32(pull(4)));
  const std::uint16_t n_scales = le16(pull(2));
  for (std::uint16_t i = 0; i < n_scales; ++i) {
    ScaleSpec s;
    s.height = le32(pull(4));
    s.width = le32(pull(4));
    s.channels = le32(pull(4));
    header_.scales.push_back(s);
  }
  const std::uint16_t n_classes = le16(pull(2));
  for (std::uint16_t i = 0; i < n_classes; ++i) {
    ClassDecl c;
    c.id = le16(pull(2));
    const std::uint16_t len = le16(pull(2));
    const auto name = pull(len);
    c.name.assign(name.begin(), name.end());
    header_.classes.push_back(std::move(c));
  }
  const std::uint16_t n_tracks = le16(pull(2));
  for (std::uint16_t i = 0; i < n_tracks; ++i) {
    TrackDecl t;
    t.track_id = le32(pull(4));
    t.class_id = le16(pull(2));
    header_.tracks.push_back(t);
  }
  bool eof = false;
  const std::uint32_t stored = read_u32(in_, eof, std::nullopt);
  if (eof) throw FormatError("truncated data");
  if (stored != crc32(raw.data())) throw FormatError("checksum mismatch");
  try {
    check_header(header_);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

std::optional<FrameBlock> RecordReader::next() {
  const std::size_t index = blocks_;
  bool eof = false;
  const std::uint32_t len = read_u32(in_, eof, index);
  if (eof) return std::nullopt;
  if (len > kMaxBlockBytes) throw FormatError("implausible block length " + std::to_string(len), index);
  const auto payload = read_exact(in_, len, index);
  const std::uint32_t stored = read_u32(in_, eof, index);
  if (eof) throw FormatError("truncated data", index);
  if (stored != crc32(payload)) throw FormatError("checksum mismatch", index);

  ByteReader r(payload, index);
  FrameBlock block;
  block.frame = {r.u32(), header_.height, header_.width};
  if (last_frame_ && block.frame.frame_index <= *last_frame_) {
    throw FormatError("frame index " + std::to_string(block.frame.frame_index) + " does not increase", index);
  }
  const std::uint16_t n_records = r.u16();
  if (n_records != header_.tracks.size()) {
    throw FormatError(std::to_string(n_records) + " records for " + std::to_string(header_.tracks.size()) + " tracks",
                      index);
  }
  block.records.reserve(n_records);
  for (std::uint16_t i = 0; i < n_records; ++i) {
    PredictionRecord rec;
    rec.track_id = r.u32();
    if (rec.track_id != header_.tracks[i].track_id) {
      throw FormatError("record " + std::to_string(i) + " is for track " + std::to_string(rec.track_id), index);
    }
    rec.frame = block.frame;
    for (auto& cand : rec.candidates) {
      cand.quality = r.f32();
      cand.objectness = r.f32();
      const std::uint32_t n_runs = r.u32();
      std::vector<std::uint32_t> runs(n_runs);
      for (auto& run : runs) run = r.u32();
      try {
        cand.mask = BinaryMask::from_rle(header_.width, header_.height, runs);
      } catch (const std::invalid_argument& e) {
        throw FormatError(e.what(), index);
      }
    }
    for (std::size_t l = 0; l < header_.scales.size(); ++l) {
      const auto& spec = header_.scales[l];
      FeatureMap fm(static_cast<int>(l), static_cast<int>(spec.height), static_cast<int>(spec.width),
                    static_cast<int>(spec.channels));
      for (auto& v : fm.values) v = r.f32();
      rec.features.push_back(std::move(fm));
    }
    block.records.push_back(std::move(rec));
  }
  if (!r.done()) throw FormatError("trailing bytes in block", index);
  last_frame_ = block.frame.frame_index;
  ++blocks_;
  return block;
}

void write_stream(const std::filesystem::path& path, const RecordStream& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  RecordWriter writer(out, stream.header);
  for (const auto& b : stream.blocks) writer.write(b);
}

RecordStream read_stream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  RecordReader reader(in);
  RecordStream s{reader.header(), {}};
  while (auto b = reader.next()) s.blocks.push_back(std::move(*b));
  return s;
}

}  // namespace memtrack
