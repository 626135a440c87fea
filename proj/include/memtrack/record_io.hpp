#pragma once

// Replayable container for backend outputs.
//
// Layout (all integers little-endian, floats IEEE-754 binary32):
//
//   header : "RMDI" u16 version u32 H u32 W
//            u16 n_scales  { u32 h u32 w u32 C } * n_scales
//            u16 n_classes { u16 id u16 len bytes[len] } * n_classes
//            u16 n_tracks  { u32 track_id u16 class_id } * n_tracks
//            u32 crc32(version .. last track entry)
//   block  : u32 len, payload[len], u32 crc32(payload)
//   payload: u32 frame_index u16 n_records
//            { u32 track_id
//              { f32 quality f32 objectness u32 n_runs u32 runs[n_runs] } * 3
//              { f32 values[h*w*C] } * n_scales }            * n_records
//
// Runs follow BinaryMask::to_rle: first run is background. Feature values
// are row-major [y][x][channel].

#include "memtrack/core_types.hpp"
#include "memtrack/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace memtrack {

inline constexpr std::uint16_t kRecordVersion = 1;

struct ScaleSpec {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  bool operator==(const ScaleSpec&) const = default;
};

struct ClassDecl {
  ClassId id = 0;
  std::string name;
  bool operator==(const ClassDecl&) const = default;
};

struct StreamHeader {
  std::uint16_t version = kRecordVersion;
  int height = 0;
  int width = 0;
  std::vector<ScaleSpec> scales;
  std::vector<ClassDecl> classes;
  std::vector<TrackDecl> tracks;

  std::vector<ClassId> class_ids() const;
  bool operator==(const StreamHeader&) const;
};

struct FrameBlock {
  FrameMeta frame;
  std::vector<PredictionRecord> records;
  bool operator==(const FrameBlock&) const = default;
};

/// Malformed input. `block()` is the zero-based frame block at fault, or
/// empty for header problems.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::optional<std::size_t> block = std::nullopt);
  std::optional<std::size_t> block() const { return block_; }

 private:
  std::optional<std::size_t> block_;
};

class RecordWriter {
 public:
  RecordWriter(std::ostream& out, StreamHeader header);

  /// Throws std::invalid_argument if the block does not fit the header.
  void write(const FrameBlock& block);
  std::size_t blocks_written() const { return blocks_; }

 private:
  std::ostream& out_;
  StreamHeader header_;
  std::optional<std::uint32_t> last_frame_;
  std::size_t blocks_ = 0;
};

class RecordReader {
 public:
  /// Reads and checks the header immediately.
  explicit RecordReader(std::istream& in);

  const StreamHeader& header() const { return header_; }

  /// Next frame block, or nullopt at a clean end of stream.
  std::optional<FrameBlock> next();
  std::size_t blocks_read() const { return blocks_; }

 private:
  std::istream& in_;
  StreamHeader header_;
  std::optional<std::uint32_t> last_frame_;
  std::size_t blocks_ = 0;
};

struct RecordStream {
  StreamHeader header;
  std::vector<FrameBlock> blocks;
  bool operator==(const RecordStream&) const = default;
};

void write_stream(const std::filesystem::path& path, const RecordStream& stream);
RecordStream read_stream(const std::filesystem::path& path);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

}  // namespace memtrack
