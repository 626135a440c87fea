#pragma once

// Gated frame memory for one track: a relevance memory that keeps the most
// recent frames with reliability >= tau_rel, an occlusion memory refilled at
// each disocclusion from the unconditional buffer under the relaxed
// threshold tau_occ, and the buffer itself.

#include "memtrack/core_types.hpp"
#include "memtrack/descriptor.hpp"

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

namespace memtrack {

/// What a memory slot remembers about its frame.
struct FrameSummary {
  BinaryMask mask;
  std::optional<FeatureDescriptor> descriptor;
};

struct MemoryEntry {
  std::uint32_t frame_index = 0;
  double reliability = 0.0;
  std::shared_ptr<const FrameSummary> summary;
};

struct MemoryConfig {
  int capacity = 15;
  double tau_rel = 0.95;
  double tau_occ = 0.65;
  bool occlusion_enabled = true;

  /// Throws std::invalid_argument on capacity < 2 or, with the occlusion
  /// memory on, tau_occ >= tau_rel.
  void validate() const;
};

/// Append-only record of every observed frame. With a retention cap the
/// oldest entries are dropped once the cap is exceeded.
class UnconditionalBuffer {
 public:
  static constexpr std::size_t kMinRetention = 64;

  UnconditionalBuffer() = default;
  explicit UnconditionalBuffer(std::optional<std::size_t> retention_cap);

  void append(MemoryEntry entry);
  const std::deque<MemoryEntry>& entries() const { return entries_; }
  std::optional<std::uint32_t> last_frame() const;
  std::optional<std::size_t> retention_cap() const { return cap_; }

 private:
  std::optional<std::size_t> cap_;
  std::deque<MemoryEntry> entries_;
};

struct SnapshotSlot {
  MemoryEntry entry;
  int position = 0;
  bool from_occlusion = false;
};

class DualMemory {
 public:
  explicit DualMemory(MemoryConfig config);

  const MemoryConfig& config() const { return config_; }
  std::size_t rel_capacity() const { return rel_capacity_; }
  std::size_t occ_capacity() const { return occ_capacity_; }

  const std::deque<MemoryEntry>& rel_entries() const { return rel_; }
  const std::deque<MemoryEntry>& occ_entries() const { return occ_; }

  /// Initialization frame, kept outside the M-slot budget and never evicted.
  const std::optional<MemoryEntry>& pinned() const { return pinned_; }
  void pin(MemoryEntry entry);

  /// Admits `entry` to the relevance memory when r >= tau_rel, evicting the
  /// oldest entry past capacity. Returns whether it was admitted.
  bool offer(const MemoryEntry& entry);

  /// Replaces the occlusion memory with the most recent buffer entries older
  /// than `recovery_frame` whose reliability is >= tau_occ.
  void populate_occlusion(const UnconditionalBuffer& buffer, std::uint32_t recovery_frame);

  /// Occlusion then relevance entries merged in frame order, duplicates
  /// resolved in favour of the relevance copy, positions 0..k-1.
  std::vector<SnapshotSlot> snapshot() const;

  std::optional<std::uint32_t> last_frame() const;

 private:
  MemoryConfig config_;
  std::size_t rel_capacity_;
  std::size_t occ_capacity_;
  std::deque<MemoryEntry> rel_;
  std::deque<MemoryEntry> occ_;
  std::optional<MemoryEntry> pinned_;
};

struct ObserveResult {
  bool admitted_rel = false;
};

/// Appends to the buffer unconditionally and offers to the relevance memory.
/// Throws std::invalid_argument when the frame index does not increase.
ObserveResult observe(DualMemory& memory, UnconditionalBuffer& buffer, const MemoryEntry& entry);

}  // namespace memtrack
