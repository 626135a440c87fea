#include "memtrack/memory_bank.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace memtrack {

void MemoryConfig::validate() const {
  if (capacity < 2) throw std::invalid_argument("memory capacity must be >= 2");
  if (occlusion_enabled && !(tau_occ < tau_rel)) {
    throw std::invalid_argument("tau_occ must be below tau_rel");
  }
}

UnconditionalBuffer::UnconditionalBuffer(std::optional<std::size_t> retention_cap)
    : cap_(retention_cap) {
  if (cap_ && *cap_ < kMinRetention) {
    throw std::invalid_argument("buffer retention cap must be >= " +
                                std::to_string(kMinRetention));
  }
}

void UnconditionalBuffer::append(MemoryEntry entry) {
  if (!entries_.empty() && entry.frame_index <= entries_.back().frame_index) {
    throw std::invalid_argument("buffer: frame index " + std::to_string(entry.frame_index) +
                                " does not follow " + std::to_string(entries_.back().frame_index));
  }
  entries_.push_back(std::move(entry));
  if (cap_ && entries_.size() > *cap_) entries_.pop_front();
}

std::optional<std::uint32_t> UnconditionalBuffer::last_frame() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.back().frame_index;
}

DualMemory::DualMemory(MemoryConfig config) : config_(config) {
  config_.validate();
  const auto m = static_cast<std::size_t>(config_.capacity);
  if (config_.occlusion_enabled) {
    rel_capacity_ = (m + 1) / 2;
    occ_capacity_ = m / 2;
  } else {
    rel_capacity_ = m;
    occ_capacity_ = 0;
  }
}

void DualMemory::pin(MemoryEntry entry) { pinned_ = std::move(entry); }

bool DualMemory::offer(const MemoryEntry& entry) {
  if (entry.reliability < config_.tau_rel) return false;
  rel_.push_back(entry);
  while (rel_.size() > rel_capacity_) rel_.pop_front();
  return true;
}

void DualMemory::populate_occlusion(const UnconditionalBuffer& buffer,
                                    std::uint32_t recovery_frame) {
  occ_.clear();
  if (occ_capacity_ == 0) return;
  const auto& entries = buffer.entries();
  for (auto it = entries.rbegin(); it != entries.rend() && occ_.size() < occ_capacity_; ++it) {
    if (it->frame_index >= recovery_frame) continue;
    if (it->reliability >= config_.tau_occ) occ_.push_front(*it);
  }
}

std::vector<SnapshotSlot> DualMemory::snapshot() const {
  std::vector<SnapshotSlot> out;
  out.reserve(rel_.size() + occ_.size());
  auto r = rel_.begin();
  auto o = occ_.begin();
  while (r != rel_.end() || o != occ_.end()) {
    if (o == occ_.end() || (r != rel_.end() && r->frame_index <= o->frame_index)) {
      if (o != occ_.end() && o->frame_index == r->frame_index) ++o;
      out.push_back({*r, 0, false});
      ++r;
    } else {
      out.push_back({*o, 0, true});
      ++o;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].position = static_cast<int>(i);
  return out;
}

std::optional<std::uint32_t> DualMemory::last_frame() const {
  std::optional<std::uint32_t> last;
  if (pinned_) last = pinned_->frame_index;
  if (!rel_.empty()) last = std::max(last.value_or(0), rel_.back().frame_index);
  return last;
}

ObserveResult observe(DualMemory& memory, UnconditionalBuffer& buffer, const MemoryEntry& entry) {
  for (auto last : {buffer.last_frame(), memory.last_frame()}) {
    if (last && entry.frame_index <= *last) {
      throw std::invalid_argument("observe: frame index " + std::to_string(entry.frame_index) +
                                  " is not after " + std::to_string(*last));
    }
  }
  buffer.append(entry);
  return {memory.offer(entry)};
}

}  // namespace memtrack
