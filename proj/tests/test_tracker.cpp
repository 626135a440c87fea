#include "memtrack/tracker.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <map>

using namespace memtrack;
using namespace memtrack::testing;

namespace {

constexpr int kW = 16;
constexpr int kH = 16;

const std::vector<float> kP1{1, 0, 0, 0};
const std::vector<float> kP2{0, 1, 0, 0};
const std::vector<float> kP3{0, 0, 1, 0};
const std::vector<float> kBg{0, 0, 0, 1};

// 4x4 grid sampling pixels 2, 6, 10, 14 on each axis
FeatureMap grid_features(const BinaryMask& m, const std::vector<float>& proto) {
  FeatureMap fm(0, 4, 4, 4);
  for (int cy = 0; cy < 4; ++cy) {
    for (int cx = 0; cx < 4; ++cx) {
      const bool in = m.at(cell_sample_pixel(cx, 4, kW), cell_sample_pixel(cy, 4, kH));
      for (int c = 0; c < 4; ++c) fm.at(cy, cx, c) = (in ? proto : kBg)[static_cast<std::size_t>(c)];
    }
  }
  return fm;
}

const BinaryMask kA = rect_mask(kW, kH, 0, 0, 7, 7);
const BinaryMask kB = rect_mask(kW, kH, 8, 8, 15, 15);

PredictionRecord rec(TrackId track, std::uint32_t t, float s, const BinaryMask& m, const std::vector<float>& proto,
                     float c = 1.0f) {
  const BinaryMask mask = s > 0.0f ? m : BinaryMask(kW, kH);
  return make_record(track, t, kW, kH, c, s, mask, {grid_features(mask, proto)});
}

struct Harness {
  Tracker tracker;
  std::vector<FrameResult> done;
  std::uint32_t t = 0;

  explicit Harness(EngineConfig cfg = {}) : tracker(cfg, {{1, 1}, {2, 2}}, kH, kW) {}

  void step(const PredictionRecord& a, const PredictionRecord& b) {
    const std::vector<PredictionRecord> recs{a, b};
    for (auto& r : tracker.step({t, kH, kW}, recs)) done.push_back(std::move(r));
    ++t;
  }
  void flush() {
    for (auto& r : tracker.flush()) done.push_back(std::move(r));
  }
  const FrameResult& frame(std::uint32_t i) const {
    for (const auto& f : done) {
      if (f.frame.frame_index == i) return f;
    }
    FAIL("frame " << i << " not released");
    return done.front();
  }
};

std::size_t count_label(const LabelMap& m, ClassId c) {
  return static_cast<std::size_t>(std::count(m.labels().begin(), m.labels().end(), static_cast<std::uint8_t>(c)));
}

// Frames 0-2 both visible and banked, frames 3-4 track 1 absent.
void warm_up(Harness& h, bool keep_two_visible = true) {
  for (int i = 0; i < 3; ++i) h.step(rec(1, h.t, 1.0f, kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
  for (int i = 0; i < 2; ++i) {
    h.step(rec(1, h.t, 0.0f, kA, kP1), rec(2, h.t, keep_two_visible ? 1.0f : 0.0f, kB, kP2));
  }
}

}  // namespace

TEST_CASE("init_track") {
  const EngineConfig cfg;
  const auto t = init_track(3, kA, 1, {4, kH, kW}, cfg);
  CHECK(t.phase == Phase::Active);
  REQUIRE(t.memory.pinned());
  CHECK(t.memory.pinned()->frame_index == 4);
  CHECK(t.buffer.entries().size() == 1);
  CHECK_THROWS_AS(init_track(3, BinaryMask(kW, kH), 1, {4, kH, kW}, cfg), std::invalid_argument);
}

TEST_CASE("tracker declarations are checked") {
  CHECK_THROWS_AS(Tracker({}, {{1, 1}, {2, 1}}, kH, kW), std::invalid_argument);
  CHECK_THROWS_AS(Tracker({}, {{1, 1}, {1, 2}}, kH, kW), std::invalid_argument);
  CHECK_THROWS_AS(Tracker({}, {{1, 0}}, kH, kW), std::invalid_argument);
}

TEST_CASE("step input is checked") {
  Harness h;
  const std::vector<PredictionRecord> one{rec(1, 0, 1.0f, kA, kP1)};
  CHECK_THROWS_AS(h.tracker.step({0, kH, kW}, one), std::invalid_argument);
  const std::vector<PredictionRecord> stranger{rec(1, 0, 1.0f, kA, kP1), rec(7, 0, 1.0f, kB, kP2)};
  CHECK_THROWS_AS(h.tracker.step({0, kH, kW}, stranger), std::invalid_argument);
  h.step(rec(1, 0, 1.0f, kA, kP1), rec(2, 0, 1.0f, kB, kP2));
  h.t = 0;
  CHECK_THROWS_AS(h.step(rec(1, 0, 1.0f, kA, kP1), rec(2, 0, 1.0f, kB, kP2)), std::invalid_argument);
}

TEST_CASE("score sequence 0.9, 0, 0.8 walks Active, Occluded, Recovering") {
  Harness h;
  h.step(rec(1, 0, 0.9f, kA, kP1), rec(2, 0, 1.0f, kB, kP2));
  CHECK(h.tracker.track(1).phase == Phase::Active);
  h.step(rec(1, 1, 0.0f, kA, kP1), rec(2, 1, 1.0f, kB, kP2));
  CHECK(h.tracker.track(1).phase == Phase::Occluded);
  h.step(rec(1, 2, 0.8f, kA, kP1), rec(2, 2, 1.0f, kB, kP2));
  CHECK(h.tracker.track(1).phase == Phase::Recovering);
  CHECK(h.tracker.track(1).frames_collected() == 1);
}

TEST_CASE("accept confirms the provisional masks after K frames") {
  Harness h;
  warm_up(h);
  CHECK(h.done.size() == 5);
  const auto bank_before = h.tracker.banks().at(1).size();
  for (int i = 0; i < 4; ++i) {
    h.step(rec(1, h.t, 1.0f, kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
    CHECK(h.done.size() == 5);
    CHECK(h.tracker.track(1).phase == Phase::Recovering);
  }
  h.step(rec(1, h.t, 1.0f, kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
  CHECK(h.done.size() == 10);
  CHECK(h.tracker.track(1).phase == Phase::Active);
  for (std::uint32_t f = 5; f < 10; ++f) CHECK(count_label(h.frame(f).labels, 1) == 64);
  CHECK(h.tracker.banks().at(1).size() == bank_before + 5);
}

TEST_CASE("reassign relabels the window retroactively") {
  Harness h;
  warm_up(h, false);
  for (int i = 0; i < 5; ++i) h.step(rec(1, h.t, 1.0f, kA, kP2), rec(2, h.t, 0.0f, kB, kP2));
  REQUIRE(h.done.size() == 10);
  CHECK(h.tracker.track(1).class_id == 2);
  CHECK(h.tracker.track(1).phase == Phase::Active);
  for (std::uint32_t f = 5; f < 10; ++f) {
    CHECK(count_label(h.frame(f).labels, 1) == 0);
    CHECK(count_label(h.frame(f).labels, 2) == 64);
  }
}

TEST_CASE("reassigned duplicate keeps the higher reliability output") {
  Harness h;
  warm_up(h);
  for (int i = 0; i < 5; ++i) h.step(rec(1, h.t, 1.0f, kA, kP2, 0.9f), rec(2, h.t, 1.0f, kB, kP2));
  REQUIRE(h.done.size() == 10);
  CHECK(h.tracker.track(1).class_id == 2);
  for (std::uint32_t f = 5; f < 10; ++f) {
    const auto& out = h.frame(f).outputs;
    REQUIRE(out.size() == 1);
    CHECK(out[0].track_id == 2);
    CHECK(h.frame(f).labels == LabelMap(h.frame(4).labels));
  }
}

TEST_CASE("reject withdraws the window and keeps the bank clean") {
  Harness h;
  warm_up(h);
  const auto bank_before = h.tracker.banks().at(1).size();
  // track 1 returns on top of track 2 with its own appearance
  for (int i = 0; i < 5; ++i) {
    auto r1 = rec(1, h.t, 1.0f, kB, kP1);
    h.step(r1, rec(2, h.t, 1.0f, kB, kP2));
  }
  REQUIRE(h.done.size() == 10);
  CHECK(h.tracker.track(1).phase == Phase::Occluded);
  CHECK(h.tracker.banks().at(1).size() == bank_before);
  for (std::uint32_t f = 5; f < 10; ++f) {
    CHECK(count_label(h.frame(f).labels, 1) == 0);
    CHECK(count_label(h.frame(f).labels, 2) == 64);
  }
}

TEST_CASE("a second occlusion inside the window aborts it") {
  Harness h;
  warm_up(h);
  h.step(rec(1, h.t, 1.0f, kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
  h.step(rec(1, h.t, 1.0f, kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
  h.step(rec(1, h.t, 0.0f, kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
  CHECK(h.tracker.track(1).phase == Phase::Occluded);
  REQUIRE(h.done.size() == 8);
  for (std::uint32_t f = 5; f < 8; ++f) CHECK(count_label(h.frame(f).labels, 1) == 0);
  h.step(rec(1, h.t, 1.0f, kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
  CHECK(h.tracker.track(1).phase == Phase::Recovering);
  CHECK(h.tracker.track(1).frames_collected() == 1);
}

TEST_CASE("flush votes on a partial window") {
  Harness h;
  warm_up(h);
  h.step(rec(1, h.t, 1.0f, kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
  h.step(rec(1, h.t, 1.0f, kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
  CHECK(h.done.size() == 5);
  h.flush();
  CHECK(h.done.size() == 7);
  CHECK(h.tracker.track(1).phase == Phase::Active);
  CHECK(count_label(h.frame(6).labels, 1) == 64);
}

TEST_CASE("without re-identification the track resumes immediately") {
  EngineConfig cfg;
  cfg.reid = false;
  Harness h(cfg);
  warm_up(h);
  h.step(rec(1, h.t, 1.0f, kA, kP2), rec(2, h.t, 1.0f, kB, kP2));
  CHECK(h.done.size() == 6);
  CHECK(h.tracker.track(1).phase == Phase::Active);
  CHECK(count_label(h.frame(5).labels, 1) == 64);
}

TEST_CASE("baseline memory is a sliding window over the last frames") {
  EngineConfig cfg;
  cfg.baseline_mode = true;
  Harness h(cfg);
  for (int i = 0; i < 20; ++i) {
    h.step(rec(1, h.t, 0.2f + 0.04f * static_cast<float>(i % 5), kA, kP1), rec(2, h.t, 1.0f, kB, kP2));
    std::vector<std::uint32_t> snap;
    for (const auto& s : h.tracker.track(1).memory.snapshot()) snap.push_back(s.entry.frame_index);
    std::vector<std::uint32_t> want;
    // frame 0 is pinned and reported separately
    for (std::uint32_t u = h.t > 7 ? h.t - 7 : 1; u < h.t; ++u) want.push_back(u);
    CHECK(snap == want);
  }
}

TEST_CASE("fuse examples") {
  const FrameMeta f{0, kH, kW};
  const TrackMask one{3, &kA, 0.5};
  const auto single = fuse(std::span(&one, 1), f);
  CHECK(single.mask_of(3) == kA);

  const std::vector<TrackMask> disjoint{{1, &kA, 0.5}, {2, &kB, 0.9}};
  const auto both = fuse(disjoint, f);
  CHECK(both.mask_of(1) == kA);
  CHECK(both.mask_of(2) == kB);
  CHECK(count_label(both, 0) == 256 - 128);

  const auto big = rect_mask(kW, kH, 4, 4, 11, 11);
  const std::vector<TrackMask> overlap{{2, &big, 0.7}, {1, &kA, 0.9}};
  CHECK(fuse(overlap, f).at(5, 5) == 1);
  const std::vector<TrackMask> tie{{2, &big, 0.8}, {1, &kA, 0.8}};
  CHECK(fuse(tie, f).at(5, 5) == 1);

  const std::vector<TrackMask> reversed{{1, &kA, 0.9}, {2, &big, 0.7}};
  CHECK(fuse(overlap, f) == fuse(reversed, f));
  const std::vector<TrackMask> twice{{1, &kA, 0.9}, {1, &kA, 0.9}};
  CHECK(fuse(twice, f).mask_of(1) == kA);
}

TEST_CASE("random score sequences keep the state machine well defined") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> pick(0, 5);
  const std::vector<float> scores{0.0f, 0.0f, 0.5f, 0.9f, 1.0f, 1.0f};
  const std::vector<const std::vector<float>*> protos{&kP1, &kP2, &kP3};
  for (int run = 0; run < 40; ++run) {
    EngineConfig cfg;
    cfg.window = 1 + run % 5;
    cfg.occlusion_memory = run % 2 == 0;
    cfg.reid = run % 3 != 0;
    Tracker tr(cfg, {{1, 1}, {2, 2}, {3, 3}}, kH, kW);
    std::map<std::uint32_t, std::vector<bool>> absent;
    std::vector<FrameResult> out;
    for (std::uint32_t t = 0; t < 120; ++t) {
      std::vector<PredictionRecord> recs;
      std::vector<bool> abs;
      for (TrackId id = 1; id <= 3; ++id) {
        const float s = scores[static_cast<std::size_t>(pick(rng))];
        const auto& m = id == 1 ? kA : (id == 2 ? kB : rect_mask(kW, kH, 4, 0, 11, 7));
        recs.push_back(rec(id, t, s, m, *protos[static_cast<std::size_t>(pick(rng)) % 3]));
        abs.push_back(s == 0.0f);
      }
      absent[t] = abs;
      for (auto& r : tr.step({t, kH, kW}, recs)) out.push_back(std::move(r));
      for (const auto& ts : tr.tracks()) {
        CHECK(ts.frames_collected() <= static_cast<std::size_t>(cfg.window));
        CHECK((ts.phase == Phase::Recovering) == ts.window.has_value());
      }
    }
    for (auto& r : tr.flush()) out.push_back(std::move(r));
    REQUIRE(out.size() == 120);
    for (std::uint32_t t = 0; t < 120; ++t) {
      CHECK(out[t].frame.frame_index == t);
      std::vector<ClassId> seen;
      for (const auto& o : out[t].outputs) {
        CHECK_FALSE(absent[t][o.track_id - 1]);
        CHECK_FALSE(o.provisional);
        CHECK(std::find(seen.begin(), seen.end(), o.class_id) == seen.end());
        seen.push_back(o.class_id);
      }
    }
  }
}
