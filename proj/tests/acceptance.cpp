// Acceptance run: one PASS/FAIL line per criterion.

#include "memtrack/memory_bank.hpp"
#include "memtrack/pipeline.hpp"
#include "memtrack/posenc.hpp"
#include "memtrack/reid.hpp"
#include "micro_dataset.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace memtrack;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

// --- 1 ---------------------------------------------------------------------

double lerp_oracle(const std::vector<double>& ys, double x) {
  const int j = std::min(static_cast<int>(std::floor(x)), 5);
  return ys[static_cast<std::size_t>(j)] + (x - j) * (ys[static_cast<std::size_t>(j + 1)] - ys[static_cast<std::size_t>(j)]);
}

Outcome posenc_exactness() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  posenc::EncodingTable base;
  for (int j = 0; j < 7; ++j) {
    std::vector<double> v(64);
    for (auto& x : v) x = d(rng);
    base.entries.push_back(v);
  }
  o.require(posenc::expand_piecewise(base, 7) == base, "piecewise M=7 differs from base");
  o.require(posenc::expand_uniform(base, 7) == base, "uniform M=7 differs from base");
  for (int m : {10, 15, 20}) {
    const auto pw = posenc::expand_piecewise(base, m);
    const auto un = posenc::expand_uniform(base, m);
    for (const auto* t : {&pw, &un}) {
      o.require(t->entries.front() == base.entries[0] && t->entries.back() == base.entries[6],
                "endpoint mismatch at M=" + std::to_string(m));
    }
    o.require(pw.entries[1] == base.entries[1] && pw.entries[static_cast<std::size_t>(m - 2)] == base.entries[5],
              "piecewise boundary mismatch at M=" + std::to_string(m));
    for (int k = 0; k < m; ++k) {
      const double xp = k == 0 ? 0.0 : (k == m - 1 ? 6.0 : 1.0 + 4.0 * (k - 1) / static_cast<double>(m - 3));
      const double xu = 6.0 * k / static_cast<double>(m - 1);
      for (std::size_t c = 0; c < base.dim(); ++c) {
        std::vector<double> ys;
        for (const auto& e : base.entries) ys.push_back(e[c]);
        for (auto [x, t] : {std::pair{xp, &pw}, std::pair{xu, &un}}) {
          const double want = lerp_oracle(ys, x);
          const auto lo = static_cast<std::size_t>(std::min(std::floor(x), 5.0));
          const double scale = std::max(std::abs(ys[lo]), std::abs(ys[lo + 1]));
          o.require(std::abs(t->entries[static_cast<std::size_t>(k)][c] - want) <= 1e-12 * scale,
                    "slot " + std::to_string(k) + " off the oracle at M=" + std::to_string(m));
        }
      }
    }
  }
  return o;
}

// --- 2 ---------------------------------------------------------------------

std::vector<std::uint32_t> most_recent(const std::vector<std::pair<std::uint32_t, double>>& stream, double tau,
                                       std::size_t cap) {
  std::vector<std::uint32_t> kept;
  for (auto [t, r] : stream) {
    if (r >= tau) kept.push_back(t);
  }
  if (kept.size() > cap) kept.erase(kept.begin(), kept.end() - static_cast<std::ptrdiff_t>(cap));
  return kept;
}

Outcome memory_oracle() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> m_dist(7, 30), len(0, 80);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int M = m_dist(rng);
    const double tau_rel = 0.5 + 0.49 * u(rng);
    const double tau_occ = tau_rel * (0.2 + 0.79 * u(rng));
    DualMemory mem({M, tau_rel, tau_occ, true});
    UnconditionalBuffer buf;
    std::vector<std::pair<std::uint32_t, double>> stream;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      // mix exact threshold hits into the stream
      const double pick = u(rng);
      const double r = pick < 0.05 ? tau_rel : (pick < 0.1 ? tau_occ : u(rng));
      stream.emplace_back(static_cast<std::uint32_t>(i), r);
      observe(mem, buf, {static_cast<std::uint32_t>(i), r, nullptr});
    }
    std::vector<std::uint32_t> rel;
    for (const auto& e : mem.rel_entries()) rel.push_back(e.frame_index);
    o.require(rel == most_recent(stream, tau_rel, static_cast<std::size_t>((M + 1) / 2)),
              "relevance memory differs on trial " + std::to_string(trial));
    mem.populate_occlusion(buf, static_cast<std::uint32_t>(n));
    std::vector<std::uint32_t> occ;
    for (const auto& e : mem.occ_entries()) occ.push_back(e.frame_index);
    o.require(occ == most_recent(stream, tau_occ, static_cast<std::size_t>(M / 2)),
              "occlusion memory differs on trial " + std::to_string(trial));
    if (!o.pass) break;
  }
  return o;
}

// --- 3 ---------------------------------------------------------------------

Outcome vote_grid() {
  Outcome o;
  const reid::Thresholds th{0.01, -0.01, 0.8};
  std::size_t points = 0;
  for (int i = 0; i <= 200 && o.pass; ++i) {
    for (int j = 0; j <= 200 && o.pass; ++j) {
      for (int k = 0; k <= 200; ++k) {
        const double ss = i * 0.005, so = j * 0.005, iou = k * 0.005;
        reid::RecoveryWindow w{1, 1, {}};
        reid::WindowFrame f;
        f.frame_index = 0;
        f.s_self = ss;
        f.s_other = so;
        f.other_class = 2;
        f.overlap_iou = iou;
        w.frames.push_back(f);
        const auto got = reid::vote(w, th).decision.kind;
        reid::DecisionKind want;
        if (ss - so >= 0.01 && iou <= 0.8) {
          want = reid::DecisionKind::Accept;
        } else if (so - ss >= -0.01) {
          want = reid::DecisionKind::Reassign;
        } else {
          want = reid::DecisionKind::Reject;
        }
        ++points;
        if (got != want) {
          o.require(false, "mismatch at (" + std::to_string(ss) + ", " + std::to_string(so) + ", " +
                               std::to_string(iou) + ")");
          break;
        }
      }
    }
  }
  o.require(points == 201u * 201u * 201u, "grid incomplete");
  return o;
}

// --- 4 ---------------------------------------------------------------------

std::vector<LabelMap> replay_labels(const sim::SimulatedStream& s, const std::string& cfg) {
  return replay(s.records, preset(cfg)).labels();
}

Outcome s3_hallucination() {
  Outcome o;
  const auto script = sim::catalog("S3");
  constexpr ClassId kExited = 2;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto stream = sim::generate(script, seed);
    int exit_frame = -1;
    for (std::size_t t = 0; t < stream.gt.size(); ++t) {
      if (stream.gt[t].contains(kExited)) exit_frame = static_cast<int>(t);
    }
    o.require(exit_frame >= 0 && exit_frame + 1 < static_cast<int>(stream.gt.size()), "class never exits");
    const auto full = replay_labels(stream, "full");
    const auto base = replay_labels(stream, "baseline");
    std::size_t full_pixels = 0, base_fp_frames = 0;
    for (std::size_t t = static_cast<std::size_t>(exit_frame + 1); t < full.size(); ++t) {
      full_pixels += full[t].mask_of(kExited).foreground_count();
      base_fp_frames += base[t].contains(kExited);
    }
    const auto classes = stream.records.header.class_ids();
    const double gap = evaluate(full, stream.gt, classes).summary.mciou -
                       evaluate(base, stream.gt, classes).summary.mciou;
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    o.require(full_pixels == 0, tag + std::to_string(full_pixels) + " class pixels after exit with full");
    o.require(base_fp_frames >= 1, tag + "baseline has no false-positive frame");
    o.require(gap > 10.0, tag + "mcIoU gap " + std::to_string(gap));
    if (seed == 0) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "exit frame %d, baseline FP frames %zu, mcIoU gap %.2f", exit_frame,
                    base_fp_frames, gap);
      o.detail = buf;
    }
  }
  return o;
}

// --- 5 ---------------------------------------------------------------------

Outcome s2_turnover() {
  Outcome o;
  const auto script = sim::catalog("S2");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto stream = sim::generate(script, seed);
    const auto classes = stream.records.header.class_ids();
    const auto full = replay_labels(stream, "full");
    const auto base = replay_labels(stream, "baseline");
    const auto full_sw = evaluate(full, stream.gt, classes).id_switches;
    const auto base_sw = evaluate(base, stream.gt, classes).id_switches;
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    o.require(full_sw == 0, tag + "full has " + std::to_string(full_sw) + " switches");
    o.require(base_sw >= 1, tag + "baseline has no switch");
    o.require(replay_labels(sim::generate(script, seed), "full") == full, tag + "replay not deterministic");
    if (seed == 0 && o.pass) {
      o.detail = "switches full " + std::to_string(full_sw) + ", baseline " + std::to_string(base_sw);
    }
  }
  return o;
}

// --- 6 ---------------------------------------------------------------------

Outcome ablation_order() {
  Outcome o;
  std::vector<sim::ScenarioScript> corpus;
  for (const auto& n : sim::catalog_names()) corpus.push_back(sim::catalog(n));
  const auto rows = ablate(corpus, 5, 0);
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%s %.2f", i ? ", " : "", rows[i].config.c_str(), rows[i].mciou);
    detail += buf;
    if (i > 0) o.require(rows[i].mciou >= rows[i - 1].mciou, rows[i].config + " below " + rows[i - 1].config);
  }
  o.require(rows.size() == 5, "expected five arms");
  o.require(rows.back().mciou > rows.front().mciou, "full does not beat baseline");
  if (o.pass) o.detail = detail;
  return o;
}

// --- 7 ---------------------------------------------------------------------

Outcome micro_metrics() {
  Outcome o;
  const auto d = testing::micro_dataset();
  EvalAccumulator acc(d.classes);
  for (std::size_t i = 0; i < d.pred.size(); ++i) acc.accumulate(d.pred[i], d.gt[i]);
  const auto s = acc.finalize();
  o.require(std::abs(s.challenge_iou - d.challenge_iou) <= 1e-9, "challenge IoU");
  o.require(std::abs(s.iou - d.iou) <= 1e-9, "IoU");
  o.require(std::abs(s.mciou - d.mciou) <= 1e-9, "mcIoU");
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6f / %.6f / %.6f", s.challenge_iou, s.iou, s.mciou);
  if (o.pass) o.detail = buf;
  return o;
}

// --- 8 ---------------------------------------------------------------------

std::string encode(const RecordStream& s) {
  std::ostringstream os;
  RecordWriter w(os, s.header);
  for (const auto& b : s.blocks) w.write(b);
  return os.str();
}

RecordStream decode(const std::string& bytes) {
  std::istringstream is(bytes);
  RecordReader r(is);
  RecordStream s{r.header(), {}};
  while (auto b = r.next()) s.blocks.push_back(std::move(*b));
  return s;
}

Outcome determinism_and_format() {
  Outcome o;
  for (const auto& name : sim::catalog_names()) {
    const auto script = sim::catalog(name);
    const auto a = sim::generate(script, 11);
    const auto b = sim::generate(script, 11);
    const auto bytes = encode(a.records);
    o.require(bytes == encode(b.records), name + ": simulate not bit-deterministic");
    const auto back = decode(bytes);
    o.require(back == a.records, name + ": round trip differs");
    o.require(encode(back) == bytes, name + ": re-encoding differs");
    const auto p1 = replay(back, preset("full")).labels();
    const auto p2 = replay(a.records, preset("full")).labels();
    o.require(p1 == p2, name + ": replay not deterministic");
    const auto classes = a.records.header.class_ids();
    const auto m1 = evaluate(p1, a.gt, classes), m2 = evaluate(p2, b.gt, classes);
    o.require(m1.summary.challenge_iou == m2.summary.challenge_iou && m1.summary.mciou == m2.summary.mciou &&
                  m1.id_switches == m2.id_switches,
              name + ": eval not deterministic");

    // flip one payload byte in the middle of the stream
    auto bad = bytes;
    const std::size_t at = bytes.size() / 2;
    bad[at] = static_cast<char>(bad[at] ^ 0x01);
    bool caught = false;
    try {
      decode(bad);
    } catch (const FormatError& e) {
      caught = e.block().has_value();
    }
    o.require(caught, name + ": corrupted block not detected");
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "positional encoding expansion exact", 1.0, posenc_exactness},
      {2, "memory banks equal filter-and-truncate oracles", 30.0, memory_oracle},
      {3, "vote equals straight-line rule on 201^3 grid", 0.0, vote_grid},
      {4, "S3 exited class silent with full, hallucinated by baseline", 0.0, s3_hallucination},
      {5, "S2 turnover without identity switch", 0.0, s2_turnover},
      {6, "ablation mcIoU non-decreasing, full > baseline", 300.0, ablation_order},
      {7, "metrics micro dataset", 0.0, micro_metrics},
      {8, "determinism, round trip and corruption detection", 0.0, determinism_and_format},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0.0 && secs >= c.limit_s) {
      o.pass = false;
      o.detail = "over the " + std::to_string(c.limit_s) + " s limit";
    }
    std::printf("criterion %d: %s  %s (%.2f s)%s%s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.empty() ? "" : " | ", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
