#include "memtrack/simulator.hpp"

#include "memtrack/descriptor.hpp"
#include "memtrack/kv_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace memtrack::sim {

namespace {

const std::set<std::string> kScenarioKeys = {
    "name",         "description",   "frames",     "height",   "width",
    "channels",     "score_jitter",  "feature_jitter", "mask_jitter",
    "confusion_probability", "confusion_score", "separation", "occlusion_band",
    "band_low",     "band_high"};
const std::set<std::string> kObjectKeys = {"tracked", "track", "class", "label", "shape",
                                           "size",    "path",  "hidden", "confuse"};

std::vector<std::string> words(std::string_view s) {
  std::istringstream is{std::string(s)};
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

FrameRange parse_range(std::string_view text, std::string_view what) {
  const auto t = trim(text);
  const auto dash = t.find('-');
  if (dash == std::string::npos) {
    const int f = parse_int(t, what);
    return {f, f};
  }
  FrameRange r{parse_int(t.substr(0, dash), what), parse_int(t.substr(dash + 1), what)};
  if (r.last < r.first) throw KvError(std::string(what) + ": empty range '" + t + "'");
  return r;
}

std::vector<Keyframe> parse_path(std::string_view text, std::string_view what) {
  std::vector<Keyframe> out;
  for (const auto& item : split(text, ';')) {
    if (trim(item).empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw KvError(std::string(what) + ": keyframe needs 't: cx cy'");
    Keyframe k;
    k.t = parse_int(item.substr(0, colon), what);
    const auto v = words(item.substr(colon + 1));
    if (v.size() != 2 && v.size() != 4) {
      throw KvError(std::string(what) + ": keyframe needs 'cx cy' or 'cx cy w h'");
    }
    k.cx = parse_double(v[0], what);
    k.cy = parse_double(v[1], what);
    if (v.size() == 4) {
      k.w = parse_double(v[2], what);
      k.h = parse_double(v[3], what);
    }
    out.push_back(k);
  }
  return out;
}

void check_keys(const KvSection& sec, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : sec.entries) {
    if (!allowed.count(k)) {
      throw KvError("line " + std::to_string(sec.line) + ": unknown key '" + k + "' in [" + sec.name + "]");
    }
  }
}

Expectation parse_expectation(const KvSection& sec, std::string preset) {
  Expectation e;
  e.preset = std::move(preset);
  for (const auto& [key, value] : sec.entries) {
    if (key.rfind("decisions.", 0) == 0) {
      DecisionExpectation d;
      d.track_id = static_cast<TrackId>(parse_int(key.substr(10), key));
      for (const auto& item : split(value, ',')) {
        const auto v = trim(item);
        if (v != "accept" && v != "reject" && v.rfind("reassign:", 0) != 0) {
          throw KvError(key + ": unknown decision '" + v + "'");
        }
        d.decisions.push_back(v);
      }
      e.decisions.push_back(std::move(d));
    } else if (key == "id_switches") {
      const auto v = trim(value);
      if (v.rfind(">=", 0) == 0) {
        e.id_switches_min = static_cast<std::size_t>(parse_int(v.substr(2), key));
      } else {
        e.id_switches_exact = static_cast<std::size_t>(parse_int(v, key));
      }
    } else if (key.rfind("silent_after.", 0) == 0) {
      e.silent_after.emplace_back(static_cast<ClassId>(parse_int(key.substr(13), key)), parse_int(value, key));
    } else {
      throw KvError("unknown expectation key '" + key + "' in [" + sec.name + "]");
    }
  }
  return e;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double cosine_raw(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

}  // namespace

void ScenarioScript::validate() const {
  auto fail = [&](const std::string& msg) { throw std::invalid_argument("scenario " + name + ": " + msg); };
  if (frames < 1) fail("frames must be positive");
  for (int stride : kScaleStrides) {
    if (height < stride || width < stride || height % stride != 0 || width % stride != 0) {
      fail("canvas must be a positive multiple of 16");
    }
  }
  if (channels < 1) fail("channels must be positive");
  if (score_jitter < 0.0 || feature_jitter < 0.0 || mask_jitter < 0) fail("jitter must be non-negative");
  if (confusion_probability < 0.0 || confusion_probability > 1.0) fail("confusion_probability outside [0,1]");
  if (confusion_score && (*confusion_score < 0.0 || *confusion_score > 1.0)) fail("confusion_score outside [0,1]");
  if (separation < 0.0 || separation > 1.0) fail("separation outside [0,1]");
  if (!(band_low < band_high)) fail("band_low must be below band_high");

  std::set<std::string> names;
  std::set<TrackId> tracks;
  std::set<ClassId> classes;
  bool any_tracked = false;
  for (const auto& o : objects) {
    if (!names.insert(o.name).second) fail("duplicate object " + o.name);
    if (o.width <= 0.0 || o.height <= 0.0) fail("object " + o.name + " needs a positive size");
    if (o.path.empty()) fail("object " + o.name + " needs a path");
    for (std::size_t i = 1; i < o.path.size(); ++i) {
      if (o.path[i].t <= o.path[i - 1].t) fail("object " + o.name + ": keyframes must increase in t");
    }
    if (o.tracked) {
      any_tracked = true;
      if (o.track_id == 0) fail("object " + o.name + " needs a track id");
      if (o.class_id == 0 || o.class_id > 255) fail("object " + o.name + " needs a class id in 1..255");
      if (!tracks.insert(o.track_id).second) fail("duplicate track id " + std::to_string(o.track_id));
      if (!classes.insert(o.class_id).second) fail("duplicate class id " + std::to_string(o.class_id));
    } else if (!o.confusions.empty()) {
      fail("occluder " + o.name + " cannot carry confusions");
    }
  }
  if (!any_tracked) fail("no tracked objects");
  for (const auto& o : objects) {
    for (const auto& c : o.confusions) {
      const auto it = std::find_if(objects.begin(), objects.end(), [&](const ObjectScript& x) { return x.name == c.target; });
      if (it == objects.end() || !it->tracked || it->name == o.name) {
        fail("object " + o.name + ": confusion target '" + c.target + "' must be another tracked object");
      }
    }
  }
}

Pose ScenarioScript::pose(std::size_t object, int t) const {
  const auto& o = objects.at(object);
  // carry sizes forward so keyframes without w h keep the latest size
  std::vector<Pose> keys;
  double w = o.width, h = o.height;
  for (const auto& k : o.path) {
    if (k.w) w = *k.w;
    if (k.h) h = *k.h;
    keys.push_back({k.cx, k.cy, w, h});
  }
  if (t <= o.path.front().t) return keys.front();
  if (t >= o.path.back().t) return keys.back();
  for (std::size_t i = 1; i < o.path.size(); ++i) {
    if (t <= o.path[i].t) {
      const double a = static_cast<double>(t - o.path[i - 1].t) / static_cast<double>(o.path[i].t - o.path[i - 1].t);
      const Pose& p = keys[i - 1];
      const Pose& q = keys[i];
      return {p.cx + a * (q.cx - p.cx), p.cy + a * (q.cy - p.cy), p.width + a * (q.width - p.width),
              p.height + a * (q.height - p.height)};
    }
  }
  return keys.back();
}

bool ScenarioScript::rendered(std::size_t object, int t) const {
  const auto& o = objects.at(object);
  return std::none_of(o.hidden.begin(), o.hidden.end(), [&](const FrameRange& r) { return r.contains(t); });
}

std::size_t ScenarioScript::index_of(std::string_view object_name) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].name == object_name) return i;
  }
  throw std::out_of_range("scenario " + name + ": no object " + std::string(object_name));
}

std::vector<std::size_t> ScenarioScript::tracked_objects() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].tracked) out.push_back(i);
  }
  return out;
}

std::vector<ClassDecl> ScenarioScript::class_table() const {
  std::vector<ClassDecl> out;
  for (auto i : tracked_objects()) out.push_back({objects[i].class_id, objects[i].label});
  std::sort(out.begin(), out.end(), [](const ClassDecl& a, const ClassDecl& b) { return a.id < b.id; });
  return out;
}

std::vector<TrackDecl> ScenarioScript::track_table() const {
  std::vector<TrackDecl> out;
  for (auto i : tracked_objects()) out.push_back({objects[i].track_id, objects[i].class_id});
  return out;
}

const Expectation* ScenarioScript::expectation(std::string_view preset) const {
  for (const auto& e : expectations) {
    if (e.preset == preset) return &e;
  }
  return nullptr;
}

ScenarioScript parse_scenario(std::string_view text, std::string_view origin) {
  const KvDocument doc = parse_kv(text, origin);
  ScenarioScript s;
  const KvSection* head = doc.find("scenario");
  if (!head) throw KvError(std::string(origin) + ": missing [scenario] section");
  check_keys(*head, kScenarioKeys);
  s.name = head->require("name");
  s.description = head->get("description").value_or("");
  s.frames = head->get_int("frames", s.frames);
  s.height = head->get_int("height", s.height);
  s.width = head->get_int("width", s.width);
  s.channels = head->get_int("channels", s.channels);
  s.score_jitter = head->get_double("score_jitter", s.score_jitter);
  s.feature_jitter = head->get_double("feature_jitter", s.feature_jitter);
  s.mask_jitter = head->get_int("mask_jitter", s.mask_jitter);
  s.confusion_probability = head->get_double("confusion_probability", s.confusion_probability);
  if (auto v = head->get("confusion_score"); v && *v != "mirror") s.confusion_score = parse_double(*v, "confusion_score");
  s.separation = head->get_double("separation", s.separation);
  s.occlusion_band = head->get_bool("occlusion_band", s.occlusion_band);
  s.band_low = head->get_double("band_low", s.band_low);
  s.band_high = head->get_double("band_high", s.band_high);

  for (const auto& sec : doc.sections) {
    if (sec.name.empty()) {
      if (!sec.entries.empty()) throw KvError(std::string(origin) + ": keys outside a section");
      continue;
    }
    if (sec.name == "scenario") continue;
    const auto parts = words(sec.name);
    if (parts.size() == 2 && parts[0] == "object") {
      check_keys(sec, kObjectKeys);
      ObjectScript o;
      o.name = parts[1];
      o.tracked = sec.get_bool("tracked", true);
      if (o.tracked) {
        o.track_id = static_cast<TrackId>(parse_int(sec.require("track"), "track"));
        o.class_id = static_cast<ClassId>(parse_int(sec.require("class"), "class"));
        o.label = sec.get("label").value_or(o.name);
      }
      const auto shape = sec.get("shape").value_or("rect");
      if (shape == "rect") {
        o.shape = Shape::Rect;
      } else if (shape == "ellipse") {
        o.shape = Shape::Ellipse;
      } else {
        throw KvError("object " + o.name + ": unknown shape '" + shape + "'");
      }
      const auto size = words(sec.require("size"));
      if (size.size() != 2) throw KvError("object " + o.name + ": size needs 'width height'");
      o.width = parse_double(size[0], "size");
      o.height = parse_double(size[1], "size");
      o.path = parse_path(sec.require("path"), "path");
      if (auto h = sec.get("hidden")) {
        for (const auto& r : split(*h, ',')) {
          if (!trim(r).empty()) o.hidden.push_back(parse_range(r, "hidden"));
        }
      }
      if (auto c = sec.get("confuse")) {
        for (const auto& item : split(*c, ',')) {
          const auto w = words(item);
          if (w.size() != 2) throw KvError("object " + o.name + ": confuse needs 'a-b TARGET'");
          o.confusions.push_back({parse_range(w[0], "confuse"), w[1]});
        }
      }
      s.objects.push_back(std::move(o));
    } else if (parts.size() == 2 && parts[0] == "expect") {
      s.expectations.push_back(parse_expectation(sec, parts[1]));
    } else {
      throw KvError(std::string(origin) + ": unknown section [" + sec.name + "]");
    }
  }
  s.validate();
  return s;
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

ScenarioScript catalog(std::string_view name) { return parse_scenario(catalog_text(name), name); }

ScenarioScript resolve_scenario(std::string_view name_or_path) {
  const auto& names = catalog_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return catalog(name_or_path);
  if (std::filesystem::exists(std::filesystem::path(std::string(name_or_path)))) {
    return load_scenario(std::string(name_or_path));
  }
  throw std::invalid_argument("unknown scenario '" + std::string(name_or_path) + "'");
}

bool inside(Shape shape, const Pose& pose, double px, double py) {
  const double x = px + 0.5 - pose.cx;
  const double y = py + 0.5 - pose.cy;
  const double hw = pose.width / 2.0;
  const double hh = pose.height / 2.0;
  if (shape == Shape::Rect) return x >= -hw && x < hw && y >= -hh && y < hh;
  return (x / hw) * (x / hw) + (y / hh) * (y / hh) <= 1.0;
}

std::size_t nominal_area(Shape shape, const Pose& pose) {
  const int x0 = static_cast<int>(std::floor(pose.cx - pose.width / 2.0)) - 1;
  const int x1 = static_cast<int>(std::ceil(pose.cx + pose.width / 2.0)) + 1;
  const int y0 = static_cast<int>(std::floor(pose.cy - pose.height / 2.0)) - 1;
  const int y1 = static_cast<int>(std::ceil(pose.cy + pose.height / 2.0)) + 1;
  std::size_t n = 0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) n += inside(shape, pose, x, y) ? 1 : 0;
  }
  return n;
}

SyntheticFrame render(const ScenarioScript& script, int t) {
  if (t < 0 || t >= script.frames) throw std::out_of_range("render: frame " + std::to_string(t) + " outside the scenario");
  const int H = script.height;
  const int W = script.width;
  SyntheticFrame f;
  f.t = t;
  f.owner.assign(static_cast<std::size_t>(H) * W, -1);
  std::vector<std::size_t> nominal(script.objects.size(), 0);
  for (std::size_t i = 0; i < script.objects.size(); ++i) {
    if (!script.rendered(i, t)) continue;
    const auto& o = script.objects[i];
    const Pose p = script.pose(i, t);
    nominal[i] = nominal_area(o.shape, p);
    const int x0 = std::max(0, static_cast<int>(std::floor(p.cx - p.width / 2.0)) - 1);
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(p.cx + p.width / 2.0)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(p.cy - p.height / 2.0)) - 1);
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil(p.cy + p.height / 2.0)) + 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (inside(o.shape, p, x, y)) f.owner[static_cast<std::size_t>(y) * W + x] = static_cast<int>(i);
      }
    }
  }
  f.gt = LabelMap(W, H);
  f.masks.assign(script.objects.size(), BinaryMask(W, H));
  std::vector<std::size_t> visible(script.objects.size(), 0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int o = f.owner[static_cast<std::size_t>(y) * W + x];
      if (o < 0) continue;
      f.masks[o].set(x, y);
      ++visible[o];
      if (script.objects[o].tracked) f.gt.set(x, y, static_cast<std::uint8_t>(script.objects[o].class_id));
    }
  }
  for (std::size_t i = 0; i < script.objects.size(); ++i) {
    f.visibility.push_back(nominal[i] ? static_cast<double>(visible[i]) / static_cast<double>(nominal[i]) : 0.0);
  }
  return f;
}

BinaryMask morph(const BinaryMask& mask, int radius) {
  if (radius == 0) return mask;
  const int r = std::abs(radius);
  const bool dilate = radius > 0;
  const int W = mask.width();
  const int H = mask.height();
  BinaryMask out(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      bool any = false;
      bool all = true;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int xx = x + dx;
          const int yy = y + dy;
          const bool on = xx >= 0 && xx < W && yy >= 0 && yy < H && mask.at(xx, yy);
          any = any || on;
          all = all && on;
        }
      }
      out.set(x, y, dilate ? any : all);
    }
  }
  return out;
}

BinaryMask shift(const BinaryMask& mask, int dx, int dy) {
  const int W = mask.width();
  const int H = mask.height();
  BinaryMask out(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int sx = x - dx;
      const int sy = y - dy;
      if (sx >= 0 && sx < W && sy >= 0 && sy < H && mask.at(sx, sy)) out.set(x, y);
    }
  }
  return out;
}

Generator::Generator(ScenarioScript script, std::uint64_t seed) : script_(std::move(script)), seed_(seed) {
  script_.validate();
  const std::size_t n_scales = std::size(kScaleStrides);
  const std::size_t C = static_cast<std::size_t>(script_.channels);
  auto rng = frame_rng(-1, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double max_cos = 1.0 - script_.separation;
  bool ok = false;
  for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
    prototypes_.assign(script_.objects.size(), std::vector<std::vector<double>>(n_scales, std::vector<double>(C)));
    background_.assign(n_scales, std::vector<double>(C));
    for (auto& obj : prototypes_) {
      for (auto& scale : obj) {
        for (auto& v : scale) v = normal(rng);
      }
    }
    for (auto& scale : background_) {
      for (auto& v : scale) v = normal(rng);
    }
    ok = true;
    for (std::size_t l = 0; l < n_scales && ok; ++l) {
      std::vector<const std::vector<double>*> all{&background_[l]};
      for (const auto& obj : prototypes_) all.push_back(&obj[l]);
      for (std::size_t a = 0; a < all.size() && ok; ++a) {
        for (std::size_t b = a + 1; b < all.size() && ok; ++b) ok = cosine_raw(*all[a], *all[b]) <= max_cos;
      }
    }
  }
  if (!ok) throw std::runtime_error("scenario " + script_.name + ": cannot draw separated prototypes");

  for (int t = 0; t < script_.frames; ++t) visibility_.push_back(render(script_, t).visibility);
}

std::mt19937_64 Generator::frame_rng(int t, std::uint64_t stream) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(t + 1), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

StreamHeader Generator::header() const {
  StreamHeader h;
  h.height = script_.height;
  h.width = script_.width;
  for (int stride : kScaleStrides) {
    h.scales.push_back({static_cast<std::uint32_t>(script_.height / stride),
                        static_cast<std::uint32_t>(script_.width / stride),
                        static_cast<std::uint32_t>(script_.channels)});
  }
  h.classes = script_.class_table();
  h.tracks = script_.track_table();
  return h;
}

SyntheticFrame Generator::frame(int t) const { return render(script_, t); }

bool Generator::scripted_confusion(std::size_t object, int t, std::size_t* target) const {
  for (const auto& c : script_.objects[object].confusions) {
    if (c.frames.contains(t)) {
      *target = script_.index_of(c.target);
      return true;
    }
  }
  return false;
}

bool Generator::reentry(std::size_t object, int t) const {
  if (t < 2) return false;
  const auto vis = [&](int u) { return visibility_[static_cast<std::size_t>(u)][object]; };
  if (!(vis(t) > 0.0) || vis(t - 1) > 0.0) return false;
  for (int u = 0; u < t - 1; ++u) {
    if (vis(u) > 0.0) return true;
  }
  return false;
}

std::size_t Generator::source_of(std::size_t object, int t) const {
  std::size_t target = object;
  if (scripted_confusion(object, t, &target)) return target;
  if (script_.confusion_probability <= 0.0 || !reentry(object, t)) return object;
  auto rng = frame_rng(t, 0x10000 + object);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (!(uni(rng) < script_.confusion_probability)) return object;
  const Pose self = script_.pose(object, t);
  std::optional<std::pair<double, std::size_t>> best;
  for (auto i : script_.tracked_objects()) {
    if (i == object || !(visibility_[static_cast<std::size_t>(t)][i] > 0.0)) continue;
    const Pose p = script_.pose(i, t);
    const double d = std::hypot(p.cx - self.cx, p.cy - self.cy);
    if (!best || d < best->first) best = std::make_pair(d, i);
  }
  return best ? best->second : object;
}

std::vector<FeatureMap> Generator::features(const SyntheticFrame& frame) const {
  auto rng = frame_rng(frame.t, 0);
  std::normal_distribution<double> noise(0.0, script_.feature_jitter);
  std::vector<FeatureMap> maps;
  for (std::size_t l = 0; l < std::size(kScaleStrides); ++l) {
    const int gh = script_.height / kScaleStrides[l];
    const int gw = script_.width / kScaleStrides[l];
    FeatureMap fm(static_cast<int>(l), gh, gw, script_.channels);
    for (int cy = 0; cy < gh; ++cy) {
      const int py = cell_sample_pixel(cy, gh, script_.height);
      for (int cx = 0; cx < gw; ++cx) {
        const int px = cell_sample_pixel(cx, gw, script_.width);
        const int o = frame.owner[static_cast<std::size_t>(py) * script_.width + px];
        const auto& proto = o < 0 ? background_[l] : prototypes_[static_cast<std::size_t>(o)][l];
        for (int c = 0; c < script_.channels; ++c) {
          const double v = proto[static_cast<std::size_t>(c)] + (script_.feature_jitter > 0.0 ? noise(rng) : 0.0);
          fm.values[(static_cast<std::size_t>(cy) * gw + cx) * script_.channels + c] = static_cast<float>(v);
        }
      }
    }
    maps.push_back(std::move(fm));
  }
  return maps;
}

FrameBlock Generator::predict(const SyntheticFrame& frame) const {
  FrameBlock block;
  block.frame = {static_cast<std::uint32_t>(frame.t), script_.height, script_.width};
  const auto feats = features(frame);
  const int mj = script_.mask_jitter;
  for (auto o : script_.tracked_objects()) {
    auto rng = frame_rng(frame.t, 1 + o);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::uniform_int_distribution<int> offset(-mj, mj);

    std::size_t confusion_target = o;
    const bool scripted = scripted_confusion(o, frame.t, &confusion_target);
    const std::size_t src = source_of(o, frame.t);
    const double vis = frame.visibility[src];
    const BinaryMask& gt = frame.masks[src];

    PredictionRecord rec;
    rec.track_id = script_.objects[o].track_id;
    rec.frame = block.frame;
    rec.features = feats;

    BinaryMask base = gt;
    std::array<std::pair<int, int>, 2> shifts{};
    const int radius = offset(rng);
    for (auto& s : shifts) s = {offset(rng), offset(rng)};
    if (!gt.is_empty()) {
      base = morph(gt, radius);
      if (base.is_empty()) base = gt;
    }
    for (std::size_t k = 0; k < 3; ++k) {
      auto& cand = rec.candidates[k];
      const double j = script_.score_jitter * jitter(rng);
      if (scripted && script_.confusion_score) {
        cand.quality = static_cast<float>(*script_.confusion_score);
        cand.objectness = vis > 0.0 ? static_cast<float>(*script_.confusion_score) : 0.0f;
      } else {
        cand.quality = static_cast<float>(clamp01(vis - j));
        cand.objectness = vis > 0.0 ? static_cast<float>(clamp01(vis + j)) : 0.0f;
      }
      if (k == 0 || base.is_empty()) {
        cand.mask = base;
      } else {
        cand.mask = shift(base, shifts[k - 1].first, shifts[k - 1].second);
        if (cand.mask.is_empty()) cand.mask = base;
      }
    }
    block.records.push_back(std::move(rec));
  }
  return block;
}

SimulatedStream generate(const ScenarioScript& script, std::uint64_t seed) {
  Generator gen(script, seed);
  SimulatedStream out;
  out.records.header = gen.header();
  const auto tracked = gen.script().tracked_objects();
  std::vector<std::vector<double>> self_r(tracked.size());
  for (int t = 0; t < gen.script().frames; ++t) {
    const auto f = gen.frame(t);
    auto block = gen.predict(f);
    for (std::size_t k = 0; k < tracked.size(); ++k) {
      const bool own = gen.source_of(tracked[k], t) == tracked[k];
      self_r[k].push_back(own ? block.records[k].selected().reliability() : -1.0);
    }
    out.gt.push_back(f.gt);
    out.records.blocks.push_back(std::move(block));
  }
  if (gen.script().occlusion_band) {
    bool found = false;
    for (std::size_t k = 0; k < tracked.size() && !found; ++k) {
      int last_visible_before_gap = -1;
      for (int t = 0; t + 1 < gen.script().frames && !found; ++t) {
        const double r = self_r[k][static_cast<std::size_t>(t)];
        if (gen.visibility(t)[tracked[k]] > 0.0 && r >= gen.script().band_low && r < gen.script().band_high) {
          last_visible_before_gap = t;
        }
        if (last_visible_before_gap >= 0 && !(gen.visibility(t + 1)[tracked[k]] > 0.0)) found = true;
      }
    }
    if (!found) {
      throw std::runtime_error("scenario " + gen.script().name +
                               ": no pre-occlusion frame with reliability in the occlusion band");
    }
  }
  return out;
}

}  // namespace memtrack::sim
