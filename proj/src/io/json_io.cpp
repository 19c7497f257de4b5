#include "alebk/io/json_io.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "alebk/attention/alebk.hpp"
#include "alebk/io/files.hpp"
#include "alebk/io/image.hpp"

namespace alebk::io {

namespace fs = std::filesystem;

json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

double number_from_json(const json& j, std::string_view what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "+inf" || s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw IoError(std::string(what) + ": expected a number, got " + j.dump());
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw IoError("'" + path.string() + "': invalid JSON: " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { atomic_write(path, j.dump(2) + "\n"); }

namespace {

template <typename T>
T get_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw IoError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw IoError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  const json j = read_json(path);
  const std::string src = path.string();
  if (!j.is_object()) throw IoError(src + ": manifest must be a JSON object");
  Manifest m;
  const fs::path root = j.contains("root") ? fs::path(get_field<std::string>(j, "root", src)) : fs::path(".");
  m.root = root.is_absolute() ? root : path.parent_path() / root;

  auto require_file = [&](const fs::path& rel, const std::string& where) {
    if (!fs::is_regular_file(m.resolve(rel))) throw IoError(where + ": file '" + m.resolve(rel).string() + "' not found");
  };

  if (j.contains("entries")) {
    std::size_t i = 0;
    for (const auto& e : j.at("entries")) {
      const std::string where = src + ": entry " + std::to_string(i++);
      ManifestEntry me;
      me.left = get_field<std::string>(e, "left", where);
      me.right = get_field<std::string>(e, "right", where);
      me.label = get_field<int>(e, "label", where);
      me.subject = get_field<std::string>(e, "subject", where);
      if (me.label != 0 && me.label != 1) throw IoError(where + ": label must be 0 or 1");
      if (me.subject.empty()) throw IoError(where + ": subject must be non-empty");
      if (e.contains("spectrum")) {
        try {
          me.spectrum = blink::spectrum_from_string(get_field<std::string>(e, "spectrum", where));
        } catch (const std::invalid_argument& ex) {
          throw IoError(where + ": " + ex.what());
        }
      }
      if (e.contains("sequence")) me.sequence = get_field<std::string>(e, "sequence", where);
      require_file(me.left, where);
      require_file(me.right, where);
      m.entries.push_back(std::move(me));
    }
  }
  if (j.contains("sessions")) {
    std::size_t i = 0;
    for (const auto& s : j.at("sessions")) {
      const std::string where = src + ": session " + std::to_string(i++);
      ManifestSession ms;
      ms.subject = get_field<std::string>(s, "subject", where);
      ms.scores = get_field<std::string>(s, "scores", where);
      ms.attention = get_field<std::string>(s, "attention", where);
      if (s.contains("fps")) ms.fps = get_field<double>(s, "fps", where);
      if (ms.subject.empty()) throw IoError(where + ": subject must be non-empty");
      if (ms.fps && !(*ms.fps > 0.0)) throw IoError(where + ": fps must be positive");
      require_file(ms.scores, where);
      require_file(ms.attention, where);
      m.sessions.push_back(std::move(ms));
    }
  }
  return m;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  json j;
  j["root"] = m.root.string();
  j["entries"] = json::array();
  for (const auto& e : m.entries) {
    json je{{"left", e.left.string()},
            {"right", e.right.string()},
            {"label", e.label},
            {"subject", e.subject},
            {"spectrum", blink::to_string(e.spectrum)}};
    if (e.sequence) je["sequence"] = *e.sequence;
    j["entries"].push_back(std::move(je));
  }
  j["sessions"] = json::array();
  for (const auto& s : m.sessions) {
    json js{{"subject", s.subject}, {"scores", s.scores.string()}, {"attention", s.attention.string()}};
    if (s.fps) js["fps"] = *s.fps;
    j["sessions"].push_back(std::move(js));
  }
  write_json(path, j);
}

std::vector<blink::EyePairSample> load_samples(const Manifest& m, const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> idx = indices;
  if (idx.empty()) {
    for (std::size_t i = 0; i < m.entries.size(); ++i) idx.push_back(i);
  }
  std::vector<blink::EyePairSample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const auto& e = m.entries.at(i);
    blink::EyePairSample s;
    auto load = [&](const fs::path& rel, const char* which) {
      Tensor t = read_image(m.resolve(rel));
      if (t.rank() == 3 && t.dim(2) == 1) {
        Tensor rgb({t.dim(0), t.dim(1), 3});
        for (std::size_t k = 0; k < t.size(); ++k) rgb[k * 3] = rgb[k * 3 + 1] = rgb[k * 3 + 2] = t[k];
        t = std::move(rgb);
      }
      try {
        blink::validate_crop(t, which);
      } catch (const std::invalid_argument& ex) {
        throw IoError("'" + m.resolve(rel).string() + "': " + ex.what());
      }
      return t;
    };
    s.left = load(e.left, "left");
    s.right = load(e.right, "right");
    s.label = e.label;
    s.subject_id = e.subject;
    s.spectrum = e.spectrum;
    out.push_back(std::move(s));
  }
  return out;
}

LandmarkFile read_landmarks(const fs::path& path) {
  const json j = read_json(path);
  const std::string src = path.string();
  LandmarkFile f;
  f.width = get_field<std::size_t>(j, "width", src);
  f.height = get_field<std::size_t>(j, "height", src);
  if (!j.contains("frames") || !j.at("frames").is_object()) throw IoError(src + ": missing 'frames' object");
  for (const auto& [key, pts] : j.at("frames").items()) {
    const std::string where = src + ": frame " + key;
    std::size_t index = 0;
    try {
      std::size_t used = 0;
      index = std::stoull(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw IoError(where + ": frame keys must be integers");
    }
    std::vector<roi::Point> points;
    for (const auto& p : pts) {
      if (!p.is_array() || p.size() != 2) throw IoError(where + ": points must be [x, y] pairs");
      points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    try {
      f.frames.emplace(index, roi::LandmarkSet::from_points(points, f.width, f.height));
    } catch (const std::invalid_argument& e) {
      throw IoError(where + ": " + e.what());
    }
  }
  return f;
}

void write_landmarks(const fs::path& path, const LandmarkFile& f) {
  json frames = json::object();
  for (const auto& [index, set] : f.frames) {
    json pts = json::array();
    for (const auto& p : set.points) pts.push_back({p.x, p.y});
    frames[std::to_string(index)] = std::move(pts);
  }
  write_json(path, json{{"width", f.width}, {"height", f.height}, {"frames", std::move(frames)}});
}

RunConfig default_config() {
  RunConfig c;
  c.tau_l = attention::default_tau_l_sweep();
  return c;
}

json config_to_json(const RunConfig& c) {
  json train{{"epochs", c.train.epochs},
             {"batch_size", c.train.batch_size},
             {"learning_rate", c.train.learning_rate},
             {"patience", c.train.patience},
             {"target_accuracy", c.train.target_accuracy ? json(*c.train.target_accuracy) : json(nullptr)}};
  json events{{"threshold", c.events.threshold}, {"min_run", c.events.min_run}, {"merge_gap", c.events.merge_gap}};
  json att{{"tau_l", c.tau_l}, {"mu", c.mu ? json(*c.mu) : json(nullptr)}, {"bin_width", c.bin_width}};
  return json{{"seed", c.seed},   {"train", train},           {"events", events},
              {"attention", att}, {"fps", c.fps},             {"eye_margin", c.eye_margin},
              {"output_dir", c.output_dir}};
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  if (!obj.is_object()) throw IoError(where + ": expected an object");
  std::set<std::string> k(known.begin(), known.end());
  for (const auto& [key, _] : obj.items()) {
    if (!k.count(key)) throw IoError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void maybe(const json& obj, const char* key, T& out, const std::string& where) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = get_field<T>(obj, key, where);
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c = default_config();
  reject_unknown(j, {"seed", "train", "events", "attention", "fps", "eye_margin", "output_dir"}, "config");
  maybe(j, "seed", c.seed, "config");
  maybe(j, "fps", c.fps, "config");
  maybe(j, "eye_margin", c.eye_margin, "config");
  maybe(j, "output_dir", c.output_dir, "config");
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t, {"epochs", "batch_size", "learning_rate", "patience", "target_accuracy"}, "config.train");
    maybe(t, "epochs", c.train.epochs, "config.train");
    maybe(t, "batch_size", c.train.batch_size, "config.train");
    maybe(t, "learning_rate", c.train.learning_rate, "config.train");
    maybe(t, "patience", c.train.patience, "config.train");
    if (t.contains("target_accuracy") && !t.at("target_accuracy").is_null()) {
      c.train.target_accuracy = get_field<double>(t, "target_accuracy", "config.train");
    }
  }
  if (j.contains("events")) {
    const auto& e = j.at("events");
    reject_unknown(e, {"threshold", "min_run", "merge_gap"}, "config.events");
    maybe(e, "threshold", c.events.threshold, "config.events");
    maybe(e, "min_run", c.events.min_run, "config.events");
    maybe(e, "merge_gap", c.events.merge_gap, "config.events");
  }
  if (j.contains("attention")) {
    const auto& a = j.at("attention");
    reject_unknown(a, {"tau_l", "mu", "bin_width"}, "config.attention");
    maybe(a, "tau_l", c.tau_l, "config.attention");
    if (a.contains("mu") && !a.at("mu").is_null()) c.mu = get_field<double>(a, "mu", "config.attention");
    maybe(a, "bin_width", c.bin_width, "config.attention");
  }
  if (!(c.fps > 0.0)) throw IoError("config: fps must be positive");
  if (c.train.epochs == 0 || c.train.batch_size == 0) throw IoError("config.train: epochs and batch_size must be >= 1");
  if (!(c.bin_width > 0.0)) throw IoError("config.attention: bin_width must be positive");
  for (double t : c.tau_l) {
    if (!(t >= 0.0 && t <= 50.0)) throw IoError("config.attention: tau_l values must lie in [0, 50]");
  }
  try {
    c.events.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("config.events: ") + e.what());
  }
  c.train.seed = c.seed;
  return c;
}

RunConfig load_config(const fs::path& path) {
  try {
    return config_from_json(read_json(path));
  } catch (const IoError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace alebk::io
