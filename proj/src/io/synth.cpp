#include "alebk/io/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "alebk/io/csv.hpp"
#include "alebk/io/image.hpp"
#include "alebk/io/json_io.hpp"
#include "alebk/roi/geometry.hpp"

namespace alebk::synth {

namespace fs = std::filesystem;

namespace {

constexpr double kSkin = 0.6;
constexpr double kNoise = 0.04;

// (u, v) in [-1, 1] across the eye box.
double eye_intensity(double u, double v, bool closed) {
  if (closed) return (std::abs(v) <= 0.09 && std::abs(u) <= 0.6) ? 0.12 : kSkin;
  const double e = (u / 0.55) * (u / 0.55) + (v / 0.3) * (v / 0.3);
  if (e > 1.0) return kSkin;
  return u * u + v * v <= 0.22 * 0.22 ? 0.1 : 0.95;
}

double noisy(double v, nn::Rng& rng) { return std::clamp(v + rng.uniform(-kNoise, kNoise), 0.0, 1.0); }

std::string padded(std::size_t v, std::size_t width) {
  std::string s = std::to_string(v);
  return std::string(s.size() < width ? width - s.size() : 0, '0') + s;
}

std::string subject_name(std::size_t i) { return "s" + padded(i + 1, 2); }

std::string numbered(const char* prefix, std::size_t i, const char* suffix) {
  return prefix + padded(i, 4) + suffix;
}

}  // namespace

std::size_t poisson(double lambda, nn::Rng& rng) {
  if (!(lambda >= 0.0) || lambda > 500.0) throw std::invalid_argument("poisson: rate must lie in [0, 500]");
  const double limit = std::exp(-lambda);
  std::size_t k = 0;
  double p = rng.uniform();
  while (p > limit) {
    ++k;
    p *= rng.uniform();
  }
  return k;
}

Tensor render_eye(bool closed, nn::Rng& rng, std::size_t size) {
  Tensor t({size, size, 3});
  const double n = static_cast<double>(size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double u = (static_cast<double>(x) + 0.5) / n * 2.0 - 1.0;
      const double v = (static_cast<double>(y) + 0.5) / n * 2.0 - 1.0;
      const double base = eye_intensity(u, v, closed);
      for (std::size_t c = 0; c < 3; ++c) t.at(y, x, c) = noisy(base, rng);
    }
  }
  return t;
}

std::vector<blink::EyePairSample> eye_pairs(std::size_t count, std::size_t subjects, nn::Rng& rng) {
  if (subjects == 0) throw std::invalid_argument("eye_pairs: need at least one subject");
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<int>(i % 2);
  rng.shuffle(std::span<int>(labels));
  std::vector<blink::EyePairSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    blink::EyePairSample s;
    s.label = labels[i];
    s.left = render_eye(s.label == 1, rng);
    s.right = render_eye(s.label == 1, rng);
    s.subject_id = subject_name(i % subjects);
    out.push_back(std::move(s));
  }
  return out;
}

fs::path write_eye_dataset(const fs::path& dir, std::size_t count, std::size_t subjects, std::uint64_t seed) {
  nn::Rng rng(seed);
  const auto samples = eye_pairs(count, subjects, rng);
  io::Manifest m;
  m.root = ".";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string l = "crops/" + numbered("pair_", i, "_l.png"), r = "crops/" + numbered("pair_", i, "_r.png");
    io::write_image(dir / l, samples[i].left);
    io::write_image(dir / r, samples[i].right);
    m.entries.push_back({l, r, samples[i].label, samples[i].subject_id, blink::Spectrum::RGB, std::nullopt});
  }
  const fs::path manifest = dir / "manifest.json";
  io::write_manifest(manifest, m);
  return manifest;
}

fs::path write_sequence_dataset(const fs::path& dir, std::size_t sequences, std::size_t subjects, std::size_t frames,
                                std::uint64_t seed) {
  if (frames < 4) throw std::invalid_argument("sequence dataset: need at least 4 frames per sequence");
  if (subjects == 0) throw std::invalid_argument("sequence dataset: need at least one subject");
  nn::Rng rng(seed);
  io::Manifest m;
  m.root = ".";
  for (std::size_t s = 0; s < sequences; ++s) {
    const bool blink = s % 2 == 1;
    const std::size_t run = 2 + static_cast<std::size_t>(rng.below(3));
    const std::size_t start = static_cast<std::size_t>(rng.below(frames - run + 1));
    const std::string id = numbered("seq_", s, "");
    for (std::size_t f = 0; f < frames; ++f) {
      const bool closed = blink && f >= start && f < start + run;
      const std::string base = "sequences/" + id + "/" + numbered("frame_", f, "");
      io::write_image(dir / (base + "_l.png"), render_eye(closed, rng));
      io::write_image(dir / (base + "_r.png"), render_eye(closed, rng));
      m.entries.push_back({base + "_l.png", base + "_r.png", closed ? 1 : 0, subject_name(s % subjects),
                           blink::Spectrum::RGB, id});
    }
  }
  const fs::path manifest = dir / "manifest.json";
  io::write_manifest(manifest, m);
  return manifest;
}

SyntheticSession make_session(const SessionSpec& spec, std::string id, nn::Rng& rng) {
  const double window = 60.0 * spec.fps;
  if (!(spec.fps > 0.0) || window != std::floor(window)) {
    throw std::invalid_argument("make_session: 60 * fps must be a whole number of frames");
  }
  const auto wf = static_cast<std::size_t>(window);
  constexpr std::size_t kSlot = 12;
  const std::size_t slots = wf / kSlot;
  if (slots == 0) throw std::invalid_argument("make_session: fps too low to place blinks");

  SyntheticSession s;
  s.scores.fps = spec.fps;
  s.scores.scores.resize(spec.minutes * wf);
  for (auto& v : s.scores.scores) v = rng.uniform(0.02, 0.3);
  s.attention.session_id = std::move(id);

  std::vector<std::size_t> slot_ids(slots);
  for (std::size_t m = 0; m < spec.minutes; ++m) {
    attention::AttentionClass cls;
    if (rng.bernoulli(spec.normal_fraction)) {
      cls = attention::AttentionClass::Normal;
    } else {
      cls = rng.bernoulli(0.5) ? attention::AttentionClass::High : attention::AttentionClass::Low;
    }
    s.truth.push_back(cls);

    double rate = spec.normal_rate, target = rng.uniform(12.0, 88.0);
    if (cls == attention::AttentionClass::High) {
      rate = spec.high_rate;
      target = rng.uniform(94.0, 98.0);
    } else if (cls == attention::AttentionClass::Low) {
      rate = spec.low_rate;
      target = rng.uniform(2.0, 6.0);
    }
    for (std::size_t i = 0; i < attention::kSamplesPerMinute; ++i) {
      s.attention.values.push_back(std::clamp(target + rng.uniform(-2.0, 2.0), 0.0, 100.0));
    }

    const std::size_t k = std::min(poisson(rate, rng), slots);
    std::iota(slot_ids.begin(), slot_ids.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(slot_ids[i], slot_ids[i + static_cast<std::size_t>(rng.below(slots - i))]);
    }
    std::vector<std::size_t> chosen(slot_ids.begin(), slot_ids.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t slot : chosen) {
      const std::size_t start = m * wf + slot * kSlot + static_cast<std::size_t>(rng.below(3));
      const std::size_t len = 3 + static_cast<std::size_t>(rng.below(3));
      temporal::BlinkEvent e{start, start + len - 1, 0.0};
      for (std::size_t f = e.start; f <= e.end; ++f) {
        s.scores.scores[f] = rng.uniform(0.7, 0.98);
        e.peak = std::max(e.peak, s.scores.scores[f]);
      }
      s.planted.push_back(e);
    }
  }
  return s;
}

fs::path write_session_dataset(const fs::path& dir, std::size_t sessions, const SessionSpec& spec,
                               std::uint64_t seed) {
  nn::Rng rng(seed);
  io::Manifest m;
  m.root = ".";
  for (std::size_t i = 0; i < sessions; ++i) {
    const std::string subject = subject_name(i);
    const auto s = make_session(spec, subject, rng);
    std::vector<io::ScoreRow> rows;
    rows.reserve(s.scores.scores.size());
    for (std::size_t f = 0; f < s.scores.scores.size(); ++f) rows.push_back({f, s.scores.scores[f], ""});
    const std::string scores = "sessions/" + subject + "_scores.csv", att = "sessions/" + subject + "_attention.csv";
    io::write_score_csv(dir / scores, rows);
    io::write_attention_csv(dir / att, s.attention);
    m.sessions.push_back({subject, scores, att, spec.fps});
  }
  const fs::path manifest = dir / "manifest.json";
  io::write_manifest(manifest, m);
  return manifest;
}

void write_frame_dataset(const fs::path& dir, const FrameSpec& spec, std::uint64_t seed) {
  nn::Rng rng(seed);
  const double W = static_cast<double>(spec.width), H = static_cast<double>(spec.height);
  const roi::Point center{W / 2.0, H / 2.0};
  const roi::Point eyes[2] = {{center.x - 30.0, center.y - 10.0}, {center.x + 30.0, center.y - 10.0}};
  constexpr double kHalfWidth = 12.0;
  const double box_half = kHalfWidth * (1.0 + 2.0 * roi::kDefaultEyeMargin);

  io::LandmarkFile lm{spec.width, spec.height, {}};
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const bool closed = std::find(spec.closed.begin(), spec.closed.end(), f) != spec.closed.end();
    const double angle = rng.uniform(-spec.max_angle_deg, spec.max_angle_deg) * std::numbers::pi / 180.0;
    const double half_height = closed ? 1.0 : 5.0;

    // Canonical (unrotated) 68-point layout.
    std::vector<roi::Point> pts(roi::kLandmarkCount);
    for (std::size_t i = 0; i < 17; ++i) {
      const double t = std::numbers::pi * static_cast<double>(i) / 16.0;
      pts[i] = {center.x - 55.0 * std::cos(t), center.y + 10.0 + 50.0 * std::sin(t)};
    }
    for (std::size_t i = 17; i < 27; ++i) pts[i] = {center.x - 50.0 + 11.0 * static_cast<double>(i - 17), center.y - 25.0};
    for (std::size_t i = 27; i < 36; ++i) pts[i] = {center.x - 8.0 + 2.0 * static_cast<double>(i - 27), center.y + 5.0 + static_cast<double>(i - 27)};
    for (std::size_t e = 0; e < 2; ++e) {
      const roi::Point c = eyes[e];
      const std::size_t b = roi::kLeftEyeBegin + 6 * e;
      pts[b + 0] = {c.x - kHalfWidth, c.y};
      pts[b + 1] = {c.x - kHalfWidth / 2.0, c.y - half_height};
      pts[b + 2] = {c.x + kHalfWidth / 2.0, c.y - half_height};
      pts[b + 3] = {c.x + kHalfWidth, c.y};
      pts[b + 4] = {c.x + kHalfWidth / 2.0, c.y + half_height};
      pts[b + 5] = {c.x - kHalfWidth / 2.0, c.y + half_height};
    }
    for (std::size_t i = 48; i < 68; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(i - 48) / 20.0;
      pts[i] = {center.x + 20.0 * std::cos(t), center.y + 35.0 + 8.0 * std::sin(t)};
    }
    for (auto& p : pts) p = roi::rotate_point(p, center, angle);

    Tensor img({spec.height, spec.width, 1});
    for (std::size_t y = 0; y < spec.height; ++y) {
      for (std::size_t x = 0; x < spec.width; ++x) {
        const roi::Point q = roi::rotate_point({static_cast<double>(x), static_cast<double>(y)}, center, -angle);
        double v = kSkin;
        for (const auto& c : eyes) {
          const double u = (q.x - c.x) / box_half, w = (q.y - c.y) / box_half;
          if (std::abs(u) <= 1.0 && std::abs(w) <= 1.0) v = eye_intensity(u, w, closed);
        }
        img.at(y, x, 0) = noisy(v, rng);
      }
    }
    io::write_image(dir / "frames" / numbered("frame_", f, ".png"), img);
    if (std::find(spec.missing_landmarks.begin(), spec.missing_landmarks.end(), f) == spec.missing_landmarks.end()) {
      lm.frames.emplace(f, roi::LandmarkSet::from_points(pts, spec.width, spec.height));
    }
  }
  io::write_landmarks(dir / "landmarks.json", lm);
}

}  // namespace alebk::synth
