#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alebk/blink/model.hpp"
#include "alebk/roi/geometry.hpp"
#include "alebk/temporal/events.hpp"
#include "json.hpp"

namespace alebk::io {

using nlohmann::json;

/// Finite doubles as numbers; infinities as "+inf"/"-inf", NaN as "nan".
json json_number(double v);
double number_from_json(const json& j, std::string_view what);

json read_json(const std::filesystem::path& path);
/// Two-space indented, trailing newline, written atomically.
void write_json(const std::filesystem::path& path, const json& j);

/// Manifest JSON:
///   {"root": "...",
///    "entries":  [{"left", "right", "label", "subject", "spectrum", "sequence"?}],
///    "sessions": [{"subject", "scores", "attention", "fps"?}]}
/// Paths are relative to `root`, which is itself relative to the manifest's
/// directory. Entries sharing a "sequence" id form one multi-frame sample in
/// manifest order.
struct ManifestEntry {
  std::filesystem::path left;
  std::filesystem::path right;
  int label = 0;
  std::string subject;
  blink::Spectrum spectrum = blink::Spectrum::RGB;
  std::optional<std::string> sequence;
};

struct ManifestSession {
  std::string subject;
  std::filesystem::path scores;
  std::filesystem::path attention;
  std::optional<double> fps;
};

struct Manifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
  std::vector<ManifestSession> sessions;

  std::filesystem::path resolve(const std::filesystem::path& p) const { return p.is_absolute() ? p : root / p; }
};

/// Checks labels, subject ids and that every referenced file exists.
Manifest load_manifest(const std::filesystem::path& path);
/// `root` is written as given.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Reads and validates the crops of the selected entries (all when empty).
std::vector<blink::EyePairSample> load_samples(const Manifest& manifest, const std::vector<std::size_t>& indices = {});

/// {"width": W, "height": H, "frames": {"<frame index>": [[x, y] x 68]}}
struct LandmarkFile {
  std::size_t width = 0;
  std::size_t height = 0;
  std::map<std::size_t, roi::LandmarkSet> frames;
};

LandmarkFile read_landmarks(const std::filesystem::path& path);
void write_landmarks(const std::filesystem::path& path, const LandmarkFile& file);

struct RunConfig {
  std::uint64_t seed = 0;
  blink::TrainConfig train;
  temporal::EventParams events;
  std::vector<double> tau_l;
  /// Overrides the dataset mean attention when set.
  std::optional<double> mu;
  double bin_width = 1.0;
  double fps = 30.0;
  double eye_margin = roi::kDefaultEyeMargin;
  std::string output_dir = "out";
};

/// Built-in defaults with the tau_L sweep 50, 45, ..., 5.
RunConfig default_config();
json config_to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const json& j);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace alebk::io
