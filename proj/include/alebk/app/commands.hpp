#pragma once

// Library side of the CLI subcommands. Each command writes its outputs
// atomically under the given directory and throws on bad input; the CLI
// maps exceptions to a nonzero exit status.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "alebk/blink/model.hpp"
#include "alebk/io/csv.hpp"
#include "alebk/io/json_io.hpp"

namespace alebk::app {

namespace fs = std::filesystem;
using io::json;
using io::RunConfig;

struct TrainOutputs {
  fs::path model;
  fs::path history;
  blink::TrainResult result;
};

/// model.alebk, history.csv and config.json under `out_dir`.
TrainOutputs cmd_train(const fs::path& manifest, const RunConfig& config, const fs::path& out_dir);

/// One row per image in `frames_dir`, ordered by the frame number in the
/// file name. Frames without landmarks get a "skipped" row.
std::vector<io::ScoreRow> cmd_score(const fs::path& model, const fs::path& frames_dir, const fs::path& landmarks,
                                    const fs::path& out_csv, const RunConfig& config);

struct EventOutputs {
  std::vector<temporal::BlinkEvent> events;
  std::vector<temporal::MinuteWindow> windows;
};

/// events.csv and bpm.csv under `out_dir`.
EventOutputs cmd_events(const fs::path& scores_csv, const RunConfig& config, const fs::path& out_dir);

/// calibration.json (one row per tau_L), plots/bpm_pdf.csv,
/// plots/far_frr.csv and config.json under `out_dir`. Returns the report.
json cmd_calibrate(const fs::path& manifest, const RunConfig& config, const fs::path& out_dir);

enum class Protocol { Holdout, Loso, HustMin };

Protocol protocol_from_string(std::string_view s);
const char* to_string(Protocol p) noexcept;

/// metrics.json under `out_dir`. Holdout and hust-min need `model`; loso
/// trains one model per fold from `config`.
json cmd_evaluate(const std::optional<fs::path>& model, const fs::path& manifest, Protocol protocol,
                  const RunConfig& config, const fs::path& out_dir);

struct SynthOptions {
  std::string kind;  // eyes | sequences | sessions | frames
  std::size_t count = 32;
  std::size_t subjects = 3;
  std::size_t frames = 13;
  std::size_t minutes = 20;
  double normal_fraction = 0.3;
};

/// Returns the path of the main output (manifest or landmark file).
fs::path cmd_synth(const SynthOptions& options, const fs::path& out_dir, std::uint64_t seed);

/// Confusion counts, precision/recall/F1 ("undefined" when a ratio has no
/// denominator), accuracy and the EER point of the scores.
json metrics_report(const std::vector<double>& scores, const std::vector<int>& labels, double threshold);

}  // namespace alebk::app
