#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alebk/attention/alebk.hpp"
#include "alebk/blink/model.hpp"
#include "alebk/temporal/events.hpp"

namespace alebk::io {

/// Comma-separated, header row first, no quoting. Fields containing commas,
/// quotes or newlines are rejected on write.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws IoError naming `source` if absent.
  std::size_t column(std::string_view name, std::string_view source = "csv") const;
};

CsvTable parse_csv(std::string_view text, std::string_view source = "csv");
std::string format_csv(const CsvTable& table);

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan".
std::string format_double(double v);
double parse_double(std::string_view s, std::string_view context);
std::size_t parse_index(std::string_view s, std::string_view context);

/// Per-frame scores: frame_index,score,status,image. Skipped frames have an
/// empty score and status "skipped".
struct ScoreRow {
  std::size_t frame_index = 0;
  std::optional<double> score;
  std::string image;
};

void write_score_csv(const std::filesystem::path& path, const std::vector<ScoreRow>& rows);
/// Requires frame_index and score columns; others are optional.
std::vector<ScoreRow> read_score_csv(const std::filesystem::path& path);
/// Scores in frame order with skipped frames set to 0 (no blink evidence).
temporal::ScoreSequence to_sequence(const std::vector<ScoreRow>& rows, double fps);

/// timestamp_s,attention at 1 Hz.
void write_attention_csv(const std::filesystem::path& path, const attention::AttentionRecord& record);
attention::AttentionRecord read_attention_csv(const std::filesystem::path& path, std::string session_id);

/// epoch,loss,accuracy.
void write_history_csv(const std::filesystem::path& path, const std::vector<blink::EpochStats>& history);
std::vector<blink::EpochStats> read_history_csv(const std::filesystem::path& path);

/// start_frame,end_frame,duration_frames,start_s,end_s,peak.
void write_events_csv(const std::filesystem::path& path, const std::vector<temporal::BlinkEvent>& events, double fps);
std::vector<temporal::BlinkEvent> read_events_csv(const std::filesystem::path& path);

/// window,first_frame,last_frame,bpm.
void write_bpm_csv(const std::filesystem::path& path, const std::vector<temporal::MinuteWindow>& windows);
std::vector<temporal::MinuteWindow> read_bpm_csv(const std::filesystem::path& path);

/// Plot data: x,y,series.
struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  std::string series;

  friend bool operator==(const PlotPoint&, const PlotPoint&) = default;
};

void write_plot_csv(const std::filesystem::path& path, const std::vector<PlotPoint>& points);
std::vector<PlotPoint> read_plot_csv(const std::filesystem::path& path);

}  // namespace alebk::io
