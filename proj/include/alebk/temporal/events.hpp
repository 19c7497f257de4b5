#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace alebk::temporal {

/// Per-frame blink scores of one sample or session.
struct ScoreSequence {
  std::vector<double> scores;
  double fps = 30.0;
  double origin_s = 0.0;

  void validate() const;
};

/// Which end of the score range means "closed".
enum class Orientation {
  BlinkEvidence,  // high score = closed; the sample score is the maximum
  OpenEvidence,   // low score = closed; the sample score is the minimum
};

/// Extremal per-frame score carrying the strongest closed-eye evidence.
double aggregate_sample_score(const ScoreSequence& seq, Orientation orientation = Orientation::BlinkEvidence);

inline constexpr std::size_t kHustSampleFrames = 13;
inline constexpr std::size_t kMebalSampleFrames = 19;

struct BlinkEvent {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // inclusive
  double peak = 0.0;

  std::size_t duration() const noexcept { return end - start + 1; }
  friend bool operator==(const BlinkEvent&, const BlinkEvent&) = default;
};

struct EventParams {
  double threshold = 0.5;
  std::size_t min_run = 1;
  std::size_t merge_gap = 1;

  void validate() const;
};

/// Maximal runs of frames with score >= threshold. Runs separated by at most
/// `merge_gap` sub-threshold frames are merged, then events shorter than
/// `min_run` frames are dropped.
std::vector<BlinkEvent> detect_blink_events(const ScoreSequence& seq, const EventParams& params);

struct MinuteWindow {
  std::size_t index = 0;
  double bpm = 0.0;
  std::size_t first_frame = 0;
  std::size_t last_frame = 0;  // inclusive
};

/// One window per complete 60 s span of `session_frames` frames; each event
/// counts in the window holding its start frame. Trailing partial minutes
/// and the events starting in them are dropped.
std::vector<MinuteWindow> blink_rate(std::span<const BlinkEvent> events, double fps, std::size_t session_frames);

}  // namespace alebk::temporal
