#include "alebk/temporal/events.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace alebk::temporal {

void ScoreSequence::validate() const {
  if (scores.empty()) throw std::invalid_argument("score sequence is empty");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw std::invalid_argument("score sequence: fps must be positive");
}

double aggregate_sample_score(const ScoreSequence& seq, Orientation orientation) {
  seq.validate();
  if (orientation == Orientation::BlinkEvidence) return *std::max_element(seq.scores.begin(), seq.scores.end());
  return *std::min_element(seq.scores.begin(), seq.scores.end());
}

void EventParams::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("event threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
  if (min_run < 1) throw std::invalid_argument("min_run must be >= 1");
}

std::vector<BlinkEvent> detect_blink_events(const ScoreSequence& seq, const EventParams& params) {
  params.validate();
  if (!(seq.fps > 0.0)) throw std::invalid_argument("score sequence: fps must be positive");
  const auto& s = seq.scores;

  std::vector<BlinkEvent> runs;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] < params.threshold) {
      ++i;
      continue;
    }
    BlinkEvent e{i, i, s[i]};
    while (e.end + 1 < s.size() && s[e.end + 1] >= params.threshold) {
      ++e.end;
      e.peak = std::max(e.peak, s[e.end]);
    }
    i = e.end + 1;
    const std::size_t gap = runs.empty() ? 0 : e.start - runs.back().end - 1;
    if (!runs.empty() && gap <= params.merge_gap) {
      runs.back().end = e.end;
      runs.back().peak = std::max(runs.back().peak, e.peak);
    } else {
      runs.push_back(e);
    }
  }
  std::erase_if(runs, [&](const BlinkEvent& e) { return e.duration() < params.min_run; });
  return runs;
}

std::vector<MinuteWindow> blink_rate(std::span<const BlinkEvent> events, double fps, std::size_t session_frames) {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw std::invalid_argument("blink_rate: fps must be positive");
  const double window_frames = 60.0 * fps;
  const auto full = static_cast<std::size_t>(std::floor(static_cast<double>(session_frames) / window_frames));
  std::vector<MinuteWindow> windows(full);
  for (std::size_t k = 0; k < full; ++k) {
    windows[k].index = k;
    windows[k].first_frame = static_cast<std::size_t>(std::ceil(static_cast<double>(k) * window_frames));
    windows[k].last_frame = static_cast<std::size_t>(std::ceil(static_cast<double>(k + 1) * window_frames)) - 1;
  }
  for (const auto& e : events) {
    const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(e.start) / window_frames));
    if (k < full) windows[k].bpm += 1.0;
  }
  return windows;
}

}  // namespace alebk::temporal
