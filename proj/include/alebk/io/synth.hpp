#pragma once

// Synthetic stand-ins for the external datasets: eye crops, multi-frame
// blink sequences, face frames with landmarks, and blink/attention sessions
// where low attention comes with a higher blink rate.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alebk/attention/alebk.hpp"
#include "alebk/blink/model.hpp"
#include "alebk/nn/rng.hpp"
#include "alebk/temporal/events.hpp"

namespace alebk::synth {

/// Knuth's product method; fine for the small rates used here.
std::size_t poisson(double lambda, nn::Rng& rng);

/// size x size x 3 crop. Open: bright almond with a dark iris. Closed: a
/// dark horizontal lid band on skin.
Tensor render_eye(bool closed, nn::Rng& rng, std::size_t size = blink::kCropSize);

/// `count` pairs, labels alternating 0/1 before a shuffle, subjects
/// "s01".."sNN" assigned round robin.
std::vector<blink::EyePairSample> eye_pairs(std::size_t count, std::size_t subjects, nn::Rng& rng);

/// PNG crops plus manifest.json under `dir`; returns the manifest path.
std::filesystem::path write_eye_dataset(const std::filesystem::path& dir, std::size_t count, std::size_t subjects,
                                        std::uint64_t seed);

/// Multi-frame samples: half contain a closed run of 2-4 frames, the rest
/// stay open. Entries carry per-frame labels and a shared "sequence" id.
std::filesystem::path write_sequence_dataset(const std::filesystem::path& dir, std::size_t sequences,
                                             std::size_t subjects, std::size_t frames, std::uint64_t seed);

struct SessionSpec {
  std::size_t minutes = 20;
  double fps = 30.0;
  double high_rate = 5.0;
  double low_rate = 15.0;
  double normal_rate = 10.0;
  /// Fraction of minutes that are Normal; the rest split evenly High/Low.
  double normal_fraction = 0.3;
};

struct SyntheticSession {
  temporal::ScoreSequence scores;
  attention::AttentionRecord attention;
  /// Generating class of each minute.
  std::vector<attention::AttentionClass> truth;
  /// Planted blinks, in frame order; never within two frames of each other.
  std::vector<temporal::BlinkEvent> planted;
};

SyntheticSession make_session(const SessionSpec& spec, std::string id, nn::Rng& rng);

/// Score CSVs, attention CSVs and a manifest with one session per file pair.
std::filesystem::path write_session_dataset(const std::filesystem::path& dir, std::size_t sessions,
                                            const SessionSpec& spec, std::uint64_t seed);

struct FrameSpec {
  std::size_t frames = 19;
  std::size_t width = 200;
  std::size_t height = 160;
  double max_angle_deg = 20.0;
  /// Frames drawn with closed eyes.
  std::vector<std::size_t> closed;
  /// Frames left out of the landmark file.
  std::vector<std::size_t> missing_landmarks;
};

/// frames/frame_NNNN.png and landmarks.json under `dir`, one random head
/// roll per frame.
void write_frame_dataset(const std::filesystem::path& dir, const FrameSpec& spec, std::uint64_t seed);

}  // namespace alebk::synth
