#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace alebk::attention {

inline constexpr std::size_t kSamplesPerMinute = 60;

/// 1 Hz ground-truth attention stream, values in [0, 100].
struct AttentionRecord {
  std::string session_id;
  std::vector<double> values;

  void validate() const;
};

enum class AttentionClass { High, Normal, Low };

const char* to_string(AttentionClass c) noexcept;

struct AttentionThresholds {
  double mu = 0.0;
  double delta = 0.0;
  double tau_l = 0.0;
  double tau_h = 0.0;
};

/// Mean over every sample of every record. Throws when there are none.
double compute_mu(std::span<const AttentionRecord> records);

/// tau_L = mu - delta, tau_H = 100 - tau_L. Accepts tau_L in [0, 50]; 50
/// gives the 50/50 split with an empty Normal band.
AttentionThresholds thresholds_from_delta(double mu, double delta);
/// Same configuration addressed by tau_L directly (delta = mu - tau_L).
AttentionThresholds thresholds_from_tau_l(double mu, double tau_l);

/// Strict inequalities: a mean equal to either threshold is Normal.
AttentionClass classify_attention(double mean, const AttentionThresholds& t);

struct MinuteLabel {
  std::size_t index = 0;
  double mean = 0.0;
  AttentionClass cls = AttentionClass::Normal;
};

/// One label per complete 60-sample block; fewer samples give no labels.
std::vector<MinuteLabel> label_minutes(const AttentionRecord& record, const AttentionThresholds& t);

/// bpm >= tau_bpm is Low. Throws on negative or NaN bpm.
AttentionClass classify_by_bpm(double bpm, double tau_bpm);

struct BpmObservation {
  double bpm = 0.0;
  AttentionClass truth = AttentionClass::Normal;
};

struct CurvePoint {
  double tau_bpm = 0.0;
  double far = 0.0;  // Low minutes classified High / Low minutes
  double frr = 0.0;  // High minutes classified Low / High minutes
};

struct CalibrationResult {
  double tau_bpm_eer = 0.0;
  double far_at_eer = 0.0;
  double frr_at_eer = 0.0;
  /// 1 - (FAR + FRR) / 2 at the EER threshold.
  double accuracy_at_eer = 0.0;
  double tau_bpm_maxacc = 0.0;
  /// Overall two-class accuracy at the best threshold.
  double max_accuracy = 0.0;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  std::vector<CurvePoint> curve;
};

/// Normal observations are ignored. Throws unless both High and Low occur.
CalibrationResult calibrate(std::span<const BpmObservation> observations);

struct Density {
  double origin = 0.0;  // left edge of bin 0
  double bin_width = 1.0;
  std::vector<double> density;
  std::size_t count = 0;
  double mean = 0.0;

  double bin_center(std::size_t i) const noexcept { return origin + (static_cast<double>(i) + 0.5) * bin_width; }
};

struct ClassDensities {
  Density high;
  Density low;
};

/// Histogram densities on a shared bin grid, each integrating to 1.
ClassDensities pdf_by_class(std::span<const BpmObservation> observations, double bin_width = 1.0);
/// Integral of min(high, low); 1 for identical densities, 0 for disjoint.
double overlap_area(const ClassDensities& d);

struct Session {
  std::string id;
  /// Blink rate per complete minute, aligned with the attention minutes.
  std::vector<double> bpm;
  AttentionRecord attention;
};

/// Labelled minutes of all sessions. Each session contributes
/// min(#bpm windows, #attention minutes) observations, Normal included.
std::vector<BpmObservation> pair_minutes(std::span<const Session> sessions, const AttentionThresholds& t);

struct SweepRow {
  AttentionThresholds thresholds;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  std::size_t n_normal = 0;
  /// Empty when a class is missing; `note` says which.
  std::optional<CalibrationResult> result;
  std::string note;
};

/// tau_L values 50, 45, ..., 5.
std::vector<double> default_tau_l_sweep();

/// One calibration per tau_L, evaluated independently.
std::vector<SweepRow> sweep(std::span<const Session> sessions, double mu, std::span<const double> tau_l_values);

}  // namespace alebk::attention
