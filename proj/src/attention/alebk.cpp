#include "alebk/attention/alebk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alebk/eval/metrics.hpp"

namespace alebk::attention {

void AttentionRecord::validate() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 100.0)) {
      throw std::invalid_argument("attention record '" + session_id + "': sample " + std::to_string(i) +
                                  " outside [0, 100]");
    }
  }
}

const char* to_string(AttentionClass c) noexcept {
  switch (c) {
    case AttentionClass::High: return "high";
    case AttentionClass::Normal: return "normal";
    case AttentionClass::Low: return "low";
  }
  return "?";
}

double compute_mu(std::span<const AttentionRecord> records) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    r.validate();
    for (double v : r.values) sum += v;
    n += r.values.size();
  }
  if (n == 0) throw std::invalid_argument("compute_mu: no attention samples");
  return sum / static_cast<double>(n);
}

AttentionThresholds thresholds_from_delta(double mu, double delta) {
  if (!std::isfinite(mu) || !std::isfinite(delta)) throw std::invalid_argument("thresholds: mu and delta must be finite");
  AttentionThresholds t{mu, delta, mu - delta, 0.0};
  t.tau_h = 100.0 - t.tau_l;
  if (t.tau_l > t.tau_h) {
    throw std::invalid_argument("thresholds: tau_L " + std::to_string(t.tau_l) + " exceeds tau_H " +
                                std::to_string(t.tau_h));
  }
  if (t.tau_l < 0.0) throw std::invalid_argument("thresholds: tau_L " + std::to_string(t.tau_l) + " is negative");
  return t;
}

AttentionThresholds thresholds_from_tau_l(double mu, double tau_l) {
  AttentionThresholds t = thresholds_from_delta(mu, mu - tau_l);
  // mu - (mu - tau_l) can differ from tau_l in the last bit.
  t.tau_l = tau_l;
  t.tau_h = 100.0 - tau_l;
  return t;
}

AttentionClass classify_attention(double mean, const AttentionThresholds& t) {
  if (mean > t.tau_h) return AttentionClass::High;
  if (mean < t.tau_l) return AttentionClass::Low;
  return AttentionClass::Normal;
}

std::vector<MinuteLabel> label_minutes(const AttentionRecord& record, const AttentionThresholds& t) {
  record.validate();
  const std::size_t minutes = record.values.size() / kSamplesPerMinute;
  std::vector<MinuteLabel> labels;
  labels.reserve(minutes);
  for (std::size_t m = 0; m < minutes; ++m) {
    double sum = 0.0;
    for (std::size_t i = m * kSamplesPerMinute; i < (m + 1) * kSamplesPerMinute; ++i) sum += record.values[i];
    const double mean = sum / static_cast<double>(kSamplesPerMinute);
    labels.push_back({m, mean, classify_attention(mean, t)});
  }
  return labels;
}

AttentionClass classify_by_bpm(double bpm, double tau_bpm) {
  if (!(bpm >= 0.0)) throw std::invalid_argument("classify_by_bpm: bpm must be non-negative");
  return bpm >= tau_bpm ? AttentionClass::Low : AttentionClass::High;
}

CalibrationResult calibrate(std::span<const BpmObservation> observations) {
  // Low is the accepted class of the generic sweep, so its FAR/FRR are the
  // attention FRR/FAR.
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& o : observations) {
    if (o.truth == AttentionClass::Normal) continue;
    if (!(o.bpm >= 0.0)) throw std::invalid_argument("calibrate: bpm must be non-negative");
    scores.push_back(o.bpm);
    labels.push_back(o.truth == AttentionClass::Low ? 1 : 0);
  }
  CalibrationResult r;
  for (int l : labels) (l == 1 ? r.n_low : r.n_high) += 1;
  if (r.n_high == 0 || r.n_low == 0) {
    throw std::invalid_argument("calibrate: need both High and Low minutes (high=" + std::to_string(r.n_high) +
                                ", low=" + std::to_string(r.n_low) + ")");
  }
  const auto curve = eval::det_curve(scores, labels);
  r.curve.reserve(curve.points.size());
  for (const auto& p : curve.points) r.curve.push_back({p.threshold, p.frr, p.far});

  const auto e = eval::eer(curve);
  r.tau_bpm_eer = e.threshold;
  r.far_at_eer = e.frr;
  r.frr_at_eer = e.far;
  r.accuracy_at_eer = 1.0 - e.eer;

  const auto m = eval::max_accuracy(curve);
  r.tau_bpm_maxacc = m.threshold;
  r.max_accuracy = m.accuracy;
  return r;
}

namespace {
Density histogram(const std::vector<double>& values, double origin, std::size_t bins, double w) {
  Density d;
  d.origin = origin;
  d.bin_width = w;
  d.density.assign(bins, 0.0);
  d.count = values.size();
  double sum = 0.0;
  for (double v : values) {
    auto i = static_cast<std::size_t>(std::floor((v - origin) / w));
    d.density[std::min(i, bins - 1)] += 1.0;
    sum += v;
  }
  for (auto& x : d.density) x /= static_cast<double>(values.size()) * w;
  d.mean = sum / static_cast<double>(values.size());
  return d;
}
}  // namespace

ClassDensities pdf_by_class(std::span<const BpmObservation> observations, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw std::invalid_argument("pdf: bin width must be positive");
  std::vector<double> high, low;
  for (const auto& o : observations) {
    if (!std::isfinite(o.bpm) || o.bpm < 0.0) throw std::invalid_argument("pdf: bpm must be finite and non-negative");
    if (o.truth == AttentionClass::High) high.push_back(o.bpm);
    if (o.truth == AttentionClass::Low) low.push_back(o.bpm);
  }
  if (high.empty() || low.empty()) throw std::invalid_argument("pdf: both High and Low need at least one minute");
  double lo = high[0], hi = high[0];
  for (const auto* v : {&high, &low}) {
    for (double x : *v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  const double origin = std::floor(lo / bin_width) * bin_width;
  const auto bins = static_cast<std::size_t>(std::floor((hi - origin) / bin_width)) + 1;
  return {histogram(high, origin, bins, bin_width), histogram(low, origin, bins, bin_width)};
}

double overlap_area(const ClassDensities& d) {
  if (d.high.density.size() != d.low.density.size() || d.high.origin != d.low.origin ||
      d.high.bin_width != d.low.bin_width) {
    throw std::invalid_argument("overlap: densities are on different grids");
  }
  double area = 0.0;
  for (std::size_t i = 0; i < d.high.density.size(); ++i) area += std::min(d.high.density[i], d.low.density[i]);
  return area * d.high.bin_width;
}

std::vector<BpmObservation> pair_minutes(std::span<const Session> sessions, const AttentionThresholds& t) {
  std::vector<BpmObservation> out;
  for (const auto& s : sessions) {
    const auto labels = label_minutes(s.attention, t);
    const std::size_t n = std::min(labels.size(), s.bpm.size());
    for (std::size_t m = 0; m < n; ++m) out.push_back({s.bpm[m], labels[m].cls});
  }
  return out;
}

std::vector<double> default_tau_l_sweep() {
  std::vector<double> v;
  for (int t = 50; t >= 5; t -= 5) v.push_back(static_cast<double>(t));
  return v;
}

std::vector<SweepRow> sweep(std::span<const Session> sessions, double mu, std::span<const double> tau_l_values) {
  std::vector<SweepRow> rows;
  for (double tau_l : tau_l_values) {
    SweepRow row;
    row.thresholds = thresholds_from_tau_l(mu, tau_l);
    const auto obs = pair_minutes(sessions, row.thresholds);
    for (const auto& o : obs) {
      if (o.truth == AttentionClass::High) ++row.n_high;
      if (o.truth == AttentionClass::Low) ++row.n_low;
      if (o.truth == AttentionClass::Normal) ++row.n_normal;
    }
    if (row.n_high == 0 || row.n_low == 0) {
      row.note = row.n_high == 0 ? "no High minutes" : "no Low minutes";
    } else {
      row.result = calibrate(obs);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace alebk::attention
