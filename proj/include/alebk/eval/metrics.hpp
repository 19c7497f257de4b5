#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace alebk::eval {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Undefined ratios are std::nullopt, never 0.
struct Prf1 {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

Prf1 prf1(const ConfusionCounts& counts);
/// Harmonic mean; undefined when precision + recall == 0.
std::optional<double> f1_score(double precision, double recall);
/// Throws on an empty confusion matrix.
double accuracy(const ConfusionCounts& counts);

/// Label 1 is the positive class; a score is accepted as positive when
/// score >= threshold.
ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold);

struct DetPoint {
  double threshold = 0.0;
  double far = 0.0;  // negatives accepted / negatives
  double frr = 0.0;  // positives rejected / positives
  std::uint64_t false_accepts = 0;
  std::uint64_t false_rejects = 0;
};

/// Points in increasing threshold order: -inf, every midpoint between
/// consecutive distinct scores, +inf. FAR is non-increasing and FRR
/// non-decreasing along the curve.
struct DetCurve {
  std::vector<DetPoint> points;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

/// Sort-and-sweep, O(n log n). Throws unless both classes are present.
DetCurve det_curve(std::span<const double> scores, std::span<const int> labels);

struct EerPoint {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
  /// (FAR + FRR) / 2 at the chosen point.
  double eer = 0.0;
  std::size_t index = 0;
};

/// Point minimising |FAR - FRR|; ties go to the smaller threshold.
EerPoint eer(const DetCurve& curve);

struct MaxAccuracyPoint {
  double threshold = 0.0;
  double accuracy = 0.0;
  std::size_t index = 0;
};

/// Point maximising overall accuracy; ties go to the smaller threshold.
MaxAccuracyPoint max_accuracy(const DetCurve& curve);

struct Fold {
  std::string subject;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Leave-one-subject-out folds over sample indices, one per distinct
/// subject in sorted subject order. Throws with fewer than two subjects.
std::vector<Fold> loso_folds(std::span<const std::string> subject_ids);

}  // namespace alebk::eval
