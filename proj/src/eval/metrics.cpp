#include "alebk/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace alebk::eval {

Prf1 prf1(const ConfusionCounts& c) {
  Prf1 out;
  if (c.tp + c.fp > 0) out.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) out.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (out.precision && out.recall) out.f1 = f1_score(*out.precision, *out.recall);
  return out;
}

std::optional<double> f1_score(double precision, double recall) {
  if (!(precision + recall > 0.0)) return std::nullopt;
  return 2.0 * precision * recall / (precision + recall);
}

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

namespace {
void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                                std::to_string(labels.size()) + ")");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
    if (std::isnan(scores[i])) throw std::invalid_argument("scores must not be NaN");
  }
}
}  // namespace

ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool accepted = scores[i] >= threshold;
    if (labels[i] == 1) {
      accepted ? ++c.tp : ++c.fn;
    } else {
      accepted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

DetCurve det_curve(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  DetCurve curve;
  for (int l : labels) (l == 1 ? curve.positives : curve.negatives) += 1;
  if (curve.positives == 0 || curve.negatives == 0) {
    throw std::invalid_argument("det curve: both classes must be present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  const double inf = std::numeric_limits<double>::infinity();
  // Threshold -inf accepts everything.
  std::uint64_t fa = curve.negatives, fr = 0;
  auto push = [&](double t) {
    curve.points.push_back({t, static_cast<double>(fa) / static_cast<double>(curve.negatives),
                            static_cast<double>(fr) / static_cast<double>(curve.positives), fa, fr});
  };
  push(-inf);
  for (std::size_t i = 0; i < order.size();) {
    const double v = scores[order[i]];
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == v; ++j) {
      labels[order[j]] == 1 ? ++fr : --fa;
    }
    push(j < order.size() ? (v + scores[order[j]]) / 2.0 : inf);
    i = j;
  }
  return curve;
}

EerPoint eer(const DetCurve& curve) {
  if (curve.points.empty()) throw std::invalid_argument("eer: empty curve");
  std::size_t best = 0;
  double best_gap = std::abs(curve.points[0].far - curve.points[0].frr);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const double gap = std::abs(curve.points[i].far - curve.points[i].frr);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  const auto& p = curve.points[best];
  return {p.threshold, p.far, p.frr, (p.far + p.frr) / 2.0, best};
}

MaxAccuracyPoint max_accuracy(const DetCurve& curve) {
  if (curve.points.empty()) throw std::invalid_argument("max_accuracy: empty curve");
  const auto total = static_cast<double>(curve.positives + curve.negatives);
  MaxAccuracyPoint best{curve.points[0].threshold, -1.0, 0};
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    const double acc = 1.0 - static_cast<double>(p.false_accepts + p.false_rejects) / total;
    if (acc > best.accuracy) best = {p.threshold, acc, i};
  }
  return best;
}

std::vector<Fold> loso_folds(std::span<const std::string> subject_ids) {
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < subject_ids.size(); ++i) {
    if (subject_ids[i].empty()) throw std::invalid_argument("loso: empty subject id at sample " + std::to_string(i));
    by_subject[subject_ids[i]].push_back(i);
  }
  if (by_subject.size() < 2) {
    throw std::invalid_argument("loso: need at least 2 distinct subjects, got " + std::to_string(by_subject.size()));
  }
  std::vector<Fold> folds;
  for (const auto& [subject, test] : by_subject) {
    Fold f{subject, {}, test};
    for (std::size_t i = 0; i < subject_ids.size(); ++i) {
      if (subject_ids[i] != subject) f.train.push_back(i);
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

}  // namespace alebk::eval
