#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rodeo/geometry.hpp"
#include "rodeo/sample.hpp"
#include "rodeo/stats.hpp"

namespace rodeo {

struct PredictionOutcome {
  std::size_t index;  // position in the image's prediction list
  ClassId class_id;
  std::optional<double> confidence;
  bool true_positive = false;
};

/// IoU-thresholded bookkeeping of one image: per-class counts and the
/// TP/FP verdict of every prediction.
struct ThresholdedOutcome {
  std::vector<ConfusionCounts> per_class;
  std::vector<PredictionOutcome> predictions;

  ConfusionCounts total() const {
    ConfusionCounts c;
    for (const auto& k : per_class) c += k;
    return c;
  }
};

namespace detail {

inline void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::invalid_argument("IoU threshold must lie in (0, 1], got " + std::to_string(t));
  }
}

// Descending confidence, missing confidences last, ties by input order.
inline std::vector<std::size_t> confidence_order(std::span<const LabeledBox> predictions) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = predictions[a].confidence;
    const auto& cb = predictions[b].confidence;
    if (ca.has_value() != cb.has_value()) return ca.has_value();
    return ca && *ca > *cb;
  });
  return order;
}

}  // namespace detail

/// Greedy per-class matching at IoU threshold t. Predictions claim, in
/// confidence order, the unclaimed same-class target with the highest
/// IoU >= t. Leftover predictions are false positives, leftover targets
/// false negatives, and a class with neither boxes is a true negative.
inline ThresholdedOutcome threshold_match(const ImageSample& sample, double t,
                                          std::size_t num_classes) {
  detail::check_threshold(t);
  ThresholdedOutcome out;
  out.per_class.assign(num_classes, ConfusionCounts{});
  for (const auto& b : sample.targets)
    if (std::size_t(b.class_id) >= num_classes) throw std::out_of_range("target class outside vocabulary");
  for (const auto& b : sample.predictions)
    if (std::size_t(b.class_id) >= num_classes) throw std::out_of_range("prediction class outside vocabulary");

  std::vector<char> claimed(sample.targets.size(), 0);
  std::vector<PredictionOutcome> verdicts(sample.predictions.size());
  for (auto j : detail::confidence_order(sample.predictions)) {
    const auto& p = sample.predictions[j];
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t i = 0; i < sample.targets.size(); ++i) {
      if (claimed[i] || sample.targets[i].class_id != p.class_id) continue;
      const double v = iou(sample.targets[i].box, p.box);
      if (v >= t && v > best_iou) {
        best_iou = v;
        best = i;
      }
    }
    auto& counts = out.per_class[std::size_t(p.class_id)];
    if (best) {
      claimed[*best] = 1;
      ++counts.tp;
    } else {
      ++counts.fp;
    }
    verdicts[j] = PredictionOutcome{j, p.class_id, p.confidence, best.has_value()};
  }
  for (std::size_t i = 0; i < sample.targets.size(); ++i)
    if (!claimed[i]) ++out.per_class[std::size_t(sample.targets[i].class_id)].fn;

  std::vector<char> present(num_classes, 0);
  for (const auto& b : sample.targets) present[std::size_t(b.class_id)] = 1;
  for (const auto& b : sample.predictions) present[std::size_t(b.class_id)] = 1;
  for (std::size_t c = 0; c < num_classes; ++c)
    if (!present[c]) ++out.per_class[c].tn;

  out.predictions = std::move(verdicts);
  return out;
}

inline std::vector<ThresholdedOutcome> threshold_match_dataset(std::span<const ImageSample> dataset,
                                                               double t, std::size_t num_classes) {
  std::vector<ThresholdedOutcome> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset) out.push_back(threshold_match(s, t, num_classes));
  return out;
}

/// Confusion counts pooled over images, optionally restricted to one class.
inline ConfusionCounts pooled_counts(std::span<const ThresholdedOutcome> outcomes,
                                     std::optional<ClassId> cls = std::nullopt) {
  ConfusionCounts c;
  for (const auto& o : outcomes) c += cls ? o.per_class.at(std::size_t(*cls)) : o.total();
  return c;
}

inline double accuracy(const ConfusionCounts& c) noexcept {
  const auto n = c.total();
  return n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
}

struct DetectionRates {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline DetectionRates detection_rates(const ConfusionCounts& c) noexcept {
  DetectionRates r;
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

/// (TP + TN) / (TP + TN + FP + FN) pooled over images and classes.
inline double acc_at_iou(std::span<const ImageSample> dataset, double t, std::size_t num_classes,
                         std::optional<ClassId> cls = std::nullopt) {
  if (dataset.empty()) throw std::invalid_argument("acc_at_iou: empty dataset");
  const auto outcomes = threshold_match_dataset(dataset, t, num_classes);
  return accuracy(pooled_counts(outcomes, cls));
}

inline DetectionRates rates_at_iou(std::span<const ImageSample> dataset, double t,
                                   std::size_t num_classes, std::optional<ClassId> cls = std::nullopt) {
  if (dataset.empty()) throw std::invalid_argument("rates_at_iou: empty dataset");
  const auto outcomes = threshold_match_dataset(dataset, t, num_classes);
  return detection_rates(pooled_counts(outcomes, cls));
}

enum class ApInterpolation { AllPoint, ElevenPoint };

struct PrPoint {
  double recall;
  double precision;
};

/// Area under the precision-recall points (ordered by decreasing confidence
/// threshold) using the chosen interpolation.
inline double integrate_pr(std::span<const PrPoint> points, ApInterpolation mode) {
  if (points.empty()) return 0.0;
  if (mode == ApInterpolation::ElevenPoint) {
    double sum = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double r = i / 10.0;
      double best = 0.0;
      for (const auto& p : points)
        if (p.recall >= r) best = std::max(best, p.precision);
      sum += best;
    }
    return sum / 11.0;
  }
  std::vector<double> rec{0.0}, prec{0.0};
  for (const auto& p : points) {
    rec.push_back(p.recall);
    prec.push_back(p.precision);
  }
  rec.push_back(1.0);
  prec.push_back(0.0);
  for (std::size_t i = prec.size() - 1; i > 0; --i) prec[i - 1] = std::max(prec[i - 1], prec[i]);
  double ap = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) ap += (rec[i] - rec[i - 1]) * prec[i];
  return ap;
}

/// Precision-recall points of one class, one per distinct confidence. Only
/// predictions with confidence >= the current score are counted; because the
/// greedy matcher visits predictions in confidence order, that restriction is
/// a prefix of the full matching.
inline std::vector<PrPoint> pr_curve(std::span<const ImageSample> dataset,
                                     std::span<const ThresholdedOutcome> outcomes, ClassId cls) {
  std::size_t n_targets = 0;
  std::vector<std::pair<double, bool>> scored;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (const auto& t : dataset[i].targets) n_targets += t.class_id == cls;
    for (const auto& p : outcomes[i].predictions) {
      if (p.class_id != cls) continue;
      if (!p.confidence) {
        throw std::invalid_argument("AP requires confidences: prediction " + std::to_string(p.index) +
                                    " of image '" + dataset[i].image_id + "' has none");
      }
      scored.emplace_back(*p.confidence, p.true_positive);
    }
  }
  std::vector<PrPoint> points;
  if (n_targets == 0) return points;
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < scored.size(); ++k) {
    scored[k].second ? ++tp : ++fp;
    if (k + 1 < scored.size() && scored[k + 1].first == scored[k].first) continue;
    points.push_back({static_cast<double>(tp) / static_cast<double>(n_targets),
                      static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  return points;
}

/// AP of one class, or nullopt when the class has no targets.
inline std::optional<double> class_ap(std::span<const ImageSample> dataset,
                                      std::span<const ThresholdedOutcome> outcomes, ClassId cls,
                                      ApInterpolation mode = ApInterpolation::AllPoint) {
  bool has_targets = false;
  for (const auto& s : dataset)
    for (const auto& t : s.targets) has_targets = has_targets || t.class_id == cls;
  const auto points = pr_curve(dataset, outcomes, cls);
  if (!has_targets) return std::nullopt;
  return integrate_pr(points, mode);
}

/// AP@t for one class, or the mean over classes that have targets. Classes
/// without targets are left out of the mean; with none at all the result is 0.
inline double ap_at_iou(std::span<const ImageSample> dataset, double t, std::size_t num_classes,
                        std::optional<ClassId> cls = std::nullopt,
                        ApInterpolation mode = ApInterpolation::AllPoint) {
  if (dataset.empty()) throw std::invalid_argument("ap_at_iou: empty dataset");
  const auto outcomes = threshold_match_dataset(dataset, t, num_classes);
  if (cls) return class_ap(dataset, outcomes, *cls, mode).value_or(0.0);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (const auto ap = class_ap(dataset, outcomes, ClassId(c), mode)) {
      sum += *ap;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// lo, lo + step, ... up to hi inclusive (with a small slack for rounding).
inline std::vector<double> threshold_range(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("threshold_range: need step > 0 and hi >= lo");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    // snap to a 1e-9 grid so 0.1 + 2 * 0.1 becomes the double nearest 0.3
    const double v = std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9;
    if (v > hi + step * 1e-9) break;
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> default_map_thresholds() { return threshold_range(0.1, 0.7, 0.1); }

/// 0.50:0.05:0.95; provided for convenience, not checked against COCO tooling.
inline std::vector<double> coco_map_thresholds() { return threshold_range(0.5, 0.95, 0.05); }

inline double mean_ap(std::span<const ImageSample> dataset, std::span<const double> thresholds,
                      std::size_t num_classes, std::optional<ClassId> cls = std::nullopt,
                      ApInterpolation mode = ApInterpolation::AllPoint) {
  if (thresholds.empty()) throw std::invalid_argument("mean_ap: empty threshold list");
  double sum = 0.0;
  for (double t : thresholds) sum += ap_at_iou(dataset, t, num_classes, cls, mode);
  return sum / static_cast<double>(thresholds.size());
}

}  // namespace rodeo
