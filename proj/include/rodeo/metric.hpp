#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rodeo/geometry.hpp"
#include "rodeo/matching.hpp"
#include "rodeo/parallel.hpp"
#include "rodeo/sample.hpp"
#include "rodeo/stats.hpp"

namespace rodeo {

/// Center-distance score of one matched pair, with offsets normalized by the
/// target's width and height. Equals 0.5 at relative distance 1.
inline double loc_score_pair(const Box& target, const Box& prediction) noexcept {
  const double dx = (target.x() - prediction.x()) / target.w();
  const double dy = (target.y() - prediction.y()) / target.h();
  return std::exp(-(dx * dx + dy * dy) * std::numbers::ln2);
}

/// Scales a matched-only sub-metric by |M| / (|M| + |U^t| + |U^p|).
inline double apply_overunder(double sub, std::size_t n_matched, std::size_t n_unmatched_targets,
                              std::size_t n_unmatched_predictions) noexcept {
  const std::size_t denom = n_matched + n_unmatched_targets + n_unmatched_predictions;
  if (denom == 0) return 0.0;
  return static_cast<double>(n_matched) / static_cast<double>(denom) * sub;
}

/// Harmonic mean of the three sub-metrics; any zero input gives 0.
inline double rodeo_total(double loc, double shape, double cls) noexcept {
  if (loc <= 0.0 || shape <= 0.0 || cls <= 0.0) return 0.0;
  return 3.0 / (1.0 / loc + 1.0 / shape + 1.0 / cls);
}

struct RodeoScores {
  double loc = 0.0;
  double shape = 0.0;
  double cls = 0.0;
  double total = 0.0;
  std::size_t n_matched = 0;
  std::size_t n_unmatched_targets = 0;
  std::size_t n_unmatched_predictions = 0;
  // false for a per-class evaluation of a class with no boxes at all
  bool supported = true;

  double overunder_factor() const noexcept {
    return apply_overunder(1.0, n_matched, n_unmatched_targets, n_unmatched_predictions);
  }
};

/// One matched pair with everything the sub-metrics need.
struct PairRecord {
  Box target;
  Box prediction;
  ClassId target_class;
  ClassId predicted_class;
};

/// All matched pairs and unmatched boxes of a dataset, in image order.
struct PooledMatches {
  std::vector<PairRecord> pairs;
  std::vector<ClassId> unmatched_target_classes;
  std::vector<ClassId> unmatched_prediction_classes;
};

struct MatchedScores {
  double loc = 0.0;
  double shape = 0.0;
  double cls = 0.0;
};

struct EvaluationOptions {
  double w_shape = 1.0;
  // fixes the matching class weight instead of deriving it per image
  std::optional<double> fixed_w_cls;
  // vocabulary size; inferred from the data when unset
  std::optional<std::size_t> num_classes;
  unsigned workers = 1;
};

inline std::vector<MatchResult> match_dataset(std::span<const ImageSample> dataset,
                                              const EvaluationOptions& opts = {}) {
  std::vector<MatchResult> out(dataset.size());
  parallel_for(dataset.size(), opts.workers, [&](std::size_t i) {
    out[i] = match_image(dataset[i], opts.w_shape, opts.fixed_w_cls);
  });
  return out;
}

inline PooledMatches pool_matches(std::span<const ImageSample> dataset,
                                  std::span<const MatchResult> matches) {
  if (dataset.size() != matches.size()) {
    throw std::invalid_argument("pool_matches: one MatchResult per image required");
  }
  PooledMatches pooled;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset[i];
    for (const auto& m : matches[i].matched) {
      const auto& t = s.targets.at(m.target);
      const auto& p = s.predictions.at(m.prediction);
      pooled.pairs.push_back({t.box, p.box, t.class_id, p.class_id});
    }
    for (auto t : matches[i].unmatched_targets)
      pooled.unmatched_target_classes.push_back(s.targets.at(t).class_id);
    for (auto p : matches[i].unmatched_predictions)
      pooled.unmatched_prediction_classes.push_back(s.predictions.at(p).class_id);
  }
  return pooled;
}

inline std::vector<LabelPair> label_pairs(std::span<const PairRecord> pairs) {
  std::vector<LabelPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p.target_class, p.predicted_class});
  return out;
}

/// Mean localization and shape over the pooled pairs plus clamped multiclass
/// MCC of their labels. No pairs means all zeros.
inline MatchedScores rodeo_matched(std::span<const PairRecord> pairs) {
  MatchedScores s;
  if (pairs.empty()) return s;
  double loc = 0.0, shape = 0.0;
  for (const auto& p : pairs) {
    loc += loc_score_pair(p.target, p.prediction);
    shape += ciou(p.target, p.prediction);
  }
  const auto n = static_cast<double>(pairs.size());
  s.loc = loc / n;
  s.shape = shape / n;
  const auto labels = label_pairs(pairs);
  s.cls = clamped(mcc_multiclass(labels).value_or(0.0));
  return s;
}

namespace detail {

inline RodeoScores finish_scores(const MatchedScores& m, std::size_t n_matched, std::size_t n_ut,
                                 std::size_t n_up) {
  RodeoScores r;
  r.n_matched = n_matched;
  r.n_unmatched_targets = n_ut;
  r.n_unmatched_predictions = n_up;
  r.loc = apply_overunder(m.loc, n_matched, n_ut, n_up);
  r.shape = apply_overunder(m.shape, n_matched, n_ut, n_up);
  r.cls = apply_overunder(m.cls, n_matched, n_ut, n_up);
  r.total = rodeo_total(r.loc, r.shape, r.cls);
  return r;
}

inline std::size_t vocabulary_size(std::span<const ImageSample> dataset,
                                   const EvaluationOptions& opts) {
  const auto inferred = infer_num_classes(dataset);
  if (opts.num_classes) {
    if (*opts.num_classes < inferred) {
      throw std::invalid_argument("class id outside the declared vocabulary");
    }
    return *opts.num_classes;
  }
  return inferred;
}

}  // namespace detail

inline RodeoScores rodeo_from_pooled(const PooledMatches& pooled) {
  return detail::finish_scores(rodeo_matched(pooled.pairs), pooled.pairs.size(),
                               pooled.unmatched_target_classes.size(),
                               pooled.unmatched_prediction_classes.size());
}

/// Dataset-level RoDeO: per-image matching, pooled sub-metrics, over/under
/// scaling and the harmonic-mean total.
inline RodeoScores evaluate_rodeo(std::span<const ImageSample> dataset,
                                  const EvaluationOptions& opts = {}) {
  if (dataset.empty()) throw std::invalid_argument("evaluate_rodeo: empty dataset");
  detail::vocabulary_size(dataset, opts);
  const auto matches = match_dataset(dataset, opts);
  return rodeo_from_pooled(pool_matches(dataset, matches));
}

/// RoDeO restricted to class c after matching on the full box sets. The
/// classification term is the binary MCC of the per-class indicator
/// decisions of the pairs whose target is c.
inline RodeoScores rodeo_per_class_from_pooled(const PooledMatches& pooled, ClassId c,
                                               std::size_t num_classes) {
  if (c < 0 || std::size_t(c) >= num_classes) {
    throw std::invalid_argument("per-class RoDeO: class " + std::to_string(c) +
                                " outside the vocabulary");
  }
  std::vector<PairRecord> pairs;
  for (const auto& p : pooled.pairs)
    if (p.target_class == c) pairs.push_back(p);
  std::size_t n_ut = 0, n_up = 0;
  for (auto k : pooled.unmatched_target_classes) n_ut += k == c;
  for (auto k : pooled.unmatched_prediction_classes) n_up += k == c;

  MatchedScores m;
  if (!pairs.empty()) {
    double loc = 0.0, shape = 0.0;
    for (const auto& p : pairs) {
      loc += loc_score_pair(p.target, p.prediction);
      shape += ciou(p.target, p.prediction);
    }
    m.loc = loc / static_cast<double>(pairs.size());
    m.shape = shape / static_cast<double>(pairs.size());
    const auto labels = label_pairs(pairs);
    m.cls = clamped(mcc_binary(one_vs_rest_counts(labels, num_classes)));
  }
  auto r = detail::finish_scores(m, pairs.size(), n_ut, n_up);
  r.supported = !pairs.empty() || n_ut > 0 || n_up > 0;
  return r;
}

inline RodeoScores evaluate_rodeo_per_class(std::span<const ImageSample> dataset, ClassId c,
                                            const EvaluationOptions& opts = {}) {
  if (dataset.empty()) throw std::invalid_argument("evaluate_rodeo_per_class: empty dataset");
  const auto k = detail::vocabulary_size(dataset, opts);
  const auto matches = match_dataset(dataset, opts);
  return rodeo_per_class_from_pooled(pool_matches(dataset, matches), c, k);
}

}  // namespace rodeo
