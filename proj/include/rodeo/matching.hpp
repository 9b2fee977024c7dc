#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rodeo/assignment.hpp"
#include "rodeo/geometry.hpp"
#include "rodeo/sample.hpp"
#include "rodeo/stats.hpp"

namespace rodeo {

struct MatchWeights {
  double w_shape = 1.0;
  double w_cls = 0.0;
};

struct MatchedPair {
  std::size_t target;
  std::size_t prediction;
  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

/// Assignment outcome for one image. Pairs are ordered by target index.
struct MatchResult {
  std::vector<MatchedPair> matched;
  std::vector<std::size_t> unmatched_targets;
  std::vector<std::size_t> unmatched_predictions;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Entry (i, j) is -[class_i == class_j] * w_cls - gIoU(t_i, p_j) * w_shape.
inline CostMatrix cost_matrix(std::span<const LabeledBox> targets,
                              std::span<const LabeledBox> predictions, const MatchWeights& w) {
  if (targets.empty() || predictions.empty()) {
    throw std::invalid_argument("cost_matrix: targets and predictions must be non-empty");
  }
  CostMatrix cost(targets.size(), predictions.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t j = 0; j < predictions.size(); ++j) {
      const double same_class = targets[i].class_id == predictions[j].class_id ? 1.0 : 0.0;
      cost(i, j) = -same_class * w.w_cls - giou(targets[i].box, predictions[j].box) * w.w_shape;
    }
  }
  return cost;
}

inline MatchResult to_match_result(const Assignment& a, std::size_t num_targets,
                                   std::size_t num_predictions) {
  MatchResult r;
  std::vector<char> pred_used(num_predictions, 0);
  for (std::size_t t = 0; t < num_targets; ++t) {
    const auto p = t < a.row_to_col.size() ? a.row_to_col[t] : Assignment::npos;
    if (p == Assignment::npos) {
      r.unmatched_targets.push_back(t);
    } else {
      r.matched.push_back({t, p});
      pred_used[p] = 1;
    }
  }
  for (std::size_t p = 0; p < num_predictions; ++p)
    if (!pred_used[p]) r.unmatched_predictions.push_back(p);
  return r;
}

/// Optimal assignment under fixed weights. Either side may be empty.
inline MatchResult assign_boxes(std::span<const LabeledBox> targets,
                                std::span<const LabeledBox> predictions, const MatchWeights& w) {
  if (targets.empty() || predictions.empty()) {
    return to_match_result(Assignment{}, targets.size(), predictions.size());
  }
  const auto a = solve_assignment_lexicographic(cost_matrix(targets, predictions, w));
  return to_match_result(a, targets.size(), predictions.size());
}

inline std::vector<LabelPair> label_pairs(const MatchResult& m, std::span<const LabeledBox> targets,
                                          std::span<const LabeledBox> predictions) {
  std::vector<LabelPair> out;
  out.reserve(m.matched.size());
  for (const auto& p : m.matched)
    out.push_back({targets[p.target].class_id, predictions[p.prediction].class_id});
  return out;
}

/// Per-image class weight: clamped multiclass MCC of the label pairs formed
/// by a purely geometric (gIoU-only) preliminary assignment.
inline double class_weight(std::span<const LabeledBox> targets,
                           std::span<const LabeledBox> predictions) {
  if (targets.empty() || predictions.empty()) return 0.0;
  const auto prelim = assign_boxes(targets, predictions, MatchWeights{1.0, 0.0});
  const auto pairs = label_pairs(prelim, targets, predictions);
  const auto mcc = mcc_multiclass(pairs);
  return mcc ? clamped(*mcc) : 0.0;
}

/// Two-stage matching of one image: class weight from the geometric
/// preliminary pass, then the full cost. A caller-supplied w_cls skips the
/// first stage.
inline MatchResult match_image(std::span<const LabeledBox> targets,
                               std::span<const LabeledBox> predictions, double w_shape = 1.0,
                               std::optional<double> fixed_w_cls = std::nullopt) {
  if (!(w_shape >= 0.0)) throw std::invalid_argument("match_image: w_shape must be >= 0");
  if (fixed_w_cls && !(*fixed_w_cls >= 0.0 && *fixed_w_cls <= 1.0)) {
    throw std::invalid_argument("match_image: w_cls must lie in [0, 1]");
  }
  if (targets.empty() || predictions.empty()) {
    return to_match_result(Assignment{}, targets.size(), predictions.size());
  }
  const double w_cls = fixed_w_cls ? *fixed_w_cls : class_weight(targets, predictions);
  return assign_boxes(targets, predictions, MatchWeights{w_shape, w_cls});
}

inline MatchResult match_image(const ImageSample& sample, double w_shape = 1.0,
                               std::optional<double> fixed_w_cls = std::nullopt) {
  return match_image(sample.targets, sample.predictions, w_shape, fixed_w_cls);
}

}  // namespace rodeo
