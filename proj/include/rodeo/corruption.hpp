#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rodeo/geometry.hpp"
#include "rodeo/parallel.hpp"
#include "rodeo/random.hpp"
#include "rodeo/sample.hpp"

namespace rodeo {

/// Parameters of the oracle model. Zero (or unset) disables a corruption.
struct CorruptionSpec {
  double sigma_pos = 0.0;
  double pos_bias = 0.0;
  double sigma_shape = 0.0;
  double sigma_size = 0.0;
  double sigma_ratio = 0.0;
  double p_underpred = 0.0;
  double p_overpred = 0.0;
  double expected_duplications = 0.0;
  double p_cls_confuse = 0.0;
  // switches to the class oracle with square random boxes of this relative side
  std::optional<double> random_box_size;
  std::uint64_t seed = 0;

  void validate() const {
    auto non_negative = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be >= 0");
    };
    auto probability = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    };
    non_negative(sigma_pos, "sigma_pos");
    non_negative(pos_bias, "pos_bias");
    non_negative(sigma_shape, "sigma_shape");
    non_negative(sigma_size, "sigma_size");
    non_negative(sigma_ratio, "sigma_ratio");
    non_negative(expected_duplications, "expected_duplications");
    probability(p_underpred, "p_underpred");
    probability(p_overpred, "p_overpred");
    probability(p_cls_confuse, "p_cls_confuse");
    if (random_box_size && !(*random_box_size > 0.0 && *random_box_size <= 1.0)) {
      throw std::invalid_argument("random_box_size must lie in (0, 1]");
    }
  }

  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

/// Jitter applied by the standalone under-prediction and duplication models.
inline constexpr double kOracleJitter = 0.5;

/// Relative side of boxes added for over-predicted classes.
inline constexpr double kOverpredBoxSize = 0.25;

// ---- per-box corruptions ---------------------------------------------------

/// Resamples the center with per-axis std sigma * (w, h).
inline Box corrupt_position(const Box& b, double sigma_pos, Rng& rng) {
  if (sigma_pos == 0.0) return b;
  std::normal_distribution<double> nx(b.x(), b.w() * sigma_pos);
  std::normal_distribution<double> ny(b.y(), b.h() * sigma_pos);
  const double x = nx(rng);
  const double y = ny(rng);
  return b.recentered(x, y);
}

/// Moves the center by magnitude in a uniformly random direction, with the
/// offset divided by the box dimensions.
inline Box corrupt_position_bias(const Box& b, double magnitude, Rng& rng) {
  if (magnitude == 0.0) return b;
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double phi = angle(rng);
  return b.translated(magnitude * std::cos(phi) / b.w(), magnitude * std::sin(phi) / b.h());
}

/// Independent log-normal factors on width and height.
inline Box corrupt_shape(const Box& b, double sigma_shape, Rng& rng) {
  if (sigma_shape == 0.0) return b;
  std::normal_distribution<double> n(0.0, sigma_shape);
  const double lw = std::log(b.w()) + n(rng);
  const double lh = std::log(b.h()) + n(rng);
  return b.resized(std::exp(lw), std::exp(lh));
}

/// One log-normal factor applied to both dimensions.
inline Box corrupt_size(const Box& b, double sigma_size, Rng& rng) {
  if (sigma_size == 0.0) return b;
  std::normal_distribution<double> n(0.0, sigma_size);
  const double s = std::exp(n(rng));
  return b.resized(s * b.w(), s * b.h());
}

/// Log-normal aspect ratio at constant area.
inline Box corrupt_ratio(const Box& b, double sigma_ratio, Rng& rng) {
  if (sigma_ratio == 0.0) return b;
  const double area = b.area();
  std::normal_distribution<double> n(std::log(b.w() / b.h()), sigma_ratio);
  const double ratio = std::exp(n(rng));
  return b.resized(std::sqrt(area * ratio), std::sqrt(area / ratio));
}

// ---- per-image corruptions -------------------------------------------------

namespace detail {

inline const ImageSize& require_size(const ImageSample& s) {
  if (!s.image_size || !(s.image_size->width > 0.0) || !(s.image_size->height > 0.0)) {
    throw std::invalid_argument("image '" + s.image_id + "' needs a positive image_size for this corruption");
  }
  return *s.image_size;
}

inline std::vector<char> positive_classes(const ImageSample& s, std::size_t num_classes) {
  std::vector<char> pos(num_classes, 0);
  for (const auto& t : s.targets) {
    if (std::size_t(t.class_id) >= num_classes) throw std::out_of_range("class id outside vocabulary");
    pos[std::size_t(t.class_id)] = 1;
  }
  return pos;
}

// Box of size (w, h) with a center drawn uniformly so it lies inside the image.
inline Box random_box_inside(const ImageSize& img, double w, double h, Rng& rng) {
  auto center = [&](double extent, double side) {
    const double lo = side / 2.0, hi = extent - side / 2.0;
    if (hi <= lo) return extent / 2.0;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const double x = center(img.width, w);
  const double y = center(img.height, h);
  return Box(x, y, w, h);
}

inline double synthetic_confidence(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace detail

/// Predictions of a perfect oracle: the targets with confidence 1.
inline ImageSample oracle_sample(const ImageSample& s) {
  ImageSample out = s;
  out.predictions.clear();
  for (const auto& t : s.targets) out.predictions.emplace_back(t.box, t.class_id, 1.0);
  return out;
}

inline void jitter_predictions(ImageSample& s, double sigma_pos, Rng& rng) {
  for (auto& p : s.predictions) p.box = corrupt_position(p.box, sigma_pos, rng);
}

/// Drops, per positive class with probability p, every prediction of that
/// class, then jitters the survivors.
inline ImageSample underpredict(const ImageSample& s, double p_underpred, std::size_t num_classes,
                                Rng& rng, double jitter = kOracleJitter) {
  const auto positive = detail::positive_classes(s, num_classes);
  std::bernoulli_distribution flip(p_underpred);
  std::vector<char> dropped(num_classes, 0);
  for (std::size_t c = 0; c < num_classes; ++c)
    if (positive[c]) dropped[c] = flip(rng);
  ImageSample out = s;
  std::erase_if(out.predictions, [&](const LabeledBox& b) { return dropped[std::size_t(b.class_id)] != 0; });
  jitter_predictions(out, jitter, rng);
  return out;
}

/// Adds, per negative class with probability p, one box a quarter of the
/// image in each dimension placed uniformly inside the image.
inline ImageSample overpredict_class(const ImageSample& s, double p_overpred, std::size_t num_classes,
                                     Rng& rng) {
  const auto positive = detail::positive_classes(s, num_classes);
  std::bernoulli_distribution flip(p_overpred);
  ImageSample out = s;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (positive[c] || !flip(rng)) continue;
    const auto& img = detail::require_size(s);
    const Box b = detail::random_box_inside(img, kOverpredBoxSize * img.width,
                                            kOverpredBoxSize * img.height, rng);
    out.predictions.emplace_back(b, ClassId(c), detail::synthetic_confidence(rng));
  }
  return out;
}

/// Number of duplicates of one box: geometric on {0, 1, ...} with mean
/// expected_duplications.
inline int sample_duplications(double expected_duplications, Rng& rng) {
  if (expected_duplications == 0.0) return 0;
  std::geometric_distribution<int> g(1.0 / (1.0 + expected_duplications));
  return g(rng);
}

/// Duplicates every prediction D ~ Geometric times, then jitters originals
/// and copies independently. Copies are appended after the originals.
inline ImageSample overpredict_boxes(const ImageSample& s, double expected_duplications, Rng& rng,
                                     double jitter = kOracleJitter) {
  ImageSample out = s;
  for (const auto& p : s.predictions) {
    const int d = sample_duplications(expected_duplications, rng);
    for (int k = 0; k < d; ++k) out.predictions.emplace_back(p.box, p.class_id, detail::synthetic_confidence(rng));
  }
  jitter_predictions(out, jitter, rng);
  return out;
}

/// Class relabeling: each class is selected with probability p and the
/// selected classes are permuted uniformly among themselves. mapping[c] is
/// the new label of class c.
inline std::vector<ClassId> sample_class_permutation(std::size_t num_classes, double p_cls_confuse,
                                                     Rng& rng) {
  std::vector<ClassId> mapping(num_classes);
  std::iota(mapping.begin(), mapping.end(), ClassId{0});
  if (p_cls_confuse == 0.0) return mapping;
  std::bernoulli_distribution pick(p_cls_confuse);
  std::vector<ClassId> selected;
  for (std::size_t c = 0; c < num_classes; ++c)
    if (pick(rng)) selected.push_back(ClassId(c));
  auto shuffled = selected;
  // explicit Fisher-Yates: std::shuffle's draw pattern is library-specific
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> u(0, i - 1);
    std::swap(shuffled[i - 1], shuffled[u(rng)]);
  }
  for (std::size_t i = 0; i < selected.size(); ++i) mapping[std::size_t(selected[i])] = shuffled[i];
  return mapping;
}

inline ImageSample confuse_classes(const ImageSample& s, double p_cls_confuse, std::size_t num_classes,
                                   Rng& rng) {
  const auto mapping = sample_class_permutation(num_classes, p_cls_confuse, rng);
  ImageSample out = s;
  for (auto& p : out.predictions) p.class_id = mapping.at(std::size_t(p.class_id));
  return out;
}

/// Class oracle with random geometry: positive classes plus negatives flipped
/// with probability p_overpred, one square box of side size * min(W, H) each.
inline ImageSample class_oracle_random_boxes(const ImageSample& s, double p_overpred, double size,
                                             std::size_t num_classes, Rng& rng) {
  if (!(size > 0.0 && size <= 1.0)) throw std::invalid_argument("random box size must lie in (0, 1]");
  const auto& img = detail::require_size(s);
  auto positive = detail::positive_classes(s, num_classes);
  std::bernoulli_distribution flip(p_overpred);
  for (std::size_t c = 0; c < num_classes; ++c)
    if (!positive[c] && flip(rng)) positive[c] = 1;
  const double side = size * std::min(img.width, img.height);
  ImageSample out = s;
  out.predictions.clear();
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (!positive[c]) continue;
    const Box b = detail::random_box_inside(img, side, side, rng);
    out.predictions.emplace_back(b, ClassId(c), detail::synthetic_confidence(rng));
  }
  return out;
}

// ---- pipeline --------------------------------------------------------------

/// Full oracle model for one image. Starts from the targets and applies, in
/// order: class-level changes (under-prediction, over-prediction, confusion),
/// box duplication, then geometry (bias, position, shape, size, ratio). Inside
/// the pipeline the only position noise is spec.sigma_pos.
inline ImageSample corrupt_sample(const ImageSample& s, const CorruptionSpec& spec,
                                  std::size_t num_classes, Rng& rng) {
  ImageSample out = oracle_sample(s);
  if (spec.random_box_size) {
    out = class_oracle_random_boxes(out, spec.p_overpred, *spec.random_box_size, num_classes, rng);
  } else {
    if (spec.p_underpred > 0.0) out = underpredict(out, spec.p_underpred, num_classes, rng, 0.0);
    if (spec.p_overpred > 0.0) out = overpredict_class(out, spec.p_overpred, num_classes, rng);
  }
  if (spec.p_cls_confuse > 0.0) out = confuse_classes(out, spec.p_cls_confuse, num_classes, rng);
  if (spec.expected_duplications > 0.0) out = overpredict_boxes(out, spec.expected_duplications, rng, 0.0);
  for (auto& p : out.predictions) {
    Box b = corrupt_position_bias(p.box, spec.pos_bias, rng);
    b = corrupt_position(b, spec.sigma_pos, rng);
    b = corrupt_shape(b, spec.sigma_shape, rng);
    b = corrupt_size(b, spec.sigma_size, rng);
    p.box = corrupt_ratio(b, spec.sigma_ratio, rng);
  }
  return out;
}

/// Oracle predictions for a whole dataset. Existing predictions are
/// replaced. Each image draws from its own stream seeded by
/// (spec.seed, image_id), so the result does not depend on `workers`.
inline Dataset corrupt_dataset(std::span<const ImageSample> dataset, const CorruptionSpec& spec,
                               std::size_t num_classes, unsigned workers = 1) {
  spec.validate();
  Dataset out(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    Rng rng(image_seed(spec.seed, dataset[i].image_id));
    out[i] = corrupt_sample(dataset[i], spec, num_classes, rng);
  });
  return out;
}

}  // namespace rodeo
