#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rodeo/geometry.hpp"
#include "rodeo/stats.hpp"

namespace rodeo {

struct LabeledBox {
  Box box;
  ClassId class_id = 0;
  std::optional<double> confidence;

  LabeledBox(Box b, ClassId cls, std::optional<double> conf = std::nullopt)
      : box(b), class_id(cls), confidence(conf) {
    if (cls < 0) throw std::invalid_argument("LabeledBox: negative class id");
    if (conf && !(*conf >= 0.0 && *conf <= 1.0)) {
      throw std::invalid_argument("LabeledBox: confidence must lie in [0, 1]");
    }
  }

  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

struct ImageSize {
  double width = 0.0;
  double height = 0.0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Targets and predictions of one image.
struct ImageSample {
  std::string image_id;
  std::optional<ImageSize> image_size;
  std::vector<LabeledBox> targets;
  std::vector<LabeledBox> predictions;

  friend bool operator==(const ImageSample&, const ImageSample&) = default;
};

using Dataset = std::vector<ImageSample>;

/// One past the largest class id used anywhere in the dataset.
inline std::size_t infer_num_classes(std::span<const ImageSample> dataset) {
  ClassId hi = -1;
  for (const auto& s : dataset) {
    for (const auto& b : s.targets) hi = std::max(hi, b.class_id);
    for (const auto& b : s.predictions) hi = std::max(hi, b.class_id);
  }
  return std::size_t(hi + 1);
}

}  // namespace rodeo
