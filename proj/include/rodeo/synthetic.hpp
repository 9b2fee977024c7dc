#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "rodeo/corruption.hpp"
#include "rodeo/random.hpp"
#include "rodeo/sample.hpp"

namespace rodeo {

struct SyntheticOptions {
  std::size_t num_images = 200;
  std::size_t num_classes = 8;
  std::size_t min_boxes = 1;
  std::size_t max_boxes = 3;
  ImageSize image_size{1024.0, 1024.0};
  // box sides relative to the image
  double min_rel_size = 0.08;
  double max_rel_size = 0.35;
  std::uint64_t seed = 1;
};

/// Target-only dataset with uniformly drawn classes (balanced in
/// expectation), box sizes and positions fully inside the image.
inline Dataset make_synthetic_dataset(const SyntheticOptions& o) {
  if (o.num_classes == 0 || o.min_boxes > o.max_boxes || !(o.min_rel_size > 0.0) ||
      !(o.max_rel_size <= 1.0) || o.min_rel_size > o.max_rel_size) {
    throw std::invalid_argument("make_synthetic_dataset: inconsistent options");
  }
  Rng rng(splitmix64(o.seed));
  std::uniform_int_distribution<std::size_t> n_boxes(o.min_boxes, o.max_boxes);
  std::uniform_int_distribution<int> cls(0, int(o.num_classes) - 1);
  std::uniform_real_distribution<double> rel(o.min_rel_size, o.max_rel_size);
  Dataset out;
  out.reserve(o.num_images);
  for (std::size_t i = 0; i < o.num_images; ++i) {
    ImageSample s;
    s.image_id = "img" + std::to_string(i);
    s.image_size = o.image_size;
    const auto n = n_boxes(rng);
    for (std::size_t k = 0; k < n; ++k) {
      const double w = rel(rng) * o.image_size.width;
      const double h = rel(rng) * o.image_size.height;
      const Box b = detail::random_box_inside(o.image_size, w, h, rng);
      s.targets.emplace_back(b, cls(rng));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace rodeo
