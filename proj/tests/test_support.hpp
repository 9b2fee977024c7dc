#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "rodeo/rodeo.hpp"

namespace rodeo::fixture {

inline LabeledBox lb(double x, double y, double w, double h, ClassId c,
                     std::optional<double> conf = std::nullopt) {
  return LabeledBox(Box(x, y, w, h), c, conf);
}

// Classes A=0, B=1, C=2 on 100x100 images. The expected values below were
// worked out by hand, box by box.
inline Dataset golden_dataset() {
  const ImageSize sz{100.0, 100.0};
  Dataset d(4);
  d[0] = {"img1", sz, {lb(20, 20, 10, 10, 0)}, {lb(20, 20, 10, 10, 0, 0.9)}};
  d[1] = {"img2", sz, {lb(50, 50, 20, 10, 1), lb(85, 85, 10, 10, 0)}, {lb(60, 50, 20, 10, 1, 0.8)}};
  d[2] = {"img3", sz,
          {lb(30, 30, 10, 10, 0), lb(70, 70, 10, 20, 1)},
          {lb(70, 70, 10, 20, 0, 0.7), lb(30, 30, 20, 20, 1, 0.6)}};
  d[3] = {"img4", sz, {lb(50, 50, 10, 10, 2)}, {lb(50, 55, 10, 10, 2, 0.5), lb(10, 10, 10, 10, 0, 0.4)}};
  return d;
}

inline const std::vector<std::string>& golden_classes() {
  static const std::vector<std::string> names{"A", "B", "C"};
  return names;
}

// Exhaustive minimum over all injections of the smaller side into the larger.
inline double brute_force_min_cost(const CostMatrix& c) {
  const bool wide = c.rows() <= c.cols();
  const std::size_t small = wide ? c.rows() : c.cols();
  const std::size_t large = wide ? c.cols() : c.rows();
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  // every permutation of the large side; its first `small` entries form an injection
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < small; ++i) total += wide ? c(i, perm[i]) : c(perm[i], i);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline Box random_box(std::mt19937_64& rng, double extent = 20.0, double max_side = 8.0) {
  std::uniform_real_distribution<double> pos(0.0, extent), side(0.2, max_side);
  const double x = pos(rng), y = pos(rng), w = side(rng), h = side(rng);
  return Box(x, y, w, h);
}

inline std::vector<LabeledBox> random_boxes(std::mt19937_64& rng, std::size_t n, int num_classes,
                                            bool with_conf = false) {
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::vector<LabeledBox> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Box b = random_box(rng);
    const int c = cls(rng);
    std::optional<double> cf;
    if (with_conf) cf = conf(rng);
    out.emplace_back(b, c, cf);
  }
  return out;
}

inline Dataset random_dataset(std::mt19937_64& rng, std::size_t images, int num_classes, std::size_t max_boxes = 4) {
  std::uniform_int_distribution<std::size_t> n(0, max_boxes);
  Dataset d;
  for (std::size_t i = 0; i < images; ++i) {
    ImageSample s;
    s.image_id = "r" + std::to_string(i);
    s.image_size = ImageSize{30.0, 30.0};
    s.targets = random_boxes(rng, n(rng), num_classes);
    s.predictions = random_boxes(rng, n(rng), num_classes, true);
    d.push_back(std::move(s));
  }
  return d;
}

}  // namespace rodeo::fixture
