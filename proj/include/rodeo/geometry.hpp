#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rodeo {

/// Axis-aligned rectangle stored in center format.
///
/// Width and height are strictly positive and every field is finite; the
/// constructor rejects anything else, so the overlap functions below never
/// see a degenerate box.
class Box {
 public:
  Box(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
      throw std::invalid_argument("Box: coordinates must be finite");
    }
    if (!(w > 0.0) || !(h > 0.0)) {
      throw std::invalid_argument("Box: width and height must be positive (got w=" +
                                  std::to_string(w) + ", h=" + std::to_string(h) + ")");
    }
  }

  /// Builds a box from its upper-left corner and size.
  static Box from_corner(double x_min, double y_min, double w, double h) {
    return Box(x_min + w / 2.0, y_min + h / 2.0, w, h);
  }

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double w() const noexcept { return w_; }
  double h() const noexcept { return h_; }

  double x_min() const noexcept { return x_ - w_ / 2.0; }
  double x_max() const noexcept { return x_ + w_ / 2.0; }
  double y_min() const noexcept { return y_ - h_ / 2.0; }
  double y_max() const noexcept { return y_ + h_ / 2.0; }
  double area() const noexcept { return w_ * h_; }

  Box translated(double dx, double dy) const { return Box(x_ + dx, y_ + dy, w_, h_); }
  Box recentered(double cx, double cy) const { return Box(cx, cy, w_, h_); }
  Box resized(double w, double h) const { return Box(x_, y_, w, h); }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  double x_;
  double y_;
  double w_;
  double h_;
};

namespace detail {

// Overlap length of two closed intervals; touching or disjoint intervals give 0.
inline double overlap_1d(double a_min, double a_max, double b_min, double b_max) noexcept {
  return std::max(0.0, std::min(a_max, b_max) - std::max(a_min, b_min));
}

inline double intersection_area(const Box& a, const Box& b) noexcept {
  return overlap_1d(a.x_min(), a.x_max(), b.x_min(), b.x_max()) *
         overlap_1d(a.y_min(), a.y_max(), b.y_min(), b.y_max());
}

inline double hull_area(const Box& a, const Box& b) noexcept {
  return (std::max(a.x_max(), b.x_max()) - std::min(a.x_min(), b.x_min())) *
         (std::max(a.y_max(), b.y_max()) - std::min(a.y_min(), b.y_min()));
}

}  // namespace detail

inline double iou(const Box& a, const Box& b) noexcept {
  const double inter = detail::intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

/// IoU of the two shapes after moving b onto a's center. Position-free.
inline double ciou(const Box& a, const Box& b) noexcept {
  const double inter = std::min(a.w(), b.w()) * std::min(a.h(), b.h());
  return inter / (a.area() + b.area() - inter);
}

/// Generalized IoU, in (-1, 1].
inline double giou(const Box& a, const Box& b) noexcept {
  const double inter = detail::intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double hull = detail::hull_area(a, b);
  // clamp: rounding can leave hull a hair below the union when they coincide
  return inter / uni - std::max(0.0, hull - uni) / hull;
}

/// Negated Hausdorff distance between the two rectangles placed on a common
/// center. Only used to contrast against ciou; it is unbounded below.
inline double hausdorff_similarity(const Box& a, const Box& b) noexcept {
  const double ax = a.w() / 2.0, ay = a.h() / 2.0;
  const double bx = b.w() / 2.0, by = b.h() / 2.0;
  // farthest point of one filled rectangle from the other is a corner
  const double a_to_b = std::hypot(std::max(0.0, ax - bx), std::max(0.0, ay - by));
  const double b_to_a = std::hypot(std::max(0.0, bx - ax), std::max(0.0, by - ay));
  return -std::max(a_to_b, b_to_a);
}

}  // namespace rodeo
