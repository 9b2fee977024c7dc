#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace rodeo {

using ClassId = int;

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const noexcept { return tp + fp + tn + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) noexcept {
    return a += b;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct LabelPair {
  ClassId target;
  ClassId predicted;
};

namespace detail {

using wide = __int128;

// numerator / sqrt(denominator) with both computed exactly in integers. The
// conversions to double commute with power-of-two scaling, which is what makes
// the K = 2 multiclass value bit-identical to the binary one.
inline double correlation_ratio(wide numerator, wide denominator) noexcept {
  if (denominator <= 0) return 0.0;
  const double r = static_cast<double>(numerator) / std::sqrt(static_cast<double>(denominator));
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace detail

/// Matthews correlation coefficient of a binary confusion matrix. Returns 0
/// when any marginal is empty.
inline double mcc_binary(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0) {
    throw std::invalid_argument("mcc_binary: negative count");
  }
  using detail::wide;
  const wide num = wide(c.tp) * c.tn - wide(c.fp) * c.fn;
  const wide den = wide(c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn);
  return detail::correlation_ratio(num, den);
}

/// K x K confusion matrix, rows indexed by target class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes)
      : k_(num_classes), cells_(num_classes * num_classes, 0) {}

  void add(ClassId target, ClassId predicted) {
    if (target < 0 || predicted < 0 || std::size_t(target) >= k_ || std::size_t(predicted) >= k_) {
      throw std::out_of_range("ConfusionMatrix: class id outside vocabulary");
    }
    ++cells_[std::size_t(target) * k_ + std::size_t(predicted)];
  }

  std::size_t num_classes() const noexcept { return k_; }
  std::int64_t at(std::size_t target, std::size_t predicted) const {
    return cells_.at(target * k_ + predicted);
  }

  /// Multiclass correlation coefficient (the K-category generalization of
  /// MCC); 0 when either marginal is concentrated on one class.
  double mcc() const noexcept {
    using detail::wide;
    wide correct = 0, total = 0, pt = 0, pp = 0, tt = 0;
    std::vector<wide> t_k(k_, 0), p_k(k_, 0);
    for (std::size_t i = 0; i < k_; ++i) {
      for (std::size_t j = 0; j < k_; ++j) {
        const auto v = cells_[i * k_ + j];
        t_k[i] += v;
        p_k[j] += v;
        total += v;
        if (i == j) correct += v;
      }
    }
    for (std::size_t i = 0; i < k_; ++i) {
      pt += p_k[i] * t_k[i];
      pp += p_k[i] * p_k[i];
      tt += t_k[i] * t_k[i];
    }
    const wide num = correct * total - pt;
    const wide den = (total * total - pp) * (total * total - tt);
    return detail::correlation_ratio(num, den);
  }

 private:
  std::size_t k_;
  std::vector<std::int64_t> cells_;
};

namespace detail {

inline std::size_t vocabulary_bound(std::span<const LabelPair> pairs) {
  ClassId hi = -1;
  for (const auto& p : pairs) {
    if (p.target < 0 || p.predicted < 0) throw std::out_of_range("negative class id");
    hi = std::max({hi, p.target, p.predicted});
  }
  return std::size_t(hi + 1);
}

}  // namespace detail

/// Multiclass MCC over (target, predicted) pairs. Empty input has no score and
/// yields nullopt.
inline std::optional<double> mcc_multiclass(std::span<const LabelPair> pairs) {
  if (pairs.empty()) return std::nullopt;
  ConfusionMatrix m(detail::vocabulary_bound(pairs));
  for (const auto& p : pairs) m.add(p.target, p.predicted);
  return m.mcc();
}

/// Binary counts obtained by expanding every pair into one indicator decision
/// per vocabulary class ("is it class k?") and pooling them.
inline ConfusionCounts one_vs_rest_counts(std::span<const LabelPair> pairs, std::size_t num_classes) {
  ConfusionCounts c;
  for (const auto& p : pairs) {
    if (p.target < 0 || p.predicted < 0 || std::size_t(p.target) >= num_classes ||
        std::size_t(p.predicted) >= num_classes) {
      throw std::out_of_range("one_vs_rest_counts: class id outside vocabulary");
    }
    const auto k = static_cast<std::int64_t>(num_classes);
    if (p.target == p.predicted) {
      c.tp += 1;
      c.tn += k - 1;
    } else {
      c.fn += 1;
      c.fp += 1;
      c.tn += k - 2;
    }
  }
  return c;
}

inline double clamped(double mcc) noexcept { return std::max(0.0, mcc); }

}  // namespace rodeo
