#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rodeo {

/// Dense row-major matrix of assignment costs.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  CostMatrix transposed() const {
    CostMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// row_to_col[r] is the column assigned to row r, or npos.
struct Assignment {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> row_to_col;
};

/// Sum of the assigned entries, accumulated in row order. Every caller that
/// compares assignment costs goes through this so equal pairings sum
/// identically.
inline double assignment_cost(const CostMatrix& cost, const Assignment& a) {
  double total = 0.0;
  for (std::size_t r = 0; r < a.row_to_col.size(); ++r) {
    if (a.row_to_col[r] != Assignment::npos) total += cost(r, a.row_to_col[r]);
  }
  return total;
}

namespace detail {

// Shortest augmenting path Hungarian method with row/column potentials,
// O(n^2 m) for n rows <= m columns. Every row gets a column.
inline std::vector<std::size_t> hungarian_wide(const CostMatrix& cost) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based internally; index 0 is the virtual source column
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, Assignment::npos);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost rectangular assignment: exactly min(rows, cols) pairs form.
inline Assignment solve_assignment(const CostMatrix& cost) {
  Assignment out;
  out.row_to_col.assign(cost.rows(), Assignment::npos);
  if (cost.empty()) return out;
  for (std::size_t r = 0; r < cost.rows(); ++r)
    for (std::size_t c = 0; c < cost.cols(); ++c)
      if (!std::isfinite(cost(r, c))) throw std::invalid_argument("solve_assignment: non-finite cost");

  if (cost.rows() <= cost.cols()) {
    out.row_to_col = detail::hungarian_wide(cost);
  } else {
    const auto col_to_row = detail::hungarian_wide(cost.transposed());
    for (std::size_t c = 0; c < col_to_row.size(); ++c) out.row_to_col[col_to_row[c]] = c;
  }
  return out;
}

/// Largest rows*cols for which lexicographic tie-breaking is applied. The
/// refinement re-solves one sub-problem per candidate and grows as n^5.
inline constexpr std::size_t kLexicographicRefinementLimit = 32 * 32;

/// Tolerance under which two assignment totals count as tied.
inline constexpr double kAssignmentTieTolerance = 1e-12;

/// Optimal assignment, choosing among optimal pairings the one whose
/// (row, col) sequence is lexicographically smallest. A row left unassigned
/// sorts after every column.
inline Assignment solve_assignment_lexicographic(const CostMatrix& cost) {
  Assignment best = solve_assignment(cost);
  if (cost.empty() || cost.rows() * cost.cols() > kLexicographicRefinementLimit) return best;

  const double optimum = assignment_cost(cost, best);
  const double tol = kAssignmentTieTolerance * (1.0 + std::abs(optimum));
  const std::size_t rows = cost.rows();
  const std::size_t cols = cost.cols();

  std::vector<std::size_t> fixed;  // decisions for rows [0, fixed.size())
  std::vector<char> col_taken(cols, 0);
  std::size_t unassigned_rows = 0;
  const std::size_t forced_unassigned = rows > cols ? rows - cols : 0;

  // completes the fixed prefix optimally; returns the full assignment
  auto complete = [&](std::size_t next_row) {
    std::vector<std::size_t> free_rows, free_cols;
    for (std::size_t r = next_row; r < rows; ++r) free_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c)
      if (!col_taken[c]) free_cols.push_back(c);
    Assignment full;
    full.row_to_col = fixed;
    full.row_to_col.resize(rows, Assignment::npos);
    if (!free_rows.empty() && !free_cols.empty()) {
      CostMatrix sub(free_rows.size(), free_cols.size());
      for (std::size_t i = 0; i < free_rows.size(); ++i)
        for (std::size_t j = 0; j < free_cols.size(); ++j) sub(i, j) = cost(free_rows[i], free_cols[j]);
      const auto sub_solution = solve_assignment(sub);
      for (std::size_t i = 0; i < free_rows.size(); ++i) {
        if (sub_solution.row_to_col[i] != Assignment::npos)
          full.row_to_col[free_rows[i]] = free_cols[sub_solution.row_to_col[i]];
      }
    }
    return full;
  };

  for (std::size_t r = 0; r < rows; ++r) {
    bool decided = false;
    for (std::size_t c = 0; c < cols && !decided; ++c) {
      if (col_taken[c]) continue;
      fixed.push_back(c);
      col_taken[c] = 1;
      const auto candidate = complete(r + 1);
      // every column must still be coverable when rows outnumber columns
      std::size_t paired = 0;
      for (auto v : candidate.row_to_col) paired += v != Assignment::npos;
      if (paired == std::min(rows, cols) && assignment_cost(cost, candidate) <= optimum + tol) {
        best = candidate;
        decided = true;
      } else {
        fixed.pop_back();
        col_taken[c] = 0;
      }
    }
    if (!decided) {
      if (unassigned_rows >= forced_unassigned) {
        throw std::logic_error("solve_assignment_lexicographic: no optimal extension found");
      }
      fixed.push_back(Assignment::npos);
      ++unassigned_rows;
    }
  }
  best.row_to_col = std::move(fixed);
  return best;
}

}  // namespace rodeo
