#pragma once

// Unordered Q-tuples of points in R^n (the space A_Q(R^n)) and the optimal
// matching machinery behind the Almgren distance G.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "qvalued/errors.hpp"

namespace qv {

using Permutation = std::vector<int>;

template <typename Scalar>
using TupleMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Default tolerance below which two matchings count as tied.
inline constexpr double kTieTolerance = 1e-9;

namespace detail {

template <typename Scalar, typename DA, typename DB>
Scalar squared_distance(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  Scalar s = 0;
  for (Eigen::Index c = 0; c < a.size(); ++c) {
    const Scalar d = a(c) - b(c);
    s += d * d;
  }
  return s;
}

template <typename Scalar>
struct Assignment {
  Scalar cost = std::numeric_limits<Scalar>::infinity();
  Permutation perm;
};

// Dense min-cost perfect assignment (potentials / shortest augmenting path).
// Entries flagged in `forbidden` never appear in the result; cost is +inf when
// no admissible assignment exists.
template <typename Scalar>
Assignment<Scalar> hungarian(const TupleMatrix<Scalar>& cost,
                             const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& forbidden) {
  const int n = static_cast<int>(cost.rows());
  Assignment<Scalar> out;
  if (n == 0) {
    out.cost = 0;
    return out;
  }
  Scalar finite_max = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!forbidden(i, j)) finite_max = std::max(finite_max, cost(i, j));
  const Scalar big = (finite_max + 1) * Scalar(4 * n + 4);
  auto entry = [&](int i, int j) { return forbidden(i, j) ? big : cost(i, j); };

  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<Scalar> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = entry(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.perm.assign(n, -1);
  for (int j = 1; j <= n; ++j) out.perm[p[j] - 1] = j - 1;
  Scalar total = 0;
  for (int i = 0; i < n; ++i) {
    if (forbidden(i, out.perm[i])) {
      out.cost = inf;
      return out;
    }
    total += cost(i, out.perm[i]);
  }
  out.cost = total;
  return out;
}

}  // namespace detail

/// Result of matching the rows of `a` to the rows of `b`.
template <typename Scalar>
struct Matching {
  Permutation perm;  ///< row i of a is paired with row perm[i] of b
  Scalar cost = 0;   ///< sum of squared distances, accumulated in row order
  Scalar gap = std::numeric_limits<Scalar>::infinity();  ///< second best minus best
  bool ambiguous = false;
};

/// Sum over i of |a_i - b_{perm(i)}|^2, accumulated in row order.
template <typename DA, typename DB>
typename DA::Scalar matching_cost(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                                  const Permutation& perm) {
  using Scalar = typename DA::Scalar;
  Scalar s = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    s += detail::squared_distance<Scalar>(a.row(i), b.row(perm[i]));
  return s;
}

/// Optimal bijection between the rows of two Q x n matrices.
///
/// The returned permutation is the lexicographically smallest among all
/// bijections whose cost is within `tie_tol` of the optimum. `ambiguous` is set
/// when some genuinely different pairing (one that does not merely swap
/// identical points) is within `tie_tol` of the optimum.
template <typename DA, typename DB>
Matching<typename DA::Scalar> optimal_matching(const Eigen::MatrixBase<DA>& a,
                                               const Eigen::MatrixBase<DB>& b,
                                               double tie_tol = kTieTolerance) {
  using Scalar = typename DA::Scalar;
  using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InputError("optimal_matching: tuples differ in Q or n");
  const int q = static_cast<int>(a.rows());
  Matching<Scalar> out;
  if (q == 0) return out;
  if (q == 1) {
    out.perm = {0};
    out.cost = matching_cost(a, b, out.perm);
    return out;
  }

  TupleMatrix<Scalar> cost(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) cost(i, j) = detail::squared_distance<Scalar>(a.row(i), b.row(j));

  BoolMatrix none = BoolMatrix::Constant(q, q, false);
  const auto best = detail::hungarian<Scalar>(cost, none);
  const Scalar opt = matching_cost(a, b, best.perm);

  // Second best over pairings that differ as multisets of (a-value, b-value) pairs.
  auto same_row = [](const auto& x, const auto& y) { return (x.array() == y.array()).all(); };
  bool has_duplicates = false;
  Scalar second = std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < q; ++i) {
    BoolMatrix forbid = none;
    for (int i2 = 0; i2 < q; ++i2) {
      if (!same_row(a.row(i2), a.row(i))) continue;
      if (i2 != i) has_duplicates = true;
      for (int j = 0; j < q; ++j)
        if (same_row(b.row(j), b.row(best.perm[i2]))) forbid(i, j) = true;
    }
    const auto alt = detail::hungarian<Scalar>(cost, forbid);
    if (std::isfinite(alt.cost)) second = std::min(second, matching_cost(a, b, alt.perm));
  }
  for (int j = 0; j < q && !has_duplicates; ++j)
    for (int j2 = j + 1; j2 < q; ++j2)
      if (same_row(b.row(j), b.row(j2))) has_duplicates = true;

  out.gap = second - opt;
  out.ambiguous = out.gap <= Scalar(tie_tol);
  out.perm = best.perm;
  out.cost = opt;

  if (out.ambiguous || has_duplicates) {
    // Lexicographically smallest bijection within tie_tol of the optimum.
    Permutation lex(q, -1);
    std::vector<char> used(q, 0);
    Scalar fixed = 0;
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) {
        if (used[j]) continue;
        BoolMatrix forbid = none;
        for (int i2 = 0; i2 < i; ++i2)
          for (int j2 = 0; j2 < q; ++j2) forbid(i2, j2) = (j2 != lex[i2]);
        for (int j2 = 0; j2 < q; ++j2) forbid(i, j2) = (j2 != j);
        for (int i2 = i + 1; i2 < q; ++i2) {
          forbid(i2, j) = true;
          for (int i3 = 0; i3 < i; ++i3) forbid(i2, lex[i3]) = true;
        }
        const auto completion = detail::hungarian<Scalar>(cost, forbid);
        if (std::isfinite(completion.cost) && completion.cost <= opt + Scalar(tie_tol)) {
          lex[i] = j;
          used[j] = 1;
          fixed += cost(i, j);
          break;
        }
      }
    }
    out.perm = lex;
    // Keep the exact optimum as the reported cost; lex only picks the labeling.
    out.cost = std::min(opt, matching_cost(a, b, lex));
  }
  return out;
}

/// An unordered Q-tuple of points in R^n, stored in canonical (lexicographic,
/// stable) row order. Repeated points are kept with their multiplicity.
template <typename Scalar = double>
class QPoint {
 public:
  using Matrix = TupleMatrix<Scalar>;

  QPoint() = default;

  explicit QPoint(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 1) throw InputError("QPoint: Q must be positive");
    canonicalize();
  }

  /// Q copies of the same point.
  static QPoint constant(int q, const RowVector<Scalar>& v) {
    Matrix m(q, v.size());
    m.rowwise() = v;
    return QPoint(std::move(m));
  }

  int q() const { return static_cast<int>(values_.rows()); }
  int n() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }
  auto value(int i) const { return values_.row(i); }

  /// Every value shifted by v.
  QPoint translated(const RowVector<Scalar>& v) const {
    Matrix m = values_;
    m.rowwise() += v;
    return QPoint(std::move(m));
  }

  friend bool operator==(const QPoint& x, const QPoint& y) {
    return x.values_.rows() == y.values_.rows() && x.values_.cols() == y.values_.cols() &&
           (x.values_.array() == y.values_.array()).all();
  }

 private:
  void canonicalize() {
    const Eigen::Index q = values_.rows();
    std::vector<Eigen::Index> order(q);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [this](Eigen::Index i, Eigen::Index j) {
      for (Eigen::Index c = 0; c < values_.cols(); ++c) {
        if (values_(i, c) < values_(j, c)) return true;
        if (values_(j, c) < values_(i, c)) return false;
      }
      return false;
    });
    Matrix sorted(q, values_.cols());
    for (Eigen::Index i = 0; i < q; ++i) sorted.row(i) = values_.row(order[i]);
    values_ = std::move(sorted);
  }

  Matrix values_;
};

/// Almgren distance: minimal root-sum-of-squares over bijections.
template <typename Scalar>
Scalar g_distance(const QPoint<Scalar>& a, const QPoint<Scalar>& b) {
  if (a.q() != b.q() || a.n() != b.n()) throw InputError("g_distance: Q or n mismatch");
  return std::sqrt(optimal_matching(a.values(), b.values()).cost);
}

/// Same as g_distance for raw (unsorted) Q x n row matrices.
template <typename DA, typename DB>
typename DA::Scalar g_distance_rows(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename DA::Scalar;
  if (a.rows() == 1) return std::sqrt(detail::squared_distance<Scalar>(a.row(0), b.row(0)));
  if (a.rows() == 2) {
    const Scalar s = detail::squared_distance<Scalar>(a.row(0), b.row(0)) +
                     detail::squared_distance<Scalar>(a.row(1), b.row(1));
    const Scalar t = detail::squared_distance<Scalar>(a.row(0), b.row(1)) +
                     detail::squared_distance<Scalar>(a.row(1), b.row(0));
    return std::sqrt(std::min(s, t));
  }
  return std::sqrt(optimal_matching(a, b).cost);
}

/// Optimal bijection between two tuples (indices refer to canonical order).
template <typename Scalar>
Matching<Scalar> match_selection(const QPoint<Scalar>& a, const QPoint<Scalar>& b,
                                 double tie_tol = kTieTolerance) {
  if (a.q() != b.q() || a.n() != b.n()) throw InputError("match_selection: Q or n mismatch");
  return optimal_matching(a.values(), b.values(), tie_tol);
}

/// Arithmetic mean of the Q values.
template <typename Scalar>
RowVector<Scalar> eta(const QPoint<Scalar>& a) {
  return a.values().colwise().mean();
}

/// Minimal distance between two distinct values; +inf when there is no such pair.
template <typename Scalar>
Scalar separation(const QPoint<Scalar>& a) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < a.q(); ++i)
    for (int j = i + 1; j < a.q(); ++j) {
      const Scalar d = std::sqrt(detail::squared_distance<Scalar>(a.value(i), a.value(j)));
      if (d > 0) best = std::min(best, d);
    }
  return best;
}

/// Cycle decomposition of a permutation; each cycle starts at its smallest index.
inline std::vector<std::vector<int>> cycles(const Permutation& perm) {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(perm.size(), 0);
  for (int s = 0; s < static_cast<int>(perm.size()); ++s) {
    if (seen[s]) continue;
    std::vector<int> cyc;
    for (int t = s; !seen[t]; t = perm[t]) {
      seen[t] = 1;
      cyc.push_back(t);
    }
    out.push_back(std::move(cyc));
  }
  return out;
}

inline Permutation inverse(const Permutation& perm) {
  Permutation inv(perm.size());
  for (int i = 0; i < static_cast<int>(perm.size()); ++i) inv[perm[i]] = i;
  return inv;
}

inline Permutation identity_permutation(int q) {
  Permutation p(q);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

}  // namespace qv
