#pragma once

// Q-valued maps sampled on a BranchedGrid.
//
// Each node stores Q labeled sheets. In a coherent field the labels are
// continuous: sheet s at (k, m) continues to sheet s at (k, m+1) and at
// (k+1, m); across the angular seam (m = M*Qbar-1 -> 0) sheet s continues as
// sheet seam(k)[s]. The seam permutation is the monodromy of ring k.

#include <Eigen/Core>

#include <vector>

#include "qvalued/branched_grid.hpp"
#include "qvalued/multivalue.hpp"

namespace qv {

class MultiField {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  MultiField(BranchedGrid grid, int q, int n);

  const BranchedGrid& grid() const { return grid_; }
  int q() const { return q_; }
  int n() const { return n_; }

  /// One row per node, Q*n columns; sheet s occupies columns [s*n, (s+1)*n).
  Storage& values() { return values_; }
  const Storage& values() const { return values_; }

  /// Labeled Q x n view of one node.
  Eigen::Map<const TupleMatrix<double>> tuple(int node) const {
    return {values_.row(node).data(), q_, n_};
  }
  Eigen::Map<TupleMatrix<double>> tuple(int node) { return {values_.row(node).data(), q_, n_}; }

  /// Unordered value at a node, in canonical order.
  QPoint<double> at(int node) const { return QPoint<double>(TupleMatrix<double>(tuple(node))); }

  const Permutation& seam(int k) const { return seams_[k]; }
  void set_seam(int k, Permutation p) { seams_[k] = std::move(p); }
  /// Same monodromy on every ring.
  void set_seams(const Permutation& p);

  bool coherent() const { return coherent_; }
  void set_coherent(bool c) { coherent_ = c; }

  /// Nodes whose sheet selection was ambiguous; excluded from quadrature.
  const std::vector<char>& unreliable() const { return unreliable_; }
  std::vector<char>& unreliable() { return unreliable_; }
  int unreliable_count() const;

 private:
  BranchedGrid grid_;
  int q_;
  int n_;
  Storage values_;
  std::vector<Permutation> seams_;
  std::vector<char> unreliable_;
  bool coherent_ = true;
};

/// Relabel the sheets of a field with arbitrary per-node order (for instance
/// canonical order read from disk) by optimal matching between neighbors.
/// Ambiguous matchings mark the node unreliable.
MultiField make_coherent(MultiField field, double tie_tol = kTieTolerance);

/// Derivatives of every sheet on one ring, A x (Q*n) each.
struct RingDerivatives {
  MultiField::Storage radial;   ///< d/dr
  MultiField::Storage angular;  ///< d/dphi (not divided by r)
};

/// Radial derivatives by second-order differences (central inside, one-sided
/// on the innermost and outermost rings); angular derivatives spectrally along
/// each unrolled sheet cycle of the ring.
RingDerivatives ring_derivatives(const MultiField& field, int k);

/// Spectral d/dphi of a labeled ring (A x Q*n) closed up by `seam`.
MultiField::Storage angular_derivative(const MultiField::Storage& ring, const Permutation& seam, int n,
                                       double dphi);

/// Flat-metric gradient at one node, split into the normal (d/dr) and
/// tangential (r^-1 d/dphi) parts, one row per sheet.
struct NodeGradient {
  TupleMatrix<double> normal;
  TupleMatrix<double> tangential;
  bool reliable = true;
  double squared_norm() const { return normal.squaredNorm() + tangential.squaredNorm(); }
};

NodeGradient gradient(const MultiField& field, int k, int m);

/// Per-node |Df|^2 samples (zero at the origin, which carries no gradient).
Eigen::VectorXd energy_density(const MultiField& field);

/// Dirichlet energy over B_r. Unreliable nodes are dropped and their weight
/// is redistributed over the rest of the ring.
double dirichlet_energy(const MultiField& field, double r);

/// Ring-wise sum over reliable nodes, rescaled to the full ring size.
double reliable_ring_sum(const MultiField& field, int k, const Eigen::VectorXd& per_node);

/// Largest pointwise |Df| over reliable nodes (measured Lipschitz constant).
double lipschitz_estimate(const MultiField& field);

/// Largest |value| over all nodes and sheets.
double sup_norm(const MultiField& field);

}  // namespace qv
