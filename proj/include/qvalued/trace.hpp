#pragma once

// Boundary traces on circles of the branched disk and their decomposition
// into irreducible pieces u_j(theta) = sum_i [[gamma_j((theta + 2 pi i)/Q_j)]].
//
// theta is the base angle of the source disk of the winding map, so one turn
// of theta is one full turn (phi in [0, 2 pi Qbar)) of the covering circle.

#include <Eigen/Core>

#include <vector>

#include "qvalued/multifield.hpp"

namespace qv {

/// Q-valued curve sampled at the M*Qbar nodes of one circle.
struct BoundaryTrace {
  int qbar = 1;
  int angular = 0;  ///< M
  double radius = 1.0;
  int q = 1;
  int n = 1;
  MultiField::Storage values;  ///< (M*Qbar) x (Q*n); sheet labels continuous along the circle
  Permutation seam;            ///< sheet s at the last node continues as seam[s] at node 0

  int ring_size() const { return angular * qbar; }
  Eigen::Map<const TupleMatrix<double>> tuple(int m) const { return {values.row(m).data(), q, n}; }
};

/// Restriction of a field to the circle of radius r (linear in r between rings).
BoundaryTrace extract_trace(const MultiField& field, double r);

/// Same trace with the starting node moved forward by `shift` nodes.
BoundaryTrace rotate_trace(const BoundaryTrace& trace, int shift);

/// One irreducible piece: a closed curve gamma_j traversed Q_j times faster.
struct TracePiece {
  int qj = 1;
  int multiplicity = 1;
  Eigen::MatrixXd a;        ///< (L+1) x n cosine coefficients; a.row(0)/2 is the mean
  Eigen::MatrixXd b;        ///< (L+1) x n sine coefficients; b.row(0) is zero
  Eigen::MatrixXd samples;  ///< unrolled gamma_j at s_p = 2 pi p / rows(); may be empty

  int max_mode() const { return static_cast<int>(a.rows()) - 1; }
  /// gamma_j(s) from the coefficients.
  Eigen::RowVectorXd evaluate(double s) const;
  /// sum_l l (|a_l|^2 + |b_l|^2)
  double dirichlet_sum() const;
  /// sum_l l^2 (|a_l|^2 + |b_l|^2)
  double tangential_sum() const;
  /// |a_0|^2/2 + sum_{l>=1} (|a_l|^2 + |b_l|^2)
  double l2_sum() const;
};

struct TraceDecomposition {
  int qbar = 1;
  int q = 0;
  int n = 1;
  std::vector<TracePiece> pieces;
  Permutation monodromy;
  double truncation_error = 0.0;  ///< bound on sup g_distance between samples and synthesis

  int piece_count() const { return static_cast<int>(pieces.size()); }
};

struct DecomposeOptions {
  int max_mode = -1;  ///< L_max; negative selects M/4
  double tie_tol = kTieTolerance;
  bool subtract_piece_mean = false;
};

/// Track sheets around the circle by optimal matching, read the monodromy
/// cycles as pieces and take the discrete Fourier transform of each unrolled
/// curve. Throws CollisionError when the tracking is ambiguous.
TraceDecomposition decompose_trace(const BoundaryTrace& trace, const DecomposeOptions& options = {});

/// Q-valued value of the decomposition at base angle theta.
QPoint<double> fourier_synthesize(const TraceDecomposition& dec, double theta);

/// Labeled sheets (Q x n) of the decomposition at base angle theta; sheets are
/// ordered piece by piece, copy by copy, offset i = 0..Q_j-1.
TupleMatrix<double> synthesize_sheets(const TraceDecomposition& dec, double theta);

/// Monodromy of a labeled decomposition layout: each piece's sheets shift by one.
Permutation layout_monodromy(const TraceDecomposition& dec);

/// Check Q bookkeeping and coefficient shapes; throws InputError.
void validate(const TraceDecomposition& dec);

}  // namespace qv
