#pragma once

#include <Eigen/Core>

#include <vector>

#include "qvalued/multifield.hpp"
#include "qvalued/trace.hpp"

namespace qv::detail {

// Evaluates one piece on a full circle of A base nodes, unrolled: row
// p = m + A*i holds sheet i at node m, i.e. gamma_j at s_p = 2 pi p / (A Q_j).
class PieceSynthesizer {
 public:
  PieceSynthesizer(const TracePiece& piece, int ring_size);

  int rows() const { return total_; }

  // weights(0) scales the mean a_0/2, weights(l) scales mode l.
  Eigen::MatrixXd ring(const Eigen::VectorXd& weights) const;

  // Harmonic radial profile: weights(l) = u^l, accumulated as a running product.
  Eigen::MatrixXd ring_power(double u) const;

 private:
  const TracePiece& piece_;
  int a_;
  int total_;
  std::vector<int> active_;
  bool use_fft_;
  Eigen::MatrixXd cos_;  // total x active
  Eigen::MatrixXd sin_;
};

// Copy unrolled piece values into ring k of a field, sheets [offset, offset+Q_j).
void scatter_ring(MultiField& field, int k, int offset, int qj, const Eigen::MatrixXd& unrolled);

}  // namespace qv::detail
