#include "qvalued/detail/synthesis.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>

namespace qv::detail {

namespace {
constexpr int kDirectModeLimit = 24;
}

PieceSynthesizer::PieceSynthesizer(const TracePiece& piece, int ring_size)
    : piece_(piece), a_(ring_size), total_(ring_size * piece.qj) {
  for (int l = 1; l < piece.a.rows(); ++l)
    if (piece.a.row(l).cwiseAbs().maxCoeff() > 0 || piece.b.row(l).cwiseAbs().maxCoeff() > 0)
      active_.push_back(l);
  use_fft_ = static_cast<int>(active_.size()) > kDirectModeLimit && !active_.empty() &&
             2 * active_.back() < total_;
  if (!use_fft_) {
    const int na = static_cast<int>(active_.size());
    cos_.resize(total_, na);
    sin_.resize(total_, na);
    for (int p = 0; p < total_; ++p) {
      for (int j = 0; j < na; ++j) {
        // Reduce l*p modulo the period before scaling to keep the angle small.
        const long long lp = static_cast<long long>(active_[j]) * p % total_;
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(lp) / total_;
        cos_(p, j) = std::cos(ang);
        sin_(p, j) = std::sin(ang);
      }
    }
  }
}

Eigen::MatrixXd PieceSynthesizer::ring(const Eigen::VectorXd& weights) const {
  const int n = static_cast<int>(piece_.a.cols());
  Eigen::MatrixXd out(total_, n);
  const Eigen::RowVectorXd mean = 0.5 * weights(0) * piece_.a.row(0);
  if (!use_fft_) {
    out.rowwise() = mean;
    for (int j = 0; j < static_cast<int>(active_.size()); ++j) {
      const int l = active_[j];
      const Eigen::RowVectorXd al = weights(l) * piece_.a.row(l);
      const Eigen::RowVectorXd bl = weights(l) * piece_.b.row(l);
      out.noalias() += cos_.col(j) * al + sin_.col(j) * bl;
    }
    return out;
  }
  static thread_local Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec(total_), vals;
  const double half = 0.5 * total_;
  for (int c = 0; c < n; ++c) {
    std::fill(spec.begin(), spec.end(), std::complex<double>(0, 0));
    spec[0] = total_ * mean(c);
    for (int l : active_) {
      const std::complex<double> x(half * weights(l) * piece_.a(l, c), -half * weights(l) * piece_.b(l, c));
      spec[l] += x;
      spec[total_ - l] += std::conj(x);
    }
    fft.inv(vals, spec);
    for (int p = 0; p < total_; ++p) out(p, c) = vals[p].real();
  }
  return out;
}

Eigen::MatrixXd PieceSynthesizer::ring_power(double u) const {
  const int lmax = static_cast<int>(piece_.a.rows()) - 1;
  Eigen::VectorXd w(lmax + 1);
  w(0) = 1.0;
  for (int l = 1; l <= lmax; ++l) w(l) = w(l - 1) * u;
  return ring(w);
}

void scatter_ring(MultiField& field, int k, int offset, int qj, const Eigen::MatrixXd& unrolled) {
  const auto& g = field.grid();
  const int a = g.ring_size();
  const int n = field.n();
  for (int i = 0; i < qj; ++i)
    for (int m = 0; m < a; ++m)
      field.values().row(g.node(k, m)).segment((offset + i) * n, n) = unrolled.row(i * a + m);
}

}  // namespace qv::detail
