#include "qvalued/trace.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "qvalued/errors.hpp"

namespace qv {

namespace {
constexpr double kPi = std::numbers::pi;
}

BoundaryTrace extract_trace(const MultiField& field, double r) {
  const auto& g = field.grid();
  if (!(r > 0)) throw InputError("extract_trace: radius must be positive");
  if (r > g.rho() * (1 + 1e-12)) throw InputError("extract_trace: radius beyond the grid");
  const auto [k, t] = g.locate(r);
  const int a = g.ring_size();
  BoundaryTrace tr;
  tr.qbar = g.qbar();
  tr.angular = g.angular();
  tr.radius = r;
  tr.q = field.q();
  tr.n = field.n();
  auto ring = [&](int j) -> MultiField::Storage {
    if (j == 0) return field.values().row(0).replicate(a, 1);
    return field.values().middleRows(g.node(j, 0), a);
  };
  if (t == 0) {
    tr.values = ring(k);
    tr.seam = field.seam(k);
    return tr;
  }
  if (!field.coherent()) throw InputError("extract_trace: interpolation needs a sheet-coherent field");
  tr.values = (1 - t) * ring(k) + t * ring(k + 1);
  tr.seam = field.seam(k + 1);
  return tr;
}

BoundaryTrace rotate_trace(const BoundaryTrace& trace, int shift) {
  const int a = trace.ring_size();
  shift = ((shift % a) + a) % a;
  BoundaryTrace out = trace;
  // Node m of the result is node m + shift of the input; past the seam the
  // sheets are relabeled through the monodromy.
  for (int m = 0; m < a; ++m) {
    const int src = m + shift;
    if (src < a) {
      out.values.row(m) = trace.values.row(src);
    } else {
      for (int s = 0; s < trace.q; ++s)
        out.values.row(m).segment(s * trace.n, trace.n) =
            trace.values.row(src - a).segment(trace.seam[s] * trace.n, trace.n);
    }
  }
  // Labels at the new start are the old labels at node `shift`; the seam stays
  // the same permutation in that labeling.
  return out;
}

Eigen::RowVectorXd TracePiece::evaluate(double s) const {
  Eigen::RowVectorXd v = 0.5 * a.row(0);
  for (int l = 1; l < a.rows(); ++l) v += a.row(l) * std::cos(l * s) + b.row(l) * std::sin(l * s);
  return v;
}

double TracePiece::dirichlet_sum() const {
  double s = 0;
  for (int l = 1; l < a.rows(); ++l) s += l * (a.row(l).squaredNorm() + b.row(l).squaredNorm());
  return s;
}

double TracePiece::tangential_sum() const {
  double s = 0;
  for (int l = 1; l < a.rows(); ++l) s += double(l) * l * (a.row(l).squaredNorm() + b.row(l).squaredNorm());
  return s;
}

double TracePiece::l2_sum() const {
  double s = 0.5 * a.row(0).squaredNorm();
  for (int l = 1; l < a.rows(); ++l) s += a.row(l).squaredNorm() + b.row(l).squaredNorm();
  return s;
}

void validate(const TraceDecomposition& dec) {
  int total = 0;
  for (const auto& p : dec.pieces) {
    if (p.qj < 1 || p.multiplicity < 1) throw InputError("decomposition: Q_j and multiplicity must be >= 1");
    if (p.a.rows() < 1 || p.a.cols() != dec.n || p.b.rows() != p.a.rows() || p.b.cols() != dec.n)
      throw InputError("decomposition: coefficient arrays do not match n");
    total += p.qj * p.multiplicity;
  }
  if (total != dec.q) throw InputError("decomposition: sum of multiplicity * Q_j differs from Q");
  if (dec.qbar < 1) throw InputError("decomposition: qbar must be >= 1");
}

TraceDecomposition decompose_trace(const BoundaryTrace& trace, const DecomposeOptions& options) {
  const int a = trace.ring_size();
  const int q = trace.q, n = trace.n;
  if (a < 1 || trace.values.rows() != a || trace.values.cols() != q * n)
    throw InputError("decompose_trace: malformed trace");

  // Relabel from scratch: canonical order at node 0, then follow matchings.
  MultiField::Storage lab(a, q * n);
  {
    const QPoint<double> start{TupleMatrix<double>(trace.tuple(0))};
    Eigen::Map<TupleMatrix<double>>(lab.row(0).data(), q, n) = start.values();
  }
  std::vector<int> collisions;
  for (int m = 1; m < a; ++m) {
    const Eigen::Map<const TupleMatrix<double>> prev(lab.row(m - 1).data(), q, n);
    const auto match = optimal_matching(prev, trace.tuple(m), options.tie_tol);
    if (match.ambiguous) collisions.push_back(m);
    Eigen::Map<TupleMatrix<double>> dst(lab.row(m).data(), q, n);
    for (int s = 0; s < q; ++s) dst.row(s) = trace.tuple(m).row(match.perm[s]);
  }
  const Eigen::Map<const TupleMatrix<double>> last(lab.row(a - 1).data(), q, n);
  const Eigen::Map<const TupleMatrix<double>> first(lab.row(0).data(), q, n);
  const auto closing = optimal_matching(last, first, options.tie_tol);
  if (closing.ambiguous) collisions.push_back(0);
  if (!collisions.empty())
    throw CollisionError("decompose_trace: ambiguous sheet matching at " + std::to_string(collisions.size()) +
                             " node(s); refine M or perturb the trace",
                         collisions);

  TraceDecomposition dec;
  dec.qbar = trace.qbar;
  dec.q = q;
  dec.n = n;
  dec.monodromy = closing.perm;

  const int requested = options.max_mode < 0 ? trace.angular / 4 : options.max_mode;
  static thread_local Eigen::FFT<double> fft;
  double worst_tail = 0;
  double coeff_mass = 0;
  for (const auto& cyc : cycles(dec.monodromy)) {
    const int len = static_cast<int>(cyc.size());
    const int total = a * len;
    TracePiece piece;
    piece.qj = len;
    piece.samples.resize(total, n);
    for (int i = 0; i < len; ++i)
      for (int m = 0; m < a; ++m) piece.samples.row(i * a + m) = lab.row(m).segment(cyc[i] * n, n);

    const int lmax = std::min(requested, (total - 1) / 2);
    piece.a = Eigen::MatrixXd::Zero(lmax + 1, n);
    piece.b = Eigen::MatrixXd::Zero(lmax + 1, n);
    double tail = 0;
    std::vector<std::complex<double>> x(total), spec;
    for (int c = 0; c < n; ++c) {
      for (int p = 0; p < total; ++p) x[p] = piece.samples(p, c);
      fft.fwd(spec, x);
      for (int l = 0; l <= total / 2; ++l) {
        const double scale = (2 * l == total) ? 1.0 / total : 2.0 / total;
        const double al = scale * spec[l].real();
        const double bl = -scale * spec[l].imag();
        if (l <= lmax) {
          piece.a(l, c) = al;
          piece.b(l, c) = l == 0 ? 0.0 : bl;
        } else {
          tail += std::abs(al) + std::abs(bl);
        }
        coeff_mass += std::abs(al) + std::abs(bl);
      }
    }
    if (options.subtract_piece_mean) {
      const Eigen::RowVectorXd mean = 0.5 * piece.a.row(0);
      piece.samples.rowwise() -= mean;
      piece.a.row(0).setZero();
    }
    worst_tail = std::max(worst_tail, tail);
    dec.pieces.push_back(std::move(piece));
  }

  // Pieces that trace the same curve (identical sheets) merge into one with
  // multiplicity.
  std::vector<TracePiece> merged;
  for (auto& p : dec.pieces) {
    bool absorbed = false;
    for (auto& m : merged) {
      if (m.qj != p.qj) continue;
      const int total = static_cast<int>(p.samples.rows());
      const double tol = 1e-12 * (1.0 + p.samples.cwiseAbs().maxCoeff());
      for (int shift = 0; shift < p.qj && !absorbed; ++shift) {
        bool same = true;
        for (int r = 0; r < total && same; ++r)
          same = (m.samples.row(r) - p.samples.row((r + shift * a) % total)).cwiseAbs().maxCoeff() <= tol;
        if (same) {
          ++m.multiplicity;
          absorbed = true;
        }
      }
      if (absorbed) break;
    }
    if (!absorbed) merged.push_back(std::move(p));
  }
  dec.pieces = std::move(merged);

  const double roundoff = 64 * std::numeric_limits<double>::epsilon() * (1.0 + coeff_mass);
  dec.truncation_error = std::sqrt(double(q)) * (worst_tail + roundoff);
  return dec;
}

TupleMatrix<double> synthesize_sheets(const TraceDecomposition& dec, double theta) {
  TupleMatrix<double> out(dec.q, dec.n);
  int row = 0;
  for (const auto& p : dec.pieces)
    for (int copy = 0; copy < p.multiplicity; ++copy)
      for (int i = 0; i < p.qj; ++i) out.row(row++) = p.evaluate((theta + 2 * kPi * i) / p.qj);
  return out;
}

QPoint<double> fourier_synthesize(const TraceDecomposition& dec, double theta) {
  validate(dec);
  return QPoint<double>(synthesize_sheets(dec, theta));
}

Permutation layout_monodromy(const TraceDecomposition& dec) {
  Permutation perm;
  int offset = 0;
  for (const auto& p : dec.pieces)
    for (int copy = 0; copy < p.multiplicity; ++copy) {
      for (int i = 0; i < p.qj; ++i) perm.push_back(offset + (i + 1) % p.qj);
      offset += p.qj;
    }
  return perm;
}

}  // namespace qv
