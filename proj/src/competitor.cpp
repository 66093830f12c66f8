#include "qvalued/competitor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qvalued/detail/synthesis.hpp"
#include "qvalued/errors.hpp"

namespace qv {

namespace {

constexpr double kPi = std::numbers::pi;

// Writes every piece of the decomposition into `field` using `fill(k, synth, piece)`
// for the rings and the piece mean at the origin.
template <typename RingFn>
MultiField assemble(const CompetitorSpec& spec, int radial, int angular, RingFn&& ring_values) {
  const auto& dec = spec.decomposition;
  validate(dec);
  if (!(spec.radius > 0)) throw InputError("competitor: radius must be positive");
  MultiField field(BranchedGrid(dec.qbar, spec.radius, radial, angular), dec.q, dec.n);
  const auto& g = field.grid();
  int offset = 0;
  for (const auto& piece : dec.pieces) {
    detail::PieceSynthesizer synth(piece, g.ring_size());
    for (int k = 1; k <= g.radial(); ++k) {
      const Eigen::MatrixXd unrolled = ring_values(k, synth, piece);
      for (int copy = 0; copy < piece.multiplicity; ++copy)
        detail::scatter_ring(field, k, offset + copy * piece.qj, piece.qj, unrolled);
    }
    for (int s = 0; s < piece.qj * piece.multiplicity; ++s)
      field.values().row(0).segment((offset + s) * dec.n, dec.n) = 0.5 * piece.a.row(0);
    offset += piece.qj * piece.multiplicity;
  }
  field.set_seams(layout_monodromy(dec));
  field.set_coherent(true);
  return field;
}

double piece_radius(const BranchedGrid& g, int k, int qj) {
  return std::pow(static_cast<double>(k) / g.radial(), 1.0 / (g.qbar() * qj));
}

}  // namespace

MultiField harmonic_competitor(const CompetitorSpec& spec, int radial, int angular) {
  const int qbar = spec.decomposition.qbar;
  return assemble(spec, radial, angular, [&](int k, const detail::PieceSynthesizer& synth, const TracePiece& p) {
    const double u = std::pow(static_cast<double>(k) / radial, 1.0 / (qbar * p.qj));
    return synth.ring_power(u);
  });
}

MultiField lipschitz_competitor(const CompetitorSpec& spec, int radial, int angular) {
  if (!spec.smoothing) throw InputError("lipschitz_competitor: smoothing parameters missing");
  const double t = spec.smoothing->t;
  const double clamp = spec.smoothing->clamp_radius;
  if (!(t > 0 && t < 1)) throw InputError("lipschitz_competitor: blend width t must lie in (0, 1)");
  const int qbar = spec.decomposition.qbar;
  for (const auto& p : spec.decomposition.pieces)
    if (clamp < 0 || clamp >= std::pow(1 - t, qbar * p.qj))
      throw InputError("lipschitz_competitor: clamp radius must lie inside the harmonic region");
  const BranchedGrid g(qbar, spec.radius, radial, angular);

  return assemble(spec, radial, angular, [&](int k, const detail::PieceSynthesizer& synth, const TracePiece& p) {
    const int a = g.ring_size();
    auto boundary = [&]() -> Eigen::MatrixXd {
      if (p.samples.rows() == static_cast<Eigen::Index>(a) * p.qj) return p.samples;
      return synth.ring_power(1.0);
    };
    if (k == radial) return boundary();
    const double rel = static_cast<double>(k) / radial;
    if (clamp > 0 && rel < clamp) {
      const Eigen::MatrixXd edge = synth.ring_power(std::pow(clamp, 1.0 / (qbar * p.qj)));
      const Eigen::RowVectorXd center = 0.5 * p.a.row(0);
      Eigen::MatrixXd out = edge;
      out.rowwise() -= center;
      out *= rel / clamp;
      out.rowwise() += center;
      return out;
    }
    const double u = piece_radius(g, k, p.qj);
    if (u <= 1 - t) return synth.ring_power(u);
    const double w = (u - (1 - t)) / t;
    return ((1 - w) * synth.ring_power(1 - t) + w * boundary()).eval();
  });
}

CompetitorEnergies competitor_energies(const TraceDecomposition& dec, double radius) {
  validate(dec);
  CompetitorEnergies e;
  for (const auto& p : dec.pieces) {
    e.dirichlet += p.multiplicity * p.dirichlet_sum();
    e.tangential += p.multiplicity * p.tangential_sum() / p.qj;
    e.boundary_l2 += p.multiplicity * p.qj * p.l2_sum();
  }
  e.dirichlet *= kPi;
  e.tangential *= kPi / dec.qbar / radius;
  e.boundary_l2 *= kPi * dec.qbar * radius;
  return e;
}

CompetitorEnergies quadrature_energies(const MultiField& field) {
  const auto& g = field.grid();
  const int k = g.radial();
  const double rho = g.rho();
  const auto d = ring_derivatives(field, k);
  Eigen::VectorXd tang = Eigen::VectorXd::Zero(g.node_count());
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(g.node_count());
  const int base = g.node(k, 0);
  for (int m = 0; m < g.ring_size(); ++m) {
    tang(base + m) = d.angular.row(m).squaredNorm() / (rho * rho);
    mass(base + m) = field.values().row(base + m).squaredNorm();
  }
  CompetitorEnergies e;
  e.dirichlet = dirichlet_energy(field, rho);
  e.tangential = reliable_ring_sum(field, k, tang) * rho * g.dphi();
  e.boundary_l2 = reliable_ring_sum(field, k, mass) * rho * g.dphi();
  return e;
}

double max_relative_error(const CompetitorEnergies& closed, const CompetitorEnergies& quad) {
  auto rel = [](double x, double y) { return std::abs(x) > 0 ? std::abs(y - x) / std::abs(x) : std::abs(y); };
  return std::max({rel(closed.dirichlet, quad.dirichlet), rel(closed.tangential, quad.tangential),
                   rel(closed.boundary_l2, quad.boundary_l2)});
}

}  // namespace qv
