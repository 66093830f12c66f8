#pragma once

// Harmonic competitor of a decomposed boundary trace: each piece gamma_j is
// extended harmonically on its own disk,
//   zeta_j(u, s) = a_{j,0}/2 + sum_l u^l (a_{j,l} cos(l s) + b_{j,l} sin(l s)),
// then wound back onto the branched disk with u = (|z|/r)^{1/(Qbar Q_j)} and
// s = (theta + 2 pi i)/Q_j. The Lipschitz variant blends linearly to the trace
// on the outer collar 1-t <= u <= 1 and clamps the field to a cone near 0.

#include <optional>

#include "qvalued/multifield.hpp"
#include "qvalued/trace.hpp"

namespace qv {

struct Smoothing {
  double t = 0.25;            ///< collar width in the piece radius u, in (0, 1)
  double clamp_radius = 0.0;  ///< radius (relative to r) of the conical clamp; 0 disables it
};

struct CompetitorSpec {
  TraceDecomposition decomposition;
  double radius = 1.0;
  std::optional<Smoothing> smoothing;
};

/// Harmonic extension on B_r sampled on a K x M grid (sheet-coherent).
MultiField harmonic_competitor(const CompetitorSpec& spec, int radial, int angular);

/// Blended and clamped variant; requires spec.smoothing.
MultiField lipschitz_competitor(const CompetitorSpec& spec, int radial, int angular);

struct CompetitorEnergies {
  double dirichlet = 0;    ///< int_{B_r} |DH|^2
  double tangential = 0;   ///< int_{dB_r} |D_tau H|^2
  double boundary_l2 = 0;  ///< int_{dB_r} |H|^2
};

/// Closed forms from the Fourier coefficients (r = 1 gives the unit-ball values).
CompetitorEnergies competitor_energies(const TraceDecomposition& dec, double radius = 1.0);

/// The same three quantities by quadrature of a sampled field on its outer circle.
CompetitorEnergies quadrature_energies(const MultiField& field);

/// Largest relative deviation between two energy triples (zero entries compare absolutely).
double max_relative_error(const CompetitorEnergies& closed, const CompetitorEnergies& quad);

}  // namespace qv
