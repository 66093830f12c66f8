#pragma once

// Blow-up family f_r(z, w) = N(r z, r^{1/Qbar} w) / r^{I0} of a field on the
// branched disk, sampled on the unit circle, its limit f0 and the homogeneous
// extension g = |z|^{I0} f0.

#include <Eigen/Core>

#include <string>
#include <vector>

#include "qvalued/multifield.hpp"
#include "qvalued/trace.hpp"

namespace qv {

struct RescaledProfile {
  double r = 0;
  double I0 = 0;
  BoundaryTrace trace;              ///< f_r on the unit circle, radius field = 1
  double interpolation_error = 0;   ///< bound on sup |f_r - exact| from radial interpolation and roundoff
};

/// f_r at one radius. Requires 2 dr <= r <= rho and I0 > 0.
RescaledProfile rescale(const MultiField& field, double r, double I0);

/// L2(dB_1) distance: node-wise g_distance integrated by the angular trapezoid.
double l2_distance(const BoundaryTrace& a, const BoundaryTrace& b);
/// Largest node-wise g_distance.
double sup_distance(const BoundaryTrace& a, const BoundaryTrace& b);
/// int_{dB_1} |f|^2
double l2_mass(const BoundaryTrace& f);
/// int_{dB_1} |eta o f|
double eta_mass(const BoundaryTrace& f);

/// Radii r_max / 2^j, j = 0..count-1. Throws if any falls below 2 dr.
std::vector<double> dyadic_radii(const BranchedGrid& grid, double r_max, int count);

struct BlowupFamily {
  double I0 = 0;
  std::vector<RescaledProfile> profiles;  ///< in decreasing radius
};

BlowupFamily blowup_family(const MultiField& field, double I0, const std::vector<double>& radii);

struct LimitOptions {
  bool richardson = true;
  double noise_factor = 10.0;  ///< distances below noise_factor * interpolation error count as zero
};

struct LimitReport {
  bool converged = false;   ///< false for non-Cauchy families (no f0 emitted)
  bool stationary = false;  ///< every distance is at the interpolation floor (homogeneous input)
  std::string message;
  double I0 = 0;
  Eigen::VectorXd radii;
  Eigen::VectorXd cauchy_distances;  ///< L2 distance between consecutive dyadic profiles
  Eigen::VectorXd l2_distances;      ///< L2 distance of f_r to f0
  Eigen::VectorXd sup_distances;     ///< sup distance of f_r to f0
  double fitted_rate = -1;           ///< exponent of the squared L2 Cauchy distances in r; -1 if undefined
  double sup_rate = -1;              ///< exponent of the sup distances to f0; -1 if undefined
  double interpolation_error = 0;    ///< error bound of f0 inherited from the profiles it is built from
  BoundaryTrace f0;
  double f0_l2 = 0;
  double f0_eta = 0;
};

/// Needs at least 6 profiles.
LimitReport limit_profile(const BlowupFamily& family, const LimitOptions& options = {});

/// g(r, phi) = r^I0 f0(phi) on B_1 with `radial` annuli and f0's angular grid.
MultiField homogeneous_extension(const BoundaryTrace& f0, double I0, int radial);

/// Fraction of int |f|^2 carried by coordinates outside [first, first + count).
double subspace_residual(const BoundaryTrace& f, int first, int count);

}  // namespace qv
