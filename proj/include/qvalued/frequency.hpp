#pragma once

// Radius-indexed energy quantities of a Q-valued field on B_rho:
//   D(r) = int_{B_r} |DN|^2          H(r) = int_{dB_r} |N|^2
//   E(r) = int_{dB_r} <N, D_nu N>    G(r) = int_{dB_r} |D_nu N|^2
//   F(r) = int_0^r H(t) t^(gamma0-2) dt,  Lambda = D + F,
//   I(r) = r D / H,  K = 1/I.

#include <Eigen/Core>

#include <limits>
#include <vector>

#include "qvalued/multifield.hpp"

namespace qv {

struct FrequencyOptions {
  double gamma0 = 0.5;
};

struct FrequencyProfile {
  double gamma0 = 0.5;
  double rho = 1.0;
  Eigen::VectorXd r;
  Eigen::VectorXd D, H, E, G, F, Lambda;
  Eigen::VectorXd I, K;        ///< NaN where H(r) = 0
  Eigen::VectorXd D_prime;     ///< central differences over r
  Eigen::VectorXd eta_mass;    ///< int_{dB_r} |eta o N|
  bool vanishing = false;      ///< H vanishes on an interval: the field is Q[[0]] on a ball

  Eigen::Index size() const { return r.size(); }
  bool defined(Eigen::Index i) const { return H(i) > 0; }
};

/// Profile at the given radii (increasing, within [r_1, rho]).
FrequencyProfile profile(const MultiField& field, const std::vector<double>& radii,
                         const FrequencyOptions& options = {});

/// Profile at every grid radius r_1..r_K.
FrequencyProfile profile(const MultiField& field, const FrequencyOptions& options = {});

/// Grid radii r_k with lo <= r_k <= hi.
std::vector<double> grid_radii(const BranchedGrid& grid, double lo, double hi);

/// Three-point finite-difference derivative on a (possibly non-uniform) grid.
Eigen::VectorXd differentiate(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct ResidualReport {
  double max_residual = 0;
  double at_radius = std::numeric_limits<double>::quiet_NaN();
  int checked = 0;
};

/// max over interior radii of |H'_num - H/r - 2E| / max(H/r, floor).
ResidualReport check_h_prime(const FrequencyProfile& p, double floor = 1e-14);

/// max over interior radii of |D' - 2G| / max(D', floor); vanishes for exact minimizers.
ResidualReport check_inner_variation(const FrequencyProfile& p, double floor = 1e-14);

/// max over radii of (E^2 - H G) / max(H G, floor); nonpositive up to quadrature.
double cauchy_schwarz_excess(const FrequencyProfile& p, double floor = 1e-14);

/// Smallest C with F <= C (r^(gamma0-1) H + r^gamma0 D) at every radius.
double f_bound_constant(const FrequencyProfile& p);

struct MonotonicityReport {
  bool applicable = false;
  int violations = 0;
  int checked = 0;
  double first_violation = std::numeric_limits<double>::quiet_NaN();
  double max_drop = 0;  ///< largest I(r_k) - I(r_{k+1}) seen
};

/// I(r_{k+1}) >= I(r_k) - tol (1 + I(r_k)) over consecutive interior radii.
/// Only applicable to certified minimizers.
MonotonicityReport check_frequency_monotonicity(const FrequencyProfile& p, bool certified_minimizer,
                                                double tol = 1e-6);

struct AlmostMinReport {
  Eigen::VectorXd ratio;  ///< D / (r D' + H + F + m0_half r^gamma0 int|eta o N|)
  double max_ratio = 0;
  bool unbounded = false;
};

AlmostMinReport check_almost_min(const FrequencyProfile& p, double m0_half = 0.0);

struct PoincareReport {
  double bound = 8.0;
  double ball_constant = 0;      ///< int_{B_r}|f|^2 / (r^2 D + r H)
  double weighted_constant = 0;  ///< int_{B_r}|z|^(g-1)|f|^2 / (r^(1+g) D + r^g H)
  int violations = 0;            ///< radii where ball_constant or weighted_constant exceed bound
  bool minimizer_checked = false;
  double frequency_ratio_min = std::numeric_limits<double>::quiet_NaN();  ///< H / (r D)
  double frequency_ratio_max = std::numeric_limits<double>::quiet_NaN();
  int radii = 0;
};

/// Poincare-type inequalities at the given radii. The H <= C r D ratio is
/// evaluated only for certified, eta-centered minimizers.
PoincareReport check_poincare(const MultiField& field, const std::vector<double>& radii, double bound = 8.0,
                              bool certified_minimizer = false, double gamma0 = 0.5);

/// Worst case over a family of reports.
PoincareReport combine(const std::vector<PoincareReport>& reports);

struct FitOptions {
  double lo = 0.1;  ///< window, relative to rho
  double hi = 0.8;
  int min_points = 8;
  double flat_tol = 1e-4;  ///< I variation (relative) below which lambda is unidentifiable
};

struct DecayFit {
  double I0 = 0, H0 = 0, D0 = 0;
  double lambda = -1;  ///< -1 when I is constant on the window
  double residual = 0;
  double window_lo = 0, window_hi = 0;
  int points = 0;
  bool lambda_identified() const { return lambda > 0; }
};

/// Fits I(r) = I0 + c r^lambda on the window and extrapolates H/r^(2 I0 + 1)
/// and D/r^(2 I0) with the same exponent.
DecayFit fit_decay(const FrequencyProfile& p, const FitOptions& options = {});

}  // namespace qv
