#pragma once

// Polar discretization of the branched disk B_{Qbar,rho}: the Qbar-fold cover
// of the punctured disk, completed by a single branch point at the origin.
//
// The primary chart is the covering angle phi in [0, 2*pi*Qbar). Nodes sit at
// r_k = rho*k/K (k = 1..K) and phi_m = 2*pi*m/M (m = 0..M*Qbar-1); the origin
// is one extra node shared by every sheet.

#include <Eigen/Core>

#include <complex>
#include <numbers>

namespace qv {

/// A point of B_{Qbar,rho} in the (z, w) coordinates, w^Qbar = z.
struct BranchedPoint {
  std::complex<double> z;
  std::complex<double> w;
};

class BranchedGrid {
 public:
  BranchedGrid(int qbar, double rho, int radial, int angular);

  int qbar() const { return qbar_; }
  double rho() const { return rho_; }
  int radial() const { return k_; }    ///< K: number of annuli
  int angular() const { return m_; }   ///< M: samples per 2*pi of phi
  int ring_size() const { return m_ * qbar_; }
  int node_count() const { return 1 + k_ * ring_size(); }

  double dr() const { return rho_ / k_; }
  double dphi() const { return 2.0 * std::numbers::pi / m_; }
  double radius(int k) const { return rho_ * k / k_; }
  double angle(int m) const { return dphi() * m; }

  /// Storage index of node (k, m); k = 0 is the origin for every m.
  int node(int k, int m) const { return k == 0 ? 0 : 1 + (k - 1) * ring_size() + m; }

  /// Area of the dual cell of ring k (all M*Qbar nodes of ring k share it).
  double node_weight(int k) const;
  /// Area of the part of ring k's dual cell lying inside radius r_k.
  double inner_weight(int k) const;
  /// Area of B_r on the cover, pi r^2 Qbar.
  double ball_area(double r) const;

  /// Sum of all node weights; equals pi rho^2 Qbar.
  double total_weight() const;

  /// Fractional radial index of r: r = radius(k) + t*dr with t in [0, 1).
  std::pair<int, double> locate(double r) const;

 private:
  int qbar_;
  double rho_;
  int k_;
  int m_;
};

/// W(zeta) = (zeta^Qbar, zeta).
BranchedPoint wind(const BranchedGrid& grid, std::complex<double> zeta);
/// Inverse of wind.
std::complex<double> unwind(const BranchedPoint& p);

/// Polar covering coordinates (r, phi) of a branched point.
std::pair<double, double> covering_coordinates(int qbar, const BranchedPoint& p);

/// Integral over B_r of per-node scalar samples (midpoint rule in r, trapezoid
/// in phi). Off-grid radii are interpolated linearly between ring values.
double integrate_ball(const BranchedGrid& grid, const Eigen::VectorXd& samples, double r);

/// Integral over the circle of radius r (length 2 pi r Qbar). Ring values are
/// interpolated linearly in r between grid rings.
double integrate_circle(const BranchedGrid& grid, const Eigen::VectorXd& samples, double r);

}  // namespace qv
