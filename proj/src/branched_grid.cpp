#include "qvalued/branched_grid.hpp"

#include <cmath>
#include <string>

#include "qvalued/errors.hpp"

namespace qv {

namespace {
constexpr double kPi = std::numbers::pi;
}

BranchedGrid::BranchedGrid(int qbar, double rho, int radial, int angular)
    : qbar_(qbar), rho_(rho), k_(radial), m_(angular) {
  if (qbar < 1) throw InputError("BranchedGrid: qbar must be >= 1");
  if (!(rho > 0) || !std::isfinite(rho)) throw InputError("BranchedGrid: rho must be positive");
  if (radial < 4) throw InputError("BranchedGrid: K must be >= 4");
  if (angular < 8) throw InputError("BranchedGrid: M must be >= 8");
}

double BranchedGrid::node_weight(int k) const {
  const double h = dr();
  if (k == 0) return kPi * 0.25 * h * h * qbar_;
  if (k < k_) return radius(k) * h * dphi();
  return inner_weight(k);
}

double BranchedGrid::inner_weight(int k) const {
  if (k == 0) return 0.0;
  const double r = radius(k);
  const double inner = r - 0.5 * dr();
  return 0.5 * (r * r - inner * inner) * dphi();
}

double BranchedGrid::ball_area(double r) const { return kPi * r * r * qbar_; }

double BranchedGrid::total_weight() const {
  double s = node_weight(0);
  for (int k = 1; k <= k_; ++k) s += node_weight(k) * ring_size();
  return s;
}

std::pair<int, double> BranchedGrid::locate(double r) const {
  if (!(r >= 0) || r > rho_ * (1 + 1e-12))
    throw InputError("radius " + std::to_string(r) + " outside [0, rho]");
  const double x = r / dr();
  int k = static_cast<int>(std::floor(x));
  double t = x - k;
  if (t > 1 - 1e-9) {
    ++k;
    t = 0;
  } else if (t < 1e-9) {
    t = 0;
  }
  if (k >= k_) return {k_, 0.0};
  return {k, t};
}

BranchedPoint wind(const BranchedGrid& grid, std::complex<double> zeta) {
  const double limit = std::pow(grid.rho(), 1.0 / grid.qbar());
  if (std::abs(zeta) > limit * (1 + 1e-14)) throw InputError("wind: point outside the source disk");
  std::complex<double> z = 1.0;
  for (int i = 0; i < grid.qbar(); ++i) z *= zeta;
  return {z, zeta};
}

std::complex<double> unwind(const BranchedPoint& p) { return p.w; }

std::pair<double, double> covering_coordinates(int qbar, const BranchedPoint& p) {
  double theta = std::arg(p.w);
  if (theta < 0) theta += 2 * kPi;
  return {std::abs(p.z), qbar * theta};
}

namespace {

double ring_sum(const BranchedGrid& grid, const Eigen::VectorXd& s, int k) {
  if (k == 0) return s(0) * grid.ring_size();
  double acc = 0;
  const int base = grid.node(k, 0);
  for (int m = 0; m < grid.ring_size(); ++m) acc += s(base + m);
  return acc;
}

void check_samples(const BranchedGrid& grid, const Eigen::VectorXd& s) {
  if (s.size() != grid.node_count()) throw InputError("integrate: sample count does not match grid");
}

}  // namespace

double integrate_ball(const BranchedGrid& grid, const Eigen::VectorXd& samples, double r) {
  check_samples(grid, samples);
  const auto [k, t] = grid.locate(r);
  double acc = 0.0;
  if (k >= 1) {
    acc = samples(0) * grid.node_weight(0);
    for (int j = 1; j < k; ++j) acc += ring_sum(grid, samples, j) * grid.node_weight(j);
    acc += ring_sum(grid, samples, k) * grid.inner_weight(k);
  }
  if (t == 0) return acc;
  // Partial annulus [r_k, r], or the disk B_r inside the first annulus.
  const double rk = grid.radius(k);
  const double mid = 0.5 * t;
  const double mean = ((1 - mid) * ring_sum(grid, samples, k) + mid * ring_sum(grid, samples, k + 1)) /
                      grid.ring_size();
  return acc + (grid.ball_area(r) - grid.ball_area(rk)) * mean;
}

double integrate_circle(const BranchedGrid& grid, const Eigen::VectorXd& samples, double r) {
  check_samples(grid, samples);
  const auto [k, t] = grid.locate(r);
  double s = ring_sum(grid, samples, k);
  if (t > 0) s = (1 - t) * s + t * ring_sum(grid, samples, k + 1);
  return s * r * grid.dphi();
}

}  // namespace qv
