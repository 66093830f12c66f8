#include "qvalued/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qvalued/errors.hpp"

namespace qv {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_compatible(const BoundaryTrace& a, const BoundaryTrace& b) {
  if (a.ring_size() != b.ring_size() || a.q != b.q || a.n != b.n)
    throw InputError("blowup: profiles live on different grids");
}

double max_abs_second_difference(const MultiField& field, int k) {
  const auto& g = field.grid();
  if (k < 1 || k >= g.radial()) return 0.0;
  const int a = g.ring_size();
  double worst = 0;
  for (int m = 0; m < a; ++m) {
    const auto lo = field.values().row(k == 1 ? 0 : g.node(k - 1, m));
    const auto mid = field.values().row(g.node(k, m));
    const auto hi = field.values().row(g.node(k + 1, m));
    worst = std::max(worst, (hi - 2 * mid + lo).cwiseAbs().maxCoeff());
  }
  return worst;
}

// Least-squares slope of log y against log x over the positive entries.
double log_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  std::vector<double> lx, ly;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) > 0 && y(i) > 0) {
      lx.push_back(std::log(x(i)));
      ly.push_back(std::log(y(i)));
    }
  if (lx.size() < 2) return -1;
  const auto n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxx > 0 ? sxy / sxx : -1;
}

// Sheets of `b` reordered node by node to best match those of `a`.
BoundaryTrace aligned(const BoundaryTrace& a, const BoundaryTrace& b) {
  BoundaryTrace out = b;
  for (int m = 0; m < a.ring_size(); ++m) {
    const auto match = optimal_matching(a.tuple(m), b.tuple(m));
    for (int s = 0; s < a.q; ++s)
      out.values.row(m).segment(s * a.n, a.n) = b.values.row(m).segment(match.perm[s] * a.n, a.n);
  }
  out.seam = a.seam;
  return out;
}

}  // namespace

RescaledProfile rescale(const MultiField& field, double r, double I0) {
  const auto& g = field.grid();
  if (!(I0 > 0)) throw InputError("rescale: I0 must be positive");
  if (!(r >= 2 * g.dr() * (1 - 1e-12))) throw InputError("rescale: radius below two grid annuli");
  if (r > g.rho() * (1 + 1e-12)) throw InputError("rescale: radius beyond the grid");
  RescaledProfile p;
  p.r = r;
  p.I0 = I0;
  p.trace = extract_trace(field, std::min(r, g.rho()));
  const double scale = std::pow(r, -I0);
  p.trace.values *= scale;
  p.trace.radius = 1.0;

  const auto [k, t] = g.locate(std::min(r, g.rho()));
  double bound = 0;
  if (t > 0) bound = 0.5 * t * (1 - t) * std::max(max_abs_second_difference(field, k), max_abs_second_difference(field, k + 1));
  const double size = p.trace.values.size() ? p.trace.values.cwiseAbs().maxCoeff() : 0.0;
  p.interpolation_error = bound * scale + 4 * kEps * size;
  return p;
}

double l2_distance(const BoundaryTrace& a, const BoundaryTrace& b) {
  check_compatible(a, b);
  const double dphi = 2 * std::numbers::pi / a.angular;
  double s = 0;
  for (int m = 0; m < a.ring_size(); ++m) {
    const double d = g_distance_rows(a.tuple(m), b.tuple(m));
    s += d * d;
  }
  return std::sqrt(s * dphi * a.radius);
}

double sup_distance(const BoundaryTrace& a, const BoundaryTrace& b) {
  check_compatible(a, b);
  double worst = 0;
  for (int m = 0; m < a.ring_size(); ++m) worst = std::max(worst, g_distance_rows(a.tuple(m), b.tuple(m)));
  return worst;
}

double l2_mass(const BoundaryTrace& f) {
  return f.values.squaredNorm() * 2 * std::numbers::pi / f.angular * f.radius;
}

double eta_mass(const BoundaryTrace& f) {
  double s = 0;
  for (int m = 0; m < f.ring_size(); ++m) s += f.tuple(m).colwise().mean().norm();
  return s * 2 * std::numbers::pi / f.angular * f.radius;
}

std::vector<double> dyadic_radii(const BranchedGrid& grid, double r_max, int count) {
  if (count < 1) throw InputError("dyadic_radii: count must be positive");
  if (!(r_max > 0) || r_max > grid.rho() * (1 + 1e-12)) throw InputError("dyadic_radii: r_max outside the grid");
  std::vector<double> out;
  double r = r_max;
  for (int j = 0; j < count; ++j, r *= 0.5) {
    if (r < 2 * grid.dr() * (1 - 1e-12))
      throw InputError("dyadic_radii: radius " + std::to_string(r) + " falls below two grid annuli");
    out.push_back(r);
  }
  return out;
}

BlowupFamily blowup_family(const MultiField& field, double I0, const std::vector<double>& radii) {
  BlowupFamily fam;
  fam.I0 = I0;
  std::vector<double> sorted = radii;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (double r : sorted) fam.profiles.push_back(rescale(field, r, I0));
  return fam;
}

LimitReport limit_profile(const BlowupFamily& family, const LimitOptions& options) {
  const auto& prof = family.profiles;
  const auto n = static_cast<Eigen::Index>(prof.size());
  if (n < 6) throw InputError("limit_profile: needs at least 6 radii");
  LimitReport rep;
  rep.I0 = family.I0;
  rep.radii.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rep.radii(i) = prof[i].r;
    rep.interpolation_error = std::max(rep.interpolation_error, prof[i].interpolation_error);
  }

  rep.cauchy_distances.resize(n - 1);
  Eigen::VectorXd cauchy_r(n - 1), cauchy_sq(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    rep.cauchy_distances(i) = l2_distance(prof[i].trace, prof[i + 1].trace);
    cauchy_r(i) = prof[i].r;
    cauchy_sq(i) = rep.cauchy_distances(i) * rep.cauchy_distances(i);
  }

  // Noise floor in L2: sup interpolation error over a circle of length 2 pi Qbar.
  const auto& last = prof.back().trace;
  const double family_error = rep.interpolation_error;
  rep.interpolation_error = prof.back().interpolation_error;
  const double floor_l2 =
      options.noise_factor * family_error * std::sqrt(2 * std::numbers::pi * last.qbar * last.q);
  rep.stationary = rep.cauchy_distances.maxCoeff() <= floor_l2;

  if (rep.stationary) {
    rep.converged = true;
    rep.message = "profiles agree to the interpolation floor";
    rep.f0 = last;
  } else {
    rep.fitted_rate = log_slope(cauchy_r, cauchy_sq);
    if (!(rep.fitted_rate > 0)) {
      rep.converged = false;
      rep.message = "dyadic distances do not decrease; no limit emitted";
      rep.fitted_rate = std::max(rep.fitted_rate, -1.0);
    } else {
      rep.converged = true;
      rep.f0 = last;
      if (options.richardson) {
        const double mu = 0.5 * rep.fitted_rate;
        const double r1 = prof[n - 1].r, r2 = prof[n - 2].r;
        const BoundaryTrace f2 = aligned(last, prof[n - 2].trace);
        const double c = std::pow(r1, mu) / (std::pow(r2, mu) - std::pow(r1, mu));
        rep.f0.values = last.values + c * (last.values - f2.values);
        rep.interpolation_error = (1 + c) * prof[n - 1].interpolation_error + c * prof[n - 2].interpolation_error;
        rep.message = "Richardson extrapolation at exponent " + std::to_string(mu);
      } else {
        rep.message = "smallest-radius profile";
      }
    }
  }

  if (rep.converged) {
    rep.l2_distances.resize(n);
    rep.sup_distances.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      rep.l2_distances(i) = l2_distance(prof[i].trace, rep.f0);
      rep.sup_distances(i) = sup_distance(prof[i].trace, rep.f0);
    }
    if (!rep.stationary) rep.sup_rate = log_slope(rep.radii, rep.sup_distances);
    rep.f0_l2 = l2_mass(rep.f0);
    rep.f0_eta = eta_mass(rep.f0);
  }
  return rep;
}

MultiField homogeneous_extension(const BoundaryTrace& f0, double I0, int radial) {
  if (!(I0 > 0)) throw InputError("homogeneous_extension: I0 must be positive");
  MultiField g(BranchedGrid(f0.qbar, 1.0, radial, f0.angular), f0.q, f0.n);
  const auto& grid = g.grid();
  g.values().row(0).setZero();
  for (int k = 1; k <= radial; ++k) {
    const double s = std::pow(grid.radius(k), I0);
    g.values().middleRows(grid.node(k, 0), grid.ring_size()) = s * f0.values;
  }
  g.set_seams(f0.seam.empty() ? identity_permutation(f0.q) : f0.seam);
  g.set_coherent(true);
  return g;
}

double subspace_residual(const BoundaryTrace& f, int first, int count) {
  if (first < 0 || count < 0 || first + count > f.n) throw InputError("subspace_residual: coordinate block out of range");
  double total = 0, outside = 0;
  for (int m = 0; m < f.ring_size(); ++m)
    for (int s = 0; s < f.q; ++s)
      for (int c = 0; c < f.n; ++c) {
        const double v = f.values(m, s * f.n + c) * f.values(m, s * f.n + c);
        total += v;
        if (c < first || c >= first + count) outside += v;
      }
  return total > 0 ? outside / total : 0.0;
}

}  // namespace qv
