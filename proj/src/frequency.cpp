#include "qvalued/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qvalued/errors.hpp"

namespace qv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Full-ring sums of per-node quantities, index k = 1..K. Entry 0 keeps the
// per-node value at the origin.
struct RingSums {
  Eigen::VectorXd density, mass, flux, normal, eta;
};

RingSums collect(const MultiField& field) {
  const auto& g = field.grid();
  const int rings = g.radial();
  const int a = g.ring_size();
  RingSums s;
  for (auto* v : {&s.density, &s.mass, &s.flux, &s.normal, &s.eta}) *v = Eigen::VectorXd::Zero(rings + 1);
  s.mass(0) = field.tuple(0).squaredNorm();
  s.eta(0) = field.tuple(0).colwise().mean().norm();

  for (int k = 1; k <= rings; ++k) {
    const auto d = ring_derivatives(field, k);
    const double inv_r2 = 1.0 / (g.radius(k) * g.radius(k));
    const int base = g.node(k, 0);
    double dens = 0, mass = 0, flux = 0, normal = 0, eta = 0;
    int used = 0;
    for (int m = 0; m < a; ++m) {
      if (field.unreliable()[base + m]) continue;
      const auto row = field.values().row(base + m);
      const double nn = d.radial.row(m).squaredNorm();
      dens += nn + d.angular.row(m).squaredNorm() * inv_r2;
      mass += row.squaredNorm();
      flux += row.dot(d.radial.row(m));
      normal += nn;
      eta += field.tuple(base + m).colwise().mean().norm();
      ++used;
    }
    const double scale = used == 0 ? 0.0 : static_cast<double>(a) / used;
    s.density(k) = dens * scale;
    s.mass(k) = mass * scale;
    s.flux(k) = flux * scale;
    s.normal(k) = normal * scale;
    s.eta(k) = eta * scale;
  }
  return s;
}

// Ball integrals of ring sums, matching integrate_ball: origin cell, full dual
// cells up to ring k-1, the inner half of ring k and a partial annulus.
class BallIntegral {
 public:
  BallIntegral(const BranchedGrid& g, const Eigen::VectorXd& sums, double origin_part) : g_(g), sums_(sums) {
    cum_.resize(g.radial() + 1);
    cum_(0) = 0;
    double acc = origin_part;
    for (int k = 1; k <= g.radial(); ++k) {
      cum_(k) = acc;
      acc += sums(k) * g.node_weight(k);
    }
  }

  double operator()(double r) const {
    const auto [k, t] = g_.locate(r);
    double v = k >= 1 ? cum_(k) + sums_(k) * g_.inner_weight(k) : 0.0;
    if (t > 0) {
      const double mid = 0.5 * t;
      const double lo = k >= 1 ? sums_(k) : 0.0;
      const double mean = ((1 - mid) * lo + mid * sums_(k + 1)) / g_.ring_size();
      v += (g_.ball_area(r) - g_.ball_area(g_.radius(k))) * mean;
    }
    return v;
  }

 private:
  const BranchedGrid& g_;
  const Eigen::VectorXd& sums_;
  Eigen::VectorXd cum_;
};

double circle(const BranchedGrid& g, const Eigen::VectorXd& sums, double r) {
  const auto [k, t] = g.locate(r);
  double s = sums(k);
  if (t > 0) s = (1 - t) * s + t * sums(k + 1);
  return s * r * g.dphi();
}

void check_radii(const BranchedGrid& g, const std::vector<double>& radii) {
  if (radii.empty()) throw InputError("profile: no radii requested");
  const double tol = 1e-12 * g.rho();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= g.radius(1) - tol) || radii[i] > g.rho() + tol)
      throw InputError("profile: radius outside [r_1, rho]");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw InputError("profile: radii must be strictly increasing");
  }
}

double clamp_radius(const BranchedGrid& g, double r) { return std::clamp(r, g.radius(1), g.rho()); }

// F on every grid radius. The first segment assumes H(t) ~ t^p with p read
// off the first two rings.
Eigen::VectorXd cumulative_f(const BranchedGrid& g, const Eigen::VectorXd& mass, double gamma0) {
  const int rings = g.radial();
  Eigen::VectorXd h(rings + 1), f = Eigen::VectorXd::Zero(rings + 1);
  for (int k = 1; k <= rings; ++k) {
    const double r = g.radius(k);
    h(k) = mass(k) * r * g.dphi() / std::pow(r, 2.0 - gamma0);
  }
  const double r1 = g.radius(1);
  const double h1 = mass(1) * r1 * g.dphi();
  if (h1 > 0) {
    double p = 1.0;
    if (rings >= 2 && mass(2) > 0) p = std::max(1.0, std::log(mass(2) * 2.0 / mass(1)) / std::log(2.0));
    f(1) = h1 * std::pow(r1, gamma0 - 1) / (p - 1 + gamma0);
  }
  for (int k = 2; k <= rings; ++k) f(k) = f(k - 1) + 0.5 * g.dr() * (h(k - 1) + h(k));
  return f;
}

}  // namespace

std::vector<double> grid_radii(const BranchedGrid& grid, double lo, double hi) {
  std::vector<double> out;
  const double tol = 1e-12 * grid.rho();
  for (int k = 1; k <= grid.radial(); ++k) {
    const double r = grid.radius(k);
    if (r >= lo - tol && r <= hi + tol) out.push_back(r);
  }
  return out;
}

Eigen::VectorXd differentiate(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  if (n < 2) return d;
  if (n == 2) {
    d.setConstant((y(1) - y(0)) / (x(1) - x(0)));
    return d;
  }
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h1 = x(i) - x(i - 1), h2 = x(i + 1) - x(i);
    d(i) = -h2 / (h1 * (h1 + h2)) * y(i - 1) + (h2 - h1) / (h1 * h2) * y(i) + h1 / (h2 * (h1 + h2)) * y(i + 1);
  }
  {
    const double h1 = x(1) - x(0), h2 = x(2) - x(1);
    d(0) = -(2 * h1 + h2) / (h1 * (h1 + h2)) * y(0) + (h1 + h2) / (h1 * h2) * y(1) - h1 / (h2 * (h1 + h2)) * y(2);
  }
  {
    const Eigen::Index e = n - 1;
    const double h1 = x(e - 1) - x(e - 2), h2 = x(e) - x(e - 1);
    d(e) = h2 / (h1 * (h1 + h2)) * y(e - 2) - (h1 + h2) / (h1 * h2) * y(e - 1) + (h1 + 2 * h2) / (h2 * (h1 + h2)) * y(e);
  }
  return d;
}

FrequencyProfile profile(const MultiField& field, const std::vector<double>& radii, const FrequencyOptions& options) {
  const auto& g = field.grid();
  if (!(options.gamma0 > 0)) throw InputError("profile: gamma0 must be positive");
  check_radii(g, radii);
  const RingSums s = collect(field);
  const BallIntegral dirichlet(g, s.density, 0.0);
  const Eigen::VectorXd fgrid = cumulative_f(g, s.mass, options.gamma0);

  const auto n = static_cast<Eigen::Index>(radii.size());
  FrequencyProfile p;
  p.gamma0 = options.gamma0;
  p.rho = g.rho();
  p.r = Eigen::Map<const Eigen::VectorXd>(radii.data(), n);
  for (auto* v : {&p.D, &p.H, &p.E, &p.G, &p.F, &p.Lambda, &p.I, &p.K, &p.eta_mass}) v->resize(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = clamp_radius(g, radii[i]);
    p.D(i) = dirichlet(r);
    p.H(i) = circle(g, s.mass, r);
    p.E(i) = circle(g, s.flux, r);
    p.G(i) = circle(g, s.normal, r);
    p.eta_mass(i) = circle(g, s.eta, r);
    const auto [k, t] = g.locate(r);
    double f = fgrid(k);
    if (t > 0) {
      const double rk = g.radius(k);
      const double hk = s.mass(k) * rk * g.dphi() / std::pow(rk, 2.0 - options.gamma0);
      f += 0.5 * (r - rk) * (hk + p.H(i) / std::pow(r, 2.0 - options.gamma0));
    }
    p.F(i) = f;
    p.Lambda(i) = p.D(i) + p.F(i);
    if (p.H(i) > 0) {
      p.I(i) = r * p.D(i) / p.H(i);
      p.K(i) = p.D(i) > 0 ? p.H(i) / (r * p.D(i)) : kInf;
    } else {
      p.I(i) = kNaN;
      p.K(i) = kNaN;
    }
  }
  p.D_prime = differentiate(p.r, p.D);
  for (int k = 1; k < g.radial(); ++k)
    if (s.mass(k) == 0 && s.mass(k + 1) == 0) p.vanishing = true;
  return p;
}

FrequencyProfile profile(const MultiField& field, const FrequencyOptions& options) {
  return profile(field, grid_radii(field.grid(), 0, field.grid().rho()), options);
}

ResidualReport check_h_prime(const FrequencyProfile& p, double floor) {
  if (p.size() < 3) throw InputError("check_h_prime: needs at least 3 radii");
  const Eigen::VectorXd dh = differentiate(p.r, p.H);
  ResidualReport rep;
  for (Eigen::Index i = 1; i + 1 < p.size(); ++i) {
    const double ratio = p.H(i) / p.r(i);
    const double res = std::abs(dh(i) - ratio - 2 * p.E(i)) / std::max(ratio, floor);
    ++rep.checked;
    if (res > rep.max_residual || std::isnan(rep.at_radius)) {
      rep.max_residual = std::max(rep.max_residual, res);
      rep.at_radius = p.r(i);
    }
  }
  return rep;
}

ResidualReport check_inner_variation(const FrequencyProfile& p, double floor) {
  ResidualReport rep;
  for (Eigen::Index i = 1; i + 1 < p.size(); ++i) {
    const double res = std::abs(p.D_prime(i) - 2 * p.G(i)) / std::max(p.D_prime(i), floor);
    ++rep.checked;
    if (res > rep.max_residual || std::isnan(rep.at_radius)) {
      rep.max_residual = std::max(rep.max_residual, res);
      rep.at_radius = p.r(i);
    }
  }
  return rep;
}

double cauchy_schwarz_excess(const FrequencyProfile& p, double floor) {
  double worst = -kInf;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    worst = std::max(worst, (p.E(i) * p.E(i) - p.H(i) * p.G(i)) / std::max(p.H(i) * p.G(i), floor));
  return worst;
}

double f_bound_constant(const FrequencyProfile& p) {
  double c = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double r = p.r(i);
    const double rhs = std::pow(r, p.gamma0 - 1) * p.H(i) + std::pow(r, p.gamma0) * p.D(i);
    if (rhs > 0)
      c = std::max(c, p.F(i) / rhs);
    else if (p.F(i) > 0)
      return kInf;
  }
  return c;
}

MonotonicityReport check_frequency_monotonicity(const FrequencyProfile& p, bool certified_minimizer, double tol) {
  MonotonicityReport rep;
  rep.applicable = certified_minimizer;
  if (!certified_minimizer) return rep;
  for (Eigen::Index i = 1; i + 2 < p.size(); ++i) {
    if (!p.defined(i) || !p.defined(i + 1)) continue;
    ++rep.checked;
    const double drop = p.I(i) - p.I(i + 1);
    rep.max_drop = std::max(rep.max_drop, drop);
    if (drop > tol * (1 + p.I(i))) {
      if (rep.violations == 0) rep.first_violation = p.r(i + 1);
      ++rep.violations;
    }
  }
  return rep;
}

AlmostMinReport check_almost_min(const FrequencyProfile& p, double m0_half) {
  AlmostMinReport rep;
  rep.ratio.resize(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double r = p.r(i);
    const double rhs = r * p.D_prime(i) + p.H(i) + p.F(i) + m0_half * std::pow(r, p.gamma0) * p.eta_mass(i);
    double q = 0;
    if (rhs > 0) {
      q = p.D(i) / rhs;
    } else if (p.D(i) > 0) {
      q = kInf;
      rep.unbounded = true;
    }
    rep.ratio(i) = q;
    rep.max_ratio = std::max(rep.max_ratio, q);
  }
  return rep;
}

PoincareReport check_poincare(const MultiField& field, const std::vector<double>& radii, double bound,
                              bool certified_minimizer, double gamma0) {
  const auto& g = field.grid();
  check_radii(g, radii);
  const RingSums s = collect(field);
  const BallIntegral dirichlet(g, s.density, 0.0);
  const BallIntegral l2(g, s.mass, s.mass(0) * g.node_weight(0));
  Eigen::VectorXd weighted_mass(s.mass.size());
  weighted_mass(0) = 0;
  for (int k = 1; k <= g.radial(); ++k) weighted_mass(k) = s.mass(k) * std::pow(g.radius(k), gamma0 - 1);
  // Origin cell: int_0^{dr/2} t^(gamma0-1) t dt over 2 pi Qbar.
  const double origin_weighted =
      s.mass(0) * 2 * std::numbers::pi * g.qbar() * std::pow(0.5 * g.dr(), gamma0 + 1) / (gamma0 + 1);
  const BallIntegral wl2(g, weighted_mass, origin_weighted);

  PoincareReport rep;
  rep.bound = bound;
  rep.minimizer_checked = certified_minimizer;
  auto ratio = [](double lhs, double rhs) { return rhs > 0 ? lhs / rhs : (lhs > 0 ? kInf : 0.0); };
  for (double r0 : radii) {
    const double r = clamp_radius(g, r0);
    const double d = dirichlet(r);
    const double h = circle(g, s.mass, r);
    const double c1 = ratio(l2(r), r * r * d + r * h);
    const double c2 = ratio(wl2(r), std::pow(r, 1 + gamma0) * d + std::pow(r, gamma0) * h);
    rep.ball_constant = std::max(rep.ball_constant, c1);
    rep.weighted_constant = std::max(rep.weighted_constant, c2);
    if (c1 > bound || c2 > bound) ++rep.violations;
    if (certified_minimizer && d > 0) {
      const double q = h / (r * d);
      rep.frequency_ratio_min = std::isnan(rep.frequency_ratio_min) ? q : std::min(rep.frequency_ratio_min, q);
      rep.frequency_ratio_max = std::isnan(rep.frequency_ratio_max) ? q : std::max(rep.frequency_ratio_max, q);
    }
    ++rep.radii;
  }
  return rep;
}

PoincareReport combine(const std::vector<PoincareReport>& reports) {
  PoincareReport out;
  for (const auto& r : reports) {
    out.bound = r.bound;
    out.ball_constant = std::max(out.ball_constant, r.ball_constant);
    out.weighted_constant = std::max(out.weighted_constant, r.weighted_constant);
    out.violations += r.violations;
    out.radii += r.radii;
    out.minimizer_checked = out.minimizer_checked || r.minimizer_checked;
    if (!std::isnan(r.frequency_ratio_min))
      out.frequency_ratio_min = std::isnan(out.frequency_ratio_min)
                                    ? r.frequency_ratio_min
                                    : std::min(out.frequency_ratio_min, r.frequency_ratio_min);
    if (!std::isnan(r.frequency_ratio_max))
      out.frequency_ratio_max = std::isnan(out.frequency_ratio_max)
                                    ? r.frequency_ratio_max
                                    : std::max(out.frequency_ratio_max, r.frequency_ratio_max);
  }
  return out;
}

namespace {

struct LinearFit {
  double intercept = 0, slope = 0, sse = 0;
};

// Weighted least squares y ~ intercept + slope * x.
LinearFit weighted_line(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  const double sw = w.sum();
  const double mx = w.dot(x) / sw, my = w.dot(y) / sw;
  const Eigen::VectorXd dx = x.array() - mx, dy = y.array() - my;
  const double sxx = w.dot(dx.cwiseProduct(dx));
  LinearFit f;
  f.slope = sxx > 0 ? w.dot(dx.cwiseProduct(dy)) / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  const Eigen::VectorXd res = y.array() - f.intercept - f.slope * x.array();
  f.sse = w.dot(res.cwiseProduct(res));
  return f;
}

struct PowerFit {
  double limit = 0;
  double lambda = -1;  // -1: the sequence is flat on the window
  double rms = 0;
};

// y(r) ~ limit + c r^lambda: log-spaced scan of lambda, golden-section polish,
// weighted linear least squares for (limit, c) at each lambda. Sequences whose
// spread stays below flat_spread are reported flat.
PowerFit fit_power(const Eigen::VectorXd& logr, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double flat_spread) {
  PowerFit out;
  const double mean = w.dot(y) / w.sum();
  const double spread = y.maxCoeff() - y.minCoeff();
  auto model = [&](double lambda) { return weighted_line((lambda * logr.array()).exp().matrix(), y, w); };
  auto flat = [&] {
    out.limit = mean;
    const Eigen::VectorXd dev = y.array() - mean;
    out.rms = std::sqrt(w.dot(dev.cwiseProduct(dev)) / w.sum());
    return out;
  };
  if (!(spread > flat_spread)) return flat();

  constexpr double kMinLambda = 0.02, kMaxLambda = 12.0;
  constexpr int kScan = 600;
  auto at = [&](int j) { return kMinLambda * std::pow(kMaxLambda / kMinLambda, static_cast<double>(j) / kScan); };
  double best_sse = kInf;
  int best_j = 0;
  for (int j = 0; j <= kScan; ++j) {
    const double sse = model(at(j)).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best_j = j;
    }
  }
  if (best_j == 0 || best_j == kScan) return flat();
  double a = at(best_j - 1), b = at(best_j + 1);
  const double phi = 0.5 * (std::sqrt(5.0) - 1);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = model(c).sse, fd = model(d).sse;
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = model(c).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = model(d).sse;
    }
  }
  out.lambda = 0.5 * (a + b);
  const LinearFit lf = model(out.lambda);
  out.limit = lf.intercept;
  out.rms = std::sqrt(lf.sse / w.sum());
  return out;
}

}  // namespace

DecayFit fit_decay(const FrequencyProfile& p, const FitOptions& options) {
  std::vector<Eigen::Index> idx;
  const double lo = options.lo * p.rho, hi = options.hi * p.rho;
  const double tol = 1e-12 * p.rho;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p.r(i) >= lo - tol && p.r(i) <= hi + tol && p.defined(i)) idx.push_back(i);
  const auto n = static_cast<Eigen::Index>(idx.size());
  if (n < options.min_points)
    throw InputError("fit_decay: window holds " + std::to_string(n) + " radii, need at least " +
                     std::to_string(options.min_points));

  Eigen::VectorXd r(n), I(n), H(n), D(n), w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    r(j) = p.r(idx[j]);
    I(j) = p.I(idx[j]);
    H(j) = p.H(idx[j]);
    D(j) = p.D(idx[j]);
  }
  // Trapezoid weights so that uneven radius sets are not biased.
  for (Eigen::Index j = 0; j < n; ++j) {
    const double left = j > 0 ? r(j) - r(j - 1) : 0.0;
    const double right = j + 1 < n ? r(j + 1) - r(j) : 0.0;
    w(j) = 0.5 * (left + right);
  }
  if (!(w.sum() > 0)) w.setOnes();
  const Eigen::VectorXd logr = r.array().log();

  DecayFit fit;
  fit.window_lo = lo;
  fit.window_hi = hi;
  fit.points = static_cast<int>(n);

  const PowerFit fi = fit_power(logr, I, w, options.flat_tol * std::max(1.0, std::abs(I.mean())));
  fit.I0 = fi.limit;
  fit.residual = fi.rms;
  const Eigen::VectorXd hn = H.array() / (logr.array() * (2 * fit.I0 + 1)).exp();
  const Eigen::VectorXd dn = D.array() / (logr.array() * (2 * fit.I0)).exp();
  const PowerFit fh = fit_power(logr, hn, w, options.flat_tol * std::abs(hn.mean()));
  const PowerFit fd = fit_power(logr, dn, w, options.flat_tol * std::abs(dn.mean()));
  fit.H0 = fh.limit;
  fit.D0 = fd.limit;
  // The decay bound covers all three sequences, so the slowest rate governs.
  fit.lambda = -1;
  for (double lam : {fi.lambda, fh.lambda, fd.lambda})
    if (lam > 0) fit.lambda = fit.lambda > 0 ? std::min(fit.lambda, lam) : lam;
  return fit;
}

}  // namespace qv
