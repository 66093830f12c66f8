#include "qvalued/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "qvalued/competitor.hpp"
#include "qvalued/detail/synthesis.hpp"
#include "qvalued/errors.hpp"

namespace qv {

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::homogeneous: return "homogeneous";
    case GeneratorKind::superposition: return "superposition";
    case GeneratorKind::perturbed: return "perturbed";
    case GeneratorKind::random_lipschitz: return "random_lipschitz";
  }
  return "homogeneous";
}

GeneratorKind parse_generator_kind(const std::string& name) {
  if (name == "homogeneous") return GeneratorKind::homogeneous;
  if (name == "superposition") return GeneratorKind::superposition;
  if (name == "perturbed") return GeneratorKind::perturbed;
  if (name == "random_lipschitz") return GeneratorKind::random_lipschitz;
  throw InputError("unknown generator kind '" + name + "'");
}

std::string to_string(Certificate c) {
  switch (c) {
    case Certificate::exact: return "exact";
    case Certificate::descent: return "descent";
    case Certificate::warning: return "warning";
  }
  return "warning";
}

int GeneratorSpec::q() const {
  int q = 0;
  for (const auto& p : pieces) q += p.qj;
  return q;
}

namespace {

bool is_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

bool active(const Mode& m) { return m.l > 0 && !(is_zero(m.a) && is_zero(m.b)); }

void check_modes(const std::vector<Mode>& modes, int n, const char* what) {
  for (const auto& m : modes) {
    if (m.l < 0) throw InputError(std::string(what) + ": mode index l must be >= 0");
    if ((!m.a.empty() && static_cast<int>(m.a.size()) != n) || (!m.b.empty() && static_cast<int>(m.b.size()) != n))
      throw InputError(std::string(what) + ": coefficient vectors must have n entries");
  }
}

// Coefficient arrays of a list of modes, scaled by scale(l).
template <typename Scale>
TracePiece piece_from_modes(int qj, const std::vector<Mode>& modes, int n, Scale&& scale) {
  int lmax = 0;
  for (const auto& m : modes) lmax = std::max(lmax, m.l);
  TracePiece p;
  p.qj = qj;
  p.a = Eigen::MatrixXd::Zero(lmax + 1, n);
  p.b = Eigen::MatrixXd::Zero(lmax + 1, n);
  for (const auto& m : modes) {
    const double s = scale(m.l);
    for (int c = 0; c < n; ++c) {
      // a_0 enters the curve as a_0 / 2, so a constant mode stores 2a.
      if (!m.a.empty()) p.a(m.l, c) += (m.l == 0 ? 2.0 : 1.0) * s * m.a[c];
      if (!m.b.empty() && m.l > 0) p.b(m.l, c) += s * m.b[c];
    }
  }
  return p;
}

std::vector<double> draw(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void add_ring(MultiField& field, int k, int offset, int qj, const Eigen::MatrixXd& unrolled, double scale) {
  const auto& g = field.grid();
  const int a = g.ring_size(), n = field.n();
  for (int i = 0; i < qj; ++i)
    for (int m = 0; m < a; ++m)
      field.values().row(g.node(k, m)).segment((offset + i) * n, n) += scale * unrolled.row(i * a + m);
}

}  // namespace

double GeneratorSpec::degree() const {
  double best = 0;
  for (const auto& p : pieces)
    for (const auto& m : p.modes)
      if (active(m)) {
        const double d = static_cast<double>(m.l) / (qbar * p.qj);
        best = best == 0 ? d : std::min(best, d);
      }
  return best;
}

void validate(const GeneratorSpec& spec) {
  if (spec.qbar < 1) throw InputError("generator: qbar must be >= 1");
  if (spec.n < 1) throw InputError("generator: n must be >= 1");
  if (spec.pieces.empty()) throw InputError("generator: at least one piece is required");
  for (const auto& p : spec.pieces) {
    if (p.qj < 1) throw InputError("generator: Q_j must be >= 1");
    check_modes(p.modes, spec.n, "generator");
  }
  switch (spec.kind) {
    case GeneratorKind::homogeneous: {
      long num = 0, den = 0;
      for (const auto& p : spec.pieces)
        for (const auto& m : p.modes) {
          if (m.l == 0 && !is_zero(m.a))
            throw InputError("generator: homogeneous fields cannot carry a constant mode");
          if (!active(m)) continue;
          const long d = static_cast<long>(spec.qbar) * p.qj;
          if (den == 0) {
            num = m.l;
            den = d;
          } else if (num * d != m.l * den) {
            throw InputError("generator: homogeneous modes must share one degree l / (qbar Q_j)");
          }
        }
      if (den == 0) throw InputError("generator: homogeneous field needs a nonzero mode");
      break;
    }
    case GeneratorKind::perturbed:
      if (!(spec.perturbation.beta > 0)) throw InputError("generator: perturbation order beta must be > 0");
      if (!spec.perturbation.profile.empty() && spec.perturbation.profile.size() != spec.pieces.size())
        throw InputError("generator: perturbation profile needs one mode list per piece");
      for (const auto& modes : spec.perturbation.profile) check_modes(modes, spec.n, "generator perturbation");
      if (spec.degree() <= 0) throw InputError("generator: perturbed field needs a nonconstant base mode");
      break;
    case GeneratorKind::random_lipschitz:
      if (spec.max_mode < 0) throw InputError("generator: max_mode must be >= 0");
      break;
    case GeneratorKind::superposition:
      break;
  }
}

TraceDecomposition base_decomposition(const GeneratorSpec& spec, double rho) {
  validate(spec);
  if (spec.kind == GeneratorKind::random_lipschitz)
    throw InputError("generator: random_lipschitz fields have no Fourier decomposition");
  if (!(rho > 0)) throw InputError("generator: rho must be positive");
  TraceDecomposition dec;
  dec.qbar = spec.qbar;
  dec.n = spec.n;
  dec.q = spec.q();
  for (const auto& p : spec.pieces) {
    const double deg_unit = 1.0 / (spec.qbar * p.qj);
    dec.pieces.push_back(piece_from_modes(p.qj, p.modes, spec.n, [&](int l) { return std::pow(rho, l * deg_unit); }));
  }
  dec.monodromy = layout_monodromy(dec);
  return dec;
}

MultiField generate(const GeneratorSpec& spec, const BranchedGrid& grid) {
  validate(spec);
  if (grid.qbar() != spec.qbar) throw InputError("generator: spec qbar differs from the grid's");
  const int n = spec.n;

  if (spec.kind == GeneratorKind::random_lipschitz) {
    std::mt19937_64 rng(spec.seed);
    MultiField field(grid, spec.q(), n);
    int offset = 0;
    for (const auto& ps : spec.pieces) {
      // Radial powers p = 0..3; only the constant mode may survive at p = 0.
      std::vector<TracePiece> layers;
      for (int p = 0; p <= 3; ++p) {
        std::vector<Mode> modes;
        for (int l = 0; l <= (p == 0 ? 0 : spec.max_mode); ++l) {
          Mode m{l, draw(rng, n), draw(rng, n)};
          const double damp = 1.0 / (1.0 + l);
          for (auto& x : m.a) x *= 0.5 * damp;
          for (auto& x : m.b) x *= damp;
          modes.push_back(std::move(m));
        }
        layers.push_back(piece_from_modes(ps.qj, modes, n, [](int) { return 1.0; }));
      }
      for (int p = 0; p <= 3; ++p) {
        const detail::PieceSynthesizer synth(layers[p], grid.ring_size());
        const Eigen::MatrixXd ring = synth.ring(Eigen::VectorXd::Ones(layers[p].a.rows()));
        for (int k = 1; k <= grid.radial(); ++k)
          add_ring(field, k, offset, ps.qj, ring, std::pow(grid.radius(k) / grid.rho(), p));
      }
      for (int s = 0; s < ps.qj; ++s) field.values().row(0).segment((offset + s) * n, n) = 0.5 * layers[0].a.row(0);
      offset += ps.qj;
    }
    TraceDecomposition layout;
    for (const auto& ps : spec.pieces) {
      TracePiece p;
      p.qj = ps.qj;
      layout.pieces.push_back(p);
    }
    field.set_seams(layout_monodromy(layout));
    field.set_coherent(true);
    return field;
  }

  const TraceDecomposition dec = base_decomposition(spec, grid.rho());
  MultiField field = harmonic_competitor(CompetitorSpec{dec, grid.rho(), std::nullopt}, grid.radial(), grid.angular());
  if (spec.kind != GeneratorKind::perturbed || spec.perturbation.amplitude == 0.0) return field;

  const double order = spec.degree() + spec.perturbation.beta;
  std::mt19937_64 rng(spec.seed);
  int offset = 0;
  for (std::size_t j = 0; j < spec.pieces.size(); ++j) {
    const auto& ps = spec.pieces[j];
    std::vector<Mode> modes;
    if (!spec.perturbation.profile.empty()) {
      modes = spec.perturbation.profile[j];
    } else {
      std::set<int> ls{0, 1, 2};
      for (const auto& m : ps.modes) ls.insert(m.l);
      for (int l : ls) modes.push_back(Mode{l, draw(rng, n), draw(rng, n)});
    }
    const TracePiece h = piece_from_modes(ps.qj, modes, n, [](int) { return 1.0; });
    const detail::PieceSynthesizer synth(h, grid.ring_size());
    const Eigen::MatrixXd ring = synth.ring(Eigen::VectorXd::Ones(h.a.rows()));
    for (int k = 1; k <= grid.radial(); ++k)
      add_ring(field, k, offset, ps.qj, ring, spec.perturbation.amplitude * std::pow(grid.radius(k), order));
    offset += ps.qj;
  }
  return field;
}

GeneratorSpec random_superposition(std::uint64_t seed, int qbar, const RandomBandOptions& options) {
  if (qbar < 1 || options.max_pieces < 1 || options.max_qj < 1 || options.max_mode < 1 || options.n < 1)
    throw InputError("random_superposition: invalid options");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pieces(1, options.max_pieces), qjs(1, options.max_qj);
  GeneratorSpec spec;
  spec.kind = GeneratorKind::superposition;
  spec.qbar = qbar;
  spec.n = options.n;
  spec.seed = seed;
  if (options.separated && options.n < 2) throw InputError("random_superposition: separated sheets need n >= 2");
  const int count = pieces(rng);
  for (int j = 0; j < count; ++j) {
    PieceSpec p;
    p.qj = qjs(rng);
    const int lo = options.lipschitz ? std::min(qbar * p.qj, options.max_mode) : 1;
    if (!options.separated) {
      p.modes.push_back(Mode{0, draw(rng, options.n), {}});
      for (int l = lo; l <= options.max_mode; ++l)
        p.modes.push_back(Mode{l, draw(rng, options.n), draw(rng, options.n)});
    } else {
      auto scaled = [&](double f) {
        auto v = draw(rng, options.n);
        for (auto& x : v) x *= f;
        return v;
      };
      const int dominant = qbar * p.qj + 1;
      Mode center{0, scaled(0.05), {}};
      center.a[0] += 4.0 * j;
      p.modes.push_back(std::move(center));
      Mode lead{dominant, std::vector<double>(options.n, 0.0), std::vector<double>(options.n, 0.0)};
      lead.a[0] = 1.0;
      lead.b[1] = 1.0;
      p.modes.push_back(std::move(lead));
      for (int l = lo; l <= std::max(options.max_mode, dominant); ++l)
        if (l != dominant) p.modes.push_back(Mode{l, scaled(0.05), scaled(0.05)});
    }
    spec.pieces.push_back(std::move(p));
  }
  return spec;
}

MultiField random_extension(const MultiField& base, std::uint64_t seed, double amplitude, int max_mode) {
  if (max_mode < 0) throw InputError("random_extension: max_mode must be >= 0");
  const auto& g = base.grid();
  const int a = g.ring_size(), n = base.n();
  std::mt19937_64 rng(seed);
  MultiField out = base;
  for (const auto& cyc : cycles(base.seam(g.radial()))) {
    const int len = static_cast<int>(cyc.size());
    const int total = a * len;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(total, n);
    for (int l = 0; l <= max_mode; ++l) {
      const auto ca = draw(rng, n), cb = draw(rng, n);
      for (int p = 0; p < total; ++p) {
        const double s = 2 * std::numbers::pi * l * p / total;
        for (int c = 0; c < n; ++c) h(p, c) += ca[c] * std::cos(s) + cb[c] * std::sin(s);
      }
    }
    for (int k = 1; k < g.radial(); ++k) {
      const double t = g.radius(k) / g.rho();
      const double w = amplitude * t * (1 - t);
      for (int i = 0; i < len; ++i)
        for (int m = 0; m < a; ++m)
          out.values().row(g.node(k, m)).segment(cyc[i] * n, n) += w * h.row(i * a + m);
    }
  }
  return out;
}

namespace {

// Five-point polar discretization of the Dirichlet energy on one unrolled
// sheet cycle: K rings of N nodes plus the center, outer ring fixed.
class PolarDisk {
 public:
  PolarDisk(int radial, int nodes, double dphi, Eigen::VectorXd boundary)
      : k_(radial), n_(nodes), dphi_(dphi), b_(std::move(boundary)) {}

  Eigen::Index unknowns() const { return 1 + static_cast<Eigen::Index>(k_ - 1) * n_; }
  double wr(int k) const { return k == 0 ? 0.5 * dphi_ : (k + 0.5) * dphi_; }
  double wa(int k) const { return k == k_ ? 0.5 / (k_ * dphi_) : 1.0 / (k * dphi_); }
  Eigen::Index at(int k, int p) const { return 1 + static_cast<Eigen::Index>(k - 1) * n_ + p; }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y.resize(x.size());
    double ring1 = 0;
    for (int p = 0; p < n_; ++p) ring1 += x(at(1, p));
    y(0) = wr(0) * (n_ * x(0) - ring1);
    for (int k = 1; k < k_; ++k) {
      const double diag = 2 * wa(k) + wr(k - 1) + wr(k);
      for (int p = 0; p < n_; ++p) {
        const int pl = p == 0 ? n_ - 1 : p - 1, pr = p + 1 == n_ ? 0 : p + 1;
        double v = diag * x(at(k, p)) - wa(k) * (x(at(k, pl)) + x(at(k, pr)));
        v -= wr(k - 1) * (k == 1 ? x(0) : x(at(k - 1, p)));
        if (k + 1 < k_) v -= wr(k) * x(at(k + 1, p));
        y(at(k, p)) = v;
      }
    }
  }

  Eigen::VectorXd rhs() const {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(unknowns());
    for (int p = 0; p < n_; ++p) r(at(k_ - 1, p)) = wr(k_ - 1) * b_(p);
    return r;
  }

  Eigen::VectorXd diagonal() const {
    Eigen::VectorXd d(unknowns());
    d(0) = n_ * wr(0);
    for (int k = 1; k < k_; ++k) d.segment(at(k, 0), n_).setConstant(2 * wa(k) + wr(k - 1) + wr(k));
    return d;
  }

  double energy(const Eigen::VectorXd& x) const {
    auto u = [&](int k, int p) { return k == k_ ? b_(p) : x(at(k, p)); };
    double e = 0;
    for (int p = 0; p < n_; ++p) e += wr(0) * std::pow(x(at(1, p)) - x(0), 2);
    for (int k = 1; k <= k_; ++k)
      for (int p = 0; p < n_; ++p) {
        const int pr = p + 1 == n_ ? 0 : p + 1;
        e += wa(k) * std::pow(u(k, pr) - u(k, p), 2);
        if (k < k_) e += wr(k) * std::pow(u(k + 1, p) - u(k, p), 2);
      }
    return e;
  }

  Eigen::VectorXd initial_guess() const {
    const double mean = b_.mean();
    Eigen::VectorXd x(unknowns());
    x(0) = mean;
    for (int k = 1; k < k_; ++k) {
      const double t = static_cast<double>(k) / k_;
      for (int p = 0; p < n_; ++p) x(at(k, p)) = t * b_(p) + (1 - t) * mean;
    }
    return x;
  }

 private:
  int k_;
  int n_;
  double dphi_;
  Eigen::VectorXd b_;
};

struct SolveStats {
  int iterations = 0;
  bool converged = false;
  double initial_gradient = 0;
  double final_gradient = 0;
};

// Jacobi-preconditioned conjugate gradients on the discrete energy; every
// iterate's energy is reported through `record`.
template <typename Record>
SolveStats minimize(const PolarDisk& disk, Eigen::VectorXd& x, int max_iters, double rel_tol, Record&& record) {
  SolveStats st;
  const Eigen::VectorXd inv_diag = disk.diagonal().cwiseInverse();
  Eigen::VectorXd ax;
  disk.apply(x, ax);
  Eigen::VectorXd r = disk.rhs() - ax;
  const double r0 = r.norm();
  st.initial_gradient = 2 * r0;
  record(disk.energy(x));
  if (r0 == 0) {
    st.converged = true;
    return st;
  }
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  Eigen::VectorXd ap;
  for (int it = 0; it < max_iters; ++it) {
    disk.apply(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0)) break;
    const double alpha = rz / pap;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    ++st.iterations;
    record(disk.energy(x));
    if (r.norm() <= rel_tol * r0) {
      st.converged = true;
      break;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  st.final_gradient = 2 * r.norm();
  return st;
}

MinimizeResult descend(const BoundaryTrace& trace, int radial, const MinimizeOptions& options) {
  const int a = trace.ring_size(), q = trace.q, n = trace.n;
  BranchedGrid grid(trace.qbar, trace.radius, radial, trace.angular);
  MultiField field(grid, q, n);
  MinimizeResult res(field, Certificate::descent);

  const auto cyc = cycles(trace.seam);
  std::vector<double> parts;
  std::vector<std::pair<std::size_t, std::size_t>> order;  // (cycle, coordinate)
  for (std::size_t j = 0; j < cyc.size(); ++j)
    for (int c = 0; c < n; ++c) order.emplace_back(j, c);
  parts.assign(order.size(), 0.0);

  std::vector<PolarDisk> disks;
  for (const auto& [j, c] : order) {
    const int len = static_cast<int>(cyc[j].size());
    Eigen::VectorXd b(a * len);
    for (int i = 0; i < len; ++i)
      for (int m = 0; m < a; ++m) b(i * a + m) = trace.values(m, cyc[j][i] * n + c);
    disks.emplace_back(radial, a * len, grid.dphi(), std::move(b));
  }
  std::vector<Eigen::VectorXd> xs;
  for (std::size_t s = 0; s < disks.size(); ++s) {
    xs.push_back(disks[s].initial_guess());
    parts[s] = disks[s].energy(xs.back());
  }

  bool all_converged = true;
  double grad2 = 0;
  for (std::size_t s = 0; s < disks.size(); ++s) {
    const auto st = minimize(disks[s], xs[s], options.max_iters, options.rel_tol, [&](double e) {
      parts[s] = e;
      res.energy_history.push_back(std::accumulate(parts.begin(), parts.end(), 0.0));
    });
    res.iterations += st.iterations;
    all_converged = all_converged && st.converged;
    grad2 += st.final_gradient * st.final_gradient;
  }
  res.gradient_norm = std::sqrt(grad2);

  auto& vals = res.field.values();
  for (std::size_t s = 0; s < disks.size(); ++s) {
    const auto& [j, c] = order[s];
    const auto& sheets = cyc[j];
    const auto& x = xs[s];
    for (std::size_t i = 0; i < sheets.size(); ++i) {
      const int col = sheets[i] * n + static_cast<int>(c);
      vals(0, col) = x(0);
      for (int k = 1; k < radial; ++k)
        for (int m = 0; m < a; ++m) vals(grid.node(k, m), col) = x(disks[s].at(k, static_cast<int>(i) * a + m));
      for (int m = 0; m < a; ++m) vals(grid.node(radial, m), col) = trace.values(m, col);
    }
  }
  res.field.set_seams(trace.seam);
  res.field.set_coherent(true);
  if (!all_converged) {
    res.certificate = Certificate::warning;
    res.message = "descent stopped after max_iters without reaching the gradient tolerance";
  }
  res.energy = dirichlet_energy(res.field, trace.radius);
  return res;
}

}  // namespace

MinimizeResult dir_minimize(const BoundaryTrace& trace, int radial, const MinimizeOptions& options) {
  if (trace.values.rows() != trace.ring_size() || trace.values.cols() != trace.q * trace.n)
    throw InputError("dir_minimize: malformed trace");
  if (static_cast<int>(trace.seam.size()) != trace.q) throw InputError("dir_minimize: trace seam has wrong size");
  if (!options.force_descent) {
    try {
      const auto dec = decompose_trace(trace, options.decompose);
      const double scale = std::max(1.0, trace.values.cwiseAbs().maxCoeff());
      if (!(dec.truncation_error <= options.exact_tol * scale)) {
        MinimizeResult res = descend(trace, radial, options);
        res.message = "decomposition truncation error " + std::to_string(dec.truncation_error) +
                      " too large for the Fourier path; " + (res.message.empty() ? "descent" : res.message);
        return res;
      }
      MultiField field =
          harmonic_competitor(CompetitorSpec{dec, trace.radius, std::nullopt}, radial, trace.angular);
      MinimizeResult res(std::move(field), Certificate::exact);
      res.energy = dirichlet_energy(res.field, trace.radius);
      res.message = "Fourier extension of the decomposed trace";
      return res;
    } catch (const CollisionError&) {
      // fall through to descent
    }
  }
  return descend(trace, radial, options);
}

}  // namespace qv
