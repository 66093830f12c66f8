#include "qvalued/multifield.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>

#include "qvalued/errors.hpp"

namespace qv {

MultiField::MultiField(BranchedGrid grid, int q, int n)
    : grid_(grid),
      q_(q),
      n_(n),
      values_(Storage::Zero(grid.node_count(), static_cast<Eigen::Index>(q) * n)),
      seams_(grid.radial() + 1, identity_permutation(q)),
      unreliable_(grid.node_count(), 0) {
  if (q < 1) throw InputError("MultiField: Q must be >= 1");
  if (n < 1) throw InputError("MultiField: n must be >= 1");
}

void MultiField::set_seams(const Permutation& p) {
  if (static_cast<int>(p.size()) != q_) throw InputError("set_seams: permutation has wrong size");
  for (auto& s : seams_) s = p;
}

int MultiField::unreliable_count() const {
  int c = 0;
  for (char u : unreliable_) c += u ? 1 : 0;
  return c;
}

namespace {

// Reorder the sheets of `node` so that row i becomes the old row perm[i].
void apply_selection(MultiField& f, int node, const Permutation& perm) {
  const TupleMatrix<double> old = f.tuple(node);
  auto t = f.tuple(node);
  for (int i = 0; i < f.q(); ++i) t.row(i) = old.row(perm[i]);
}

}  // namespace

MultiField make_coherent(MultiField f, double tie_tol) {
  const auto& g = f.grid();
  const int a = g.ring_size();
  std::fill(f.unreliable().begin(), f.unreliable().end(), 0);
  auto follow = [&](int prev_node, int node) {
    const auto match = optimal_matching(f.tuple(prev_node), f.tuple(node), tie_tol);
    apply_selection(f, node, match.perm);
    if (match.ambiguous) f.unreliable()[node] = 1;
  };
  for (int k = g.radial(); k >= 1; --k) {
    if (k < g.radial()) follow(g.node(k + 1, 0), g.node(k, 0));
    for (int m = 1; m < a; ++m) follow(g.node(k, m - 1), g.node(k, m));
    const auto seam = optimal_matching(f.tuple(g.node(k, a - 1)), f.tuple(g.node(k, 0)), tie_tol);
    f.set_seam(k, seam.perm);
    if (seam.ambiguous) f.unreliable()[g.node(k, 0)] = 1;
  }
  follow(g.node(1, 0), 0);
  f.set_seam(0, f.seam(1));

  // Radial consistency: labels of neighboring rings must pair up as identity.
  for (int k = 1; k < g.radial(); ++k) {
    for (int m = 0; m < a; ++m) {
      const int inner = g.node(k, m), outer = g.node(k + 1, m);
      const auto match = optimal_matching(f.tuple(inner), f.tuple(outer), tie_tol);
      bool identity = true;
      for (int s = 0; s < f.q(); ++s) identity = identity && match.perm[s] == s;
      if (!identity && match.cost < matching_cost(f.tuple(inner), f.tuple(outer), identity_permutation(f.q()))) {
        f.unreliable()[inner] = 1;
        f.unreliable()[outer] = 1;
      }
    }
  }
  f.set_coherent(true);
  return f;
}

MultiField::Storage angular_derivative(const MultiField::Storage& ring, const Permutation& seam, int n,
                                       double dphi) {
  static thread_local Eigen::FFT<double> fft;
  const int a = static_cast<int>(ring.rows());
  MultiField::Storage out(ring.rows(), ring.cols());
  for (const auto& cyc : cycles(seam)) {
    const int len = static_cast<int>(cyc.size());
    const int total = a * len;
    const double period = total * dphi;
    std::vector<std::complex<double>> x(total), spec(total), back(total);
    // Two real coordinates share one complex transform.
    for (int c = 0; c < n; c += 2) {
      const bool pair = c + 1 < n;
      for (int i = 0; i < len; ++i) {
        const int col = cyc[i] * n + c;
        for (int m = 0; m < a; ++m)
          x[i * a + m] = {ring(m, col), pair ? ring(m, col + 1) : 0.0};
      }
      fft.fwd(spec, x);
      for (int f = 0; f < total; ++f) {
        int freq = f <= total / 2 ? f : f - total;
        if (2 * f == total) freq = 0;
        const double omega = 2.0 * std::numbers::pi * freq / period;
        spec[f] *= std::complex<double>(0.0, omega);
      }
      fft.inv(back, spec);
      for (int i = 0; i < len; ++i) {
        const int col = cyc[i] * n + c;
        for (int m = 0; m < a; ++m) {
          out(m, col) = back[i * a + m].real();
          if (pair) out(m, col + 1) = back[i * a + m].imag();
        }
      }
    }
  }
  return out;
}

RingDerivatives ring_derivatives(const MultiField& field, int k) {
  const auto& g = field.grid();
  if (k < 1 || k > g.radial()) throw InputError("ring_derivatives: ring index out of range");
  if (!field.coherent()) throw InputError("ring_derivatives: field is not sheet-coherent");
  const int a = g.ring_size();
  auto ring = [&](int j) { return field.values().middleRows(g.node(j, 0), a); };
  const double h = g.dr();
  RingDerivatives d;
  if (k == 1) {
    d.radial = (-3.0 * ring(1) + 4.0 * ring(2) - ring(3)) / (2 * h);
  } else if (k == g.radial()) {
    d.radial = (3.0 * ring(k) - 4.0 * ring(k - 1) + ring(k - 2)) / (2 * h);
  } else {
    d.radial = (ring(k + 1) - ring(k - 1)) / (2 * h);
  }
  d.angular = angular_derivative(MultiField::Storage(ring(k)), field.seam(k), field.n(), g.dphi());
  return d;
}

NodeGradient gradient(const MultiField& field, int k, int m) {
  if (k == 0) throw InputError("gradient: the branch point carries no gradient sample");
  const auto& g = field.grid();
  const auto d = ring_derivatives(field, k);
  NodeGradient out;
  out.normal = Eigen::Map<const TupleMatrix<double>>(d.radial.row(m).data(), field.q(), field.n());
  out.tangential =
      Eigen::Map<const TupleMatrix<double>>(d.angular.row(m).data(), field.q(), field.n()) / g.radius(k);
  out.reliable = !field.unreliable()[g.node(k, m)];
  return out;
}

Eigen::VectorXd energy_density(const MultiField& field) {
  const auto& g = field.grid();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(g.node_count());
  for (int k = 1; k <= g.radial(); ++k) {
    const auto d = ring_derivatives(field, k);
    const double inv_r2 = 1.0 / (g.radius(k) * g.radius(k));
    const int base = g.node(k, 0);
    for (int m = 0; m < g.ring_size(); ++m)
      e(base + m) = d.radial.row(m).squaredNorm() + d.angular.row(m).squaredNorm() * inv_r2;
  }
  return e;
}

double reliable_ring_sum(const MultiField& field, int k, const Eigen::VectorXd& per_node) {
  const auto& g = field.grid();
  if (k == 0) return per_node(0) * g.ring_size();
  const int base = g.node(k, 0);
  double s = 0;
  int used = 0;
  for (int m = 0; m < g.ring_size(); ++m) {
    if (field.unreliable()[base + m]) continue;
    s += per_node(base + m);
    ++used;
  }
  return used == 0 ? 0.0 : s * g.ring_size() / used;
}

namespace {

Eigen::VectorXd redistributed(const MultiField& field, Eigen::VectorXd samples) {
  const auto& g = field.grid();
  if (field.unreliable_count() == 0) return samples;
  for (int k = 1; k <= g.radial(); ++k) {
    const double mean = reliable_ring_sum(field, k, samples) / g.ring_size();
    const int base = g.node(k, 0);
    for (int m = 0; m < g.ring_size(); ++m)
      if (field.unreliable()[base + m]) samples(base + m) = mean;
  }
  return samples;
}

}  // namespace

double dirichlet_energy(const MultiField& field, double r) {
  return integrate_ball(field.grid(), redistributed(field, energy_density(field)), r);
}

double lipschitz_estimate(const MultiField& field) {
  const auto e = energy_density(field);
  double best = 0;
  for (int i = 1; i < e.size(); ++i)
    if (!field.unreliable()[i]) best = std::max(best, std::sqrt(e(i)));
  return best;
}

double sup_norm(const MultiField& field) {
  const int q = field.q();
  double best = 0;
  for (int i = 0; i < field.values().rows(); ++i)
    for (int s = 0; s < q; ++s) best = std::max(best, field.tuple(i).row(s).norm());
  return best;
}

}  // namespace qv
