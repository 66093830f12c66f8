// Randomized invariants across modules, each over a few hundred seeded draws.

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <random>

#include "qvalued/competitor.hpp"
#include "qvalued/frequency.hpp"
#include "qvalued/oracle.hpp"

using namespace qv;

namespace {

QPoint<double> random_point(std::mt19937_64& rng, int q, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TupleMatrix<double> m(q, n);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = u(rng);
  return QPoint<double>(m);
}

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

double brute_force(const QPoint<double>& a, const QPoint<double>& b) {
  Permutation p = identity_permutation(a.q());
  double best = matching_cost(a.values(), b.values(), p);
  while (std::next_permutation(p.begin(), p.end())) best = std::min(best, matching_cost(a.values(), b.values(), p));
  return std::sqrt(best);
}

}  // namespace

TEST_CASE("g_distance is a metric") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const int q = 1 + t % 4, n = 1 + (t / 4) % 3;
    const auto a = random_point(rng, q, n), b = random_point(rng, q, n), c = random_point(rng, q, n);
    const double ab = g_distance(a, b), bc = g_distance(b, c), ac = g_distance(a, c);
    CHECK(ab == brute_force(a, b));
    CHECK(ab >= 0);
    CHECK(ab == doctest::Approx(g_distance(b, a)).epsilon(1e-15));
    CHECK(g_distance(a, a) == 0.0);
    CHECK(ac <= ab + bc + 1e-15);
  }
}

TEST_CASE("translations and rotations of the target") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 300; ++t) {
    const int q = 2 + t % 4, n = 1 + t % 3;
    const auto a = random_point(rng, q, n), b = random_point(rng, q, n);
    const RowVector<double> v = random_point(rng, 1, n).values().row(0);
    CHECK(eta(a.translated(v))(0) == doctest::Approx(eta(a)(0) + v(0)));
    CHECK(g_distance(a.translated(v), b.translated(v)) == doctest::Approx(g_distance(a, b)).epsilon(1e-12));
    const Eigen::MatrixXd o = random_orthogonal(rng, n);
    const QPoint<double> ra(TupleMatrix<double>(a.values() * o)), rb(TupleMatrix<double>(b.values() * o));
    CHECK(std::abs(g_distance(ra, rb) - g_distance(a, b)) <= 1e-12);
  }
}

TEST_CASE("energy quadrature is invariant under grid rotation and target isometries") {
  for (int i = 0; i < 6; ++i) {
    const auto spec = random_superposition(400 + i, 1 + i % 2, RandomBandOptions{2, 3, 5, 2, true, false});
    const BranchedGrid g(spec.qbar, 1.0, 64, 64);
    const auto f = generate(spec, g);
    const double e = dirichlet_energy(f, 1.0);

    MultiField rotated = f;
    const int shift = 5 + i;
    for (int k = 1; k <= g.radial(); ++k)
      for (int m = 0; m < g.ring_size(); ++m) {
        const int src = (m + shift) % g.ring_size();
        rotated.values().row(g.node(k, m)) = f.values().row(g.node(k, src));
        if (m + shift >= g.ring_size()) {
          for (int s = 0; s < f.q(); ++s)
            rotated.values().row(g.node(k, m)).segment(s * f.n(), f.n()) =
                f.values().row(g.node(k, src)).segment(f.seam(k)[s] * f.n(), f.n());
        }
      }
    CHECK(dirichlet_energy(rotated, 1.0) == doctest::Approx(e).epsilon(1e-10));

    std::mt19937_64 rng(i);
    const Eigen::MatrixXd o = random_orthogonal(rng, f.n());
    MultiField turned = f;
    for (Eigen::Index row = 0; row < f.values().rows(); ++row)
      for (int s = 0; s < f.q(); ++s)
        turned.values().row(row).segment(s * f.n(), f.n()) = f.values().row(row).segment(s * f.n(), f.n()) * o;
    CHECK(dirichlet_energy(turned, 1.0) == doctest::Approx(e).epsilon(1e-10));
  }
}

TEST_CASE("random minimizers satisfy the frequency identities") {
  for (int i = 0; i < 8; ++i) {
    const auto spec = random_superposition(600 + i, 1 + i % 2);
    const BranchedGrid g(spec.qbar, 1.0, 512, 128);
    const auto p = profile(generate(spec, g), grid_radii(g, 0.1, 0.9));
    CHECK(check_h_prime(p).max_residual <= 5e-2);
    CHECK(cauchy_schwarz_excess(p) <= 1e-3);
    CHECK(check_frequency_monotonicity(p, true).violations == 0);
  }
}

TEST_CASE("the harmonic competitor beats random extensions") {
  for (int t = 0; t < 3; ++t) {
    const auto spec = random_superposition(800 + t, 1, RandomBandOptions{3, 3, 6, 2, true, true});
    const BranchedGrid g(1, 1.0, 48, 96);
    const auto trace = extract_trace(generate(spec, g), 1.0);
    const auto h = harmonic_competitor({decompose_trace(trace), 1.0, std::nullopt}, 48, 96);
    const double eh = dirichlet_energy(h, 1.0);
    for (int i = 0; i < 20; ++i) CHECK(dirichlet_energy(random_extension(h, 31 * t + i, 0.2), 1.0) >= eh - 1e-9);
  }
}

TEST_CASE("the Poincare constants stay below 8 on random Lipschitz fields") {
  std::vector<PoincareReport> reports;
  for (int i = 0; i < 20; ++i) {
    GeneratorSpec s;
    s.kind = GeneratorKind::random_lipschitz;
    s.qbar = 1 + i % 3;
    s.n = 1 + i % 2;
    s.seed = 9000 + i;
    s.pieces.push_back({1 + i % 3, {}});
    reports.push_back(check_poincare(generate(s, BranchedGrid(s.qbar, 1.0, 32, 32)), {0.25, 0.5, 0.75, 1.0}));
  }
  const auto all = combine(reports);
  CHECK(all.violations == 0);
  CHECK(all.radii == 80);
  CHECK(all.ball_constant <= 8.0);
  CHECK(all.weighted_constant <= 8.0);
}
