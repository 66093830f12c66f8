#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qvalued/multifield.hpp"
#include "qvalued/oracle.hpp"

using namespace qv;
using std::numbers::pi;

namespace {

GeneratorSpec z_three_halves(int n = 1) {
  GeneratorSpec s;
  s.n = n;
  Mode m{3, std::vector<double>(n, 0.0), {}};
  m.a[0] = 1.0;
  s.pieces.push_back({2, {m}});
  return s;
}

MultiField real_part_z(const BranchedGrid& g) {
  MultiField f(g, 1, 1);
  for (int k = 1; k <= g.radial(); ++k)
    for (int m = 0; m < g.ring_size(); ++m) f.values()(g.node(k, m), 0) = g.radius(k) * std::cos(g.angle(m));
  return f;
}

}  // namespace

TEST_CASE("winding map") {
  const BranchedGrid g1(1, 1.0, 4, 8), g2(2, 1.0, 4, 8);
  const std::complex<double> zeta(0.3, -0.4);
  const auto p = wind(g1, zeta);
  CHECK(std::abs(p.z - zeta) < 1e-15);
  CHECK(std::abs(p.w - zeta) < 1e-15);

  const auto q = wind(g2, {0.0, 1.0});
  CHECK(std::abs(q.z - std::complex<double>(-1.0, 0.0)) < 1e-15);
  CHECK(std::abs(q.w - std::complex<double>(0.0, 1.0)) < 1e-15);

  const auto o = wind(g2, {0.0, 0.0});
  CHECK(std::abs(o.z) == 0.0);
  CHECK(std::abs(o.w) == 0.0);

  const std::complex<double> u(-0.2, 0.7);
  CHECK(std::abs(unwind(wind(g2, u)) - u) < 1e-14);
  const auto [r, phi] = covering_coordinates(2, wind(g2, u));
  CHECK(r == doctest::Approx(std::norm(u)));
  CHECK(phi == doctest::Approx(2 * std::arg(u) + (std::arg(u) < 0 ? 4 * pi : 0)));
}

TEST_CASE("node layout") {
  const BranchedGrid g(3, 2.0, 5, 16);
  CHECK(g.ring_size() == 48);
  CHECK(g.node_count() == 1 + 5 * 48);
  CHECK(g.node(0, 17) == 0);
  CHECK(g.node(1, 0) == 1);
  CHECK(g.node(2, 3) == 1 + 48 + 3);
  CHECK(g.radius(5) == 2.0);
  const auto [k, t] = g.locate(1.0);
  CHECK(k == 2);
  CHECK(t == doctest::Approx(0.5));
  CHECK(g.total_weight() == doctest::Approx(pi * 4.0 * 3));
}

TEST_CASE("integrals of simple samples") {
  SUBCASE("1 over B_r on the double cover") {
    const BranchedGrid g(2, 1.0, 32, 16);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(g.node_count());
    for (double r : {0.25, 0.5, 1.0}) CHECK(integrate_ball(g, one, r) == doctest::Approx(2 * pi * r * r).epsilon(1e-12));
  }
  SUBCASE("1 over the circle on the triple cover") {
    const BranchedGrid g(3, 1.0, 32, 16);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(g.node_count());
    for (double r : {0.25, 0.5, 1.0}) CHECK(integrate_circle(g, one, r) == doctest::Approx(6 * pi * r).epsilon(1e-12));
  }
  SUBCASE("cos^2(phi/2) over the unit circle on the double cover") {
    const BranchedGrid g(2, 1.0, 4, 64);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(g.node_count());
    for (int k = 1; k <= g.radial(); ++k)
      for (int m = 0; m < g.ring_size(); ++m) s(g.node(k, m)) = std::pow(std::cos(g.angle(m) / 2), 2);
    CHECK(integrate_circle(g, s, 1.0) == doctest::Approx(2 * pi).epsilon(1e-12));
  }
}

TEST_CASE("gradients") {
  SUBCASE("constant field") {
    const BranchedGrid g(2, 1.0, 16, 32);
    MultiField f(g, 3, 2);
    for (Eigen::Index i = 0; i < f.values().rows(); ++i) f.values().row(i) << 1, 2, -1, 0, 5, 5;
    f.set_seams(identity_permutation(3));
    CHECK(energy_density(f).cwiseAbs().maxCoeff() < 1e-20);
    CHECK(dirichlet_energy(f, 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("Re z has unit gradient") {
    const BranchedGrid g(1, 1.0, 64, 64);
    const auto f = real_part_z(g);
    const auto d = energy_density(f);
    for (int k = 1; k <= g.radial(); ++k)
      for (int m = 0; m < g.ring_size(); m += 7) CHECK(std::abs(d(g.node(k, m)) - 1) < 1e-10);
  }
  SUBCASE("branches of Re z^{3/2} scale like r^3") {
    const BranchedGrid g(1, 1.0, 512, 128);
    const auto f = generate(z_three_halves(), g);
    const double d1 = dirichlet_energy(f, 1.0);
    CHECK(d1 == doctest::Approx(3 * pi).epsilon(2e-3));
    for (double r : {0.25, 0.5, 0.75}) CHECK(dirichlet_energy(f, r) / d1 == doctest::Approx(r * r * r).epsilon(5e-3));
  }
}

TEST_CASE("sheet bookkeeping") {
  const BranchedGrid g(1, 1.0, 32, 64);
  auto spec = z_three_halves(2);
  spec.pieces[0].modes[0].b = {0.0, 1.0};
  const auto f = generate(spec, g);
  CHECK(f.coherent());
  for (int k = 1; k <= g.radial(); ++k) CHECK(f.seam(k) == Permutation{1, 0});

  SUBCASE("make_coherent recovers the labels from canonical order") {
    MultiField scrambled = f;
    for (Eigen::Index i = 0; i < scrambled.values().rows(); ++i) {
      const auto c = f.at(static_cast<int>(i));
      scrambled.tuple(static_cast<int>(i)) = c.values();
    }
    scrambled.set_seams(identity_permutation(2));
    scrambled.set_coherent(false);
    const auto fixed = make_coherent(scrambled);
    CHECK(fixed.coherent());
    CHECK(fixed.seam(g.radial()) == Permutation{1, 0});
    CHECK(dirichlet_energy(fixed, 1.0) == doctest::Approx(dirichlet_energy(f, 1.0)).epsilon(1e-9));
  }

  SUBCASE("lipschitz and sup estimates") {
    CHECK(sup_norm(f) == doctest::Approx(1.0));
    CHECK(lipschitz_estimate(f) == doctest::Approx(3.0).epsilon(1e-2));
    const auto scalar = generate(z_three_halves(), g);
    CHECK(lipschitz_estimate(scalar) == doctest::Approx(1.5 * std::sqrt(2.0)).epsilon(1e-2));
  }
}

TEST_CASE("angular derivative is spectral along the unrolled cycle") {
  const BranchedGrid g(1, 1.0, 4, 32);
  const auto f = generate(z_three_halves(), g);
  const int k = g.radial();
  const auto d = ring_derivatives(f, k);
  double worst = 0;
  for (int m = 0; m < g.ring_size(); ++m) {
    const double s = g.angle(m) / 2;
    worst = std::max(worst, std::abs(d.angular(m, 0) + 1.5 * std::sin(3 * s)));
  }
  CHECK(worst < 1e-12);
}
