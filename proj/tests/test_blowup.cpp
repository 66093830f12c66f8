#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qvalued/blowup.hpp"
#include "qvalued/errors.hpp"
#include "qvalued/frequency.hpp"
#include "qvalued/oracle.hpp"

using namespace qv;
using std::numbers::pi;

namespace {

GeneratorSpec z_three_halves(double amplitude = 0.0) {
  GeneratorSpec s;
  s.kind = amplitude == 0.0 ? GeneratorKind::homogeneous : GeneratorKind::perturbed;
  s.n = 2;
  s.seed = 3;
  s.pieces.push_back({2, {Mode{3, {1.0, 0.0}, {0.0, 1.0}}}});
  s.perturbation.amplitude = amplitude;
  s.perturbation.beta = 0.5;
  return s;
}

}  // namespace

TEST_CASE("dyadic radii") {
  const BranchedGrid g(1, 1.0, 256, 64);
  const auto r = dyadic_radii(g, 1.0, 6);
  REQUIRE(r.size() == 6);
  CHECK(r[0] == 1.0);
  CHECK(r[5] == 1.0 / 32);
  CHECK_THROWS_AS(dyadic_radii(g, 1.0, 9), InputError);
}

TEST_CASE("rescaling a homogeneous field") {
  const BranchedGrid g(1, 1.0, 256, 128);
  const auto f = generate(z_three_halves(), g);
  SUBCASE("every rescaled profile is the unit trace") {
    const auto a = rescale(f, 1.0, 1.5), b = rescale(f, 0.125, 1.5);
    CHECK(sup_distance(a.trace, b.trace) <= a.interpolation_error + b.interpolation_error);
    CHECK(l2_mass(a.trace) == doctest::Approx(4 * pi).epsilon(1e-12));
    CHECK(eta_mass(a.trace) < 1e-12);
  }
  SUBCASE("a wrong normalization scales like r^(-delta)") {
    const double delta = 0.1;
    const auto a = rescale(f, 1.0, 1.5 + delta), b = rescale(f, 0.25, 1.5 + delta);
    CHECK(std::sqrt(l2_mass(b.trace) / l2_mass(a.trace)) == doctest::Approx(std::pow(0.25, -delta)).epsilon(1e-10));
  }
  SUBCASE("the limit of a stationary family is its trace") {
    const auto rep = limit_profile(blowup_family(f, 1.5, dyadic_radii(g, 1.0, 7)));
    CHECK(rep.converged);
    CHECK(rep.stationary);
    CHECK(sup_distance(rep.f0, rescale(f, 1.0, 1.5).trace) <= 2 * rep.interpolation_error);
    CHECK(rep.f0_l2 == doctest::Approx(4 * pi).epsilon(1e-10));
  }
  SUBCASE("invalid radii") {
    CHECK_THROWS_AS(rescale(f, 2.0, 1.5), InputError);
    CHECK_THROWS_AS(rescale(f, 1.0 / 256, 1.5), InputError);
    CHECK_THROWS_AS(rescale(f, 0.5, 0.0), InputError);
  }
}

TEST_CASE("zero field rescales to zero") {
  const BranchedGrid g(1, 1.0, 64, 32);
  MultiField f(g, 2, 1);
  f.set_seams(identity_permutation(2));
  const auto p = rescale(f, 0.5, 1.5);
  CHECK(l2_mass(p.trace) == 0.0);
}

TEST_CASE("perturbed fields converge at the perturbation rate") {
  const BranchedGrid g(1, 1.0, 512, 128);
  const auto plus = limit_profile(blowup_family(generate(z_three_halves(0.05), g), 1.5, dyadic_radii(g, 1.0, 8)));
  const auto minus = limit_profile(blowup_family(generate(z_three_halves(-0.05), g), 1.5, dyadic_radii(g, 1.0, 8)));
  for (const auto* rep : {&plus, &minus}) {
    CHECK(rep->converged);
    CHECK_FALSE(rep->stationary);
    CHECK(rep->fitted_rate >= 0.8);
    CHECK(rep->fitted_rate <= 1.2);
    for (Eigen::Index i = 1; i < rep->sup_distances.size(); ++i)
      CHECK(rep->sup_distances(i) < rep->sup_distances(i - 1));
  }
  CHECK(plus.fitted_rate == doctest::Approx(minus.fitted_rate).epsilon(1e-2));
  CHECK(sup_distance(plus.f0, minus.f0) <= 2 * (plus.interpolation_error + minus.interpolation_error));
}

TEST_CASE("limit needs enough profiles") {
  const BranchedGrid g(1, 1.0, 256, 64);
  const auto f = generate(z_three_halves(), g);
  CHECK_THROWS_AS(limit_profile(blowup_family(f, 1.5, dyadic_radii(g, 1.0, 4))), InputError);
}

TEST_CASE("homogeneous extension") {
  const BranchedGrid g(1, 1.0, 128, 64);
  const auto base = generate(z_three_halves(), g);
  const auto f0 = rescale(base, 1.0, 1.5).trace;
  const auto ext = homogeneous_extension(f0, 1.5, 128);
  SUBCASE("reconstructs the field") {
    double worst = 0;
    for (Eigen::Index i = 0; i < base.values().rows(); ++i)
      worst = std::max(worst, g_distance_rows(base.tuple(static_cast<int>(i)), ext.tuple(static_cast<int>(i))));
    CHECK(worst < 1e-13);
  }
  SUBCASE("energy is homogeneous") {
    CHECK(dirichlet_energy(ext, 0.5) / dirichlet_energy(ext, 1.0) == doctest::Approx(std::pow(0.5, 3.0)).epsilon(1e-2));
  }
  SUBCASE("a constant profile vanishes at the origin") {
    BoundaryTrace c = f0;
    c.values.setConstant(2.0);
    c.seam = identity_permutation(c.q);
    const auto g2 = homogeneous_extension(c, 0.75, 16);
    CHECK(g2.values().row(0).cwiseAbs().maxCoeff() == 0.0);
    const auto t = extract_trace(g2, g2.grid().radius(4));
    CHECK(t.values(0, 0) == doctest::Approx(2.0 * std::pow(0.25, 0.75)));
  }
}

TEST_CASE("subspace residual") {
  const BranchedGrid g(1, 1.0, 16, 32);
  const auto t = rescale(generate(z_three_halves(), g), 1.0, 1.5).trace;
  CHECK(subspace_residual(t, 0, 2) == doctest::Approx(0.0));
  CHECK(subspace_residual(t, 0, 1) == doctest::Approx(0.5).epsilon(1e-10));
}
