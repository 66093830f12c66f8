#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qvalued/competitor.hpp"
#include "qvalued/errors.hpp"
#include "qvalued/oracle.hpp"

using namespace qv;
using std::numbers::pi;

namespace {

TraceDecomposition one_piece(int qbar, int qj, int l, double a = 1.0, double mean = 0.0) {
  TraceDecomposition dec;
  dec.qbar = qbar;
  dec.q = qj;
  dec.n = 1;
  TracePiece p;
  p.qj = qj;
  p.a = Eigen::MatrixXd::Zero(std::max(l, 1) + 1, 1);
  p.b = Eigen::MatrixXd::Zero(std::max(l, 1) + 1, 1);
  p.a(0, 0) = 2 * mean;
  if (l > 0) p.a(l, 0) = a;
  dec.pieces.push_back(p);
  dec.monodromy = layout_monodromy(dec);
  return dec;
}

}  // namespace

TEST_CASE("closed-form energies") {
  SUBCASE("single piece Q_1 = 2 with a_3 = 1") {
    const auto e = competitor_energies(one_piece(1, 2, 3));
    CHECK(e.dirichlet == doctest::Approx(3 * pi));
    CHECK(e.tangential == doctest::Approx(4.5 * pi));
    CHECK(e.boundary_l2 == doctest::Approx(2 * pi));
  }
  SUBCASE("a constant piece") {
    const auto e = competitor_energies(one_piece(2, 3, 0, 0.0, 0.7));
    CHECK(e.dirichlet == 0.0);
    CHECK(e.tangential == 0.0);
    CHECK(e.boundary_l2 == doctest::Approx(pi * 2 * 3 * (1.4 * 1.4) / 2));
  }
  SUBCASE("energies add over pieces") {
    auto two = one_piece(1, 2, 3);
    const auto other = one_piece(1, 1, 2, 0.5, 3.0);
    two.pieces.push_back(other.pieces[0]);
    two.q = 3;
    two.monodromy = layout_monodromy(two);
    const auto a = competitor_energies(one_piece(1, 2, 3)), b = competitor_energies(other), s = competitor_energies(two);
    CHECK(s.dirichlet == doctest::Approx(a.dirichlet + b.dirichlet));
    CHECK(s.tangential == doctest::Approx(a.tangential + b.tangential));
    CHECK(s.boundary_l2 == doctest::Approx(a.boundary_l2 + b.boundary_l2));
  }
  SUBCASE("radius scaling of a single mode") {
    const auto dec = one_piece(1, 2, 3);
    const auto e1 = competitor_energies(dec, 1.0), e2 = competitor_energies(dec, 2.0);
    CHECK(e2.dirichlet == doctest::Approx(e1.dirichlet));
    CHECK(e2.boundary_l2 == doctest::Approx(2 * e1.boundary_l2));
    CHECK(e2.tangential == doctest::Approx(e1.tangential / 2));
  }
}

TEST_CASE("harmonic competitor") {
  SUBCASE("origin carries the piece means") {
    const auto h = harmonic_competitor(CompetitorSpec{one_piece(1, 2, 3), 1.0, std::nullopt}, 16, 64);
    CHECK(h.values().row(0).cwiseAbs().maxCoeff() == 0.0);
    const auto c = harmonic_competitor(CompetitorSpec{one_piece(1, 2, 3, 1.0, 0.4), 1.0, std::nullopt}, 16, 64);
    CHECK(c.values()(0, 0) == doctest::Approx(0.4));
    CHECK(c.values()(0, 1) == doctest::Approx(0.4));
  }
  SUBCASE("constant trace gives a constant field") {
    const auto h = harmonic_competitor(CompetitorSpec{one_piece(1, 1, 0, 0.0, -2.0), 0.5, std::nullopt}, 8, 16);
    CHECK((h.values().array() + 2.0).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("value at radius 1/8 for the (l = 3, Q_1 = 2) piece") {
    const auto h = harmonic_competitor(CompetitorSpec{one_piece(1, 2, 3), 1.0, std::nullopt}, 8, 64);
    const auto v = h.at(h.grid().node(1, 0));
    CHECK(v.value(0)(0) == doctest::Approx(-std::pow(0.125, 1.5)).epsilon(1e-12));
    CHECK(v.value(1)(0) == doctest::Approx(std::pow(0.125, 1.5)).epsilon(1e-12));
  }
  SUBCASE("quadrature converges to the closed forms at second order") {
    const auto dec = one_piece(1, 2, 5);
    const auto closed = competitor_energies(dec);
    const double coarse = max_relative_error(closed, quadrature_energies(harmonic_competitor({dec, 1.0, std::nullopt}, 64, 256)));
    const double fine = max_relative_error(closed, quadrature_energies(harmonic_competitor({dec, 1.0, std::nullopt}, 128, 512)));
    CHECK(fine <= 1e-3);
    CHECK(coarse / fine >= 3.5);
    CHECK(coarse / fine <= 4.5);
  }
}

TEST_CASE("lipschitz competitor") {
  const auto dec = one_piece(1, 2, 3);
  SUBCASE("needs smoothing parameters") {
    CHECK_THROWS_AS(lipschitz_competitor({dec, 1.0, std::nullopt}, 16, 64), InputError);
    CHECK_THROWS_AS(lipschitz_competitor({dec, 1.0, Smoothing{1.5, 0.0}}, 16, 64), InputError);
  }
  SUBCASE("boundary values are the trace") {
    const auto h = harmonic_competitor({dec, 1.0, std::nullopt}, 32, 64);
    const auto l = lipschitz_competitor({dec, 1.0, Smoothing{0.25, 0.0}}, 32, 64);
    const int k = h.grid().radial();
    for (int m = 0; m < h.grid().ring_size(); ++m)
      CHECK(g_distance(h.at(h.grid().node(k, m)), l.at(l.grid().node(k, m))) < 1e-14);
  }
  SUBCASE("constant trace is left unchanged") {
    const auto c = one_piece(1, 1, 0, 0.0, 1.25);
    const auto l = lipschitz_competitor({c, 1.0, Smoothing{0.5, 0.1}}, 16, 32);
    CHECK((l.values().array() - 1.25).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("excess energy decreases as the collar shrinks") {
    const double eh = dirichlet_energy(harmonic_competitor({dec, 1.0, std::nullopt}, 256, 128), 1.0);
    double previous = 1e300;
    for (double t : {0.4, 0.2, 0.1}) {
      const double excess = dirichlet_energy(lipschitz_competitor({dec, 1.0, Smoothing{t, 0.0}}, 256, 128), 1.0) - eh;
      CHECK(excess < previous);
      previous = excess;
    }
  }
}
