#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qvalued/errors.hpp"
#include "qvalued/oracle.hpp"
#include "qvalued/trace.hpp"

using namespace qv;
using std::numbers::pi;

namespace {

// Complex pair +-e^{i l theta / Q_j} in R^2, shifted by `offset` along the first axis.
GeneratorSpec single_mode(int qbar, int qj, int l, double offset = 0.0) {
  GeneratorSpec s;
  s.kind = GeneratorKind::superposition;
  s.qbar = qbar;
  s.n = 2;
  s.pieces.push_back({qj, {Mode{0, {offset, 0.0}, {}}, Mode{l, {1.0, 0.0}, {0.0, 1.0}}}});
  return s;
}

BoundaryTrace constant_trace(const std::vector<double>& values, int angular) {
  BoundaryTrace t;
  t.angular = angular;
  t.q = static_cast<int>(values.size());
  t.values.resize(angular, t.q);
  for (int m = 0; m < angular; ++m)
    for (int s = 0; s < t.q; ++s) t.values(m, s) = values[s];
  t.seam = identity_permutation(t.q);
  return t;
}

}  // namespace

TEST_CASE("extract_trace") {
  SUBCASE("constant field") {
    const BranchedGrid g(2, 1.0, 8, 16);
    MultiField f(g, 2, 1);
    for (Eigen::Index i = 0; i < f.values().rows(); ++i) f.values().row(i) << -1.5, 2.0;
    f.set_seams(identity_permutation(2));
    const auto t = extract_trace(f, 0.6);
    CHECK(t.ring_size() == 32);
    CHECK((t.values.col(0).array() == -1.5).all());
    CHECK((t.values.col(1).array() == 2.0).all());
    CHECK_THROWS_AS(extract_trace(f, 1.5), InputError);
  }
  SUBCASE("homogeneous fields scale by r^alpha") {
    const BranchedGrid g(1, 1.0, 16, 32);
    const auto f = generate(single_mode(1, 2, 3), g);
    const auto outer = extract_trace(f, 1.0);
    const auto inner = extract_trace(f, 0.25);
    CHECK(inner.seam == Permutation{1, 0});
    double worst = 0;
    for (int m = 0; m < outer.ring_size(); ++m)
      worst = std::max(worst, (inner.values.row(m) - std::pow(0.25, 1.5) * outer.values.row(m)).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-15);
  }
  SUBCASE("grid radii reproduce the stored ring") {
    const BranchedGrid g(1, 1.0, 16, 32);
    auto spec = single_mode(1, 2, 3);
    spec.kind = GeneratorKind::perturbed;
    spec.perturbation.amplitude = 0.1;
    spec.seed = 9;
    const auto f = generate(spec, g);
    const auto t = extract_trace(f, g.radius(12));
    for (int m = 0; m < g.ring_size(); ++m) CHECK((t.values.row(m) - f.values().row(g.node(12, m))).norm() == 0.0);
  }
  SUBCASE("rotation moves the starting node") {
    const BranchedGrid g(1, 1.0, 4, 32);
    const auto t = extract_trace(generate(single_mode(1, 2, 3), g), 1.0);
    const auto r = rotate_trace(t, 5);
    CHECK(g_distance_rows(r.tuple(0), t.tuple(5)) == 0.0);
  }
}

TEST_CASE("decompose_trace") {
  SUBCASE("separated constants split into single-sheet pieces") {
    const auto dec = decompose_trace(constant_trace({0.0, 1.0, 3.0}, 16));
    CHECK(dec.piece_count() == 3);
    CHECK(dec.monodromy == identity_permutation(3));
    for (const auto& p : dec.pieces) {
      CHECK(p.qj == 1);
      CHECK(p.dirichlet_sum() == doctest::Approx(0.0));
    }
  }
  SUBCASE("branches of Re z^{3/2} form one two-sheet piece with a single mode") {
    const BranchedGrid g(1, 1.0, 4, 64);
    const auto dec = decompose_trace(extract_trace(generate(single_mode(1, 2, 3), g), 1.0));
    REQUIRE(dec.piece_count() == 1);
    CHECK(dec.pieces[0].qj == 2);
    CHECK(dec.monodromy == Permutation{1, 0});
    const auto& p = dec.pieces[0];
    for (int l = 0; l <= p.max_mode(); ++l) {
      const double mag = std::hypot(p.a(l, 0), p.b(l, 0));
      CHECK(mag == doctest::Approx(l == 3 ? 1.0 : 0.0));
    }
    CHECK(dec.truncation_error < 1e-12);
  }
  SUBCASE("two separated copies give two two-sheet pieces") {
    const BranchedGrid g(1, 1.0, 4, 64);
    GeneratorSpec s = single_mode(1, 2, 3);
    s.pieces.push_back({2, {Mode{0, {10.0, 0.0}, {}}, Mode{3, {1.0, 0.0}, {0.0, 1.0}}}});
    const auto dec = decompose_trace(extract_trace(generate(s, g), 1.0));
    REQUIRE(dec.piece_count() == 2);
    CHECK(dec.pieces[0].qj == 2);
    CHECK(dec.pieces[1].qj == 2);
    CHECK(cycles(dec.monodromy).size() == 2);
  }
  SUBCASE("repeated sheets are counted with multiplicity") {
    const auto dec = decompose_trace(constant_trace({2.0, 2.0, 5.0}, 16));
    int sheets = 0;
    for (const auto& p : dec.pieces) sheets += p.qj * p.multiplicity;
    CHECK(sheets == 3);
  }
  SUBCASE("sheets crossing at a node are reported") {
    BoundaryTrace t = constant_trace({0.0, 0.0}, 32);
    for (int m = 0; m < 32; ++m) {
      t.values(m, 0) = std::cos(2 * pi * m / 32);
      t.values(m, 1) = -std::cos(2 * pi * m / 32);
    }
    CHECK_THROWS_AS(decompose_trace(t), CollisionError);
  }
}

TEST_CASE("fourier synthesis") {
  SUBCASE("a constant piece") {
    const auto dec = decompose_trace(constant_trace({0.75}, 16));
    for (double theta : {0.0, 1.0, 4.0}) CHECK(fourier_synthesize(dec, theta).value(0)(0) == doctest::Approx(0.75));
  }
  SUBCASE("the (l = 3, Q_1 = 2) piece at theta = 0") {
    const BranchedGrid g(1, 1.0, 4, 64);
    const auto dec = decompose_trace(extract_trace(generate(single_mode(1, 2, 3), g), 1.0));
    const auto v = fourier_synthesize(dec, 0.0);
    CHECK(v.value(0)(0) == doctest::Approx(-1.0));
    CHECK(v.value(1)(0) == doctest::Approx(1.0));
    CHECK(std::abs(v.value(0)(1)) < 1e-12);
    CHECK(std::abs(v.value(1)(1)) < 1e-12);
  }
  SUBCASE("round trip on random band-limited traces") {
    for (int i = 0; i < 10; ++i) {
      const auto spec = random_superposition(300 + i, 1 + i % 2, RandomBandOptions{3, 3, 6, 2, true, true});
      const BranchedGrid g(spec.qbar, 1.0, 4, 128);
      const auto trace = extract_trace(generate(spec, g), 1.0);
      const auto dec = decompose_trace(trace);
      double worst = 0;
      for (int m = 0; m < trace.ring_size(); ++m) {
        const double theta = 2 * pi * m / trace.ring_size();
        worst = std::max(worst, g_distance(fourier_synthesize(dec, theta), QPoint<double>(TupleMatrix<double>(trace.tuple(m)))));
      }
      CHECK(worst <= 1e-10);
      CHECK(worst <= dec.truncation_error + 1e-15);
    }
  }
}

TEST_CASE("decomposition bookkeeping") {
  TraceDecomposition dec;
  dec.q = 3;
  dec.n = 1;
  TracePiece p;
  p.qj = 2;
  p.a = Eigen::MatrixXd::Zero(4, 1);
  p.b = Eigen::MatrixXd::Zero(4, 1);
  dec.pieces.push_back(p);
  CHECK_THROWS_AS(validate(dec), InputError);
  dec.q = 2;
  CHECK_NOTHROW(validate(dec));
  CHECK(layout_monodromy(dec) == Permutation{1, 0});
}
