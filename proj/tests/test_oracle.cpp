#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qvalued/competitor.hpp"
#include "qvalued/errors.hpp"
#include "qvalued/frequency.hpp"
#include "qvalued/oracle.hpp"

using namespace qv;
using std::numbers::pi;

namespace {

// Re z^{l/(qbar qj)} for n = 1; the complex power in the first two coordinates for n >= 2.
GeneratorSpec single(int qbar, int qj, int l, int n = 1) {
  GeneratorSpec s;
  s.qbar = qbar;
  s.n = n;
  Mode m{l, std::vector<double>(n, 0.0), {}};
  m.a[0] = 1.0;
  if (n >= 2) {
    m.b.assign(n, 0.0);
    m.b[1] = 1.0;
  }
  s.pieces.push_back({qj, {m}});
  return s;
}

BoundaryTrace sampled_trace(int q, int angular, const std::function<void(int, double, Eigen::Ref<Eigen::RowVectorXd>)>& fill) {
  BoundaryTrace t;
  t.angular = angular;
  t.q = q;
  t.values.resize(angular, q);
  for (int m = 0; m < angular; ++m) {
    Eigen::RowVectorXd row(q);
    fill(m, 2 * pi * m / angular, row);
    t.values.row(m) = row;
  }
  t.seam = identity_permutation(q);
  return t;
}

}  // namespace

TEST_CASE("generator specs") {
  SUBCASE("branches of Re z^{3/2}") {
    const BranchedGrid g(1, 1.0, 8, 32);
    const auto f = generate(single(1, 2, 3), g);
    CHECK(single(1, 2, 3).degree() == 1.5);
    CHECK(single(1, 2, 3).q() == 2);
    for (int m = 0; m < g.ring_size(); m += 5) {
      const double phi = g.angle(m);
      const double v = std::cos(1.5 * phi);
      const auto pt = f.at(g.node(g.radial(), m));
      CHECK(pt.value(0)(0) == doctest::Approx(-std::abs(v)));
      CHECK(pt.value(1)(0) == doctest::Approx(std::abs(v)));
    }
  }
  SUBCASE("Re z") {
    const BranchedGrid g(1, 1.0, 8, 32);
    const auto f = generate(single(1, 1, 1), g);
    for (int k = 1; k <= g.radial(); ++k)
      for (int m = 0; m < g.ring_size(); m += 3)
        CHECK(f.values()(g.node(k, m), 0) == doctest::Approx(g.radius(k) * std::cos(g.angle(m))));
  }
  SUBCASE("random Lipschitz fields are reproducible") {
    GeneratorSpec s;
    s.kind = GeneratorKind::random_lipschitz;
    s.qbar = 2;
    s.seed = 42;
    s.n = 2;
    s.pieces.push_back({3, {}});
    const BranchedGrid g(2, 1.0, 16, 32);
    const auto a = generate(s, g), b = generate(s, g);
    CHECK((a.values().array() == b.values().array()).all());
    s.seed = 43;
    CHECK_FALSE((generate(s, g).values().array() == a.values().array()).all());
    CHECK(std::isfinite(lipschitz_estimate(a)));
  }
  SUBCASE("invalid specs") {
    GeneratorSpec s = single(1, 2, 3);
    s.pieces.push_back({1, {Mode{2, {1.0}, {}}}});
    CHECK_THROWS_AS(validate(s), InputError);
    GeneratorSpec empty;
    CHECK_THROWS_AS(validate(empty), InputError);
    GeneratorSpec bad = single(1, 2, 3);
    bad.pieces[0].modes[0].a = {1.0, 2.0};
    CHECK_THROWS_AS(validate(bad), InputError);
  }
  SUBCASE("kind names round trip") {
    for (auto k : {GeneratorKind::homogeneous, GeneratorKind::superposition, GeneratorKind::perturbed,
                   GeneratorKind::random_lipschitz})
      CHECK(parse_generator_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_generator_kind("spiral"), InputError);
  }
}

TEST_CASE("random superpositions") {
  for (int i = 0; i < 10; ++i) {
    const auto s = random_superposition(100 + i, 1 + i % 2);
    CHECK_NOTHROW(validate(s));
    CHECK(s.degree() >= 1.0);
    CHECK(s.pieces.size() <= 3);
    for (const auto& p : s.pieces) {
      CHECK(p.qj <= 3);
      for (const auto& m : p.modes) CHECK(m.l <= 8);
    }
  }
  CHECK_THROWS_AS(random_superposition(1, 1, RandomBandOptions{3, 3, 6, 1, true, true}), InputError);
}

TEST_CASE("random extensions keep trace and origin") {
  const auto spec = random_superposition(5, 1, RandomBandOptions{3, 3, 6, 2, true, true});
  const BranchedGrid g(1, 1.0, 32, 64);
  const auto base = generate(spec, g);
  const auto ext = random_extension(base, 77, 0.3);
  CHECK((ext.values().row(0).array() == base.values().row(0).array()).all());
  const int k = g.radial();
  for (int m = 0; m < g.ring_size(); ++m)
    CHECK((ext.values().row(g.node(k, m)).array() == base.values().row(g.node(k, m)).array()).all());
  CHECK((ext.values() - base.values()).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("dir_minimize") {
  SUBCASE("cos theta gives Re z") {
    const auto t = sampled_trace(1, 64, [](int, double th, auto row) { row(0) = std::cos(th); });
    const auto res = dir_minimize(t, 1024);
    CHECK(res.certificate == Certificate::exact);
    CHECK(res.energy == doctest::Approx(pi).epsilon(1e-6));
    CHECK(dirichlet_energy(res.field, 1.0) == doctest::Approx(pi).epsilon(1e-6));
  }
  SUBCASE("separated constant sheets") {
    const auto t = sampled_trace(2, 32, [](int, double, auto row) { row << -1.0, 2.0; });
    const auto res = dir_minimize(t, 16);
    CHECK(res.energy == doctest::Approx(0.0));
    CHECK((res.field.values().col(0).array() == -1.0).all());
    CHECK((res.field.values().col(1).array() == 2.0).all());
  }
  SUBCASE("(l = 3, Q_1 = 2) trace") {
    const BranchedGrid g(1, 1.0, 4, 128);
    const auto trace = extract_trace(generate(single(1, 2, 3, 2), g), 1.0);
    const auto exact = dir_minimize(trace, 256);
    CHECK(exact.certificate == Certificate::exact);
    CHECK(exact.energy == doctest::Approx(6 * pi).epsilon(1e-3));

    MinimizeOptions opts;
    opts.force_descent = true;
    const auto desc = dir_minimize(trace, 64, opts);
    CHECK(desc.certificate == Certificate::descent);
    CHECK(desc.iterations > 0);
    CHECK(desc.energy == doctest::Approx(dirichlet_energy(dir_minimize(trace, 64).field, 1.0)).epsilon(1e-3));
    for (std::size_t i = 1; i < desc.energy_history.size(); ++i)
      CHECK(desc.energy_history[i] <= desc.energy_history[i - 1] * (1 + 1e-12));
  }
  SUBCASE("exact results equal the harmonic competitor") {
    const auto spec = random_superposition(9, 2, RandomBandOptions{3, 3, 6, 2, true, true});
    const auto trace = extract_trace(generate(spec, BranchedGrid(2, 1.0, 32, 128)), 1.0);
    const auto res = dir_minimize(trace, 32);
    REQUIRE(res.certificate == Certificate::exact);
    const auto h = harmonic_competitor({decompose_trace(trace), 1.0, std::nullopt}, 32, 128);
    CHECK((res.field.values().array() == h.values().array()).all());
  }
  SUBCASE("an iteration cap yields a warning") {
    const BranchedGrid g(1, 1.0, 4, 64);
    const auto trace = extract_trace(generate(single(1, 2, 3, 2), g), 1.0);
    MinimizeOptions opts;
    opts.force_descent = true;
    opts.max_iters = 2;
    const auto res = dir_minimize(trace, 32, opts);
    CHECK(res.certificate == Certificate::warning);
    CHECK_FALSE(res.message.empty());
  }
}

TEST_CASE("certificate names") {
  CHECK(to_string(Certificate::exact) == "exact");
  CHECK(to_string(Certificate::descent) == "descent");
  CHECK(to_string(Certificate::warning) == "warning");
}
