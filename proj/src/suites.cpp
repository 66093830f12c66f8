#include "qvalued/suites.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "qvalued/blowup.hpp"
#include "qvalued/competitor.hpp"
#include "qvalued/errors.hpp"
#include "qvalued/frequency.hpp"
#include "qvalued/oracle.hpp"
#include "qvalued/trace.hpp"

namespace qv {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

std::string sci(double x) { return fmt("%.3e", x); }

class Recorder {
 public:
  explicit Recorder(std::string suite) : suite_(std::move(suite)) {}
  void add(std::string check, bool passed, std::string detail) {
    rows_.push_back({suite_, std::move(check), passed, std::move(detail)});
  }
  std::vector<CheckResult> take() { return std::move(rows_); }

 private:
  std::string suite_;
  std::vector<CheckResult> rows_;
};

TupleMatrix<double> random_tuple(std::mt19937_64& rng, int q, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TupleMatrix<double> m(q, n);
  for (int i = 0; i < q; ++i)
    for (int c = 0; c < n; ++c) m(i, c) = u(rng);
  return m;
}

double brute_force_cost(const TupleMatrix<double>& a, const TupleMatrix<double>& b) {
  Permutation p = identity_permutation(static_cast<int>(a.rows()));
  double best = matching_cost(a, b, p);
  while (std::next_permutation(p.begin(), p.end())) best = std::min(best, matching_cost(a, b, p));
  return best;
}

GeneratorSpec homogeneous(int qbar, int qj, int l, int n) {
  GeneratorSpec s;
  s.kind = GeneratorKind::homogeneous;
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

std::vector<CheckResult> matching_suite(std::uint64_t seed) {
  Recorder rec("matching");
  std::mt19937_64 rng(seed);

  int pairs = 0, mismatches = 0;
  for (int q = 2; q <= 6; ++q)
    for (int i = 0; i < 200; ++i, ++pairs) {
      const QPoint<double> a(random_tuple(rng, q, 2)), b(random_tuple(rng, q, 2));
      if (g_distance(a, b) != std::sqrt(brute_force_cost(a.values(), b.values()))) ++mismatches;
    }
  rec.add("brute_force", mismatches == 0,
          std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " mismatches");

  double triangle = 0, asym = 0;
  for (int i = 0; i < 200; ++i) {
    const QPoint<double> a(random_tuple(rng, 4, 3)), b(random_tuple(rng, 4, 3)), c(random_tuple(rng, 4, 3));
    triangle = std::max(triangle, g_distance(a, c) - g_distance(a, b) - g_distance(b, c));
    asym = std::max(asym, std::abs(g_distance(a, b) - g_distance(b, a)));
  }
  rec.add("metric_axioms", triangle <= 1e-12 && asym <= 1e-14,
          "triangle excess " + sci(triangle) + ", asymmetry " + sci(asym));

  double shift = 0;
  for (int i = 0; i < 100; ++i) {
    const QPoint<double> a(random_tuple(rng, 5, 2));
    const RowVector<double> v = random_tuple(rng, 1, 2).row(0);
    shift = std::max(shift, (eta(a.translated(v)) - eta(a) - v).cwiseAbs().maxCoeff());
  }
  rec.add("eta_translation", shift <= 1e-14, "max deviation " + sci(shift));

  TupleMatrix<double> s(3, 2);
  s << 0, 0, 3, 4, 3, 4;
  const double sep = separation(QPoint<double>(s));
  rec.add("separation_example", sep == 5.0, "separation " + fmt("%.17g", sep));

  TupleMatrix<double> x(2, 2), y(2, 2);
  x << 1, 0, -1, 0;
  y << 0, 1, 0, -1;
  const auto tie = match_selection(QPoint<double>(x), QPoint<double>(y));
  rec.add("ambiguity_flag", tie.ambiguous, "gap " + sci(tie.gap));
  return rec.take();
}

std::vector<CheckResult> energies_suite(std::uint64_t seed) {
  Recorder rec("energies");

  double weight_err = 0;
  for (int qbar = 1; qbar <= 3; ++qbar) {
    const BranchedGrid g(qbar, 0.7, 16, 32);
    weight_err = std::max(weight_err, std::abs(g.total_weight() / (kPi * 0.49 * qbar) - 1));
  }
  rec.add("area_weights", weight_err <= 1e-12, "relative error " + sci(weight_err));

  {
    const BranchedGrid g2(2, 1.0, 64, 64), g3(3, 1.0, 64, 64);
    const Eigen::VectorXd one2 = Eigen::VectorXd::Ones(g2.node_count());
    const Eigen::VectorXd one3 = Eigen::VectorXd::Ones(g3.node_count());
    Eigen::VectorXd cos2(g2.node_count());
    cos2(0) = 1;
    for (int k = 1; k <= g2.radial(); ++k)
      for (int m = 0; m < g2.ring_size(); ++m) cos2(g2.node(k, m)) = std::pow(std::cos(0.5 * g2.angle(m)), 2);
    const double e1 = std::abs(integrate_ball(g2, one2, 0.5) - 2 * kPi * 0.25);
    const double e2 = std::abs(integrate_circle(g3, one3, 0.5) - 3 * kPi);
    const double e3 = std::abs(integrate_circle(g2, cos2, 1.0) - 2 * kPi);
    const double worst = std::max({e1, e2, e3});
    rec.add("integration_examples", worst <= 1e-12, "max error " + sci(worst));
  }

  {
    TraceDecomposition d;
    d.qbar = 1;
    d.q = 2;
    TracePiece p;
    p.qj = 2;
    p.a = Eigen::MatrixXd::Zero(4, 1);
    p.b = Eigen::MatrixXd::Zero(4, 1);
    p.a(3, 0) = 1;
    d.pieces.push_back(p);
    d.monodromy = layout_monodromy(d);
    const auto e = competitor_energies(d);
    const double err = std::max({std::abs(e.dirichlet - 3 * kPi), std::abs(e.tangential - 4.5 * kPi),
                                 std::abs(e.boundary_l2 - 2 * kPi)});
    rec.add("closed_form_example", err <= 1e-12, "max error " + sci(err));
  }

  double worst = 0, ratio_lo = 1e300, ratio_hi = 0;
  for (int i = 0; i < 4; ++i) {
    const auto spec = random_superposition(seed * 100 + i, 1 + i % 2);
    const auto dec = base_decomposition(spec, 1.0);
    const auto closed = competitor_energies(dec);
    double err[2];
    for (int level = 0; level < 2; ++level) {
      const int k = 64 << level;
      err[level] = max_relative_error(
          closed, quadrature_energies(harmonic_competitor(CompetitorSpec{dec, 1.0, std::nullopt}, k, 4 * k)));
    }
    worst = std::max(worst, err[1]);
    ratio_lo = std::min(ratio_lo, err[0] / err[1]);
    ratio_hi = std::max(ratio_hi, err[0] / err[1]);
  }
  rec.add("quadrature_vs_closed", worst <= 1e-2, "4 decompositions at K=128, max relative error " + sci(worst));
  rec.add("second_order", ratio_lo >= 3.5 && ratio_hi <= 4.5,
          "error ratios under halving in [" + fmt("%.3f", ratio_lo) + ", " + fmt("%.3f", ratio_hi) + "]");
  return rec.take();
}

std::vector<CheckResult> frequency_suite(std::uint64_t seed) {
  Recorder rec("frequency");

  double dev = 0, spread = 0;
  for (const auto& [qbar, qj, l] : {std::tuple{1, 2, 3}, std::tuple{1, 1, 2}, std::tuple{2, 1, 5}}) {
    const auto spec = homogeneous(qbar, qj, l, 2);
    const BranchedGrid g(qbar, 1.0, 256, 512);
    const auto p = profile(generate(spec, g), grid_radii(g, 0.2, 0.9));
    const double alpha = static_cast<double>(l) / (qbar * qj);
    double hmin = 1e300, hmax = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      dev = std::max(dev, std::abs(p.I(i) - alpha));
      const double h = p.H(i) / std::pow(p.r(i), 2 * alpha + 1);
      hmin = std::min(hmin, h);
      hmax = std::max(hmax, h);
    }
    spread = std::max(spread, (hmax - hmin) / hmax);
  }
  rec.add("homogeneous_constancy", dev <= 5e-3 && spread <= 1e-3,
          "max |I - alpha| " + sci(dev) + ", H/r^(2a+1) spread " + sci(spread));

  double hprime = 0, cs = 0;
  int violations = 0;
  for (int i = 0; i < 3; ++i) {
    const auto spec = random_superposition(seed * 100 + i, 1 + i % 2);
    const BranchedGrid g(spec.qbar, 1.0, 512, 128);
    const auto p = profile(generate(spec, g), grid_radii(g, 0.1, 0.9));
    hprime = std::max(hprime, check_h_prime(p).max_residual);
    cs = std::max(cs, cauchy_schwarz_excess(p));
    violations += check_frequency_monotonicity(p, true).violations;
  }
  rec.add("h_prime_identity", hprime <= 5e-2, "max relative residual " + sci(hprime));
  rec.add("cauchy_schwarz", cs <= 1e-8, "max excess " + sci(cs));
  rec.add("monotonicity", violations == 0, std::to_string(violations) + " violations over 3 minimizers");

  {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::superposition;
    spec.pieces.push_back({1, {Mode{2, {1.0}, {1.0}}, Mode{5, {1.0}, {1.0}}}});
    const BranchedGrid g(1, 1.0, 256, 64);
    const auto p = profile(generate(spec, g), grid_radii(g, 0.2, 1.0));
    bool increasing = true;
    double dev = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double r6 = std::pow(p.r(i), 6);
      dev = std::max(dev, std::abs(p.I(i) - (2 + 5 * r6) / (1 + r6)));
      if (i >= 8 && i % 8 == 0) increasing = increasing && p.I(i) > p.I(i - 8);
    }
    rec.add("two_mode_increasing", increasing && dev <= 5e-3,
            "I from " + fmt("%.4f", p.I(0)) + " to " + fmt("%.4f", p.I(p.size() - 1)) + ", deviation from (2+5r^6)/(1+r^6) " +
                sci(dev));
  }

  {
    const BranchedGrid g(1, 1.0, 32, 32);
    const auto p = profile(MultiField(g, 2, 2));
    rec.add("zero_field", p.vanishing && std::isnan(p.I(0)) && p.D.maxCoeff() == 0,
            p.vanishing ? "vanishing flag set" : "vanishing flag missing");
  }
  return rec.take();
}

std::vector<CheckResult> poincare_suite(std::uint64_t seed) {
  Recorder rec("poincare");
  std::vector<double> radii;
  for (int i = 1; i <= 10; ++i) radii.push_back(0.1 * i);

  std::vector<PoincareReport> reports;
  for (int i = 0; i < 20; ++i) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::random_lipschitz;
    spec.qbar = 1 + i % 2;
    spec.n = 2;
    spec.seed = seed * 100 + i;
    spec.pieces.push_back({1 + i % 3, {}});
    const BranchedGrid g(spec.qbar, 1.0, 64, 64);
    reports.push_back(check_poincare(generate(spec, g), radii));
  }
  const auto all = combine(reports);
  rec.add("lemma_constant_8", all.violations == 0,
          "worst constants " + fmt("%.4f", all.ball_constant) + " (ball), " + fmt("%.4f", all.weighted_constant) +
              " (weighted) over " + std::to_string(all.radii) + " radii");

  double worst = 0;
  for (const auto& [qbar, qj, l] : {std::tuple{1, 2, 3}, std::tuple{1, 3, 4}}) {
    const auto spec = homogeneous(qbar, qj, l, 2);
    const BranchedGrid g(qbar, 1.0, 256, 256);
    std::vector<double> rs;
    for (int i = 2; i <= 9; ++i) rs.push_back(0.1 * i);
    const auto rep = check_poincare(generate(spec, g), rs, 8.0, true);
    const double inv = static_cast<double>(qbar * qj) / l;
    worst = std::max({worst, std::abs(rep.frequency_ratio_min * l / (qbar * qj) - 1),
                      std::abs(rep.frequency_ratio_max / inv - 1)});
  }
  rec.add("frequency_ratio", worst <= 5e-3, "max relative deviation of H/(rD) from 1/alpha " + sci(worst));

  {
    const BranchedGrid g(2, 1.0, 32, 32);
    MultiField c(g, 1, 1);
    c.values().setConstant(1.5);
    const auto rep = check_poincare(c, radii);
    rec.add("constant_field", std::abs(rep.ball_constant - 0.5) <= 1e-2,
            "ball constant " + fmt("%.6f", rep.ball_constant) + " (expected 1/2)");
  }
  return rec.take();
}

std::vector<CheckResult> competitor_suite(std::uint64_t seed) {
  Recorder rec("competitor");
  const auto spec = random_superposition(seed, 1, RandomBandOptions{3, 3, 6, 2, true, true});
  const int K = 64, M = 128;
  const auto base = generate(spec, BranchedGrid(1, 1.0, K, M));
  const auto trace = extract_trace(base, 1.0);
  const auto dec = decompose_trace(trace);
  const auto h = harmonic_competitor(CompetitorSpec{dec, 1.0, std::nullopt}, K, M);
  const double eh = dirichlet_energy(h, 1.0);

  double excess = 1e300;
  for (int i = 0; i < 50; ++i) {
    const auto e = random_extension(h, seed * 1000 + i, 0.05 + 0.45 * (i % 10) / 9.0);
    excess = std::min(excess, dirichlet_energy(e, 1.0) - eh);
  }
  rec.add("minimality", excess >= -1e-9, "smallest energy excess over 50 extensions " + sci(excess));

  const auto exact = dir_minimize(trace, K);
  const bool same = exact.certificate == Certificate::exact &&
                    (exact.field.values().array() == h.values().array()).all();
  rec.add("exact_oracle", same, "certificate " + to_string(exact.certificate));

  MinimizeOptions opts;
  opts.force_descent = true;
  const auto desc = dir_minimize(trace, K, opts);
  const double rel = std::abs(desc.energy / eh - 1);
  bool monotone = true;
  for (std::size_t i = 1; i < desc.energy_history.size(); ++i)
    monotone = monotone && desc.energy_history[i] <= desc.energy_history[i - 1] * (1 + 1e-14);
  rec.add("descent_oracle", desc.certificate == Certificate::descent && rel <= 1e-3 && monotone,
          "relative gap " + sci(rel) + " after " + std::to_string(desc.iterations) + " iterations");

  const double sup_trace = trace.values.cwiseAbs().maxCoeff();
  rec.add("maximum_principle", sup_norm(h) <= dec.q * sup_trace * (1 + 1e-12),
          "sup " + fmt("%.6f", sup_norm(h)) + " vs Q sup trace " + fmt("%.6f", dec.q * sup_trace));

  const auto lip = lipschitz_competitor(CompetitorSpec{dec, 1.0, Smoothing{0.25, 0.0}}, K, M);
  const auto& g = lip.grid();
  double edge = 0;
  for (int m = 0; m < g.ring_size(); ++m)
    edge = std::max(edge, g_distance_rows(lip.tuple(g.node(K, m)), base.tuple(g.node(K, m))));
  rec.add("lipschitz_boundary", edge <= 10 * dec.truncation_error + 1e-12, "boundary deviation " + sci(edge));
  return rec.take();
}

std::vector<CheckResult> blowup_suite(std::uint64_t seed) {
  Recorder rec("blowup");
  auto spec = homogeneous(1, 2, 3, 2);
  spec.kind = GeneratorKind::perturbed;
  spec.seed = seed;
  spec.perturbation.beta = 0.5;
  spec.perturbation.amplitude = 0.05;
  const BranchedGrid g(1, 1.0, 256, 128);
  const auto field = generate(spec, g);
  const auto fit = fit_decay(profile(field));
  const auto rep = limit_profile(blowup_family(field, 1.5, dyadic_radii(g, 1.0, 7)));

  rec.add("positive_rate", rep.converged && rep.fitted_rate >= 0.8 && rep.fitted_rate <= 1.2,
          "fitted squared-distance rate " + fmt("%.4f", rep.fitted_rate));
  bool decreasing = rep.converged;
  for (Eigen::Index i = 1; decreasing && i < rep.sup_distances.size(); ++i)
    decreasing = rep.sup_distances(i) < rep.sup_distances(i - 1);
  rec.add("sup_monotone", decreasing, "sup distances over " + std::to_string(rep.radii.size()) + " dyadic radii");
  const double mass_gap = std::abs(rep.f0_l2 / fit.H0 - 1);
  rec.add("nontrivial_limit", mass_gap <= 0.05, "int |f0|^2 vs fitted H0 relative gap " + sci(mass_gap));

  spec.perturbation.amplitude = 0;
  const auto base = generate(spec, g);
  const auto ext = homogeneous_extension(rep.f0, 1.5, g.radial());
  double worst = 0;
  for (int i = 0; i < base.values().rows(); ++i) worst = std::max(worst, g_distance_rows(base.tuple(i), ext.tuple(i)));
  rec.add("extension_round_trip", worst <= 2 * rep.interpolation_error,
          "sup distance " + sci(worst) + " vs 2x interpolation error " + sci(2 * rep.interpolation_error));

  const auto pe = profile(ext, grid_radii(ext.grid(), 0.2, 0.9));
  double dev = 0;
  for (Eigen::Index i = 0; i < pe.size(); ++i) dev = std::max(dev, std::abs(pe.I(i) - 1.5));
  rec.add("extension_frequency", dev <= 1e-2, "max |I - I0| " + sci(dev));
  return rec.take();
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"matching", "energies", "frequency", "poincare", "competitor", "blowup"};
  return names;
}

std::vector<CheckResult> run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "all") {
    std::vector<CheckResult> out;
    for (const auto& s : suite_names()) {
      auto part = run_suite(s, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  if (name == "matching") return matching_suite(seed);
  if (name == "energies") return energies_suite(seed);
  if (name == "frequency") return frequency_suite(seed);
  if (name == "poincare") return poincare_suite(seed);
  if (name == "competitor") return competitor_suite(seed);
  if (name == "blowup") return blowup_suite(seed);
  throw InputError("unknown suite '" + name + "'");
}

std::string format_table(const std::vector<CheckResult>& results) {
  std::string out;
  char line[512];
  std::snprintf(line, sizeof line, "%-12s %-24s %-6s %s\n", "suite", "check", "status", "detail");
  out += line;
  int passed = 0;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-12s %-24s %-6s %s\n", r.suite.c_str(), r.check.c_str(),
                  r.passed ? "PASS" : "FAIL", r.detail.c_str());
    out += line;
    passed += r.passed;
  }
  out += std::to_string(passed) + "/" + std::to_string(results.size()) + " checks passed\n";
  return out;
}

}  // namespace qv
