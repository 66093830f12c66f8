#include "qvalued/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>

#include "qvalued/blowup.hpp"
#include "qvalued/competitor.hpp"
#include "qvalued/errors.hpp"
#include "qvalued/frequency.hpp"
#include "qvalued/io.hpp"
#include "qvalued/oracle.hpp"
#include "qvalued/suites.hpp"

namespace qv::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct GenerateArgs {
  std::string kind = "homogeneous";
  std::string spec;
  int qbar = 1;
  std::vector<int> qj;
  std::vector<int> modes;
  int n = 2;
  double amplitude = 0.05;
  double beta = 0.5;
  std::uint64_t seed = 0;
  int max_mode = 4;
  int K = 256;
  int M = 256;
  double rho = 1.0;
  std::string out;
};

struct AnalyzeArgs {
  std::string input;
  std::string out_dir = ".";
  std::string profile = "profile.csv";
  std::string fit = "fit.json";
  double gamma0 = 0.5;
  double fit_lo = 0.1;
  double fit_hi = 0.8;
  int min_points = 8;
};

struct CompetitorArgs {
  std::string input;
  double radius = kUnset;
  double t = 0.0;
  double clamp = 0.0;
  int max_mode = -1;
  std::string out = "energies.json";
  std::string field_out;
  std::string decomposition_out;
};

struct BlowupArgs {
  std::string input;
  double I0 = kUnset;
  double r_max = kUnset;
  int count = 8;
  bool no_richardson = false;
  double gamma0 = 0.5;
  double fit_lo = 0.1;
  double fit_hi = 0.8;
  std::string out = "blowup.json";
};

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 7;
};

// Config values become command-line tokens placed ahead of the user's own
// flags; keys the user already passed are skipped.
std::vector<std::string> inject_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& subcommands) {
  if (args.empty() || std::find(subcommands.begin(), subcommands.end(), args[0]) == subcommands.end()) return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  const Json file = io::read_json(path);
  if (!file.is_object()) throw InputError(path + ": config must be a JSON object");
  Json settings = Json::object();
  for (const auto& [key, value] : file.items()) {
    if (std::find(subcommands.begin(), subcommands.end(), key) != subcommands.end()) continue;
    settings[key] = value;
  }
  if (file.contains(args[0])) {
    if (!file[args[0]].is_object()) throw InputError(path + ": section '" + args[0] + "' must be an object");
    for (const auto& [key, value] : file[args[0]].items()) settings[key] = value;
  }

  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin() + 1, args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  auto scalar = [&](const Json& v, const std::string& key) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number_float()) return io::format_real(v.get<double>());
    throw InputError(path + ": key '" + key + "' must hold a string, number, boolean or array");
  };

  std::vector<std::string> out{args[0]};
  for (const auto& [raw, value] : settings.items()) {
    std::string key = raw;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") continue;
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        out.push_back(flag);
        out.push_back(scalar(v, raw));
      }
    } else {
      out.push_back(flag);
      out.push_back(scalar(value, raw));
    }
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

Json typed(const std::string& s) {
  long long i = 0;
  const char* end = s.data() + s.size();
  if (!s.empty()) {
    auto [p, ec] = std::from_chars(s.data(), end, i);
    if (ec == std::errc() && p == end) return i;
    double d = 0;
    auto [q, ec2] = std::from_chars(s.data(), end, d);
    if (ec2 == std::errc() && q == end) return d;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  return s;
}

// Resolved value of every option of a subcommand, for the run manifest.
Json resolved_config(const CLI::App& sub) {
  Json cfg = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    std::string name = opt->get_lnames().empty() ? opt->get_name(true, false) : opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "manifest") continue;
    if (opt->get_expected_max() > 1) {
      Json arr = Json::array();
      for (const auto& r : opt->results()) arr.push_back(typed(r));
      cfg[name] = std::move(arr);
    } else if (opt->get_type_size() == 0) {
      cfg[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      cfg[name] = typed(opt->results().back());
    } else {
      const std::string d = opt->get_default_str();
      cfg[name] = d.empty() ? Json(nullptr) : typed(d);
    }
  }
  return cfg;
}

void write_manifest(const fs::path& path, const std::string& command, const CLI::App& sub, Json extra) {
  Json m;
  m["tool"] = "qvalued";
  m["command"] = command;
  m["config"] = resolved_config(sub);
  for (auto& [k, v] : extra.items()) m[k] = v;
  io::write_json(path, m);
}

fs::path manifest_for(const fs::path& primary) {
  fs::path p = primary;
  p.replace_extension(".manifest.json");
  return p;
}

Mode unit_mode(int l, int n) {
  Mode m{l, std::vector<double>(n, 0.0), {}};
  m.a[0] = 1.0;
  if (n >= 2) {
    m.b.assign(n, 0.0);
    m.b[1] = 1.0;
  }
  return m;
}

GeneratorSpec build_spec(const GenerateArgs& a) {
  if (!a.spec.empty()) return io::generator_spec_from_json(io::read_json(a.spec));
  GeneratorSpec spec;
  spec.kind = parse_generator_kind(a.kind);
  spec.qbar = a.qbar;
  spec.n = a.n;
  spec.seed = a.seed;
  spec.max_mode = a.max_mode;
  spec.perturbation.amplitude = spec.kind == GeneratorKind::perturbed ? a.amplitude : 0.0;
  spec.perturbation.beta = a.beta;
  const std::vector<int> qjs = a.qj.empty() ? std::vector<int>{1} : a.qj;

  if (spec.kind == GeneratorKind::random_lipschitz) {
    for (int q : qjs) spec.pieces.push_back({q, {}});
  } else if (a.modes.empty()) {
    if (spec.kind != GeneratorKind::superposition) throw InputError("generate: --mode is required for this kind");
    RandomBandOptions opts;
    opts.n = a.n;
    opts.separated = a.n >= 2;
    return random_superposition(a.seed, a.qbar, opts);
  } else if (qjs.size() == 1) {
    PieceSpec p{qjs[0], {}};
    for (int l : a.modes) p.modes.push_back(unit_mode(l, a.n));
    spec.pieces.push_back(std::move(p));
  } else if (qjs.size() == a.modes.size()) {
    for (std::size_t i = 0; i < qjs.size(); ++i) spec.pieces.push_back({qjs[i], {unit_mode(a.modes[i], a.n)}});
  } else {
    throw InputError("generate: give one --qj, or as many --qj as --mode values");
  }
  validate(spec);
  return spec;
}

int do_generate(const GenerateArgs& a, const CLI::App& sub, const std::string& manifest, std::ostream& out) {
  if (a.out.empty()) throw InputError("generate: --out is required");
  const GeneratorSpec spec = build_spec(a);
  const BranchedGrid grid(spec.qbar, a.rho, a.K, a.M);
  const MultiField field = generate(spec, grid);
  io::write_field(a.out, field);
  const fs::path mpath = manifest.empty() ? manifest_for(a.out) : fs::path(manifest);
  write_manifest(mpath, "generate", sub,
                 Json{{"spec", io::to_json(spec)},
                      {"outputs", Json::array({a.out, io::body_path_for(a.out).string()})}});
  out << "wrote " << a.out << " (Q=" << field.q() << ", n=" << field.n() << ", K=" << grid.radial()
      << ", M=" << grid.angular() << ", qbar=" << grid.qbar() << ")\n";
  return kSuccess;
}

int do_analyze(const AnalyzeArgs& a, const CLI::App& sub, const std::string& manifest, std::ostream& out) {
  const MultiField field = io::read_field(a.input);
  const FrequencyProfile p = profile(field, FrequencyOptions{a.gamma0});
  const DecayFit fit = fit_decay(p, FitOptions{a.fit_lo, a.fit_hi, a.min_points, 1e-4});
  const fs::path dir(a.out_dir);
  const fs::path ppath = dir / a.profile, fpath = dir / a.fit;
  io::write_atomic(ppath, io::profile_csv(p));
  io::write_json(fpath, io::to_json(fit));
  const fs::path mpath = manifest.empty() ? dir / "analyze.manifest.json" : fs::path(manifest);
  write_manifest(mpath, "analyze", sub, Json{{"outputs", Json::array({ppath.string(), fpath.string()})}});

  const auto& g = field.grid();
  const auto hp = check_h_prime(profile(field, grid_radii(g, 0.1 * g.rho(), 0.9 * g.rho()), FrequencyOptions{a.gamma0}));
  out << "radii " << p.size() << ", unreliable nodes " << field.unreliable_count() << "\n";
  out << "I0 " << io::format_real(fit.I0) << "  H0 " << io::format_real(fit.H0) << "  D0 " << io::format_real(fit.D0)
      << "  lambda " << io::format_real(fit.lambda) << "\n";
  out << "H' identity max relative residual on [0.1, 0.9] rho " << io::format_real(hp.max_residual) << "\n";
  if (p.vanishing) out << "field vanishes on a ball around the origin; I undefined there\n";
  out << "wrote " << ppath.string() << ", " << fpath.string() << "\n";
  return kSuccess;
}

int do_competitor(const CompetitorArgs& a, const CLI::App& sub, const std::string& manifest, std::ostream& out) {
  const MultiField field = io::read_field(a.input);
  const auto& g = field.grid();
  const double radius = std::isnan(a.radius) ? g.rho() : a.radius;
  const BoundaryTrace trace = extract_trace(field, radius);
  DecomposeOptions dopts;
  dopts.max_mode = a.max_mode;
  const TraceDecomposition dec = decompose_trace(trace, dopts);

  CompetitorSpec spec{dec, radius, std::nullopt};
  if (a.t > 0) spec.smoothing = Smoothing{a.t, a.clamp};
  const MultiField comp = spec.smoothing ? lipschitz_competitor(spec, g.radial(), g.angular())
                                         : harmonic_competitor(spec, g.radial(), g.angular());
  const CompetitorEnergies closed = competitor_energies(dec, radius);
  const CompetitorEnergies quad = quadrature_energies(comp);
  io::write_json(a.out, io::to_json(closed, quad));

  Json outputs = Json::array({a.out});
  if (!a.field_out.empty()) {
    io::write_field(a.field_out, comp);
    outputs.push_back(a.field_out);
    outputs.push_back(io::body_path_for(a.field_out).string());
  }
  if (!a.decomposition_out.empty()) {
    io::write_json(a.decomposition_out, io::to_json(dec));
    outputs.push_back(a.decomposition_out);
  }
  const fs::path mpath = manifest.empty() ? manifest_for(a.out) : fs::path(manifest);
  write_manifest(mpath, "competitor", sub, Json{{"outputs", std::move(outputs)}});

  out << "pieces " << dec.piece_count() << ", truncation error " << io::format_real(dec.truncation_error) << "\n";
  out << "dirichlet " << io::format_real(closed.dirichlet) << " (quadrature " << io::format_real(quad.dirichlet)
      << ")\n";
  out << "wrote " << a.out << "\n";
  return kSuccess;
}

int do_blowup(const BlowupArgs& a, const CLI::App& sub, const std::string& manifest, std::ostream& out) {
  const MultiField field = io::read_field(a.input);
  const auto& g = field.grid();
  double I0 = a.I0;
  if (std::isnan(I0)) I0 = fit_decay(profile(field, FrequencyOptions{a.gamma0}), FitOptions{a.fit_lo, a.fit_hi, 8, 1e-4}).I0;
  const double r_max = std::isnan(a.r_max) ? g.rho() : a.r_max;
  const BlowupFamily family = blowup_family(field, I0, dyadic_radii(g, r_max, a.count));
  LimitOptions lopts;
  lopts.richardson = !a.no_richardson;
  const LimitReport rep = limit_profile(family, lopts);
  io::write_json(a.out, io::to_json(rep));
  const fs::path mpath = manifest.empty() ? manifest_for(a.out) : fs::path(manifest);
  write_manifest(mpath, "blowup", sub,
                 Json{{"outputs", Json::array({a.out})}, {"converged", rep.converged}, {"message", rep.message}});

  out << "I0 " << io::format_real(I0) << ", " << rep.message << "\n";
  if (rep.converged)
    out << "fitted rate " << io::format_real(rep.fitted_rate) << ", int |f0|^2 " << io::format_real(rep.f0_l2) << "\n";
  out << "wrote " << a.out << "\n";
  return kSuccess;
}

int do_verify(const VerifyArgs& a, const CLI::App& sub, const std::string& manifest, std::ostream& out) {
  const auto results = run_suite(a.suite, a.seed);
  out << "verify suite=" << a.suite << " seed=" << a.seed << "\n" << format_table(results);
  if (!manifest.empty()) write_manifest(manifest, "verify", sub, Json::object());
  const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
  return ok ? kSuccess : kInvariantViolation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Q-valued functions on branched disks: fields, frequency profiles, competitors, blow-ups", "qvalued"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::string config, manifest;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON file with option values; command-line flags take precedence");
    sub->add_option("--manifest", manifest, "where to write the run manifest");
  };

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "write a synthetic field file");
  gen->add_option("--kind", ga.kind, "homogeneous | superposition | perturbed | random_lipschitz")
      ->check(CLI::IsMember({"homogeneous", "superposition", "perturbed", "random_lipschitz"}));
  gen->add_option("--spec", ga.spec, "GeneratorSpec JSON (replaces the piece flags)");
  gen->add_option("--qbar", ga.qbar, "covering order of the branched disk");
  gen->add_option("--qj", ga.qj, "cycle length of each piece");
  gen->add_option("--mode", ga.modes, "Fourier mode l of each piece (or every mode of a single piece)");
  gen->add_option("--n", ga.n, "target dimension; n >= 2 uses complex-power coefficients");
  gen->add_option("--amplitude", ga.amplitude, "perturbation amplitude (kind perturbed)");
  gen->add_option("--beta", ga.beta, "perturbation order beta (kind perturbed)");
  gen->add_option("--seed", ga.seed, "random seed");
  gen->add_option("--max-mode", ga.max_mode, "band limit of random fields");
  gen->add_option("--K", ga.K, "radial annuli");
  gen->add_option("--M", ga.M, "angular samples per 2 pi");
  gen->add_option("--rho", ga.rho, "outer radius");
  gen->add_option("--out", ga.out, "field file to write (manifest JSON; body CSV alongside)");
  common(gen);

  AnalyzeArgs aa;
  auto* ana = app.add_subcommand("analyze", "frequency profile and decay fit of a field");
  ana->add_option("input,--input", aa.input, "field file")->required();
  ana->add_option("--out-dir", aa.out_dir, "directory for the outputs");
  ana->add_option("--profile", aa.profile, "profile CSV file name");
  ana->add_option("--fit", aa.fit, "fit JSON file name");
  ana->add_option("--gamma0", aa.gamma0, "exponent of F");
  ana->add_option("--fit-lo", aa.fit_lo, "fit window start, relative to rho");
  ana->add_option("--fit-hi", aa.fit_hi, "fit window end, relative to rho");
  ana->add_option("--min-points", aa.min_points, "fewest radii accepted in the fit window");
  common(ana);

  CompetitorArgs ca;
  auto* cmp = app.add_subcommand("competitor", "harmonic competitor of a field's trace");
  cmp->add_option("input,--input", ca.input, "field file")->required();
  cmp->add_option("--radius", ca.radius, "trace radius (default rho)");
  cmp->add_option("--t", ca.t, "collar width of the Lipschitz variant; 0 keeps the harmonic competitor");
  cmp->add_option("--clamp", ca.clamp, "clamp radius of the Lipschitz variant, relative to the radius");
  cmp->add_option("--max-mode", ca.max_mode, "Fourier band limit (negative selects M/4)");
  cmp->add_option("--out", ca.out, "energies JSON");
  cmp->add_option("--field-out", ca.field_out, "optional field file for the competitor");
  cmp->add_option("--decomposition-out", ca.decomposition_out, "optional JSON of the trace decomposition");
  common(cmp);

  BlowupArgs ba;
  auto* blw = app.add_subcommand("blowup", "rescaled profiles, limit and convergence rate");
  blw->add_option("input,--input", ba.input, "field file")->required();
  blw->add_option("--I0", ba.I0, "normalizing frequency (default: fitted I0)");
  blw->add_option("--r-max", ba.r_max, "largest dyadic radius (default rho)");
  blw->add_option("--count", ba.count, "number of dyadic radii");
  blw->add_flag("--no-richardson", ba.no_richardson, "use the smallest-radius profile as the limit");
  blw->add_option("--gamma0", ba.gamma0, "exponent of F for the I0 fit");
  blw->add_option("--fit-lo", ba.fit_lo, "fit window start for I0");
  blw->add_option("--fit-hi", ba.fit_hi, "fit window end for I0");
  blw->add_option("--out", ba.out, "blow-up report JSON");
  common(blw);

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "run invariant suites and print a pass/fail table");
  std::vector<std::string> suites = suite_names();
  suites.push_back("all");
  ver->add_option("--suite", va.suite, "suite name")->check(CLI::IsMember(suites));
  ver->add_option("--seed", va.seed, "random seed");
  common(ver);

  try {
    std::vector<std::string> argv =
        inject_config(args, {"generate", "analyze", "competitor", "blowup", "verify"});
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*gen) return do_generate(ga, *gen, manifest, out);
    if (*ana) return do_analyze(aa, *ana, manifest, out);
    if (*cmp) return do_competitor(ca, *cmp, manifest, out);
    if (*blw) return do_blowup(ba, *blw, manifest, out);
    if (*ver) return do_verify(va, *ver, manifest, out);
  } catch (const CollisionError& e) {
    err << "error: " << e.what() << " (" << e.nodes().size() << " ambiguous nodes)\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace qv::cli
