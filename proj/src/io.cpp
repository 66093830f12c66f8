#include "qvalued/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qvalued/errors.hpp"

namespace qv::io {

namespace fs = std::filesystem;

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path() && !fs::exists(path.parent_path())) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw InputError("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { write_atomic(path, j.dump(2) + "\n"); }

namespace {

template <typename T>
T get(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(where + ": key '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

double parse_real(const std::string& s, const std::string& where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw InputError(where + ": not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const std::string& where) {
  const double v = parse_real(s, where);
  if (v != static_cast<int>(v)) throw InputError(where + ": not an integer: '" + s + "'");
  return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Json matrix_rows(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

fs::path body_path_for(const fs::path& manifest) {
  fs::path body = manifest;
  body.replace_extension(".csv");
  if (body == manifest) body += ".csv";
  return body;
}

std::string field_body_csv(const MultiField& field) {
  const auto& g = field.grid();
  std::string out = "k,m";
  for (int i = 1; i <= field.q() * field.n(); ++i) out += ",v_" + std::to_string(i);
  out += '\n';
  auto row = [&](int k, int m) {
    out += std::to_string(k) + ',' + std::to_string(m);
    const QPoint<double> pt = field.at(g.node(k, m));
    const auto& vals = pt.values();
    for (Eigen::Index s = 0; s < vals.rows(); ++s)
      for (Eigen::Index c = 0; c < vals.cols(); ++c) out += ',' + format_real(vals(s, c));
    out += '\n';
  };
  row(0, 0);
  for (int k = 1; k <= g.radial(); ++k)
    for (int m = 0; m < g.ring_size(); ++m) row(k, m);
  return out;
}

void write_field(const fs::path& manifest, const MultiField& field) {
  const auto& g = field.grid();
  const fs::path body = body_path_for(manifest);
  Json j;
  j["version"] = kFieldFileVersion;
  j["qbar"] = g.qbar();
  j["q"] = field.q();
  j["n"] = field.n();
  j["K"] = g.radial();
  j["M"] = g.angular();
  j["rho"] = g.rho();
  j["body"] = body.filename().string();
  write_atomic(body, field_body_csv(field));
  write_json(manifest, j);
}

MultiField read_field(const fs::path& manifest) {
  const std::string where = manifest.string();
  const Json j = read_json(manifest);
  const int version = get<int>(j, "version", where);
  if (version != kFieldFileVersion) throw InputError(where + ": unsupported field file version " + std::to_string(version));
  const int qbar = get<int>(j, "qbar", where), q = get<int>(j, "q", where), n = get<int>(j, "n", where);
  const int K = get<int>(j, "K", where), M = get<int>(j, "M", where);
  const double rho = get<double>(j, "rho", where);
  if (q < 1 || n < 1) throw InputError(where + ": q and n must be positive");
  MultiField field(BranchedGrid(qbar, rho, K, M), q, n);
  const auto& g = field.grid();

  const fs::path body = manifest.parent_path() / get<std::string>(j, "body", where);
  std::istringstream in(read_text(body));
  const std::string bwhere = body.string();
  std::string line;
  if (!std::getline(in, line)) throw InputError(bwhere + ": empty body");
  const auto header = split(line);
  if (static_cast<int>(header.size()) != 2 + q * n || header[0] != "k" || header[1] != "m")
    throw InputError(bwhere + ": header does not match q*n = " + std::to_string(q * n));

  int expected = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string lw = bwhere + ":" + std::to_string(lineno);
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != 2 + q * n) throw InputError(lw + ": wrong number of columns");
    if (expected >= g.node_count()) throw InputError(lw + ": more rows than grid nodes");
    const int k = parse_int(cells[0], lw), m = parse_int(cells[1], lw);
    const int want_k = expected == 0 ? 0 : 1 + (expected - 1) / g.ring_size();
    const int want_m = expected == 0 ? 0 : (expected - 1) % g.ring_size();
    if (k != want_k || m != want_m) throw InputError(lw + ": rows out of canonical node order");
    for (int c = 0; c < q * n; ++c) field.values()(expected, c) = parse_real(cells[2 + c], lw);
    ++expected;
  }
  if (expected != g.node_count())
    throw InputError(bwhere + ": " + std::to_string(expected) + " rows for " + std::to_string(g.node_count()) + " nodes");
  return make_coherent(std::move(field));
}

std::string profile_csv(const FrequencyProfile& p) {
  std::string out = kProfileHeader;
  out += '\n';
  for (int i = 0; i < p.size(); ++i) {
    const double cols[] = {p.r(i), p.D(i), p.H(i), p.E(i), p.G(i), p.F(i), p.Lambda(i), p.I(i), p.K(i)};
    for (int c = 0; c < 9; ++c) {
      if (c) out += ',';
      out += format_real(cols[c]);
    }
    out += '\n';
  }
  return out;
}

Json to_json(const DecayFit& fit) {
  Json j;
  j["I0"] = fit.I0;
  j["H0"] = fit.H0;
  j["D0"] = fit.D0;
  j["lambda"] = fit.lambda;
  j["residual"] = fit.residual;
  j["window"] = Json::array({fit.window_lo, fit.window_hi});
  return j;
}

Json to_json(const CompetitorEnergies& closed, const CompetitorEnergies& quadrature) {
  Json j;
  j["dirichlet"] = closed.dirichlet;
  j["tangential"] = closed.tangential;
  j["boundary_l2"] = closed.boundary_l2;
  Json check;
  check["dirichlet"] = quadrature.dirichlet;
  check["tangential"] = quadrature.tangential;
  check["boundary_l2"] = quadrature.boundary_l2;
  check["max_relative_error"] = max_relative_error(closed, quadrature);
  j["quadrature_check"] = std::move(check);
  return j;
}

Json to_json(const TraceDecomposition& dec) {
  Json j;
  j["qbar"] = dec.qbar;
  j["q"] = dec.q;
  j["n"] = dec.n;
  Json pieces = Json::array();
  for (const auto& p : dec.pieces) {
    Json pj;
    pj["Qj"] = p.qj;
    pj["multiplicity"] = p.multiplicity;
    pj["a"] = matrix_rows(p.a);
    pj["b"] = matrix_rows(p.b);
    pieces.push_back(std::move(pj));
  }
  j["pieces"] = std::move(pieces);
  j["monodromy"] = dec.monodromy;
  j["truncation_error"] = dec.truncation_error;
  return j;
}

Json to_json(const BoundaryTrace& trace) {
  Json j;
  j["qbar"] = trace.qbar;
  j["M"] = trace.angular;
  j["radius"] = trace.radius;
  j["q"] = trace.q;
  j["n"] = trace.n;
  j["seam"] = trace.seam;
  j["values"] = matrix_rows(trace.values);
  return j;
}

Json to_json(const LimitReport& report) {
  Json j;
  j["I0"] = report.I0;
  j["radii"] = vector_json(report.radii);
  j["l2_distances"] = vector_json(report.l2_distances);
  j["sup_distances"] = vector_json(report.sup_distances);
  j["fitted_rate"] = report.fitted_rate;
  j["f0"] = report.converged ? to_json(report.f0) : Json(nullptr);
  return j;
}

namespace {

Json modes_json(const std::vector<Mode>& modes) {
  Json out = Json::array();
  for (const auto& m : modes) out.push_back(Json{{"l", m.l}, {"a", m.a}, {"b", m.b}});
  return out;
}

std::vector<Mode> modes_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": modes must be an array");
  std::vector<Mode> out;
  for (const auto& mj : j) {
    Mode m;
    m.l = get<int>(mj, "l", where);
    m.a = get_or<std::vector<double>>(mj, "a", {}, where);
    m.b = get_or<std::vector<double>>(mj, "b", {}, where);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

Json to_json(const GeneratorSpec& spec) {
  Json j;
  j["kind"] = to_string(spec.kind);
  j["qbar"] = spec.qbar;
  j["n"] = spec.n;
  Json pieces = Json::array();
  for (const auto& p : spec.pieces) pieces.push_back(Json{{"Qj", p.qj}, {"modes", modes_json(p.modes)}});
  j["pieces"] = std::move(pieces);
  Json profile = Json::array();
  for (const auto& h : spec.perturbation.profile) profile.push_back(modes_json(h));
  j["perturbation"] = Json{{"beta", spec.perturbation.beta},
                           {"amplitude", spec.perturbation.amplitude},
                           {"profile", std::move(profile)}};
  j["seed"] = spec.seed;
  j["max_mode"] = spec.max_mode;
  return j;
}

GeneratorSpec generator_spec_from_json(const Json& j) {
  const std::string where = "generator spec";
  if (!j.is_object()) throw InputError(where + ": expected an object");
  GeneratorSpec spec;
  spec.kind = parse_generator_kind(get_or<std::string>(j, "kind", "homogeneous", where));
  spec.qbar = get_or<int>(j, "qbar", 1, where);
  spec.n = get_or<int>(j, "n", 1, where);
  spec.seed = get_or<std::uint64_t>(j, "seed", 0, where);
  spec.max_mode = get_or<int>(j, "max_mode", 4, where);
  if (j.contains("pieces")) {
    if (!j["pieces"].is_array()) throw InputError(where + ": pieces must be an array");
    for (const auto& pj : j["pieces"]) {
      PieceSpec p;
      p.qj = get<int>(pj, "Qj", where);
      p.modes = modes_from_json(pj.contains("modes") ? pj["modes"] : Json::array(), where);
      spec.pieces.push_back(std::move(p));
    }
  }
  if (j.contains("perturbation")) {
    const Json& pj = j["perturbation"];
    spec.perturbation.beta = get_or<double>(pj, "beta", 0.5, where);
    spec.perturbation.amplitude = get_or<double>(pj, "amplitude", 0.0, where);
    if (pj.contains("profile")) {
      if (!pj["profile"].is_array()) throw InputError(where + ": perturbation profile must be an array");
      for (const auto& h : pj["profile"]) spec.perturbation.profile.push_back(modes_from_json(h, where));
    }
  }
  validate(spec);
  return spec;
}

}  // namespace qv::io
