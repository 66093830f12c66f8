#pragma once

// Text artifacts: the field file (JSON manifest plus CSV body), profile.csv,
// and the JSON records emitted by the command line front end.
//
// Reals are written with 17 significant digits and every file is written to a
// temporary sibling first and renamed into place.

#include <json.hpp>

#include <filesystem>
#include <string>

#include "qvalued/blowup.hpp"
#include "qvalued/competitor.hpp"
#include "qvalued/frequency.hpp"
#include "qvalued/multifield.hpp"
#include "qvalued/oracle.hpp"
#include "qvalued/trace.hpp"

namespace qv::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFieldFileVersion = 1;

/// %.17g
std::string format_real(double x);

void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Manifest {version, qbar, q, n, K, M, rho, body} where body names the CSV
/// file (relative to the manifest) holding rows k,m,v_1..v_{Q n} with the
/// values of each node in canonical order. The origin is the single row k = 0.
void write_field(const std::filesystem::path& manifest, const MultiField& field);
/// Reads a field file and restores sheet coherence by optimal matching.
MultiField read_field(const std::filesystem::path& manifest);

/// CSV text of the body alone.
std::string field_body_csv(const MultiField& field);
/// Default body file name for a manifest path: f.json -> f.csv.
std::filesystem::path body_path_for(const std::filesystem::path& manifest);

inline constexpr const char* kProfileHeader = "r,D,H,E,G,F,Lambda,I,K";
std::string profile_csv(const FrequencyProfile& p);

Json to_json(const DecayFit& fit);
Json to_json(const CompetitorEnergies& closed, const CompetitorEnergies& quadrature);
Json to_json(const TraceDecomposition& dec);
Json to_json(const BoundaryTrace& trace);
Json to_json(const LimitReport& report);

Json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const Json& j);

}  // namespace qv::io
