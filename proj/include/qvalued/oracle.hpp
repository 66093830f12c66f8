#pragma once

// Ground-truth fields: exact Dir-minimizers built from Fourier modes on the
// covers of their pieces, controlled perturbations of them, random Lipschitz
// fields, and an independent minimizer for a prescribed boundary trace.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qvalued/multifield.hpp"
#include "qvalued/trace.hpp"

namespace qv {

enum class GeneratorKind { homogeneous, superposition, perturbed, random_lipschitz };

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(const std::string& name);

/// One Fourier mode of a piece curve: a cos(l s) + b sin(l s), a and b in R^n.
struct Mode {
  int l = 0;
  std::vector<double> a;
  std::vector<double> b;
};

struct PieceSpec {
  int qj = 1;
  std::vector<Mode> modes;
};

/// amplitude * r^(alpha + beta) * h_j(s) added to the sheets of piece j,
/// where alpha is the lowest degree l / (Qbar Q_j) of the base field.
struct Perturbation {
  double beta = 0.5;
  double amplitude = 0.0;
  std::vector<std::vector<Mode>> profile;  ///< per piece; empty draws h from the seed
};

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::homogeneous;
  int qbar = 1;
  int n = 1;
  std::vector<PieceSpec> pieces;
  Perturbation perturbation;
  std::uint64_t seed = 0;
  int max_mode = 4;  ///< band limit of random_lipschitz fields

  int q() const;
  /// Lowest degree l / (Qbar Q_j) over the nonconstant modes; 0 if there is none.
  double degree() const;
};

/// Throws InputError on inconsistent bookkeeping.
void validate(const GeneratorSpec& spec);

/// Decomposition of the unperturbed field's trace on the circle of radius rho.
TraceDecomposition base_decomposition(const GeneratorSpec& spec, double rho);

/// Sample the field described by `spec` on `grid`. Deterministic given the seed.
MultiField generate(const GeneratorSpec& spec, const BranchedGrid& grid);

struct RandomBandOptions {
  int max_pieces = 3;
  int max_qj = 3;
  int max_mode = 8;
  int n = 1;
  bool lipschitz = true;  ///< modes start at l = Qbar Q_j, so every degree is >= 1
  /// Dominant mode l = Qbar Q_j + 1 in the first two coordinates, secondary
  /// modes scaled by 0.05 and pieces offset by 4 along the first coordinate,
  /// so that sheets stay apart and the trace can be tracked. Needs n >= 2.
  bool separated = false;
};

/// A superposition spec with random pieces and coefficients in [-1, 1].
GeneratorSpec random_superposition(std::uint64_t seed, int qbar, const RandomBandOptions& options = {});

/// base + amplitude (r/rho)(1 - r/rho) h, with h a random band-limited curve
/// on every unrolled sheet cycle of the base field's outer seam. The result
/// has the same trace and the same value at the origin as `base`.
MultiField random_extension(const MultiField& base, std::uint64_t seed, double amplitude, int max_mode = 4);

enum class Certificate { exact, descent, warning };
std::string to_string(Certificate c);

struct MinimizeOptions {
  int max_iters = 100000;
  double rel_tol = 1e-8;       ///< stop when the gradient norm falls below rel_tol * initial norm
  bool force_descent = false;  ///< skip the Fourier path even for decomposable traces
  double exact_tol = 1e-8;     ///< largest decomposition truncation error (relative to sup |trace|) for "exact"
  DecomposeOptions decompose;
};

struct MinimizeResult {
  explicit MinimizeResult(MultiField f, Certificate c = Certificate::exact) : field(std::move(f)), certificate(c) {}

  MultiField field;
  Certificate certificate = Certificate::exact;
  double energy = 0;               ///< quadrature Dirichlet energy of `field`
  double gradient_norm = 0;        ///< final (descent) or zero (exact)
  int iterations = 0;
  std::vector<double> energy_history;  ///< discrete energy per descent iteration
  std::string message;
};

/// Dirichlet minimizer on B_{trace.radius} with the given trace, on a grid
/// with `radial` annuli and the trace's angular resolution.
MinimizeResult dir_minimize(const BoundaryTrace& trace, int radial, const MinimizeOptions& options = {});

}  // namespace qv
