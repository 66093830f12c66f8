#pragma once

// Batch front end behind the `qvalued` executable.
//
//   qvalued generate   --kind K [--qj Q ...] [--mode L ...] --out f.json
//   qvalued analyze    f.json [--out-dir DIR]
//   qvalued competitor f.json [--out energies.json] [--field-out g.json]
//   qvalued blowup     f.json [--I0 X] [--out blowup.json]
//   qvalued verify     --suite NAME [--seed S]
//
// Every subcommand accepts --config path.json; flags given on the command line
// override values from the file.

#include <iosfwd>
#include <string>
#include <vector>

namespace qv::cli {

enum ExitCode : int { kSuccess = 0, kInvariantViolation = 1, kInputError = 2 };

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qv::cli
