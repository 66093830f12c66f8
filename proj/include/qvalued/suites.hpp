#pragma once

// Invariant suites behind `qvalued verify`. Each suite runs a handful of
// seeded checks at modest grid sizes and reports one row per check.

#include <cstdint>
#include <string>
#include <vector>

namespace qv {

struct CheckResult {
  std::string suite;
  std::string check;
  bool passed = false;
  std::string detail;
};

/// matching, energies, frequency, poincare, competitor, blowup
const std::vector<std::string>& suite_names();

/// Runs one suite, or every suite for "all". Throws InputError on an unknown name.
std::vector<CheckResult> run_suite(const std::string& name, std::uint64_t seed);

/// Fixed-width pass/fail table, one line per check plus a summary line.
std::string format_table(const std::vector<CheckResult>& results);

}  // namespace qv
