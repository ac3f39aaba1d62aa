#pragma once

#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "flatcone/recurrence.hpp"

namespace flatcone {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string expected;
  std::string actual;
  std::string tolerance;
  bool pass = false;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  SolverConfig config;
  std::uint64_t seed = 1;
  std::size_t torus_samples = 1000000;
  double epsilon = 0.01;
  /// Only the criteria that finish in well under a second.
  bool quick = false;
  /// Empty means all ten.
  std::set<int> only;
};

/// Criteria run by --quick.
inline const std::set<int> kQuickCriteria{1, 2, 3, 6, 7, 8, 9, 10};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// One line per criterion: id, PASS/FAIL, name, expected, actual, tolerance, time.
void print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results);

}  // namespace flatcone
