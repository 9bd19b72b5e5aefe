#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace heatopt {

struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool upper = true;  ///< pass iff value <= threshold, else value >= threshold
    bool pass = false;
};

struct SelfCheckOptions {
    unsigned seed = 1;
    int M = 6;
    int level = 1;
    bool solves = true;  ///< include the checks that need a converged solve
};

/// Finite-difference, symmetry, duality and consistency checks on small problems of
/// every example and control kind.
std::vector<CheckResult> run_selfcheck(const SelfCheckOptions& opts = {});

/// One aligned line per check, PASS or FAIL first.
void write_selfcheck(std::ostream& os, const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace heatopt
