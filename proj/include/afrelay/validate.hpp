// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace afrelay::validate {

struct ValidateOptions {
    bool quick = false;             // reduced trial counts and config grids
    std::int64_t trials = 1000000;  // Monte Carlo sample size per check
    std::uint64_t seed = 20250808;
    int workers = 1;
    double tolerance_scale = 1.0;  // test hook: scales every pass tolerance
};

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

/// Runs the cross-validation suite: special-function identities, selection
/// pdf normalization/moments/KS, MGF duality (closed form vs quadrature vs
/// simulation), fast-vs-matrix simulator equivalence, and capacity closed
/// forms vs Monte Carlo. Prints one status line per check to `progress`
/// when non-null.
std::vector<CheckResult> run_validation(const ValidateOptions& opt, std::ostream* progress);

}  // namespace afrelay::validate
