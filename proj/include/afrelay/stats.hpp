// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "afrelay/analytic.hpp"

namespace afrelay::stats {

/// Two-sided Kolmogorov-Smirnov statistic of sorted samples against a CDF.
double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf);

/// Critical KS value at significance alpha (Stephens' approximation).
double ks_critical(std::size_t n, double alpha);

/// Numerical CDF of a Theta density, built once on a fine grid in
/// u = sqrt(theta) (composite Simpson plus an adaptive first cell for the
/// integrable singularity at the origin) and evaluated by interpolation.
class ThetaCdf {
public:
    explicit ThetaCdf(const analytic::BesselTermSum& pdf, int grid_points = 4096);

    double operator()(double theta) const;

private:
    std::vector<double> u_;    // grid in sqrt(theta)
    std::vector<double> cum_;  // CDF at grid nodes
};

}  // namespace afrelay::stats
