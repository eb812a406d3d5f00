// SPDX-License-Identifier: Apache-2.0

#include "afrelay/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "afrelay/specfun.hpp"

namespace afrelay::stats {

double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf) {
    const std::size_t n = sorted_samples.size();
    if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(sorted_samples[i]);
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    }
    return d;
}

double ks_critical(std::size_t n, double alpha) {
    if (n == 0 || !(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("ks_critical: bad arguments");
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double rn = std::sqrt(static_cast<double>(n));
    return c / (rn + 0.12 + 0.11 / rn);
}

ThetaCdf::ThetaCdf(const analytic::BesselTermSum& pdf, int grid_points) {
    if (grid_points < 16) throw std::invalid_argument("ThetaCdf: grid too small");
    const double u_max = std::sqrt(pdf.tail_cutoff());
    // Even number of intervals for Simpson pairs.
    const int n = grid_points + (grid_points % 2);
    const double h = u_max / n;

    u_.resize(n + 1);
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) {
        u_[i] = i * h;
        f[i] = i == 0 ? 0.0 : 2.0 * u_[i] * pdf.eval(u_[i] * u_[i]);
    }

    cum_.assign(n + 1, 0.0);
    // First cell adaptively: the density can carry a u*log(u) kink at 0.
    specfun::QuadratureSpec first_spec;
    first_spec.abs_tol = 1e-11;
    first_spec.rel_tol = 1e-9;
    first_spec.max_subdivisions = 64;
    first_spec.panel_order = 16;
    cum_[1] = specfun::integrate_finite(
        [&](double u) { return u <= 0.0 ? 0.0 : 2.0 * u * pdf.eval(u * u); }, 0.0, h, first_spec);
    // Simpson on each remaining cell with one midpoint evaluation.
    for (int i = 1; i < n; ++i) {
        const double mid = 0.5 * (u_[i] + u_[i + 1]);
        const double fm = 2.0 * mid * pdf.eval(mid * mid);
        cum_[i + 1] = cum_[i] + h / 6.0 * (f[i] + 4.0 * fm + f[i + 1]);
    }
    // Clamp to a proper CDF shape.
    for (int i = 1; i <= n; ++i) cum_[i] = std::max(cum_[i], cum_[i - 1]);
}

double ThetaCdf::operator()(double theta) const {
    if (theta <= 0.0) return 0.0;
    const double u = std::sqrt(theta);
    if (u >= u_.back()) return 1.0;
    const auto it = std::upper_bound(u_.begin(), u_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - u_.begin()) - 1;
    const double w = (u - u_[i]) / (u_[i + 1] - u_[i]);
    const double v = cum_[i] + w * (cum_[i + 1] - cum_[i]);
    return std::min(v, 1.0);
}

}  // namespace afrelay::stats
