// SPDX-License-Identifier: Apache-2.0

#include "afrelay/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace afrelay::specfun {

namespace {

constexpr double kLnDblMax = 709.78;

// log(cosh(z)) without overflow for large |z|.
double log_cosh(double z) {
    const double a = std::fabs(z);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0) || !(rel_tol > 0))
        throw std::domain_error("QuadratureSpec: tolerances must be positive");
    if (max_subdivisions < 1)
        throw std::domain_error("QuadratureSpec: max_subdivisions must be >= 1");
    if (panel_order < 2)
        throw std::domain_error("QuadratureSpec: panel_order must be >= 2");
}

double ln_gamma(double x) {
    if (!(x > 0))
        throw std::domain_error("ln_gamma: argument must be positive");

    // Shift into the x >= 12 regime where the Stirling series converges
    // well past double precision.
    double shift = 0.0;
    double y = x;
    while (y < 12.0) {
        shift += std::log(y);
        y += 1.0;
    }

    // B_{2k} / (2k (2k-1)) for k = 1..8.
    static constexpr double kStirling[] = {
        1.0 / 12.0,     -1.0 / 360.0,      1.0 / 1260.0, -1.0 / 1680.0,
        1.0 / 1188.0,   -691.0 / 360360.0, 1.0 / 156.0,  -3617.0 / 122400.0,
    };
    const double inv = 1.0 / y;
    const double inv2 = inv * inv;
    double series = 0.0;
    double p = inv;
    for (double c : kStirling) {
        series += c * p;
        p *= inv2;
    }
    const double half_ln_two_pi = 0.91893853320467274178;
    const double core = (y - 0.5) * std::log(y) - y + half_ln_two_pi + series;
    return core - shift;
}

double harmonic(unsigned n) {
    double h = 0.0;
    for (unsigned k = n; k >= 1; --k) h += 1.0 / k;
    return h;
}

double bessel_k(double order, double x) {
    if (!(x > 0))
        throw std::domain_error("bessel_k: argument must be positive");
    if (!std::isfinite(order))
        throw std::domain_error("bessel_k: order must be finite");
    const double nu = std::fabs(order);  // K_{-v} = K_v

    // Exponent of the integrand exp(-x cosh t + log cosh(nu t)).
    const auto expo = [&](double t) { return -x * std::cosh(t) + log_cosh(nu * t); };

    // Peak of the exponent: t* solves x sinh t = nu (t = 0 when nu = 0).
    const double t_peak = std::asinh(nu / x);
    const double e_peak = expo(t_peak);
    if (e_peak > kLnDblMax - 5.0)
        throw std::range_error("bessel_k: result overflows double range");

    // Truncate where the integrand has dropped ~1e-20 below the peak.
    double t_hi = t_peak + 1.0;
    while (expo(t_hi) - e_peak > -46.0) t_hi *= 2.0;
    double t_lo = t_peak;
    for (int i = 0; i < 30; ++i) {
        const double mid = 0.5 * (t_lo + t_hi);
        (expo(mid) - e_peak > -46.0 ? t_lo : t_hi) = mid;
    }
    const double t_max = t_hi;

    // Trapezoid with step halving: the integrand is even in t and decays
    // double-exponentially, so the refinement converges geometrically.
    const auto f = [&](double t) { return std::exp(expo(t) - e_peak); };
    int n = 48;
    double h = t_max / n;
    double sum = 0.5 * (f(0.0) + f(t_max));
    for (int i = 1; i < n; ++i) sum += f(i * h);
    double prev = sum * h;
    for (int round = 0; round < 12; ++round) {
        double odd = 0.0;
        for (int i = 0; i < n; ++i) odd += f((i + 0.5) * h);
        n *= 2;
        h *= 0.5;
        sum += odd;
        const double cur = sum * h;
        if (std::fabs(cur - prev) <= 1e-13 * std::fabs(cur) + 1e-305) {
            prev = cur;
            break;
        }
        prev = cur;
    }

    const double log_value = e_peak + std::log(prev);
    if (log_value > kLnDblMax)
        throw std::range_error("bessel_k: result overflows double range");
    return std::exp(log_value);
}

namespace {

struct GaussLegendreRuleExt {
    std::vector<long double> nodes;
    std::vector<long double> weights;
};

// Extended-precision Gauss-Legendre rule; same Newton iteration as the
// double rule but carried in long double so node error stays below the
// rounding floor of the integrals built on it.
const GaussLegendreRuleExt& gauss_legendre_ext(int n) {
    static thread_local std::map<int, GaussLegendreRuleExt> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendreRuleExt rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        long double z = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
        long double pp = 0.0L;
        for (int iter = 0; iter < 120; ++iter) {
            long double p0 = 1.0L, p1 = 0.0L;
            for (int j = 0; j < n; ++j) {
                const long double p2 = p1;
                p1 = p0;
                p0 = ((2.0L * j + 1.0L) * z * p1 - j * p2) / (j + 1.0L);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0L);
            const long double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-19L) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0L / ((1.0L - z * z) * pp * pp);
    }
    auto [pos, _] = cache.emplace(n, std::move(rule));
    return pos->second;
}

template <typename Fn>
long double gl_panel_ext(const Fn& f, long double a, long double b,
                         const GaussLegendreRuleExt& rule) {
    const long double mid = 0.5L * (a + b);
    const long double halfw = 0.5L * (b - a);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + halfw * rule.nodes[i]);
    return acc * halfw;
}

template <typename Fn>
long double adapt_ext(const Fn& f, long double a, long double b, long double whole,
                      long double tol, const GaussLegendreRuleExt& rule, int& budget) {
    const long double mid = 0.5L * (a + b);
    const long double left = gl_panel_ext(f, a, mid, rule);
    const long double right = gl_panel_ext(f, mid, b, rule);
    const long double delta = left + right - whole;
    if (std::fabs(delta) <= tol || budget <= 0) return left + right;
    budget -= 1;
    return adapt_ext(f, a, mid, left, 0.5L * tol, rule, budget) +
           adapt_ext(f, mid, b, right, 0.5L * tol, rule, budget);
}

}  // namespace

long double hyp_u_ext(int a, int b, long double x) {
    if (a < 1)
        throw std::domain_error("hyp_u: first parameter must be a positive integer");
    if (!(x > 0) || !std::isfinite(static_cast<double>(x)))
        throw std::domain_error("hyp_u: argument must be positive and finite");

    if (x > 1e8L) {
        // Leading asymptotic series, three terms.
        const long double c1 = static_cast<long double>(a) * (a - b + 1);
        const long double c2 = c1 * (a + 1.0L) * (a - b + 2) / 2.0L;
        return std::pow(x, static_cast<long double>(-a)) * (1.0L - c1 / x + c2 / (x * x));
    }

    // Gamma(a) * U(a,b,x) = int_0^inf e^{-x t} t^{a-1} (1+t)^{b-a-1} dt.
    // Substituting u = log(1+t) compresses the range to [0, log1p(C/x)] and
    // removes the boundary layer that appears for small x. The integrand is
    // evaluated relative to its peak in log space so intermediate values
    // never overflow.
    const long double w = static_cast<long double>(b - a);
    const auto log_integrand = [&](long double u) {
        const long double em1 = std::expm1(u);
        long double v = w * u - x * em1;
        if (a > 1) v += (a - 1) * std::log(em1);
        return v;
    };
    const long double u_max = std::log1p(745.0L / x);

    // The derivative of the exponent is monotone decreasing, so the peak is
    // bracketed by bisection on it.
    const auto slope = [&](long double u) {
        const long double eu = std::exp(u);
        long double s = w - x * eu;
        if (a > 1) s += (a - 1) * eu / std::expm1(u);
        return s;
    };
    long double peak = 0.0L;
    if (a > 1 || slope(1e-15L) > 0) {
        long double lo = 1e-15L, hi = u_max;
        if (slope(hi) >= 0) {
            peak = hi;
        } else {
            for (int i = 0; i < 90; ++i) {
                const long double mid = 0.5L * (lo + hi);
                (slope(mid) > 0 ? lo : hi) = mid;
            }
            peak = 0.5L * (lo + hi);
        }
    }
    long double l0 = log_integrand(peak);
    if (a == 1) l0 = std::max(l0, 0.0L);

    const auto f = [&](long double u) { return std::exp(log_integrand(u) - l0); };
    const auto& rule = gauss_legendre_ext(32);
    const long double coarse = gl_panel_ext(f, 0.0L, u_max, rule);
    int budget = 220;
    const long double integral =
        adapt_ext(f, 0.0L, u_max, coarse, 1e-17L * std::fabs(coarse), rule, budget);

    if (a <= 20) {  // (a-1)! is exact in extended precision up to here
        long double fact = 1.0L;
        for (int k = 2; k < a; ++k) fact *= k;
        return std::exp(l0) * integral / fact;
    }
    return std::exp(l0 + std::log(integral) -
                    static_cast<long double>(ln_gamma(static_cast<double>(a))));
}

double hyp_u(int a, int b, double x) {
    return static_cast<double>(hyp_u_ext(a, b, static_cast<long double>(x)));
}

const GaussLegendreRule& gauss_legendre(int n) {
    if (n < 2) throw std::domain_error("gauss_legendre: order must be >= 2");
    static thread_local std::map<int, GaussLegendreRule> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Newton iteration from the Chebyshev-angle initial guess.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    auto [pos, _] = cache.emplace(n, std::move(rule));
    return pos->second;
}

namespace {

double gl_panel(const std::function<double(double)>& f, double a, double b,
                const GaussLegendreRule& rule) {
    const double mid = 0.5 * (a + b);
    const double halfw = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + halfw * rule.nodes[i]);
    return acc * halfw;
}

struct AdaptState {
    const std::function<double(double)>* f;
    const GaussLegendreRule* rule;
    int budget;
    double residual = 0.0;
    bool exhausted = false;
};

double adapt(AdaptState& st, double a, double b, double whole, double tol) {
    const double mid = 0.5 * (a + b);
    const double left = gl_panel(*st.f, a, mid, *st.rule);
    const double right = gl_panel(*st.f, mid, b, *st.rule);
    const double delta = left + right - whole;
    if (!std::isfinite(delta))
        throw std::domain_error("integrate_finite: integrand is not finite on the interval");
    if (std::fabs(delta) <= tol) {
        st.residual += std::fabs(delta);
        return left + right;
    }
    if (st.budget <= 0) {
        st.exhausted = true;
        st.residual += std::fabs(delta);
        return left + right;
    }
    st.budget -= 1;
    return adapt(st, a, mid, left, 0.5 * tol) + adapt(st, mid, b, right, 0.5 * tol);
}

}  // namespace

double integrate_finite(const std::function<double(double)>& f, double lo, double hi,
                        const QuadratureSpec& spec) {
    spec.validate();
    if (!(lo <= hi))
        throw std::domain_error("integrate_finite: requires lo <= hi");
    if (lo == hi) return 0.0;

    const GaussLegendreRule& rule = gauss_legendre(spec.panel_order);
    const double coarse = gl_panel(f, lo, hi, rule);
    if (!std::isfinite(coarse))
        throw std::domain_error("integrate_finite: integrand is not finite on the interval");

    AdaptState st{&f, &rule, spec.max_subdivisions};
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::fabs(coarse));
    const double result = adapt(st, lo, hi, coarse, tol);
    if (st.exhausted && st.residual > std::max(spec.abs_tol, spec.rel_tol * std::fabs(result)))
        throw quadrature_error("integrate_finite: subdivision budget exhausted", result,
                               st.residual);
    return result;
}

}  // namespace afrelay::specfun
