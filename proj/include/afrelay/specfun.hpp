// SPDX-License-Identifier: Apache-2.0
//
// afrelay: error-rate and capacity analysis for orthogonal space-time block
// codes over single-antenna amplify-and-forward relay channels.

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace afrelay::specfun {

/// Controls the adaptive finite-interval quadrature.
struct QuadratureSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 64;  // total panel splits allowed
    int panel_order = 32;       // Gauss-Legendre points per panel

    void validate() const;
};

/// Thrown when the subdivision budget runs out before the requested
/// tolerance is met. Carries the best estimate and the residual error
/// bound accumulated over the accepted panels.
class quadrature_error : public std::runtime_error {
public:
    quadrature_error(const std::string& what, double estimate, double residual)
        : std::runtime_error(what), estimate_(estimate), residual_(residual) {}

    double estimate() const noexcept { return estimate_; }
    double residual() const noexcept { return residual_; }

private:
    double estimate_;
    double residual_;
};

/// Natural log of the gamma function for x > 0.
/// Stirling series with Bernoulli corrections; arguments below 12 are
/// shifted up by the recurrence first.
double ln_gamma(double x);

/// Harmonic number H_n = sum_{k=1..n} 1/k, with H_0 = 0.
double harmonic(unsigned n);

/// Modified Bessel function of the second kind K_order(x), x > 0.
/// Evaluated from the integral over exp(-x*cosh t)*cosh(order*t) with
/// adaptive truncation and step-halving refinement; one uniform path for
/// all real orders, so K_{-v}(x) == K_v(x) holds exactly.
/// Throws std::domain_error for x <= 0 or non-finite order, and
/// std::range_error when the value would overflow (tiny x, large |order|).
double bessel_k(double order, double x);

/// Confluent hypergeometric function of the second kind U(a, b, x) for
/// integer a >= 1, integer b, x > 0, via the Laplace-type integral
/// representation. Beyond x > 1e8 the leading asymptotic series
/// x^{-a} * (first three terms) is returned instead.
double hyp_u(int a, int b, double x);

/// Extended-precision evaluation of the same representation. The closed-form
/// MGF sums terms that cancel by up to four orders of magnitude, so the
/// consistency checks between its two parameterizations need U values with
/// sub-double rounding error.
long double hyp_u_ext(int a, int b, long double x);

/// Adaptive Gauss-Legendre quadrature of f over [lo, hi].
/// Accepts once the panel-split error estimate is below
/// max(abs_tol, rel_tol*|estimate|), proportionally divided across panels.
/// Throws quadrature_error if max_subdivisions is exhausted first.
double integrate_finite(const std::function<double(double)>& f, double lo, double hi,
                        const QuadratureSpec& spec = {});

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
/// Exposed for callers that want to roll custom panel schemes.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(int n);

}  // namespace afrelay::specfun
