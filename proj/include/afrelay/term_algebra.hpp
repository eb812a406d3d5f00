// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace afrelay::term_algebra {

/// One term coeff * x^power * exp(-rate * x).
/// Coefficients are kept in extended precision: selection pdfs carry
/// combinatorially large terms of alternating sign (about 2e8 around
/// n_total = 10) whose cancellation would otherwise eat the 1e-9
/// normalization budget.
struct ExpoTerm {
    long double coeff;
    int power;    // >= 0
    double rate;  // > 0
};

/// A finite signed sum of exponential-polynomial terms. This closed family
/// contains every selected-branch SNR pdf used in the analysis: the sum of
/// the n_sel largest of n_total i.i.d. unit-mean exponentials decomposes
/// into an Erlang block plus independent exponentials, and convolution
/// never leaves the family.
class ExpoTermSum {
public:
    /// Merges terms with equal (power, rate), drops zero coefficients and
    /// prunes relative magnitudes below 1e-14.
    ExpoTermSum(std::vector<ExpoTerm> terms, int n_total, int n_sel);

    const std::vector<ExpoTerm>& terms() const noexcept { return terms_; }
    int n_total() const noexcept { return n_total_; }
    int n_sel() const noexcept { return n_sel_; }

private:
    std::vector<ExpoTerm> terms_;
    int n_total_;
    int n_sel_;
};

/// Exact pdf of the sum of the n_sel largest of n_total i.i.d. unit-mean
/// exponential variables (generalized selection combining).
/// n_sel == n_total gives the single Erlang term x^(n-1) e^(-x) / (n-1)!.
ExpoTermSum gsc_pdf(int n_total, int n_sel);

/// Pointwise evaluation, terms grouped by rate with an underflow guard.
double eval(const ExpoTermSum& ts, double x);

/// Closed-form integral over [0, inf): sum coeff * power! / rate^(power+1).
double integral(const ExpoTermSum& ts);

/// Closed-form mean of the represented distribution.
double mean(const ExpoTermSum& ts);

/// Closed-form CDF at x >= 0.
double cdf(const ExpoTermSum& ts, double x);

/// Debug text form, one term per line: coeff power rate.
std::string dump_terms(const ExpoTermSum& ts);

}  // namespace afrelay::term_algebra
