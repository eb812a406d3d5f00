// SPDX-License-Identifier: Apache-2.0

#include "afrelay/term_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace afrelay::term_algebra {

namespace {

long double factorial_l(int n) {
    long double f = 1.0L;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

bool same_rate(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(a, b); }

// Convolution with an exponential density rho * exp(-rho x). The family is
// closed: a term (c, m, r) maps to one term at rate rho plus terms of power
// <= m at rate r, via int_0^x t^m e^{-a t} dt with a = r - rho.
std::vector<ExpoTerm> convolve_exponential(const std::vector<ExpoTerm>& in, double rho) {
    std::vector<ExpoTerm> out;
    for (const ExpoTerm& t : in) {
        if (same_rate(t.rate, rho)) {
            out.push_back({t.coeff * rho / (t.power + 1.0L), t.power + 1, t.rate});
            continue;
        }
        const long double a = static_cast<long double>(t.rate) - rho;
        long double apow = a;
        for (int i = 0; i < t.power; ++i) apow *= a;  // a^(power+1)
        const long double lead = t.coeff * rho * factorial_l(t.power) / apow;
        out.push_back({lead, 0, rho});
        long double ai = 1.0L;  // a^i / i!
        for (int i = 0; i <= t.power; ++i) {
            out.push_back({-lead * ai, i, t.rate});
            ai *= a / (i + 1.0L);
        }
    }
    return out;
}

}  // namespace

ExpoTermSum::ExpoTermSum(std::vector<ExpoTerm> terms, int n_total, int n_sel)
    : n_total_(n_total), n_sel_(n_sel) {
    for (const ExpoTerm& t : terms) {
        if (!(t.rate > 0)) throw std::domain_error("ExpoTerm: rate must be positive");
        if (t.power < 0) throw std::domain_error("ExpoTerm: power must be non-negative");
        if (!std::isfinite(static_cast<double>(t.coeff)))
            throw std::domain_error("ExpoTerm: coefficient must be finite");
    }
    std::sort(terms.begin(), terms.end(), [](const ExpoTerm& a, const ExpoTerm& b) {
        if (!same_rate(a.rate, b.rate)) return a.rate < b.rate;
        return a.power < b.power;
    });
    long double max_abs = 0.0L;
    for (const ExpoTerm& t : terms) max_abs = std::max(max_abs, std::fabs(t.coeff));
    for (const ExpoTerm& t : terms) {
        if (!terms_.empty() && terms_.back().power == t.power &&
            same_rate(terms_.back().rate, t.rate)) {
            terms_.back().coeff += t.coeff;
        } else {
            terms_.push_back(t);
        }
    }
    std::erase_if(terms_, [max_abs](const ExpoTerm& t) {
        return t.coeff == 0.0L || std::fabs(t.coeff) < 1e-14L * max_abs;
    });
}

ExpoTermSum gsc_pdf(int n_total, int n_sel) {
    if (n_sel < 1 || n_sel > n_total)
        throw std::domain_error("gsc_pdf: need 1 <= n_sel <= n_total");

    // Spacings decomposition of exponential order statistics: the sum of
    // the n_sel largest equals Erlang(n_sel, 1) plus independent
    // exponentials with rates j / n_sel for j = n_sel+1 .. n_total.
    std::vector<ExpoTerm> terms{{1.0L / factorial_l(n_sel - 1), n_sel - 1, 1.0}};
    for (int j = n_sel + 1; j <= n_total; ++j)
        terms = convolve_exponential(terms, static_cast<double>(j) / n_sel);
    return ExpoTermSum(std::move(terms), n_total, n_sel);
}

double eval(const ExpoTermSum& ts, double x) {
    if (x < 0) throw std::domain_error("eval: x must be non-negative");
    const auto& terms = ts.terms();
    long double total = 0.0L;
    std::size_t i = 0;
    while (i < terms.size()) {
        // Terms are sorted by rate; sum each rate group under one exponential.
        const double rate = terms[i].rate;
        std::size_t j = i;
        long double poly = 0.0L;
        double max_log = -1e300;
        while (j < terms.size() && same_rate(terms[j].rate, rate)) {
            if (x > 0)
                max_log = std::max(
                    max_log, static_cast<double>(std::log(std::fabs(terms[j].coeff))) +
                                 terms[j].power * std::log(x));
            ++j;
        }
        if (x == 0.0) {
            for (std::size_t k = i; k < j; ++k)
                if (terms[k].power == 0) poly += terms[k].coeff;
            total += poly;
        } else if (max_log - rate * x > -745.0) {  // group contributes above underflow
            // Horner over the powers present (they may be sparse in a group).
            int prev_power = -1;
            for (std::size_t k = j; k-- > i;) {
                if (prev_power >= 0)
                    for (int p = prev_power; p > terms[k].power; --p) poly *= x;
                poly += terms[k].coeff;
                prev_power = terms[k].power;
            }
            for (int p = prev_power; p > 0; --p) poly *= x;
            total += poly * std::exp(-static_cast<long double>(rate) * x);
        }
        i = j;
    }
    return static_cast<double>(total);
}

double integral(const ExpoTermSum& ts) {
    long double acc = 0.0L;
    for (const ExpoTerm& t : ts.terms())
        acc += t.coeff * factorial_l(t.power) / std::pow(static_cast<long double>(t.rate), t.power + 1);
    return static_cast<double>(acc);
}

double mean(const ExpoTermSum& ts) {
    long double acc = 0.0L;
    for (const ExpoTerm& t : ts.terms())
        acc += t.coeff * factorial_l(t.power + 1) /
               std::pow(static_cast<long double>(t.rate), t.power + 2);
    return static_cast<double>(acc);
}

double cdf(const ExpoTermSum& ts, double x) {
    if (x < 0) throw std::domain_error("cdf: x must be non-negative");
    long double acc = 0.0L;
    for (const ExpoTerm& t : ts.terms()) {
        // int_0^x t^m e^{-rt} dt = m!/r^{m+1} (1 - e^{-rx} sum_{i<=m} (rx)^i/i!)
        const long double rx = static_cast<long double>(t.rate) * x;
        long double tail = std::exp(-rx);  // Poisson pmf p_0, then iterate upward
        long double sum_tail = tail;
        for (int i = 1; i <= t.power; ++i) {
            tail *= rx / i;
            sum_tail += tail;
        }
        acc += t.coeff * factorial_l(t.power) /
               std::pow(static_cast<long double>(t.rate), t.power + 1) * (1.0L - sum_tail);
    }
    return static_cast<double>(acc);
}

std::string dump_terms(const ExpoTermSum& ts) {
    std::string out;
    char line[128];
    for (const ExpoTerm& t : ts.terms()) {
        std::snprintf(line, sizeof(line), "%.21Lg %d %.17g\n", t.coeff, t.power, t.rate);
        out += line;
    }
    return out;
}

}  // namespace afrelay::term_algebra
