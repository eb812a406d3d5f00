// SPDX-License-Identifier: Apache-2.0

#include "afrelay/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace afrelay::analytic {

using term_algebra::ExpoTerm;
using term_algebra::ExpoTermSum;

namespace {

long double factorial(int n) {
    long double f = 1.0L;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

bool is_power_of_two(int m) { return m >= 1 && (m & (m - 1)) == 0; }

// Matches the asymptotic branch inside hyp_u so that the overflow-safe
// evaluation below is continuous across the switch.
constexpr double kUAsymptoticSwitch = 1e8;

long double u_asymptotic_sum(int a, int b, long double inv_x) {
    const long double c1 = static_cast<long double>(a) * (a - b + 1);
    const long double c2 = c1 * (a + 1.0L) * (a - b + 2) / 2.0L;
    return 1.0L - c1 * inv_x + c2 * inv_x * inv_x;
}

}  // namespace

SelectionConfig SelectionConfig::make(int K, int N, int Ks, int Ns) {
    SelectionConfig cfg;
    cfg.K = K;
    cfg.N = N;
    cfg.Ks = Ks;
    cfg.Ns = Ns;
    const bool tx = Ks < K;
    const bool rx = Ns < N;
    cfg.mode = tx ? (rx ? SelectionMode::joint : SelectionMode::tx_only)
                  : (rx ? SelectionMode::rx_only : SelectionMode::none);
    cfg.validate();
    return cfg;
}

void SelectionConfig::validate() const {
    if (Ks < 1 || Ks > K || Ns < 1 || Ns > N)
        throw std::invalid_argument("SelectionConfig: need 1 <= Ks <= K and 1 <= Ns <= N");
    const bool tx = Ks < K;
    const bool rx = Ns < N;
    const SelectionMode expected = tx ? (rx ? SelectionMode::joint : SelectionMode::tx_only)
                                      : (rx ? SelectionMode::rx_only : SelectionMode::none);
    if (mode != expected)
        throw std::invalid_argument("SelectionConfig: mode inconsistent with antenna counts");
}

ConstellationSpec ConstellationSpec::mpsk(int M) {
    if (M < 2 || !is_power_of_two(M))
        throw std::invalid_argument("mpsk: M must be a power of 2, M >= 2");
    ConstellationSpec c;
    c.family = ModulationFamily::mpsk;
    c.M = M;
    const double s = std::sin(std::numbers::pi / M);
    c.g_factor = s * s;
    c.q = 0.0;
    c.bits_per_symbol = static_cast<int>(std::lround(std::log2(M)));
    return c;
}

ConstellationSpec ConstellationSpec::square_mqam(int M) {
    if (M < 4 || !is_power_of_two(M))
        throw std::invalid_argument("square_mqam: M must be a power of 2, M >= 4");
    const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
    if (root * root != M)
        throw std::invalid_argument("square_mqam: M must be a perfect square");
    ConstellationSpec c;
    c.family = ModulationFamily::square_mqam;
    c.M = M;
    c.g_factor = 3.0 / (2.0 * (M - 1));
    c.q = 1.0 - 1.0 / root;
    c.bits_per_symbol = static_cast<int>(std::lround(std::log2(M)));
    return c;
}

BesselTermSum::BesselTermSum(std::vector<BesselTerm> terms, int a_total, int a_sel, int b_total,
                             int b_sel)
    : a_total_(a_total), a_sel_(a_sel), b_total_(b_total), b_sel_(b_sel) {
    for (const BesselTerm& t : terms) {
        if (!(t.scale > 0)) throw std::domain_error("BesselTerm: scale must be positive");
        if (!std::isfinite(t.coeff)) throw std::domain_error("BesselTerm: coefficient must be finite");
    }
    std::sort(terms.begin(), terms.end(), [](const BesselTerm& a, const BesselTerm& b) {
        if (a.scale != b.scale) return a.scale < b.scale;
        if (a.power != b.power) return a.power < b.power;
        return std::abs(a.order) < std::abs(b.order);
    });
    for (const BesselTerm& t : terms) {
        if (!terms_.empty() && terms_.back().scale == t.scale && terms_.back().power == t.power &&
            std::abs(terms_.back().order) == std::abs(t.order)) {
            terms_.back().coeff += t.coeff;
        } else {
            terms_.push_back(t);
        }
    }
    std::erase_if(terms_, [](const BesselTerm& t) { return t.coeff == 0.0; });
}

double BesselTermSum::eval(double theta) const {
    if (!(theta > 0)) throw std::domain_error("BesselTermSum::eval: theta must be positive");
    const double root = std::sqrt(theta);
    double acc = 0.0;
    for (const BesselTerm& t : terms_) {
        const double arg = t.scale * root;
        if (arg > 705.0) continue;  // K underflows
        acc += t.coeff * std::pow(theta, t.power) * specfun::bessel_k(t.order, arg);
    }
    return acc;
}

double BesselTermSum::tail_cutoff() const {
    // K_v(scale*sqrt(theta)) decays like exp(-scale*sqrt(theta)); find where
    // every term envelope has dropped below ~1e-14.
    double u = 10.0;
    for (int i = 0; i < 60; ++i) {
        bool done = true;
        for (const BesselTerm& t : terms_) {
            const double lg = std::log(std::fabs(t.coeff) + 1e-300) +
                              2.0 * t.power * std::log(u) - t.scale * u;
            if (lg > -34.0) {
                done = false;
                break;
            }
        }
        if (done) break;
        u *= 1.5;
    }
    return u * u;
}

BesselTermSum product_pdf(const ExpoTermSum& tsA, const ExpoTermSum& tsB) {
    // Each pair of branch terms integrates to one Bessel term:
    //   int_0^inf a^{v-1} exp(-p a - q/a) da = 2 (q/p)^{v/2} K_v(2 sqrt(p q)).
    std::vector<BesselTerm> out;
    out.reserve(tsA.terms().size() * tsB.terms().size());
    for (const ExpoTerm& ta : tsA.terms()) {
        for (const ExpoTerm& tb : tsB.terms()) {
            BesselTerm t;
            t.order = tb.power - ta.power;
            t.power = 0.5 * (ta.power + tb.power);
            t.scale = 2.0 * std::sqrt(ta.rate * tb.rate);
            t.coeff = static_cast<double>(
                2.0L * ta.coeff * tb.coeff *
                std::pow(static_cast<long double>(ta.rate / tb.rate), 0.5L * t.order));
            out.push_back(t);
        }
    }
    return BesselTermSum(std::move(out), tsA.n_total(), tsA.n_sel(), tsB.n_total(), tsB.n_sel());
}

double pdf_theta(const SelectionConfig& cfg, double theta) {
    cfg.validate();
    if (!(theta > 0)) throw std::domain_error("pdf_theta: theta must be positive");
    const BesselTermSum pdf =
        product_pdf(term_algebra::gsc_pdf(cfg.K, cfg.Ks), term_algebra::gsc_pdf(cfg.N, cfg.Ns));
    return pdf.eval(theta);
}

std::vector<MgfTerm> mgf_terms(const ExpoTermSum& tsA, const ExpoTermSum& tsB) {
    // Pair (cA a^mA e^{-rA a}) x (cB b^mB e^{-rB b}) contributes
    //   cA cB mA! mB! rA^{mB-mA} s^{-(mB+1)} U(mB+1, mB+1-mA, rA rB / s).
    std::vector<MgfTerm> out;
    out.reserve(tsA.terms().size() * tsB.terms().size());
    for (const ExpoTerm& ta : tsA.terms()) {
        for (const ExpoTerm& tb : tsB.terms()) {
            MgfTerm t;
            t.x1 = ta.coeff * tb.coeff * factorial(ta.power) * factorial(tb.power) *
                   std::pow(static_cast<long double>(ta.rate), tb.power - ta.power);
            t.x2 = tb.power + 1;
            t.x3 = tb.power - ta.power + 1;
            t.x4 = ta.rate * tb.rate;
            out.push_back(t);
        }
    }
    return out;
}

double mgf(const std::vector<MgfTerm>& terms, double s) {
    if (s < 0) throw std::domain_error("mgf: transform diverges for s < 0");
    if (s == 0.0) return 1.0;
    long double acc = 0.0L;
    const long double sl = s;
    for (const MgfTerm& t : terms) {
        const long double x = t.x4 / sl;
        if (x > kUAsymptoticSwitch) {
            // Factor s^{-x2} into U's leading power to avoid overflow at
            // small s: s^{-x2} (x4/s)^{-x2} = x4^{-x2}.
            acc += t.x1 * std::pow(static_cast<long double>(t.x4), static_cast<long double>(-t.x2)) *
                   u_asymptotic_sum(t.x2, t.x3, 1.0L / x);
        } else {
            acc += t.x1 * std::pow(sl, static_cast<long double>(-t.x2)) *
                   specfun::hyp_u_ext(t.x2, t.x3, x);
        }
    }
    return static_cast<double>(acc);
}

double mgf(const ExpoTermSum& tsA, const ExpoTermSum& tsB, double s) {
    return mgf(mgf_terms(tsA, tsB), s);
}

double mgf(const SelectionConfig& cfg, double s) {
    cfg.validate();
    return mgf(term_algebra::gsc_pdf(cfg.K, cfg.Ks), term_algebra::gsc_pdf(cfg.N, cfg.Ns), s);
}

double mgf_receive_selection(const SelectionConfig& cfg, double s) {
    cfg.validate();
    if (cfg.Ks < cfg.K)
        throw std::domain_error("mgf_receive_selection: requires full transmit array (Ks == K)");
    if (s < 0) throw std::domain_error("mgf_receive_selection: transform diverges for s < 0");
    if (s == 0.0) return 1.0;

    // Full transmit array: the A branch is the single Erlang term
    // a^{K-1} e^{-a} / (K-1)!. Each B term then yields one compact-form
    // term with U's first parameter K -- the transposed parameterization of
    // the one used by mgf(), related through U(a,b,x) = x^{1-b} U(a-b+1,2-b,x).
    const int K = cfg.K;
    const ExpoTermSum tsB = term_algebra::gsc_pdf(cfg.N, cfg.Ns);
    long double acc = 0.0L;
    const long double sl = s;
    for (const ExpoTerm& tb : tsB.terms()) {
        const long double x1 =
            tb.coeff * factorial(tb.power) *
            std::pow(static_cast<long double>(tb.rate), (K - 1) - tb.power);
        const int x2 = K;
        const int x3 = K - tb.power;
        const double x4 = tb.rate;
        const long double x = x4 / sl;
        if (x > kUAsymptoticSwitch) {
            acc += x1 * std::pow(static_cast<long double>(x4), static_cast<long double>(-x2)) *
                   u_asymptotic_sum(x2, x3, 1.0L / x);
        } else {
            acc += x1 * std::pow(sl, static_cast<long double>(-x2)) *
                   specfun::hyp_u_ext(x2, x3, x);
        }
    }
    return static_cast<double>(acc);
}

double mgf_by_quadrature(const BesselTermSum& pdf, double s, const specfun::QuadratureSpec& spec) {
    if (s < 0) throw std::domain_error("mgf_by_quadrature: requires s >= 0");
    // Substitute theta = u^2: the integrable K_0-type log singularity at the
    // origin becomes u log u, which the adaptive rule resolves quickly.
    const double u_max = std::sqrt(pdf.tail_cutoff());
    return specfun::integrate_finite(
        [&](double u) {
            if (u <= 0.0) return 0.0;
            return 2.0 * u * std::exp(-s * u * u) * pdf.eval(u * u);
        },
        0.0, u_max, spec);
}

namespace {

double ser_integral(const std::vector<MgfTerm>& terms, double snr_scale, double lo, double hi) {
    specfun::QuadratureSpec spec;
    spec.abs_tol = 1e-10;
    spec.rel_tol = 1e-8;
    spec.max_subdivisions = 200;
    return specfun::integrate_finite(
        [&](double theta) {
            const double sin2 = std::sin(theta) * std::sin(theta);
            return mgf(terms, snr_scale / sin2);
        },
        lo, hi, spec);
}

}  // namespace

double ser_mpsk(const ConstellationSpec& c, const SelectionConfig& cfg, double mu, double rate) {
    if (c.family != ModulationFamily::mpsk)
        throw std::invalid_argument("ser_mpsk: constellation is not M-PSK");
    if (!(mu >= 0)) throw std::domain_error("ser_mpsk: mu must be non-negative");
    if (!(rate > 0)) throw std::domain_error("ser_mpsk: rate must be positive");
    cfg.validate();

    const auto terms =
        mgf_terms(term_algebra::gsc_pdf(cfg.K, cfg.Ks), term_algebra::gsc_pdf(cfg.N, cfg.Ns));
    const double snr_scale = (mu * rate / cfg.Ns) * c.g_factor;
    const double hi = std::numbers::pi * (c.M - 1) / c.M;
    const double ser = ser_integral(terms, snr_scale, 0.0, hi) / std::numbers::pi;
    return std::clamp(ser, 0.0, static_cast<double>(c.M - 1) / c.M);
}

double ser_mqam(const ConstellationSpec& c, const SelectionConfig& cfg, double mu, double rate) {
    if (c.family != ModulationFamily::square_mqam)
        throw std::invalid_argument("ser_mqam: constellation is not square M-QAM");
    if (!(mu >= 0)) throw std::domain_error("ser_mqam: mu must be non-negative");
    if (!(rate > 0)) throw std::domain_error("ser_mqam: rate must be positive");
    cfg.validate();

    const auto terms =
        mgf_terms(term_algebra::gsc_pdf(cfg.K, cfg.Ks), term_algebra::gsc_pdf(cfg.N, cfg.Ns));
    const double snr_scale = (mu * rate / cfg.Ns) * c.g_factor;
    const double half_pi = 0.5 * std::numbers::pi;
    const double quarter_pi = 0.25 * std::numbers::pi;
    const double i1 = ser_integral(terms, snr_scale, 0.0, half_pi);
    const double i2 = ser_integral(terms, snr_scale, 0.0, quarter_pi);
    const double ser = (4.0 * c.q / std::numbers::pi) * i1 -
                       (4.0 * c.q * c.q / std::numbers::pi) * i2;
    return std::clamp(ser, 0.0, 1.0 - 1.0 / c.M);
}

double ber_gray_approx(double ser, const ConstellationSpec& c) {
    if (!(ser >= 0.0 && ser <= 1.0))
        throw std::domain_error("ber_gray_approx: ser must be a probability");
    return ser / c.bits_per_symbol;
}

}  // namespace afrelay::analytic
