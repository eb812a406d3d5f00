// SPDX-License-Identifier: Apache-2.0

#include "afrelay/validate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "afrelay/analytic.hpp"
#include "afrelay/capacity.hpp"
#include "afrelay/montecarlo.hpp"
#include "afrelay/specfun.hpp"
#include "afrelay/stats.hpp"
#include "afrelay/term_algebra.hpp"

namespace afrelay::validate {

namespace {

namespace ta = term_algebra;
namespace an = analytic;

constexpr std::uint64_t kDomainValidate = 4ull << 56;

class Suite {
public:
    Suite(double tolerance_scale, std::ostream* progress)
        : scale_(tolerance_scale), progress_(progress) {}

    double tol(double t) const { return t * scale_; }

    void check(const std::string& name, bool pass, const std::string& detail) {
        results_.push_back({name, pass, detail});
        if (progress_)
            *progress_ << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    }

    template <typename Fn>
    void run(const std::string& name, Fn fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            check(name, false, std::string("exception: ") + e.what());
        }
    }

    std::vector<CheckResult> take() { return std::move(results_); }

private:
    double scale_;
    std::ostream* progress_;
    std::vector<CheckResult> results_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1e-300, std::fabs(want));
}

std::uint64_t cfg_seed(std::uint64_t base, const an::SelectionConfig& c) {
    return base * 1000003ull + static_cast<std::uint64_t>(c.K * 1000 + c.N * 100 + c.Ks * 10 + c.Ns);
}

std::vector<an::SelectionConfig> config_grid(int max_k, int max_n) {
    std::vector<an::SelectionConfig> out;
    for (int K = 1; K <= max_k; ++K)
        for (int Ks = 1; Ks <= K; ++Ks)
            for (int N = 1; N <= max_n; ++N)
                for (int Ns = 1; Ns <= N; ++Ns) out.push_back(an::SelectionConfig::make(K, N, Ks, Ns));
    return out;
}

// Brute-force order-statistics sampler: sum of the n_sel largest of n_total
// i.i.d. unit-mean exponentials. Independent of the term-algebra path.
std::vector<double> sample_gsc_sums(int n_total, int n_sel, std::int64_t trials,
                                    std::uint64_t seed) {
    std::vector<double> out(static_cast<std::size_t>(trials));
    std::vector<double> draws(static_cast<std::size_t>(n_total));
    for (std::int64_t t = 0; t < trials; ++t) {
        mc::RandomStream stream(seed, kDomainValidate | static_cast<std::uint64_t>(t));
        for (auto& d : draws) d = stream.next_exponential();
        std::partial_sort(draws.begin(), draws.begin() + n_sel, draws.end(),
                          std::greater<double>());
        double s = 0.0;
        for (int i = 0; i < n_sel; ++i) s += draws[i];
        out[static_cast<std::size_t>(t)] = s;
    }
    return out;
}

void check_specfun(Suite& s) {
    s.run("specfun.bessel_symmetry", [&] {
        double worst = 0.0;
        for (double nu : {0.5, 1.0, 2.0, 2.5, 3.0, 7.25})
            for (double x : {1e-6, 0.01, 1.0, 10.0, 50.0})
                worst = std::max(worst, rel_err(specfun::bessel_k(-nu, x), specfun::bessel_k(nu, x)));
        s.check("specfun.bessel_symmetry", worst <= s.tol(1e-12), "max rel dev " + fmt(worst));
    });

    s.run("specfun.bessel_half_integer", [&] {
        double worst = 0.0;
        for (double x : {1e-4, 0.1, 1.0, 5.0, 20.0, 50.0}) {
            const double base = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
            worst = std::max(worst, rel_err(specfun::bessel_k(0.5, x), base));
            worst = std::max(worst, rel_err(specfun::bessel_k(1.5, x), base * (1.0 + 1.0 / x)));
            worst = std::max(worst,
                             rel_err(specfun::bessel_k(2.5, x), base * (1.0 + 3.0 / x + 3.0 / (x * x))));
        }
        s.check("specfun.bessel_half_integer", worst <= s.tol(1e-10), "max rel err " + fmt(worst));
    });

    s.run("specfun.u_identity", [&] {
        double worst = 0.0;
        for (int a = 1; a <= 6; ++a)
            for (double x : {0.01, 0.1, 1.0, 10.0, 100.0})
                worst = std::max(worst,
                                 std::fabs(specfun::hyp_u(a, a + 1, x) * std::pow(x, a) - 1.0));
        s.check("specfun.u_identity", worst <= s.tol(1e-9), "max |U*x^a - 1| " + fmt(worst));
    });

    s.run("specfun.u_recurrence", [&] {
        // U(a-1, b-1, x) = x U(a, b, x) + (a - b + 1) U(a, b-1, x), a >= 2.
        double worst = 0.0;
        for (int a = 2; a <= 6; ++a)
            for (int b = a - 4; b <= a; ++b)
                for (double x : {0.05, 0.5, 2.0, 25.0}) {
                    const double lhs = specfun::hyp_u(a - 1, b - 1, x);
                    const double rhs = x * specfun::hyp_u(a, b, x) +
                                       (a - b + 1) * specfun::hyp_u(a, b - 1, x);
                    worst = std::max(worst, rel_err(lhs, rhs));
                }
        s.check("specfun.u_recurrence", worst <= s.tol(1e-8), "max rel dev " + fmt(worst));
    });

    s.run("specfun.quadrature_polynomial", [&] {
        double worst = 0.0;
        for (int deg : {3, 17, 40, 63}) {
            const double got = specfun::integrate_finite(
                [deg](double x) { return std::pow(x, deg); }, 0.0, 1.0, {});
            worst = std::max(worst, rel_err(got, 1.0 / (deg + 1)));
        }
        s.check("specfun.quadrature_polynomial", worst <= s.tol(5e-14), "max rel err " + fmt(worst));
    });
}

void check_term_algebra(Suite& s, const ValidateOptions& opt) {
    s.run("term.normalization", [&] {
        double worst = 0.0;
        for (int n = 1; n <= 10; ++n)
            for (int k = 1; k <= n; ++k)
                worst = std::max(worst, std::fabs(ta::integral(ta::gsc_pdf(n, k)) - 1.0));
        s.check("term.normalization", worst <= s.tol(1e-9), "max |integral - 1| " + fmt(worst));
    });

    s.run("term.mean_identity", [&] {
        double worst = 0.0;
        for (int n = 1; n <= 10; ++n)
            for (int k = 1; k <= n; ++k) {
                double tail = 0.0;
                for (int i = k + 1; i <= n; ++i) tail += 1.0 / i;
                worst = std::max(worst, std::fabs(ta::mean(ta::gsc_pdf(n, k)) - (k + k * tail)));
            }
        s.check("term.mean_identity", worst <= s.tol(1e-9), "max |mean - closed form| " + fmt(worst));
    });

    s.run("term.density_nonnegative", [&] {
        double worst = 0.0;
        for (int n = 1; n <= 10; ++n)
            for (int k = 1; k <= n; ++k) {
                const auto pdf = ta::gsc_pdf(n, k);
                for (int i = 0; i < 10000; ++i)
                    worst = std::min(worst, ta::eval(pdf, 50.0 * i / 9999.0));
            }
        s.check("term.density_nonnegative", worst >= -s.tol(1e-9), "min density " + fmt(worst));
    });

    s.run("term.ks_vs_sampling", [&] {
        const std::int64_t trials = opt.quick ? 100000 : opt.trials;
        double worst_ratio = 0.0;
        std::string worst_cfg;
        for (int n = 1; n <= 8; ++n) {
            for (int k = 1; k <= n; ++k) {
                auto samples = sample_gsc_sums(n, k, trials, cfg_seed(opt.seed, an::SelectionConfig::make(k, n, k, k)));
                std::sort(samples.begin(), samples.end());
                const auto pdf = ta::gsc_pdf(n, k);
                const double d = stats::ks_statistic(
                    samples, [&](double x) { return ta::cdf(pdf, x); });
                const double crit = stats::ks_critical(samples.size(), 0.001);
                if (d / crit > worst_ratio) {
                    worst_ratio = d / crit;
                    worst_cfg = "(" + std::to_string(n) + "," + std::to_string(k) + ")";
                }
            }
        }
        s.check("term.ks_vs_sampling", worst_ratio <= s.tol(1.0),
                "worst D/crit " + fmt(worst_ratio) + " at " + worst_cfg);
    });
}

void check_analytic(Suite& s, const ValidateOptions& opt) {
    const int max_kn = opt.quick ? 3 : 4;
    const auto grid = config_grid(max_kn, max_kn);
    const std::vector<double> s_values =
        opt.quick ? std::vector<double>{0.5, 2.0} : std::vector<double>{0.1, 0.5, 1.0, 2.0, 5.0};

    s.run("analytic.mgf_term_structure", [&] {
        bool ok = true;
        for (const auto& cfg : grid) {
            const auto terms = an::mgf_terms(ta::gsc_pdf(cfg.K, cfg.Ks), ta::gsc_pdf(cfg.N, cfg.Ns));
            for (const auto& t : terms)
                ok = ok && t.x2 >= 1 && t.x4 > 0 && std::isfinite(t.x1);
        }
        s.check("analytic.mgf_term_structure", ok, "every term is x1*s^-x2*U(x2,x3,x4/s)");
    });

    s.run("analytic.pdf_normalization", [&] {
        double worst = 0.0;
        for (const auto& cfg : grid) {
            const auto pdf = an::product_pdf(ta::gsc_pdf(cfg.K, cfg.Ks), ta::gsc_pdf(cfg.N, cfg.Ns));
            worst = std::max(worst, std::fabs(an::mgf_by_quadrature(pdf, 0.0) - 1.0));
        }
        s.check("analytic.pdf_normalization", worst <= s.tol(1e-7), "max |integral - 1| " + fmt(worst));
    });

    s.run("analytic.pdf_nonnegative", [&] {
        double worst = 0.0;
        for (const auto& cfg : grid) {
            const auto pdf = an::product_pdf(ta::gsc_pdf(cfg.K, cfg.Ks), ta::gsc_pdf(cfg.N, cfg.Ns));
            for (int i = 1; i <= 64; ++i)
                worst = std::min(worst, pdf.eval(std::pow(10.0, -4.0 + 6.0 * i / 64.0)));
        }
        s.check("analytic.pdf_nonnegative", worst >= -s.tol(1e-7), "min density " + fmt(worst));
    });

    s.run("analytic.mgf_duality_quadrature", [&] {
        double worst = 0.0;
        for (const auto& cfg : grid) {
            const auto tsA = ta::gsc_pdf(cfg.K, cfg.Ks);
            const auto tsB = ta::gsc_pdf(cfg.N, cfg.Ns);
            const auto pdf = an::product_pdf(tsA, tsB);
            const auto terms = an::mgf_terms(tsA, tsB);
            for (double sv : s_values)
                worst = std::max(worst,
                                 std::fabs(an::mgf(terms, sv) - an::mgf_by_quadrature(pdf, sv)));
        }
        s.check("analytic.mgf_duality_quadrature", worst <= s.tol(1e-6),
                "max |closed - quadrature| " + fmt(worst));
    });

    s.run("analytic.mgf_duality_empirical", [&] {
        const std::int64_t trials = opt.quick ? 100000 : opt.trials;
        double worst_sigmas = 0.0;
        for (const auto& cfg : grid) {
            const auto samples =
                mc::sample_theta_batch(cfg, trials, cfg_seed(opt.seed, cfg) ^ 0xa5c3, opt.workers);
            const auto terms = an::mgf_terms(ta::gsc_pdf(cfg.K, cfg.Ks), ta::gsc_pdf(cfg.N, cfg.Ns));
            for (double sv : s_values) {
                double sum = 0.0, sumsq = 0.0;
                for (double th : samples) {
                    const double v = std::exp(-sv * th);
                    sum += v;
                    sumsq += v * v;
                }
                const double mean = sum / trials;
                const double se =
                    std::sqrt(std::max(0.0, (sumsq - trials * mean * mean) / (trials - 1)) / trials);
                worst_sigmas = std::max(worst_sigmas, std::fabs(an::mgf(terms, sv) - mean) / se);
            }
        }
        s.check("analytic.mgf_duality_empirical", worst_sigmas <= s.tol(3.0),
                "worst deviation " + fmt(worst_sigmas) + " sigma");
    });

    s.run("analytic.pdf_ks_theta", [&] {
        const std::int64_t trials = opt.quick ? 100000 : opt.trials;
        const int grid_points = opt.quick ? 4096 : 16384;
        double worst_ratio = 0.0;
        std::string worst_cfg;
        for (const auto& cfg : grid) {
            auto samples = mc::sample_theta_batch(cfg, trials, cfg_seed(opt.seed, cfg), opt.workers);
            std::sort(samples.begin(), samples.end());
            const auto pdf = an::product_pdf(ta::gsc_pdf(cfg.K, cfg.Ks), ta::gsc_pdf(cfg.N, cfg.Ns));
            const stats::ThetaCdf cdf(pdf, grid_points);
            const double d = stats::ks_statistic(samples, [&](double x) { return cdf(x); });
            const double ratio = d / stats::ks_critical(samples.size(), 0.001);
            if (ratio > worst_ratio) {
                worst_ratio = ratio;
                worst_cfg = std::to_string(cfg.K) + "x" + std::to_string(cfg.N) + " sel " +
                            std::to_string(cfg.Ks) + "/" + std::to_string(cfg.Ns);
            }
        }
        s.check("analytic.pdf_ks_theta", worst_ratio <= s.tol(1.0),
                "worst D/crit " + fmt(worst_ratio) + " at " + worst_cfg);
    });

    s.run("analytic.mean_identity", [&] {
        // -d/ds mgf at 0 equals mean(A) * mean(B); the transform domain ends
        // at s = 0, so use the one-sided second-order stencil with h = 1e-5.
        const double h = 1e-5;
        double worst = 0.0;
        for (const auto& cfg : grid) {
            const auto tsA = ta::gsc_pdf(cfg.K, cfg.Ks);
            const auto tsB = ta::gsc_pdf(cfg.N, cfg.Ns);
            const auto terms = an::mgf_terms(tsA, tsB);
            const double deriv =
                (-3.0 * an::mgf(terms, 0.0) + 4.0 * an::mgf(terms, h) - an::mgf(terms, 2.0 * h)) /
                (2.0 * h);
            worst = std::max(worst, rel_err(-deriv, ta::mean(tsA) * ta::mean(tsB)));
        }
        s.check("analytic.mean_identity", worst <= s.tol(1e-4), "max rel err " + fmt(worst));
    });

    s.run("analytic.rx_selection_consistency", [&] {
        double worst = 0.0;
        for (int K = 1; K <= max_kn; ++K)
            for (int N = 1; N <= max_kn; ++N)
                for (int Ns = 1; Ns <= N; ++Ns) {
                    const auto cfg = an::SelectionConfig::make(K, N, K, Ns);
                    for (double sv : s_values)
                        worst = std::max(worst, rel_err(an::mgf_receive_selection(cfg, sv),
                                                        an::mgf(cfg, sv)));
                }
        s.check("analytic.rx_selection_consistency", worst <= s.tol(1e-12),
                "max rel dev " + fmt(worst));
    });

    s.run("analytic.zero_snr_limits", [&] {
        double worst = 0.0;
        const auto cfg = an::SelectionConfig::make(2, 2, 2, 2);
        for (int M : {2, 4, 8, 16, 32, 64}) {
            const double ser = an::ser_mpsk(an::ConstellationSpec::mpsk(M), cfg, 0.0, 1.0);
            worst = std::max(worst, std::fabs(ser - static_cast<double>(M - 1) / M));
        }
        for (int M : {4, 16, 64}) {
            const double ser = an::ser_mqam(an::ConstellationSpec::square_mqam(M), cfg, 0.0, 1.0);
            worst = std::max(worst, std::fabs(ser - (1.0 - 1.0 / M)));
        }
        s.check("analytic.zero_snr_limits", worst <= s.tol(1e-10), "max abs err " + fmt(worst));
    });

    s.run("analytic.ser_monotone", [&] {
        const auto cfg = an::SelectionConfig::make(2, 2, 2, 2);
        const auto c = an::ConstellationSpec::mpsk(8);
        bool ok = true;
        double prev = 1.0;
        for (int db = 0; db <= 24; db += 3) {
            const double ser = an::ser_mpsk(c, cfg, std::pow(10.0, db / 10.0), 1.0);
            ok = ok && ser < prev;
            prev = ser;
        }
        s.check("analytic.ser_monotone", ok, "8-PSK SER strictly decreasing over 0..24 dB");
    });
}

void check_montecarlo(Suite& s, const ValidateOptions& opt) {
    s.run("sim.gray_adjacency", [&] {
        bool ok = true;
        for (int M : {2, 4, 8, 16, 32, 64}) {
            const mc::Constellation con(an::ConstellationSpec::mpsk(M));
            double dmin = 1e9;
            for (int i = 0; i < M; ++i)
                for (int j = i + 1; j < M; ++j)
                    dmin = std::min(dmin, std::abs(con.point(i) - con.point(j)));
            for (int i = 0; i < M; ++i)
                for (int j = i + 1; j < M; ++j)
                    if (std::abs(con.point(i) - con.point(j)) < dmin * 1.0001)
                        ok = ok && std::popcount(con.label(i) ^ con.label(j)) == 1;
        }
        for (int M : {4, 16, 64}) {
            const mc::Constellation con(an::ConstellationSpec::square_mqam(M));
            double dmin = 1e9;
            for (int i = 0; i < M; ++i)
                for (int j = i + 1; j < M; ++j)
                    dmin = std::min(dmin, std::abs(con.point(i) - con.point(j)));
            for (int i = 0; i < M; ++i)
                for (int j = i + 1; j < M; ++j)
                    if (std::abs(con.point(i) - con.point(j)) < dmin * 1.0001)
                        ok = ok && std::popcount(con.label(i) ^ con.label(j)) == 1;
        }
        s.check("sim.gray_adjacency", ok, "minimum-distance neighbours differ in exactly 1 bit");
    });

    s.run("sim.noiseless_detection", [&] {
        mc::SimConfig cfg;
        cfg.selection = an::SelectionConfig::make(3, 2, 2, 1);
        cfg.constellation = an::ConstellationSpec::mpsk(8);
        cfg.mu_db = 0.0;
        bool ok = true;
        for (int t = 0; t < 500; ++t) {
            mc::RandomStream stream(opt.seed, kDomainValidate | (1ull << 40) | t);
            const auto ch = mc::sample_channel(3, 2, stream);
            const auto sel = mc::select_antennas(ch, 2, 1);
            const std::array<int, 2> tx{t % 8, (t / 8) % 8};
            const auto det = mc::transmit_and_detect(cfg, ch, sel, tx, stream, true);
            ok = ok && det[0] == tx[0] && det[1] == tx[1];
        }
        s.check("sim.noiseless_detection", ok, "perfect detection with Z forced to 0");
    });

    s.run("sim.energy_accounting", [&] {
        // Full 2x2 array: the average received signal power per antenna per
        // channel use under lambda = mu / Ns equals mu.
        const double mu_db = 7.0;
        const double mu = std::pow(10.0, mu_db / 10.0);
        const std::int64_t uses = opt.quick ? 100000 : 1000000;
        double power_sum = 0.0;
        std::int64_t count = 0;
        const mc::Constellation con(an::ConstellationSpec::mpsk(8));
        for (std::int64_t t = 0; t < uses / 2; ++t) {
            mc::RandomStream stream(opt.seed, kDomainValidate | (2ull << 40) | t);
            const auto ch = mc::sample_channel(2, 2, stream);
            const auto code = mc::alamouti_encode(con.point(t % 8), con.point((t / 8) % 8));
            for (int slot = 0; slot < 2; ++slot)
                for (int j = 0; j < 2; ++j) {
                    mc::cplx sig = 0.0;
                    for (int i = 0; i < 2; ++i) sig += code[slot][i] * ch.h[i] * ch.g[j];
                    power_sum += std::norm(std::sqrt(mu / 2.0) * sig);
                    count += 1;
                }
        }
        const double measured = power_sum / count;
        const double err = rel_err(measured, mu);
        s.check("sim.energy_accounting", err <= s.tol(0.01),
                "mean rx power " + fmt(measured) + " vs mu " + fmt(mu));
    });

    s.run("sim.fast_vs_matrix", [&] {
        mc::SimConfig cfg;
        cfg.selection = an::SelectionConfig::make(2, 2, 2, 2);
        cfg.constellation = an::ConstellationSpec::mpsk(8);
        cfg.mu_db = 10.0;
        cfg.min_symbols = opt.quick ? 200000 : opt.trials;
        cfg.max_symbols = cfg.min_symbols + 200000;
        cfg.min_errors = 200;
        cfg.seed = opt.seed;
        cfg.workers = opt.workers;
        const auto matrix = mc::run_ser_sim(cfg);
        cfg.seed = opt.seed + 77;  // independent draws for the second route
        const auto fast = mc::run_fast_equivalent_sim(cfg);
        const double gap = std::fabs(matrix.ser - fast.ser);
        const double sigma = std::hypot(matrix.ser_stderr, fast.ser_stderr);
        s.check("sim.fast_vs_matrix", gap <= s.tol(3.0) * sigma,
                "|matrix - fast| = " + fmt(gap) + " vs 3 sigma " + fmt(3.0 * sigma));
    });

    s.run("sim.analytic_vs_sim", [&] {
        double worst = 0.0;
        {
            mc::SimConfig cfg;
            cfg.selection = an::SelectionConfig::make(2, 2, 2, 2);
            cfg.constellation = an::ConstellationSpec::mpsk(8);
            cfg.mu_db = 10.0;
            cfg.min_symbols = opt.quick ? 200000 : opt.trials;
            cfg.max_symbols = cfg.min_symbols + 200000;
            cfg.seed = opt.seed + 1;
            cfg.workers = opt.workers;
            const auto sim = mc::run_ser_sim(cfg);
            const double exact =
                an::ser_mpsk(cfg.constellation, cfg.selection, std::pow(10.0, 1.0), 1.0);
            worst = std::max(worst, std::fabs(sim.ser - exact) / sim.ser_stderr);
        }
        {
            mc::SimConfig cfg;
            cfg.selection = an::SelectionConfig::make(2, 2, 2, 1);
            cfg.constellation = an::ConstellationSpec::square_mqam(16);
            cfg.mu_db = 12.0;
            cfg.min_symbols = opt.quick ? 200000 : opt.trials;
            cfg.max_symbols = cfg.min_symbols + 200000;
            cfg.seed = opt.seed + 2;
            cfg.workers = opt.workers;
            const auto sim = mc::run_ser_sim(cfg);
            const double exact =
                an::ser_mqam(cfg.constellation, cfg.selection, std::pow(10.0, 1.2), 1.0);
            worst = std::max(worst, std::fabs(sim.ser - exact) / sim.ser_stderr);
        }
        s.check("sim.analytic_vs_sim", worst <= s.tol(3.0),
                "worst deviation " + fmt(worst) + " sigma");
    });
}

void check_capacity(Suite& s, const ValidateOptions& opt) {
    s.run("capacity.closed_form_vs_mc", [&] {
        const std::int64_t trials = opt.quick ? 200000 : 10000000;
        // One pass per K: prefix maxima give E[max of K] for every K at once.
        std::vector<double> max_mean(8, 0.0);
        for (std::int64_t t = 0; t < trials; ++t) {
            mc::RandomStream stream(opt.seed, kDomainValidate | (3ull << 40) | t);
            double m = 0.0;
            for (int k = 1; k <= 7; ++k) {
                m = std::max(m, stream.next_exponential());
                max_mean[k] += m;
            }
        }
        for (int k = 1; k <= 7; ++k) max_mean[k] /= trials;

        double worst = 0.0;
        // Transmit side: E{delta_s} = N * H_K.
        for (int K = 1; K <= 7; ++K)
            worst = std::max(worst, rel_err(3.0 * max_mean[K],
                                            capacity::expected_delta_tx_selection(K, 3)));
        // Receive side: E[sum of Ns largest of N] for every Ns in one pass.
        std::vector<double> draws;
        for (int N = 2; N <= 10; ++N) {
            std::vector<double> gsc_mean(N + 1, 0.0);
            draws.resize(N);
            for (std::int64_t t = 0; t < trials; ++t) {
                mc::RandomStream stream(opt.seed,
                                        kDomainValidate | (4ull << 40) | (static_cast<std::uint64_t>(N) << 34) | t);
                for (auto& d : draws) d = stream.next_exponential();
                std::sort(draws.begin(), draws.end(), std::greater<double>());
                double acc = 0.0;
                for (int ns = 1; ns <= N; ++ns) {
                    acc += draws[ns - 1];
                    gsc_mean[ns] += acc;
                }
            }
            for (int ns = 1; ns <= N; ++ns) gsc_mean[ns] /= trials;
            for (int K = 1; K <= 7; ++K)
                for (int ns = 1; ns <= N; ++ns)
                    worst = std::max(worst, rel_err(max_mean[K] * gsc_mean[ns],
                                                    capacity::delta_bar(K, N, ns)));
        }
        s.check("capacity.closed_form_vs_mc", worst <= s.tol(0.005), "max rel err " + fmt(worst));
    });

    s.run("capacity.tx_single_antenna_optimality", [&] {
        const std::int64_t trials = opt.quick ? 100000 : opt.trials;
        bool ok = true;
        for (int K = 2; K <= 4; ++K) {
            std::vector<double> mean(K + 1, 0.0);
            std::vector<double> draws(K);
            for (std::int64_t t = 0; t < trials; ++t) {
                mc::RandomStream stream(opt.seed, kDomainValidate | (5ull << 40) | (static_cast<std::uint64_t>(K) << 34) | t);
                for (auto& d : draws) d = stream.next_exponential();
                std::sort(draws.begin(), draws.end(), std::greater<double>());
                double acc = 0.0;
                for (int ks = 1; ks <= K; ++ks) {
                    acc += draws[ks - 1];
                    mean[ks] += acc / ks;  // equal power split
                }
            }
            for (int ks = 2; ks <= K; ++ks) ok = ok && mean[1] >= mean[ks];
        }
        s.check("capacity.tx_single_antenna_optimality", ok,
                "E{delta_s} maximal at Ks = 1 for K <= 4");
    });

    s.run("capacity.delta_monotone", [&] {
        bool ok = true;
        for (int K = 1; K <= 7; ++K)
            for (int N = 2; N <= 10; ++N)
                for (int ns = 2; ns <= N; ++ns)
                    ok = ok && capacity::delta_bar(K, N, ns) > capacity::delta_bar(K, N, ns - 1);
        for (int N = 2; N <= 10; ++N)
            for (int K = 2; K <= 7; ++K)
                ok = ok &&
                     capacity::min_receive_antennas(K, N) <= capacity::min_receive_antennas(K - 1, N);
        s.check("capacity.delta_monotone", ok,
                "delta_bar increasing in Ns; selected count non-increasing in K");
    });

    s.run("capacity.table_reference_points", [&] {
        const bool ok = capacity::min_receive_antennas(2, 2) == 1 &&
                        capacity::min_receive_antennas(2, 5) == 2 &&
                        capacity::min_receive_antennas(4, 10) == 2 &&
                        capacity::min_receive_antennas(5, 10) == 2;
        const auto table = capacity::capacity_table(2, 7, 2, 10);
        const auto disc = capacity::reference_table_discrepancies(table);
        s.check("capacity.table_reference_points", ok,
                "anchor cells match; " + std::to_string(disc.size()) +
                    " cells differ from the printed reference");
    });

    s.run("capacity.jensen", [&] {
        const std::int64_t trials = opt.quick ? 20000 : 200000;
        bool ok = true;
        const double rho = 10.0;
        for (const auto& p :
             {capacity::CapacityParams{rho, 5, 5, 1, 1}, capacity::CapacityParams{rho, 5, 10, 1, 2},
              capacity::CapacityParams{rho, 3, 2, 2, 1}}) {
            const auto [mean, se] = capacity::ergodic_capacity_mc(p, trials, opt.seed, opt.workers);
            const double ea = ta::mean(ta::gsc_pdf(p.K, p.Ks)) / p.Ks;
            const double eb = ta::mean(ta::gsc_pdf(p.N, p.Ns));
            ok = ok && mean <= std::log2(1.0 + rho * ea * eb) + 3.0 * se;
        }
        s.check("capacity.jensen", ok, "ergodic capacity <= log2(1 + rho E{delta_s})");
    });

    s.run("capacity.selection_loss", [&] {
        const std::int64_t trials = 1000;  // matches the reported experiment size
        const double rho = 10.0;
        const auto [full1, se1] =
            capacity::ergodic_capacity_mc({rho, 5, 5, 5, 5}, trials, opt.seed, opt.workers);
        const auto [sel1, se2] =
            capacity::ergodic_capacity_mc({rho, 5, 5, 1, 1}, trials, opt.seed, opt.workers);
        const auto [full2, se3] =
            capacity::ergodic_capacity_mc({rho, 5, 10, 5, 10}, trials, opt.seed, opt.workers);
        const auto [sel2, se4] =
            capacity::ergodic_capacity_mc({rho, 5, 10, 1, 2}, trials, opt.seed, opt.workers);
        const double gap1 = std::fabs(full1 - sel1);
        const double gap2 = std::fabs(full2 - sel2);
        s.check("capacity.selection_loss", gap1 <= s.tol(0.5) && gap2 <= s.tol(0.5),
                "capacity gaps " + fmt(gap1) + " and " + fmt(gap2) + " bits");
    });
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidateOptions& opt, std::ostream* progress) {
    Suite s(opt.tolerance_scale, progress);
    check_specfun(s);
    check_term_algebra(s, opt);
    check_analytic(s, opt);
    check_montecarlo(s, opt);
    check_capacity(s, opt);
    return s.take();
}

}  // namespace afrelay::validate
