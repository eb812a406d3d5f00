// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one binary, one pass/fail line per criterion, nonzero
// exit if anything fails. Criteria cover analytic-vs-simulation agreement,
// the MGF/density dual routes, the order-statistics layer, capacity closed
// forms, the selection-count table, ergodic-capacity scenarios, exact
// zero-SNR limits, and CLI determinism.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "afrelay/analytic.hpp"
#include "afrelay/capacity.hpp"
#include "afrelay/montecarlo.hpp"
#include "afrelay/specfun.hpp"
#include "afrelay/stats.hpp"
#include "afrelay/term_algebra.hpp"

using namespace afrelay;
namespace an = afrelay::analytic;
namespace ta = afrelay::term_algebra;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20250808;
int g_workers = 1;

struct Criterion {
    int id;
    std::string title;
    std::function<std::pair<bool, std::string>()> body;
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::vector<an::SelectionConfig> grid_kn(int max_kn) {
    std::vector<an::SelectionConfig> out;
    for (int K = 1; K <= max_kn; ++K)
        for (int Ks = 1; Ks <= K; ++Ks)
            for (int N = 1; N <= max_kn; ++N)
                for (int Ns = 1; Ns <= N; ++Ns)
                    out.push_back(an::SelectionConfig::make(K, N, Ks, Ns));
    return out;
}

std::uint64_t cfg_seed(const an::SelectionConfig& c) {
    return kSeed * 1000003ull +
           static_cast<std::uint64_t>(c.K * 1000 + c.N * 100 + c.Ks * 10 + c.Ns);
}

// --- criterion bodies ---

std::pair<bool, std::string> ser_8psk_agreement() {
    const auto con = an::ConstellationSpec::mpsk(8);
    double worst = 0.0;
    for (int variant = 0; variant < 2; ++variant) {  // no selection, then joint-path flags
        const auto cfg = an::SelectionConfig::make(2, 2, 2, 2);
        for (double db : {5.0, 10.0, 15.0, 20.0}) {
            const double exact = an::ser_mpsk(con, cfg, std::pow(10.0, db / 10.0), 1.0);
            mc::SimConfig sim;
            sim.selection = cfg;
            sim.constellation = con;
            sim.mu_db = db;
            sim.min_symbols = 1000000;
            sim.max_symbols = 1200000;
            sim.min_errors = 100;
            sim.seed = kSeed + variant * 31 + static_cast<std::uint64_t>(db);
            sim.workers = g_workers;
            const auto r = mc::run_ser_sim(sim);
            worst = std::max(worst, std::fabs(r.ser - exact) / r.ser_stderr);
        }
    }
    return {worst <= 3.0, "worst |exact - sim| = " + fmt(worst) + " sigma over 8 points"};
}

std::pair<bool, std::string> ser_16qam_agreement() {
    const auto con = an::ConstellationSpec::square_mqam(16);
    double worst = 0.0;
    double ratio_lo = 1e9, ratio_hi = 0.0;
    // Joint selection (Ks = 2 of 3, Ns = 1 of 2) and rx-only (Ks = K = 2).
    for (const auto& cfg :
         {an::SelectionConfig::make(3, 2, 2, 1), an::SelectionConfig::make(2, 2, 2, 1)}) {
        for (double db : {5.0, 10.0, 15.0, 20.0}) {
            const double exact = an::ser_mqam(con, cfg, std::pow(10.0, db / 10.0), 1.0);
            mc::SimConfig sim;
            sim.selection = cfg;
            sim.constellation = con;
            sim.mu_db = db;
            sim.min_symbols = 1000000;
            sim.max_symbols = 1200000;
            sim.min_errors = 100;
            sim.seed = kSeed + cfg.K * 17 + static_cast<std::uint64_t>(db);
            sim.workers = g_workers;
            const auto r = mc::run_ser_sim(sim);
            worst = std::max(worst, std::fabs(r.ser - exact) / r.ser_stderr);
            // Gray bound sanity: measured BER within [1, kappa] x (SER / kappa).
            const double ratio = r.ber / an::ber_gray_approx(r.ser, con);
            ratio_lo = std::min(ratio_lo, ratio);
            ratio_hi = std::max(ratio_hi, ratio);
        }
    }
    const bool ok = worst <= 3.0 && ratio_lo >= 1.0 && ratio_hi <= con.bits_per_symbol;
    return {ok, "worst SER dev " + fmt(worst) + " sigma; BER/(SER/k) in [" + fmt(ratio_lo) +
                    ", " + fmt(ratio_hi) + "]"};
}

std::pair<bool, std::string> mgf_duality() {
    const auto grid = grid_kn(4);
    const double s_values[] = {0.1, 0.5, 1.0, 2.0, 5.0};
    double worst_quad = 0.0, worst_sig = 0.0;
    for (const auto& cfg : grid) {
        const auto tsA = ta::gsc_pdf(cfg.K, cfg.Ks);
        const auto tsB = ta::gsc_pdf(cfg.N, cfg.Ns);
        const auto pdf = an::product_pdf(tsA, tsB);
        const auto terms = an::mgf_terms(tsA, tsB);
        const auto samples =
            mc::sample_theta_batch(cfg, 1000000, cfg_seed(cfg) ^ 0xa5c3, g_workers);
        for (double s : s_values) {
            const double closed = an::mgf(terms, s);
            worst_quad = std::max(worst_quad, std::fabs(closed - an::mgf_by_quadrature(pdf, s)));
            double sum = 0.0, sumsq = 0.0;
            for (double th : samples) {
                const double v = std::exp(-s * th);
                sum += v;
                sumsq += v * v;
            }
            const double n = static_cast<double>(samples.size());
            const double mean = sum / n;
            const double se = std::sqrt(std::max(0.0, (sumsq - n * mean * mean) / (n - 1)) / n);
            worst_sig = std::max(worst_sig, std::fabs(closed - mean) / se);
        }
    }
    const double anchor = an::mgf(ta::gsc_pdf(1, 1), ta::gsc_pdf(1, 1), 1.0);
    const bool anchor_ok = std::fabs(anchor - 0.5963474) <= 1e-6;
    const bool ok = worst_quad <= 1e-6 && worst_sig <= 3.0 && anchor_ok;
    return {ok, "max |closed-quad| " + fmt(worst_quad) + "; worst MC dev " + fmt(worst_sig) +
                    " sigma; U(1,1,1) anchor " + fmt(anchor)};
}

std::pair<bool, std::string> pdf_correctness() {
    const auto grid = grid_kn(4);
    double worst_norm = 0.0, worst_ratio = 0.0;
    for (const auto& cfg : grid) {
        const auto pdf = an::product_pdf(ta::gsc_pdf(cfg.K, cfg.Ks), ta::gsc_pdf(cfg.N, cfg.Ns));
        worst_norm = std::max(worst_norm, std::fabs(an::mgf_by_quadrature(pdf, 0.0) - 1.0));
        auto samples = mc::sample_theta_batch(cfg, 1000000, cfg_seed(cfg) ^ 0x5a5a, g_workers);
        std::sort(samples.begin(), samples.end());
        const stats::ThetaCdf cdf(pdf);
        const double d = stats::ks_statistic(samples, [&](double x) { return cdf(x); });
        worst_ratio = std::max(worst_ratio, d / stats::ks_critical(samples.size(), 0.001));
    }
    const bool ok = worst_norm <= 1e-7 && worst_ratio <= 1.0;
    return {ok, "max |norm-1| " + fmt(worst_norm) + "; worst KS D/crit " + fmt(worst_ratio)};
}

std::pair<bool, std::string> order_statistics_layer() {
    double worst_mean = 0.0, worst_ratio = 0.0;
    for (int n = 1; n <= 10; ++n)
        for (int k = 1; k <= n; ++k) {
            double tail = 0.0;
            for (int i = k + 1; i <= n; ++i) tail += 1.0 / i;
            worst_mean =
                std::max(worst_mean, std::fabs(ta::mean(ta::gsc_pdf(n, k)) - (k + k * tail)));
        }
    for (int n = 1; n <= 8; ++n)
        for (int k = 1; k <= n; ++k) {
            std::vector<double> samples(1000000);
            std::vector<double> draws(n);
            for (std::size_t t = 0; t < samples.size(); ++t) {
                mc::RandomStream stream(kSeed + 17 * n + k, (9ull << 56) | t);
                for (auto& d : draws) d = stream.next_exponential();
                std::partial_sort(draws.begin(), draws.begin() + k, draws.end(),
                                  std::greater<double>());
                double s = 0.0;
                for (int i = 0; i < k; ++i) s += draws[i];
                samples[t] = s;
            }
            std::sort(samples.begin(), samples.end());
            const auto pdf = ta::gsc_pdf(n, k);
            const double d =
                stats::ks_statistic(samples, [&](double x) { return ta::cdf(pdf, x); });
            worst_ratio = std::max(worst_ratio, d / stats::ks_critical(samples.size(), 0.001));
        }
    const bool ok = worst_mean <= 1e-9 && worst_ratio <= 1.0;
    return {ok, "max mean dev " + fmt(worst_mean) + "; worst KS D/crit " + fmt(worst_ratio)};
}

std::pair<bool, std::string> capacity_closed_forms() {
    const std::int64_t trials = 10000000;
    std::vector<double> max_mean(8, 0.0);
    for (std::int64_t t = 0; t < trials; ++t) {
        mc::RandomStream stream(kSeed, (10ull << 56) | static_cast<std::uint64_t>(t));
        double m = 0.0;
        for (int k = 1; k <= 7; ++k) {
            m = std::max(m, stream.next_exponential());
            max_mean[k] += m;
        }
    }
    for (int k = 1; k <= 7; ++k) max_mean[k] /= trials;

    double worst = 0.0;
    for (int K = 1; K <= 7; ++K)
        for (int N = 1; N <= 10; ++N)
            worst = std::max(worst, std::fabs(N * max_mean[K] -
                                              capacity::expected_delta_tx_selection(K, N)) /
                                        capacity::expected_delta_tx_selection(K, N));
    std::vector<double> draws;
    for (int N = 1; N <= 10; ++N) {
        std::vector<double> gsc_mean(N + 1, 0.0);
        draws.resize(N);
        for (std::int64_t t = 0; t < trials; ++t) {
            mc::RandomStream stream(kSeed + N, (11ull << 56) | static_cast<std::uint64_t>(t));
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
            for (int ns = 1; ns <= N; ++ns) {
                const double mc_est = max_mean[K] * gsc_mean[ns];
                const double cf = capacity::delta_bar(K, N, ns);
                worst = std::max(worst, std::fabs(mc_est - cf) / cf);
            }
    }
    return {worst <= 0.005, "max rel dev " + fmt(worst) + " over K<=7, N<=10 at 1e7 draws"};
}

std::pair<bool, std::string> selection_table() {
    const bool anchors = capacity::min_receive_antennas(2, 2) == 1 &&
                         capacity::min_receive_antennas(2, 5) == 2 &&
                         capacity::min_receive_antennas(4, 10) == 2 &&
                         capacity::min_receive_antennas(5, 10) == 2;
    const auto table = capacity::capacity_table(2, 7, 2, 10);
    const auto disc = capacity::reference_table_discrepancies(table);
    // The report must list exactly the disagreeing cells.
    static constexpr int reference[6][9] = {
        {1, 1, 1, 2, 2, 2, 2, 3, 3}, {1, 1, 1, 1, 2, 2, 2, 2, 2}, {1, 1, 1, 1, 1, 1, 1, 1, 2},
        {1, 1, 1, 1, 1, 1, 1, 1, 2}, {1, 1, 1, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1, 1, 1}};
    bool report_exact = true;
    std::size_t expected_count = 0;
    for (int k = 2; k <= 7; ++k)
        for (int n = 2; n <= 10; ++n) {
            const bool differs = table.at(k, n) != reference[k - 2][n - 2];
            expected_count += differs;
            const bool listed =
                std::any_of(disc.begin(), disc.end(),
                            [&](const auto& d) { return d.K == k && d.N == n; });
            report_exact = report_exact && (differs == listed);
        }
    const bool ok = anchors && report_exact && disc.size() == expected_count;
    return {ok, "anchor cells match; report lists " + std::to_string(disc.size()) +
                    " disagreeing cells and nothing else"};
}

std::pair<bool, std::string> ergodic_scenarios() {
    const double rho = 10.0;
    const auto full1 = capacity::ergodic_capacity_mc({rho, 5, 5, 5, 5}, 1000, kSeed, g_workers);
    const auto sel1 = capacity::ergodic_capacity_mc({rho, 5, 5, 1, 1}, 1000, kSeed, g_workers);
    const auto full2 = capacity::ergodic_capacity_mc({rho, 5, 10, 5, 10}, 1000, kSeed, g_workers);
    const auto sel2 = capacity::ergodic_capacity_mc({rho, 5, 10, 1, 2}, 1000, kSeed, g_workers);
    const double gap1 = std::fabs(full1.first - sel1.first);
    const double gap2 = std::fabs(full2.first - sel2.first);
    return {gap1 <= 0.5 && gap2 <= 0.5,
            "1000-draw gaps: 5x5 vs 1x1 " + fmt(gap1) + " bit, 5x10 vs 1x2 " + fmt(gap2) +
                " bit"};
}

std::pair<bool, std::string> zero_snr_limits() {
    const auto cfg = an::SelectionConfig::make(2, 2, 2, 2);
    double worst = 0.0;
    for (int M : {2, 4, 8, 16, 32, 64})
        worst = std::max(worst, std::fabs(an::ser_mpsk(an::ConstellationSpec::mpsk(M), cfg, 0.0,
                                                       1.0) -
                                          static_cast<double>(M - 1) / M));
    for (int M : {4, 16, 64})
        worst = std::max(worst, std::fabs(an::ser_mqam(an::ConstellationSpec::square_mqam(M), cfg,
                                                       0.0, 1.0) -
                                          (1.0 - 1.0 / M)));
    return {worst <= 1e-10, "max |SER(0) - limit| = " + fmt(worst)};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::pair<bool, std::string> cli_determinism() {
    const char* cli = std::getenv("AFRELAY_CLI");
    if (!cli) return {false, "AFRELAY_CLI not set"};
    const fs::path tmp =
        fs::temp_directory_path() / ("afrelay_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    const auto shell = [&](const std::string& args) {
        const std::string cmd = std::string(cli) + " " + args + " >/dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    bool ok = true;
    std::string detail;
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"ser --mod qam --M 16 --K 2 --N 2 --Ks 2 --Ns 1 --snr-db-range 10:12:2 --method both "
         "--seed 9 --min-symbols 50000 --min-errors 20 --max-symbols 80000",
         "ser"},
        {"mgf --K 2 --N 3 --Ks 1 --Ns 2 --s-grid 0:2:0.5 --empirical --trials 40000 --seed 4",
         "mgf"},
        {"ergodic-capacity --K 4 --N 4 --Ks 1 --Ns 2 --rho-db-range 0:10:5 --trials 2000 "
         "--seed 12",
         "ergodic"}};
    for (const auto& [args, name] : cases) {
        const fs::path a = tmp / (name + "_w1.csv");
        const fs::path b = tmp / (name + "_w3.csv");
        ok = ok && shell(args + " --workers 1 --out " + a.string()) == 0;
        ok = ok && shell(args + " --workers 3 --out " + b.string()) == 0;
        const bool same = slurp(a) == slurp(b) && !slurp(a).empty();
        ok = ok && same;
        detail += name + (same ? " identical; " : " DIFFERS; ");
    }
    std::error_code ec;
    fs::remove_all(tmp, ec);
    return {ok, detail + "workers 1 vs 3"};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) only = std::atoi(argv[++i]);
        if (arg == "--workers" && i + 1 < argc) g_workers = std::atoi(argv[++i]);
    }

    const std::vector<Criterion> criteria = {
        {1, "analytic vs simulated SER, Alamouti 8-PSK 2x2 (none and joint)", ser_8psk_agreement},
        {2, "analytic vs simulated SER/BER, Alamouti 16-QAM with selection", ser_16qam_agreement},
        {3, "MGF duality: closed form vs quadrature vs simulation (K,N <= 4)", mgf_duality},
        {4, "density of the product channel: normalization and KS (K,N <= 4)", pdf_correctness},
        {5, "order-statistics layer: means to 1e-9 and KS vs brute force", order_statistics_layer},
        {6, "capacity closed forms vs 1e7-draw Monte Carlo (K <= 7, N <= 10)",
         capacity_closed_forms},
        {7, "selection-count table anchors and discrepancy report", selection_table},
        {8, "ergodic capacity: selected systems within 0.5 bit of full arrays",
         ergodic_scenarios},
        {9, "exact zero-SNR SER limits for every supported constellation", zero_snr_limits},
        {10, "CLI determinism: byte-identical CSV across worker counts", cli_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        std::pair<bool, std::string> r;
        try {
            r = c.body();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failures += r.first ? 0 : 1;
        std::printf("[%2d] %s  %s  (%s)\n", c.id, r.first ? "PASS" : "FAIL", c.title.c_str(),
                    r.second.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %s (%d failure%s)\n", failures == 0 ? "PASS" : "FAIL", failures,
                failures == 1 ? "" : "s");
    return failures == 0 ? 0 : 1;
}
