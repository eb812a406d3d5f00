// SPDX-License-Identifier: Apache-2.0

#include "afrelay/capacity.hpp"

#include <cmath>
#include <stdexcept>

#include "afrelay/specfun.hpp"

namespace afrelay::capacity {

namespace {

constexpr std::uint64_t kDomainCapacity = 3ull << 56;

// Reference selection-count table for K = 2..7, N = 2..10, as commonly
// cited. Entries that disagree with direct evaluation of the closed-form
// mean-SNR rule are surfaced by reference_table_discrepancies.
constexpr int kReferenceTable[6][9] = {
    {1, 1, 1, 2, 2, 2, 2, 3, 3},  // K = 2
    {1, 1, 1, 1, 2, 2, 2, 2, 2},  // K = 3
    {1, 1, 1, 1, 1, 1, 1, 1, 2},  // K = 4
    {1, 1, 1, 1, 1, 1, 1, 1, 2},  // K = 5
    {1, 1, 1, 1, 1, 1, 1, 1, 1},  // K = 6
    {1, 1, 1, 1, 1, 1, 1, 1, 1},  // K = 7
};

}  // namespace

double instantaneous_capacity(const mc::ChannelRealization& ch, double rho, int Ks, int Ns) {
    if (!(rho >= 0)) throw std::domain_error("instantaneous_capacity: rho must be >= 0");
    const mc::SelectionResult sel = mc::select_antennas(ch, Ks, Ns);
    return std::log2(1.0 + rho * sel.theta / Ks);
}

double expected_delta_tx_selection(int K, int N) {
    if (K < 1 || N < 1) throw std::domain_error("expected_delta_tx_selection: K, N must be >= 1");
    return N * specfun::harmonic(static_cast<unsigned>(K));
}

double delta_bar(int K, int N, int Ns) {
    if (K < 1 || Ns < 1 || Ns > N) throw std::domain_error("delta_bar: need 1 <= Ns <= N, K >= 1");
    double tail = 0.0;
    for (int i = Ns + 1; i <= N; ++i) tail += 1.0 / i;
    return specfun::harmonic(static_cast<unsigned>(K)) * (Ns + Ns * tail);
}

int min_receive_antennas(int K, int N) {
    if (K < 1 || N < 1) throw std::domain_error("min_receive_antennas: K, N must be >= 1");
    for (int ns = 1; ns < N; ++ns)
        if (delta_bar(K, N, ns) >= static_cast<double>(N)) return ns;
    return N;  // delta_bar(K, N, N) = H_K * N >= N always
}

CapacityTable capacity_table(int k_lo, int k_hi, int n_lo, int n_hi) {
    if (k_lo < 1 || k_lo > k_hi || n_lo < 1 || n_lo > n_hi)
        throw std::invalid_argument("capacity_table: empty or invalid ranges");
    CapacityTable t;
    t.k_lo = k_lo;
    t.k_hi = k_hi;
    t.n_lo = n_lo;
    t.n_hi = n_hi;
    t.entries.resize(k_hi - k_lo + 1);
    for (int k = k_lo; k <= k_hi; ++k) {
        auto& row = t.entries[k - k_lo];
        row.resize(n_hi - n_lo + 1);
        for (int n = n_lo; n <= n_hi; ++n) row[n - n_lo] = min_receive_antennas(k, n);
    }
    return t;
}

std::vector<TableDiscrepancy> reference_table_discrepancies(const CapacityTable& table) {
    std::vector<TableDiscrepancy> out;
    for (int k = table.k_lo; k <= table.k_hi; ++k) {
        if (k < 2 || k > 7) continue;
        for (int n = table.n_lo; n <= table.n_hi; ++n) {
            if (n < 2 || n > 10) continue;
            const int ref = kReferenceTable[k - 2][n - 2];
            const int got = table.at(k, n);
            if (got != ref) out.push_back({k, n, got, ref});
        }
    }
    return out;
}

int tx_feedback_bits(int K) {
    if (K < 1) throw std::domain_error("tx_feedback_bits: K must be >= 1");
    int bits = 0;
    while ((1 << bits) < K) ++bits;
    return bits;
}

std::pair<double, double> ergodic_capacity_mc(const CapacityParams& params, std::int64_t trials,
                                              std::uint64_t seed, int workers) {
    analytic::SelectionConfig::make(params.K, params.N, params.Ks, params.Ns);
    if (!(params.rho >= 0)) throw std::domain_error("ergodic_capacity_mc: rho must be >= 0");
    if (trials < 2) throw std::invalid_argument("ergodic_capacity_mc: requires trials >= 2");

    struct Acc {
        double sum = 0.0;
        double sumsq = 0.0;
        Acc& operator+=(const Acc& o) {
            sum += o.sum;
            sumsq += o.sumsq;
            return *this;
        }
    };
    const Acc acc = mc::reduce_chunked<Acc>(
        0, trials, workers, 4096, [&](std::int64_t b, std::int64_t e) {
            Acc a;
            for (std::int64_t t = b; t < e; ++t) {
                mc::RandomStream stream(seed, kDomainCapacity | static_cast<std::uint64_t>(t));
                const mc::ChannelRealization ch = mc::sample_channel(params.K, params.N, stream);
                const double c = instantaneous_capacity(ch, params.rho, params.Ks, params.Ns);
                a.sum += c;
                a.sumsq += c * c;
            }
            return a;
        });
    const double mean = acc.sum / trials;
    const double var = std::max(0.0, (acc.sumsq - trials * mean * mean) / (trials - 1));
    return {mean, std::sqrt(var / trials)};
}

}  // namespace afrelay::capacity
