// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "afrelay/montecarlo.hpp"

namespace afrelay::capacity {

struct CapacityParams {
    double rho = 1.0;  // linear SNR
    int K = 1;
    int N = 1;
    int Ks = 1;
    int Ns = 1;
};

/// Instantaneous capacity log2(1 + rho * delta_s) in bits per channel use,
/// with delta_s = ||h_s||^2 ||g_s||^2 / Ks under equal power splitting.
double instantaneous_capacity(const mc::ChannelRealization& ch, double rho, int Ks, int Ns);

/// Mean normalized SNR with single-antenna transmit selection and the full
/// receive array: N * H_K.
double expected_delta_tx_selection(int K, int N);

/// Mean normalized SNR with Ks = 1 and Ns selected receive antennas:
/// H_K * (Ns + Ns * sum_{i=Ns+1..N} 1/i). Strictly increasing in Ns.
double delta_bar(int K, int N, int Ns);

/// Smallest Ns whose mean selected SNR matches the full-array baseline,
/// i.e. delta_bar(K, N, Ns) >= N.
int min_receive_antennas(int K, int N);

struct CapacityTable {
    int k_lo = 0, k_hi = 0;
    int n_lo = 0, n_hi = 0;
    std::vector<std::vector<int>> entries;  // [K - k_lo][N - n_lo]

    int at(int K, int N) const { return entries[K - k_lo][N - n_lo]; }
};

/// Grid of min_receive_antennas over K in [k_lo, k_hi], N in [n_lo, n_hi].
CapacityTable capacity_table(int k_lo, int k_hi, int n_lo, int n_hi);

struct TableDiscrepancy {
    int K;
    int N;
    int computed;
    int reference;
};

/// Cells of the table that differ from the commonly cited reference values
/// (available for K in 2..7, N in 2..10); cells outside that range are
/// skipped.
std::vector<TableDiscrepancy> reference_table_discrepancies(const CapacityTable& table);

/// Feedback needed to report one selected transmit antenna, ceil(log2 K) bits.
int tx_feedback_bits(int K);

/// Monte Carlo ergodic capacity (mean, standard error) in bits per channel
/// use over independent channel draws with selection applied.
std::pair<double, double> ergodic_capacity_mc(const CapacityParams& params, std::int64_t trials,
                                              std::uint64_t seed, int workers = 1);

}  // namespace afrelay::capacity
