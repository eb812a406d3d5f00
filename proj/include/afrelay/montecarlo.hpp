// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <atomic>
#include <complex>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

#include "afrelay/analytic.hpp"
#include "afrelay/rng.hpp"

namespace afrelay::mc {

using cplx = std::complex<double>;

/// One draw of the source->relay vector h and relay->destination vector g.
struct ChannelRealization {
    std::vector<cplx> h;
    std::vector<cplx> g;
};

/// Indices and branch powers after antenna selection.
struct SelectionResult {
    std::vector<int> tx_indices;
    std::vector<int> rx_indices;
    double A;      // ||h_s||^2
    double B;      // ||g_s||^2
    double theta;  // A * B
};

enum class CodeType { alamouti_g2, uncoded_single };

struct SimConfig {
    analytic::SelectionConfig selection;
    analytic::ConstellationSpec constellation = analytic::ConstellationSpec::mpsk(2);
    CodeType code = CodeType::alamouti_g2;
    double mu_db = 10.0;  // average SNR per receive antenna
    double rate = 1.0;    // symbols per channel use (fast path only; 1 for both codes)
    std::int64_t min_symbols = 100000;
    std::int64_t min_errors = 200;
    std::int64_t max_symbols = 100000000;
    std::uint64_t seed = 1;
    int workers = 1;

    void validate() const;
};

struct SimResult {
    std::int64_t symbols = 0;
    std::int64_t symbol_errors = 0;
    std::int64_t bits = 0;
    std::int64_t bit_errors = 0;
    double ser = 0.0;
    double ber = 0.0;
    double ser_stderr = 0.0;
    std::int64_t wall_trials = 0;
    bool low_confidence = false;  // trial cap reached before min_errors
};

/// Constellation geometry with Gray labels and exact minimum-distance
/// detection (angle slicer for PSK, per-axis slicer for square QAM).
class Constellation {
public:
    explicit Constellation(const analytic::ConstellationSpec& spec);

    int M() const noexcept { return spec_.M; }
    int bits_per_symbol() const noexcept { return spec_.bits_per_symbol; }
    cplx point(int index) const { return points_[index]; }
    std::uint32_t label(int index) const { return labels_[index]; }

    /// Index of the constellation point closest to y, where the expected
    /// noise-free signal is amplitude * point(k).
    int detect(cplx y, double amplitude) const;

private:
    analytic::ConstellationSpec spec_;
    std::vector<cplx> points_;
    std::vector<std::uint32_t> labels_;
    int axis_levels_ = 0;   // sqrt(M) for QAM
    double axis_scale_ = 0; // per-axis level spacing / 2 for QAM
};

/// Fresh channel draw: entries i.i.d. circularly symmetric complex Gaussian
/// with variance 1/2 per real dimension.
ChannelRealization sample_channel(int K, int N, RandomStream& stream);

/// Picks the Ks (resp. Ns) largest squared magnitudes; ties go to the
/// lowest index.
SelectionResult select_antennas(const ChannelRealization& ch, int Ks, int Ns);

/// Rate-1 code matrix for two transmit antennas, rows
/// [(x1, x2), (-conj x2, conj x1)].
std::array<std::array<cplx, 2>, 2> alamouti_encode(cplx x1, cplx x2);

/// One coded block over the selected channel: forms H_s as the outer
/// product of the selected h and g entries, adds unit-variance noise,
/// applies orthogonal matched-filter combining and per-symbol
/// minimum-distance detection. Returns the detected symbol indices.
std::array<int, 2> transmit_and_detect(const SimConfig& cfg, const ChannelRealization& ch,
                                       const SelectionResult& sel, std::array<int, 2> tx_indices,
                                       RandomStream& stream, bool noiseless = false);

/// SER/BER estimate through the full matrix transmission path.
SimResult run_ser_sim(const SimConfig& cfg);

/// SER/BER estimate through the scalar equivalent channel with per-symbol
/// SNR (mu R / Ns) * Theta; statistically equivalent to the matrix path for
/// orthogonal codes.
SimResult run_fast_equivalent_sim(const SimConfig& cfg);

/// One Theta draw with selection applied.
double sample_theta(const analytic::SelectionConfig& cfg, RandomStream& stream);

/// `trials` independent Theta draws (deterministic in seed, any worker count).
std::vector<double> sample_theta_batch(const analytic::SelectionConfig& cfg, std::int64_t trials,
                                       std::uint64_t seed, int workers);

/// Sample mean and standard error of exp(-s Theta).
std::pair<double, double> estimate_mgf(const analytic::SelectionConfig& cfg, double s,
                                       std::int64_t trials, std::uint64_t seed, int workers = 1);

/// Deterministic chunked reduction: trials are split into fixed-size chunks
/// claimed by workers, and chunk results are merged in index order, so the
/// outcome is identical for any worker count. Acc needs operator+=.
template <typename Acc, typename ChunkFn>
Acc reduce_chunked(std::int64_t first, std::int64_t count, int workers, std::int64_t chunk_size,
                   ChunkFn per_chunk) {
    Acc total{};
    if (count <= 0) return total;
    const std::int64_t nchunks = (count + chunk_size - 1) / chunk_size;
    std::vector<Acc> slots(static_cast<std::size_t>(nchunks));
    std::atomic<std::int64_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= nchunks) break;
            const std::int64_t b = first + c * chunk_size;
            const std::int64_t e = std::min(first + count, b + chunk_size);
            slots[static_cast<std::size_t>(c)] = per_chunk(b, e);
        }
    };
    const int nw = std::max(1, workers);
    if (nw == 1 || nchunks == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nw - 1);
        for (int i = 0; i < nw - 1; ++i) pool.emplace_back(work);
        work();
        for (auto& t : pool) t.join();
    }
    for (const Acc& s : slots) total += s;
    return total;
}

}  // namespace afrelay::mc
