// SPDX-License-Identifier: Apache-2.0

#include "afrelay/montecarlo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace afrelay::mc {

namespace {

// Stream-id namespaces so different estimators never share randomness.
constexpr std::uint64_t kDomainSim = 1ull << 56;
constexpr std::uint64_t kDomainTheta = 2ull << 56;

constexpr std::int64_t kTrialsPerBatch = 32768;
constexpr std::int64_t kChunk = 4096;

cplx unit_cgauss(RandomStream& stream) {
    const double re = stream.next_gaussian();
    const double im = stream.next_gaussian();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

int uniform_index(RandomStream& stream, int m) {
    const int k = static_cast<int>(stream.next_double() * m);
    return k < m ? k : m - 1;
}

std::uint32_t gray(std::uint32_t v) { return v ^ (v >> 1); }

struct Counts {
    std::int64_t symbols = 0;
    std::int64_t symbol_errors = 0;
    std::int64_t bits = 0;
    std::int64_t bit_errors = 0;
    std::int64_t trials = 0;

    Counts& operator+=(const Counts& o) {
        symbols += o.symbols;
        symbol_errors += o.symbol_errors;
        bits += o.bits;
        bit_errors += o.bit_errors;
        trials += o.trials;
        return *this;
    }
};

struct MomentAcc {
    double sum = 0.0;
    double sumsq = 0.0;
    std::int64_t n = 0;

    MomentAcc& operator+=(const MomentAcc& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
        return *this;
    }
};

}  // namespace

void SimConfig::validate() const {
    selection.validate();
    if (code == CodeType::alamouti_g2 && selection.Ks != 2)
        throw std::invalid_argument("SimConfig: alamouti_g2 requires Ks == 2");
    if (!(rate > 0)) throw std::invalid_argument("SimConfig: rate must be positive");
    if (min_symbols < 1000) throw std::invalid_argument("SimConfig: min_symbols must be >= 1000");
    if (min_errors < 0) throw std::invalid_argument("SimConfig: min_errors must be >= 0");
    if (max_symbols < min_symbols)
        throw std::invalid_argument("SimConfig: max_symbols must be >= min_symbols");
}

Constellation::Constellation(const analytic::ConstellationSpec& spec) : spec_(spec) {
    points_.resize(spec.M);
    labels_.resize(spec.M);
    if (spec.family == analytic::ModulationFamily::mpsk) {
        for (int k = 0; k < spec.M; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / spec.M;
            points_[k] = {std::cos(phi), std::sin(phi)};
            labels_[k] = gray(static_cast<std::uint32_t>(k));
        }
    } else {
        axis_levels_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(spec.M))));
        axis_scale_ = std::sqrt(spec.g_factor);  // 3/(2(M-1)) normalizes average energy to 1
        const int half_bits = spec.bits_per_symbol / 2;
        for (int r = 0; r < axis_levels_; ++r) {
            for (int c = 0; c < axis_levels_; ++c) {
                const int k = r * axis_levels_ + c;
                points_[k] = {(2.0 * c - (axis_levels_ - 1)) * axis_scale_,
                              (2.0 * r - (axis_levels_ - 1)) * axis_scale_};
                labels_[k] = (gray(static_cast<std::uint32_t>(r)) << half_bits) |
                             gray(static_cast<std::uint32_t>(c));
            }
        }
    }
}

int Constellation::detect(cplx y, double amplitude) const {
    if (!(amplitude > 1e-150)) amplitude = 1.0;  // pure-noise detection stays well defined
    if (spec_.family == analytic::ModulationFamily::mpsk) {
        const double sector = std::arg(y) * spec_.M / (2.0 * std::numbers::pi);
        int k = static_cast<int>(std::lround(sector)) % spec_.M;
        if (k < 0) k += spec_.M;
        return k;
    }
    const double denom = amplitude * axis_scale_;
    const auto slice = [&](double v) {
        const int idx = static_cast<int>(std::lround((v / denom + (axis_levels_ - 1)) / 2.0));
        return std::clamp(idx, 0, axis_levels_ - 1);
    };
    return slice(y.imag()) * axis_levels_ + slice(y.real());
}

ChannelRealization sample_channel(int K, int N, RandomStream& stream) {
    if (K < 1 || N < 1) throw std::invalid_argument("sample_channel: K, N must be >= 1");
    ChannelRealization ch;
    ch.h.resize(K);
    ch.g.resize(N);
    for (auto& v : ch.h) v = unit_cgauss(stream);
    for (auto& v : ch.g) v = unit_cgauss(stream);
    return ch;
}

namespace {

std::vector<int> top_indices(const std::vector<cplx>& v, int count) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::norm(v[a]) > std::norm(v[b]); });
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

SelectionResult select_antennas(const ChannelRealization& ch, int Ks, int Ns) {
    if (Ks < 1 || Ks > static_cast<int>(ch.h.size()) || Ns < 1 ||
        Ns > static_cast<int>(ch.g.size()))
        throw std::invalid_argument("select_antennas: selection counts out of range");
    SelectionResult sel;
    sel.tx_indices = top_indices(ch.h, Ks);
    sel.rx_indices = top_indices(ch.g, Ns);
    sel.A = 0.0;
    for (int i : sel.tx_indices) sel.A += std::norm(ch.h[i]);
    sel.B = 0.0;
    for (int j : sel.rx_indices) sel.B += std::norm(ch.g[j]);
    sel.theta = sel.A * sel.B;
    return sel;
}

std::array<std::array<cplx, 2>, 2> alamouti_encode(cplx x1, cplx x2) {
    return {{{x1, x2}, {-std::conj(x2), std::conj(x1)}}};
}

std::array<int, 2> transmit_and_detect(const SimConfig& cfg, const ChannelRealization& ch,
                                       const SelectionResult& sel, std::array<int, 2> tx_indices,
                                       RandomStream& stream, bool noiseless) {
    const Constellation con(cfg.constellation);
    const int Ns = static_cast<int>(sel.rx_indices.size());
    const double mu = std::pow(10.0, cfg.mu_db / 10.0);
    const double sqrt_lambda = std::sqrt(mu / Ns);

    // H_s[i][j] = h_s(i) * g_s(j); ||H_s||_F^2 = A * B.
    std::array<std::vector<cplx>, 2> hs;
    for (int i = 0; i < 2; ++i) {
        hs[i].resize(Ns);
        for (int j = 0; j < Ns; ++j)
            hs[i][j] = ch.h[sel.tx_indices[i]] * ch.g[sel.rx_indices[j]];
    }

    const auto code = alamouti_encode(con.point(tx_indices[0]), con.point(tx_indices[1]));
    std::array<std::vector<cplx>, 2> rx;
    for (int t = 0; t < 2; ++t) {
        rx[t].resize(Ns);
        for (int j = 0; j < Ns; ++j) {
            cplx signal = 0.0;
            for (int i = 0; i < 2; ++i) signal += code[t][i] * hs[i][j];
            rx[t][j] = sqrt_lambda * signal + (noiseless ? cplx{0.0, 0.0} : unit_cgauss(stream));
        }
    }

    // Orthogonal matched-filter combining: y_k = sqrt(lambda) ||H_s||^2 x_k + n.
    cplx y1 = 0.0, y2 = 0.0;
    for (int j = 0; j < Ns; ++j) {
        y1 += std::conj(hs[0][j]) * rx[0][j] + hs[1][j] * std::conj(rx[1][j]);
        y2 += std::conj(hs[1][j]) * rx[0][j] - hs[0][j] * std::conj(rx[1][j]);
    }
    const double amp = sqrt_lambda * sel.theta;
    return {con.detect(y1, amp), con.detect(y2, amp)};
}

namespace {

SimResult finish_result(const Counts& c, const SimConfig& cfg) {
    SimResult r;
    r.symbols = c.symbols;
    r.symbol_errors = c.symbol_errors;
    r.bits = c.bits;
    r.bit_errors = c.bit_errors;
    r.wall_trials = c.trials;
    r.ser = c.symbols > 0 ? static_cast<double>(c.symbol_errors) / c.symbols : 0.0;
    r.ber = c.bits > 0 ? static_cast<double>(c.bit_errors) / c.bits : 0.0;
    r.ser_stderr = c.symbols > 0 ? std::sqrt(r.ser * (1.0 - r.ser) / c.symbols) : 0.0;
    r.low_confidence = c.symbol_errors < cfg.min_errors;
    return r;
}

template <typename TrialFn>
SimResult run_batched(const SimConfig& cfg, int symbols_per_trial, TrialFn trial) {
    Counts total;
    std::int64_t next_trial = 0;
    for (;;) {
        const std::int64_t batch =
            std::min(kTrialsPerBatch,
                     (cfg.max_symbols - total.symbols + symbols_per_trial - 1) / symbols_per_trial);
        total += reduce_chunked<Counts>(next_trial, batch, cfg.workers, kChunk,
                                        [&](std::int64_t b, std::int64_t e) {
                                            Counts c;
                                            for (std::int64_t t = b; t < e; ++t) trial(t, c);
                                            return c;
                                        });
        next_trial += batch;
        if (total.symbols >= cfg.max_symbols) break;
        if (total.symbols >= cfg.min_symbols && total.symbol_errors >= cfg.min_errors) break;
    }
    return finish_result(total, cfg);
}

}  // namespace

SimResult run_ser_sim(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.code == CodeType::uncoded_single && cfg.selection.Ks != 1)
        throw std::invalid_argument("run_ser_sim: uncoded_single requires Ks == 1");

    const Constellation con(cfg.constellation);
    const int kappa = con.bits_per_symbol();
    const int M = con.M();
    const auto& sc = cfg.selection;

    if (cfg.code == CodeType::alamouti_g2) {
        return run_batched(cfg, 2, [&](std::int64_t t, Counts& c) {
            RandomStream stream(cfg.seed, kDomainSim | static_cast<std::uint64_t>(t));
            const ChannelRealization ch = sample_channel(sc.K, sc.N, stream);
            const SelectionResult sel = select_antennas(ch, sc.Ks, sc.Ns);
            const std::array<int, 2> tx{uniform_index(stream, M), uniform_index(stream, M)};
            const std::array<int, 2> det = transmit_and_detect(cfg, ch, sel, tx, stream, false);
            for (int k = 0; k < 2; ++k) {
                c.symbol_errors += det[k] != tx[k];
                c.bit_errors += std::popcount(con.label(det[k]) ^ con.label(tx[k]));
            }
            c.symbols += 2;
            c.bits += 2 * kappa;
            c.trials += 1;
        });
    }

    // Uncoded single-stream: one symbol per block, maximal-ratio combining
    // over the selected receive antennas.
    return run_batched(cfg, 1, [&](std::int64_t t, Counts& c) {
        RandomStream stream(cfg.seed, kDomainSim | static_cast<std::uint64_t>(t));
        const ChannelRealization ch = sample_channel(sc.K, sc.N, stream);
        const SelectionResult sel = select_antennas(ch, sc.Ks, sc.Ns);
        const double mu = std::pow(10.0, cfg.mu_db / 10.0);
        const double sqrt_lambda = std::sqrt(mu / sc.Ns);
        const int tx = uniform_index(stream, M);
        cplx y = 0.0;
        for (int j : sel.rx_indices) {
            const cplx hij = ch.h[sel.tx_indices[0]] * ch.g[j];
            const cplx r = sqrt_lambda * con.point(tx) * hij + unit_cgauss(stream);
            y += std::conj(hij) * r;
        }
        const int det = con.detect(y, sqrt_lambda * sel.theta);
        c.symbol_errors += det != tx;
        c.bit_errors += std::popcount(con.label(det) ^ con.label(tx));
        c.symbols += 1;
        c.bits += kappa;
        c.trials += 1;
    });
}

SimResult run_fast_equivalent_sim(const SimConfig& cfg) {
    cfg.validate();
    const Constellation con(cfg.constellation);
    const int kappa = con.bits_per_symbol();
    const int M = con.M();
    const auto& sc = cfg.selection;
    const double mu = std::pow(10.0, cfg.mu_db / 10.0);
    const int per_trial = cfg.code == CodeType::alamouti_g2 ? 2 : 1;

    return run_batched(cfg, per_trial, [&](std::int64_t t, Counts& c) {
        RandomStream stream(cfg.seed, kDomainSim | static_cast<std::uint64_t>(t));
        const ChannelRealization ch = sample_channel(sc.K, sc.N, stream);
        const SelectionResult sel = select_antennas(ch, sc.Ks, sc.Ns);
        const double amp = std::sqrt(mu * cfg.rate / sc.Ns * sel.theta);
        for (int k = 0; k < per_trial; ++k) {
            const int tx = uniform_index(stream, M);
            const cplx y = amp * con.point(tx) + unit_cgauss(stream);
            const int det = con.detect(y, amp);
            c.symbol_errors += det != tx;
            c.bit_errors += std::popcount(con.label(det) ^ con.label(tx));
        }
        c.symbols += per_trial;
        c.bits += per_trial * kappa;
        c.trials += 1;
    });
}

double sample_theta(const analytic::SelectionConfig& cfg, RandomStream& stream) {
    const ChannelRealization ch = sample_channel(cfg.K, cfg.N, stream);
    return select_antennas(ch, cfg.Ks, cfg.Ns).theta;
}

std::vector<double> sample_theta_batch(const analytic::SelectionConfig& cfg, std::int64_t trials,
                                       std::uint64_t seed, int workers) {
    cfg.validate();
    std::vector<double> out(static_cast<std::size_t>(trials));
    struct Nothing {
        Nothing& operator+=(const Nothing&) { return *this; }
    };
    reduce_chunked<Nothing>(0, trials, workers, kChunk, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t t = b; t < e; ++t) {
            RandomStream stream(seed, kDomainTheta | static_cast<std::uint64_t>(t));
            out[static_cast<std::size_t>(t)] = sample_theta(cfg, stream);
        }
        return Nothing{};
    });
    return out;
}

std::pair<double, double> estimate_mgf(const analytic::SelectionConfig& cfg, double s,
                                       std::int64_t trials, std::uint64_t seed, int workers) {
    cfg.validate();
    if (s < 0) throw std::domain_error("estimate_mgf: requires s >= 0");
    if (trials < 10000) throw std::invalid_argument("estimate_mgf: requires trials >= 10000");
    const MomentAcc acc =
        reduce_chunked<MomentAcc>(0, trials, workers, kChunk, [&](std::int64_t b, std::int64_t e) {
            MomentAcc m;
            for (std::int64_t t = b; t < e; ++t) {
                RandomStream stream(seed, kDomainTheta | static_cast<std::uint64_t>(t));
                const double v = std::exp(-s * sample_theta(cfg, stream));
                m.sum += v;
                m.sumsq += v * v;
                m.n += 1;
            }
            return m;
        });
    const double mean = acc.sum / acc.n;
    const double var = std::max(0.0, (acc.sumsq - acc.n * mean * mean) / (acc.n - 1));
    return {mean, std::sqrt(var / acc.n)};
}

}  // namespace afrelay::mc
