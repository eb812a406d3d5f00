// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "afrelay/specfun.hpp"
#include "afrelay/term_algebra.hpp"

namespace afrelay::analytic {

enum class SelectionMode { none, tx_only, rx_only, joint };

/// Antenna counts at source (K) and destination (N) with the number kept
/// after selection on each side.
struct SelectionConfig {
    int K = 1;
    int N = 1;
    int Ks = 1;
    int Ns = 1;
    SelectionMode mode = SelectionMode::none;

    static SelectionConfig make(int K, int N, int Ks, int Ns);
    void validate() const;
};

enum class ModulationFamily { mpsk, square_mqam };

/// Constellation order plus the constants entering the exact SER integrals.
struct ConstellationSpec {
    ModulationFamily family;
    int M;
    double g_factor;      // sin^2(pi/M) for PSK, 3/(2(M-1)) for square QAM
    double q;             // 1 - 1/sqrt(M), QAM only (0 for PSK)
    int bits_per_symbol;  // log2 M

    static ConstellationSpec mpsk(int M);
    static ConstellationSpec square_mqam(int M);
};

/// One term coeff * theta^power * K_order(scale * sqrt(theta)).
struct BesselTerm {
    double coeff;
    double power;  // may be half-integer
    int order;
    double scale;  // > 0
};

/// pdf of the product Theta = A * B of two independent exponential-term
/// distributions, term-pair-wise in closed form.
class BesselTermSum {
public:
    BesselTermSum(std::vector<BesselTerm> terms, int a_total, int a_sel, int b_total, int b_sel);

    const std::vector<BesselTerm>& terms() const noexcept { return terms_; }
    int a_total() const noexcept { return a_total_; }
    int a_sel() const noexcept { return a_sel_; }
    int b_total() const noexcept { return b_total_; }
    int b_sel() const noexcept { return b_sel_; }

    /// Density at theta > 0.
    double eval(double theta) const;

    /// Truncation point beyond which the density tail is negligible.
    double tail_cutoff() const;

private:
    std::vector<BesselTerm> terms_;
    int a_total_, a_sel_, b_total_, b_sel_;
};

/// Closed-form pdf of Theta = A * B built from the two branch pdfs.
BesselTermSum product_pdf(const term_algebra::ExpoTermSum& tsA,
                          const term_algebra::ExpoTermSum& tsB);

/// pdf of Theta for a selection configuration, evaluated at theta > 0.
double pdf_theta(const SelectionConfig& cfg, double theta);

/// One closed-form MGF term x1 * s^(-x2) * U(x2, x3, x4 / s).
/// x1 inherits the extended precision of the branch coefficients; the terms
/// cancel by up to four orders of magnitude when summed.
struct MgfTerm {
    long double x1;
    int x2;
    int x3;
    double x4;
};

/// The list of closed-form MGF terms for Theta = A * B.
std::vector<MgfTerm> mgf_terms(const term_algebra::ExpoTermSum& tsA,
                               const term_algebra::ExpoTermSum& tsB);

/// E{exp(-s Theta)} in closed form; s = 0 returns 1 without evaluating U.
double mgf(const term_algebra::ExpoTermSum& tsA, const term_algebra::ExpoTermSum& tsB, double s);
double mgf(const SelectionConfig& cfg, double s);
double mgf(const std::vector<MgfTerm>& terms, double s);

/// Compact receive-selection form of the MGF (requires Ks == K). Evaluates
/// the same quantity as mgf() through the transposed U parameterization and
/// doubles as an internal consistency check between the two forms.
double mgf_receive_selection(const SelectionConfig& cfg, double s);

/// MGF by numerical quadrature of exp(-s theta) against the density;
/// the slow dual route used to validate the closed form.
double mgf_by_quadrature(const BesselTermSum& pdf, double s,
                         const specfun::QuadratureSpec& spec = {1e-10, 1e-9, 400, 32});

/// Exact average SER of an OSTBC with rate `rate` over the selected relay
/// channel at linear average SNR `mu` per receive antenna.
double ser_mpsk(const ConstellationSpec& c, const SelectionConfig& cfg, double mu, double rate);
double ser_mqam(const ConstellationSpec& c, const SelectionConfig& cfg, double mu, double rate);

/// Gray-labeling BER approximation ser / log2(M); exact BER is obtained by
/// simulation.
double ber_gray_approx(double ser, const ConstellationSpec& c);

}  // namespace afrelay::analytic
