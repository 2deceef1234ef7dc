#pragma once

// Trig-polynomial machinery for the HS-norm function F_n = f_n / g_n:
// Fourier truncation P_n + R_n with a linear degree bound, superlevel sets
// and the large-norm interval Delta_n, localization density j_m, the
// sum-of-squared-norms growth test, and the sublevel-measure bound for
// real-rooted polynomials.

#include <vector>

#include "qjlab/lattice.hpp"

namespace qjl {

struct TrigDecomposition {
    long n = 0;
    double E = 0;
    double rho = 1.0;       // strip half-width used (trig polys capped at 1)
    double b_rescale = 0;   // mean of ln|c|; c~ = e^{-b} c has zero log-mean
    double C1 = 0;          // measured strip growth rate of ln||D~(m)||^2
    long d = 0;             // degree bound [C1/(pi rho)] + 2
    double n2_threshold = 0;  // (pi rho)^{-1} ln(8/(1 - e^{-pi rho}))

    std::size_t grid_size = 0;  // power of two >= 8 d n
    std::vector<double> log_f, log_g;  // on theta_j = j / grid_size
    std::vector<double> f, g, P, R;    // linear values; F_n = f / g
    std::vector<cplx> fhat;            // f^(k), k = 0 .. grid_size/2

    double max_R = 0;           // measured grid max of |f - P|; at large n
                                // this sits at the FFT noise floor ~eps max f
    double log_tail_bound = 0;  // ln[ 8 e^{(C1 - pi rho d) n} / (1-e^{-pi rho}) ]
    bool tail_certified = false;  // e^{log_tail_bound} < 1 (needs n > n2)
    bool tail_bound_ok = false;   // max_R within the bound or the noise floor
    double parseval_rel = 0;     // DFT Parseval residual, relative
    bool decay_ok = false;       // |f^(k)| <= 4 e^{C1 n} e^{-pi rho |k|}
    double det_identity_rel = 0; // log g vs scalar product of c~, subsampled

    double F(std::size_t j) const;      // f_j / g_j (inf near zeros of g)
    double P_at(double theta) const;    // trig sum with |k| <= d n
};

TrigDecomposition decompose_F(const OperatorModel& model, double E, long n);

struct LevelSetReport {
    double a = 0;  // Lyapunov floor, used as L in the thresholds
    long n = 0;
    double leb1 = 0, leb2 = 0, leb3 = 0;  // grid measures of Theta^1,2,3
    bool chain_ok = false;                // Theta^3 <= Theta^2 <= Theta^1
    double c2 = 0;                        // 3a / (2 C1 - a)
    bool theta3_floor_ok = false;         // leb3 >= c2
    double n0 = 0;  // max of the computable thresholds n2, n3 = 4/a
    double delta_lo = 0, delta_hi = 0;    // bisection-refined endpoints;
    double delta_len = 0;                 // hi may exceed 1 when wrapping
    bool len_ok = false;                  // delta_len >= c2 / (4 d n)
    bool norm_ok = false;                 // F > e^{nL/8} on Delta grid points
};

LevelSetReport find_large_norm_interval(const TrigDecomposition& dec,
                                        double a);

struct LocalizationEntry {
    long m = 0;
    long j_m = 0;        // in [2 m q_n, (2m+2) q_n), except j_0 >= 1
    double log_norm = 0; // ln ||A(j_m)||_HS
    bool pass = false;   // log_norm > c0 q_n a
};

struct NormGrowthCertificate {
    long q_n = 0;
    double a = 0;
    double C1 = 0, c2 = 0, c0 = 0;  // c0 = c2 / (320 d)
    long d = 0, k_n = 0;            // k_n = [c2 q_n / (4d)] - 1
    double threshold = 0;           // c0 q_n a
    std::vector<LocalizationEntry> hits;
    bool all_pass = false;
};

NormGrowthCertificate localization_density(const OperatorModel& model,
                                           double E, long q_n, double a,
                                           long M = 20);

struct SumNormGrowth {
    long ell = 0;
    double target = 0;            // 1 + 2 (c/beta)
    double log_sum_fwd = 0;       // ln sum_{k<=ell} ||A(k; theta, alpha)||^2
    double exponent_fwd = 0;      // log_sum / ln(ell)
    double log_sum_rev = 0;       // direction (theta - alpha, -alpha)
    double exponent_rev = 0;
    bool fwd_ok = false, rev_ok = false;
};

SumNormGrowth sum_norm_growth(const OperatorModel& model, double E, long ell,
                              double c_over_beta);

struct SublevelBound {
    double preimage_len = 0;  // Leb{x : a < p(x) < b}
    double bound = 0;         // 2 diam(z(p-a)) max{t, sqrt(t)},
    double diam = 0;          //   t = (b-a)/(zeta+a); diam over the full
                              //   complex zero set of p - a
    double zeta = 0;          // min |p| over critical points; inf if none
    bool vacuous_linear = false;  // degree 1: no critical points, bound inf
    bool inequality_ok = false;
};

// p given by real coefficients, ascending powers; requires deg(p) distinct
// real zeros and 0 <= a < b
SublevelBound sublevel_measure_bound(const std::vector<double>& p, double a,
                                     double b);

// all real roots of p (ascending), via the companion matrix; used by the
// sublevel bound and exposed for tests
std::vector<double> real_roots(const std::vector<double>& p);

}  // namespace qjl
