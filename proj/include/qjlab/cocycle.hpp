#pragma once

// Transfer-matrix products A(n,m;E), D(n,m;E), scalar products w(n,m) and
// r(n,m); Lyapunov exponents via Birkhoff averages; the SL(2,R)
// regularization (T_n, r_n, A~) with its quantitative conjugacy and trace
// checks; trace classification of energies.

#include <optional>
#include <vector>

#include "qjlab/lattice.hpp"
#include "qjlab/scaled.hpp"

namespace qjl {

constexpr long kProductCap = 10'000'000L;

struct StepMatrices {
    ScaledMatrix2x2 D;
    std::optional<ScaledMatrix2x2> A;  // absent when w_n = 0
    bool singular = false;
};

// D_n = [[E - v_n, -conj(w_prev)], [w_n, 0]], A_n = D_n / w_n
StepMatrices step_matrices(double E, double v_n, cplx w_n, cplx w_prev);

enum class ProductKind { A, D };

// Ordered product over j = m .. n+m-1 (leftmost factor has the top index);
// n < 0 uses the inverse-product convention P(n,m) = P(-n, m+n)^{-1};
// n = 0 gives the identity.
ScaledMatrix2x2 product(const OperatorModel& model, double E, long n, long m,
                        ProductKind kind);

// scalar products w(n,m) = prod w_j and r(n,m) = prod r_j, n >= 1
ScaledScalar product_w(const OperatorModel& model, long n, long m);
ScaledScalar product_r(const OperatorModel& model, long n, long m);

struct LyapunovEstimate {
    double E = 0;
    long n = 0;
    std::vector<double> theta_values;
    double mean = 0;
    double std_error = 0;
};

// Per-theta value (1/n)(ln||D(n,1)|| - ln|w(n,1)|), the zero-safe split of
// (1/n) ln||A(n,1)||.
LyapunovEstimate lyapunov_birkhoff(const OperatorModel& base, double E, long n,
                                   const std::vector<double>& thetas);

struct RegularizedProduct {
    ScaledMatrix2x2 Atilde;   // built stepwise from the real SL(2,R) factors
    ScaledScalar det_tracked;  // det A~, accumulated factor by factor (the
                               // normalized entries of a long product lose the
                               // determinant to cancellation)
    ScaledScalar r;           // r(n, m-1)
    cplx T_right, T_left;     // lower-diagonal entries of T_{n+m-1}, T_{m-1}
    double conjugacy_residual = 0;  // relative, asserted <= 1e-8
};

RegularizedProduct regularize_product(const OperatorModel& model, double E,
                                      long n, long m);

struct BoundCheck {
    const char* name;
    double observed = 0;
    double bound = 0;
    bool pass = false;
};

struct RegularityReport {
    long q = 0, window = 0;
    double beta = 0, Lambda = 0;
    BoundCheck r_dev;        // max | |r^{+-}(q,m)| - 1 |      vs e^{-(b-2L)q}
    BoundCheck T_dev;        // max ||T^{-1}_{m+q} T_m - I||   vs 4e^{-(b-2L)q}
    BoundCheck A_dev;        // max ||A(q,m) - A(q,m+q)||      vs e^{-(b-6L)q}
    BoundCheck Atilde_dev;   // same for A~                    vs e^{-(b-6L)q}
    BoundCheck trace_dev;    // max | |Tr A~| - |Tr A| |       vs 12e^{-(b-4L)q}
    bool all_pass() const {
        return r_dev.pass && T_dev.pass && A_dev.pass && Atilde_dev.pass &&
               trace_dev.pass;
    }
};

RegularityReport regularity_bounds_check(const OperatorModel& model, double E,
                                         long q, long window, double beta,
                                         double Lambda);

enum class TraceLabel { S1, S2, EllipticStrict };

struct TraceClassification {
    double E = 0;
    double trace_abs = 0;        // |Tr A(q;E)| (inf if above double range)
    double log_trace_abs = 0;
    double dist_to_2 = 0;
    double trace_tilde_abs = 0;  // |Tr A~(q;E)|
    double tilde_gap = 0;        // | |Tr A~| - |Tr A| |
    TraceLabel label = TraceLabel::EllipticStrict;
};

// thresholds 2 + 2e^{-kappa Lambda q} and 2e^{-kappa Lambda q}; the exponent
// kappa is a proof artifact, exposed as a parameter (default 60)
std::vector<TraceClassification> trace_classify(
    const OperatorModel& model, long q, const std::vector<double>& energies,
    double Lambda, double kappa = 60.0);

struct PowerGrowthDiagnostics {
    enum class Branch { Hyperbolic, Elliptic, Parabolic } branch;
    double trace = 0;
    double rho_abs = 1;       // hyperbolic: the expanding eigenvalue modulus
    double B_norm = 0;        // hyperbolic: ||B|| of the diagonalizer
    double B_bound = 0;       // sqrt(||G||)/sqrt(|Tr|-2), x2 past |Tr| = 6
    bool B_ok = false;
    double psi = 0;           // elliptic rotation angle
    double reconstruction_residual = 0;  // power formula vs direct products
    bool linear_window_ok = true;        // elliptic near-parabolic window
    long linear_window_k = 0;            // range the window was asserted on
};

// G must be real with det = 1 to 1e-10
PowerGrowthDiagnostics hyperbolic_power_growth(const ScaledMatrix2x2& G,
                                               long N);

}  // namespace qjl
