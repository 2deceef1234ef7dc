#pragma once

// Near-periodicity checkers: beta-q almost periodicity of a sequence, the
// (Lambda,beta)-q lower bound on q-blocks of prod|w_j| with its induced
// corollaries, the sine-product deviation constant, and the Lambda
// certificate built from a zero profile of the off-diagonal sampling
// function.

#include <functional>
#include <vector>

#include "qjlab/lattice.hpp"
#include "qjlab/numberkit.hpp"

namespace qjl {

struct PeriodicityParams {
    double beta = 0;
    double delta = 0;
    double Lambda = 0;
    long q = 0;
    long window_cap = 1'000'000;  // desk-scale stand-in for e^{delta beta q}

    // min(e^{delta beta q}, window_cap), overflow-safe
    long effective_window() const;
};

struct APCheckResult {
    bool pass = false;
    double worst_margin = 0;  // ln(max_m |a_m - a_{m+-q}|) + beta q; -inf when
                              // the sequence is exactly q-periodic
    long worst_m = 0;
    double worst_diff = 0;
    long effective_window = 0;
};

APCheckResult check_beta_almost_periodic(const std::function<cplx(long)>& a,
                                         const PeriodicityParams& params);

struct LambdaBoundResult {
    bool pass = false;
    double min_log_product = 0;  // min_m ln prod_{j=m}^{m+q-1} |w_j|
    long worst_m = 0;
    long effective_window = 0;
    // induced corollaries, each against its own derived bound
    double min_log_partial = 0;  // min over 1 <= r < q of ln|w(r,m)|
    bool partial_pass = false;   // vs -2 Lambda q
    double min_log_single = 0;   // min ln|w_m|
    bool single_pass = false;    // vs -2 Lambda q
    double ratio_dev = 0;        // max |w_{m+-q}/w_m - 1|
    bool ratio_pass = false;     // vs e^{-(beta - 2 Lambda) q}
};

LambdaBoundResult check_lambda_beta_bound(const std::function<cplx(long)>& w,
                                          const PeriodicityParams& params);

// sum_{j=0}^{q-1} ln(2|sin pi(theta + j alpha)|), long-double phase
// recurrence; throws ExactZeroTerm when a term vanishes
double log2sin_sum(double theta, double alpha, long q);

// same sum at alpha = p/q exactly, with the phase reduced in integers (the
// double image of p/q drifts by ~q*eps over the window)
double log2sin_sum_rational(double theta, long p, long q);

struct SineProductDeviation {
    double sum_excl_min = 0;  // sum of ln|sin| over j != j0
    double deviation = 0;     // sum_excl_min + (q-1) ln 2
    long j0 = 0;
    double C_eff = 0;         // |deviation| / ln q
};

// q must be a continued-fraction denominator of alpha
SineProductDeviation sine_product_deviation(double theta, double alpha,
                                            long q);

struct ZeroSpec {
    double theta = 0;  // location in [0,1)
    double tau = 1;    // order in (0,1]; repeat an entry for higher order
};

struct ProductZeroProfile {
    std::vector<ZeroSpec> zeros;
    std::function<double(double)> g;  // envelope with inf|g| > 0
    double mean_log = 0;              // int ln|c| via the exact sin split
    double inf_g = 0, sup_g = 0;
    double tau_sum = 0;
};

// derives g = |c| / prod |sin pi(theta - theta_l)|^{tau_l} and validates it
// stays in (0, inf) on an offset grid of 2^grid_pow points
ProductZeroProfile make_zero_profile(const std::function<cplx(double)>& c,
                                     std::vector<ZeroSpec> zeros,
                                     int grid_pow = 16);

struct ThetaTestResult {
    bool pass = false;
    std::vector<double> gamma;  // admissible gamma_l per zero (0 = reject)
    long n_range = 0;
};

ThetaTestResult theta_test(const ProductZeroProfile& profile, double theta,
                           double alpha, long n_range = 100'000);

struct LambdaCertificate {
    double mean_log = 0;
    double Lambda1 = 0;  // -mean_log + 2 delta^2 min(beta, 1)
    double Lambda = 0;   // -mean_log + 6 delta^2 min(beta, 1)
    std::vector<long> q_sequence;  // CF denominators with ln q_{n+1} > 2 beta q_n
    double beta = 0, delta = 0;
};

// requires 0 < 2 beta < the estimated beta(alpha) of the expansion, and
// delta below 2*tau_sum/(1+tau_sum) (or < 1 for a zero-free profile)
LambdaCertificate lambda_certificate(const ProductZeroProfile& profile,
                                     const CFExpansion& alpha_cf, double beta,
                                     double delta);

struct BlockCheckResult {
    bool pass = false;
    double worst_log_block = 0;  // min_k ln prod_{j=kq}^{(k+1)q-1} |w_j|
    long worst_k = 0;
    long k_range = 0;
    double bound_log = 0;  // -Lambda1 q
};

BlockCheckResult verify_lambda_bound_on_blocks(const OperatorModel& model,
                                               long q_n, double beta,
                                               double delta, double Lambda1,
                                               long window_cap = 1'000'000);

}  // namespace qjl
