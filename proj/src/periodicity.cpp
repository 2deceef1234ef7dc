#include "qjlab/periodicity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "qjlab/errors.hpp"

namespace qjl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kScanCap = 50'000'000L;  // total samples a scan may touch
}  // namespace

long PeriodicityParams::effective_window() const {
    if (q < 1 || window_cap < 1) throw DomainError("bad q or window_cap");
    const double expo = delta * beta * static_cast<double>(q);
    if (expo >= std::log(static_cast<double>(window_cap))) return window_cap;
    return std::max(1L, static_cast<long>(std::exp(expo)));
}

APCheckResult check_beta_almost_periodic(const std::function<cplx(long)>& a,
                                         const PeriodicityParams& params) {
    const long W = params.effective_window();
    const long q = params.q;
    // cost is 3 samples per m, independent of q
    if (2 * W + 1 > kScanCap) throw WindowTooSmall("scan too large");
    APCheckResult res;
    res.effective_window = W;
    double worst = 0;
    long worst_m = 0;
    for (long m = -W; m <= W; ++m) {
        const cplx am = a(m);
        const double d =
            std::max(std::abs(am - a(m + q)), std::abs(am - a(m - q)));
        if (d > worst) {
            worst = d;
            worst_m = m;
        }
    }
    res.worst_diff = worst;
    res.worst_m = worst_m;
    res.worst_margin =
        worst == 0 ? -kInf : std::log(worst) + params.beta * q;
    res.pass = res.worst_margin <= 0;
    return res;
}

LambdaBoundResult check_lambda_beta_bound(const std::function<cplx(long)>& w,
                                          const PeriodicityParams& params) {
    const long W = params.effective_window();
    const long q = params.q;
    const long lo = -W - q, hi = W + q;
    if (hi - lo + 1 > kScanCap) throw WindowTooSmall("scan too large");

    std::vector<cplx> wv(hi - lo + 1);
    std::vector<double> logw(hi - lo + 1);
    for (long j = lo; j <= hi; ++j) {
        wv[j - lo] = w(j);
        const double a = std::abs(wv[j - lo]);
        if (a == 0.0)
            throw ZeroInWindow("w = 0 at index " + std::to_string(j));
        logw[j - lo] = std::log(a);
    }
    // prefix sums: S[i] = sum of logw[0..i-1]
    std::vector<double> S(logw.size() + 1, 0.0);
    for (std::size_t i = 0; i < logw.size(); ++i) S[i + 1] = S[i] + logw[i];
    auto block = [&](long m, long len) {  // ln prod_{j=m}^{m+len-1} |w_j|
        return S[m + len - lo] - S[m - lo];
    };

    LambdaBoundResult res;
    res.effective_window = W;
    res.min_log_product = kInf;
    res.min_log_single = kInf;
    res.min_log_partial = kInf;
    for (long m = -W; m <= W; ++m) {
        const double b = block(m, q);
        if (b < res.min_log_product) {
            res.min_log_product = b;
            res.worst_m = m;
        }
        res.min_log_single = std::min(res.min_log_single, logw[m - lo]);
        // ratio bound |w_{m+-q}/w_m - 1|
        const cplx wm = wv[m - lo];
        res.ratio_dev = std::max(
            {res.ratio_dev, std::abs(wv[m + q - lo] / wm - 1.0),
             std::abs(wv[m - q - lo] / wm - 1.0)});
        // min over 1 <= r < q of ln|w(r,m)| = min_{t in (m, m+q)} S[t] - S[m]
        // (computed below with a sliding-window minimum)
    }
    {
        std::deque<long> dq;  // indices into S with increasing S value
        for (long t = -W + 1; t <= W + q - 1; ++t) {
            while (!dq.empty() && S[dq.back() - lo] >= S[t - lo])
                dq.pop_back();
            dq.push_back(t);
            const long m = t - q + 1;  // window (m, m+q) fully pushed at t=m+q-1
            if (m < -W) continue;
            while (dq.front() <= m) dq.pop_front();
            res.min_log_partial =
                std::min(res.min_log_partial, S[dq.front() - lo] - S[m - lo]);
        }
    }
    const double Lq = params.Lambda * q;
    res.pass = res.min_log_product > -Lq;
    res.partial_pass = res.min_log_partial > -2.0 * Lq;
    res.single_pass = res.min_log_single > -2.0 * Lq;
    res.ratio_pass =
        res.ratio_dev < std::exp(-(params.beta - 2.0 * params.Lambda) * q);
    return res;
}

double log2sin_sum(double theta, double alpha, long q) {
    if (q < 1) throw DomainError("q must be >= 1");
    long double x = theta - std::floor(theta);
    const long double a = alpha;
    long double sum = 0;
    for (long j = 0; j < q; ++j) {
        const long double s = std::abs(sinl(M_PIl * x));
        if (s == 0)
            throw ExactZeroTerm("sin pi(theta + j alpha) = 0 at j = " +
                                std::to_string(j));
        sum += logl(2.0L * s);
        x += a;
        x -= floorl(x);
    }
    return static_cast<double>(sum);
}

double log2sin_sum_rational(double theta, long p, long q) {
    if (q < 1) throw DomainError("q must be >= 1");
    const long double th = theta - std::floor(theta);
    long double sum = 0;
    long r = 0;  // j*p mod q, exact
    for (long j = 0; j < q; ++j) {
        long double x = th + static_cast<long double>(r) / q;
        x -= floorl(x);
        const long double s = std::abs(sinl(M_PIl * x));
        if (s == 0)
            throw ExactZeroTerm("sin pi(theta + j p/q) = 0 at j = " +
                                std::to_string(j));
        sum += logl(2.0L * s);
        r = (r + p) % q;
    }
    return static_cast<double>(sum);
}

SineProductDeviation sine_product_deviation(double theta, double alpha,
                                            long q) {
    if (q < 2) throw DomainError("q must be >= 2");
    // q must appear among the CF denominators of alpha
    auto cf = cf_expand(mpf_class(alpha, 256), 64);
    bool found = false;
    for (int n = 0; n <= cf.depth(); ++n)
        if (cf.q(n) == q) found = true;
    if (!found)
        throw DomainError("q is not a CF denominator of alpha");

    long double x = theta - std::floor(theta);
    const long double a = alpha;
    long double sum = 0, min_term = kInf;
    long j0 = 0;
    for (long j = 0; j < q; ++j) {
        const long double s = std::abs(sinl(M_PIl * x));
        if (s == 0)
            throw ExactZeroTerm("sin pi(theta + j alpha) = 0 at j = " +
                                std::to_string(j));
        const long double l = logl(s);
        sum += l;
        if (l < min_term) {
            min_term = l;
            j0 = j;
        }
        x += a;
        x -= floorl(x);
    }
    SineProductDeviation res;
    res.j0 = j0;
    res.sum_excl_min = static_cast<double>(sum - min_term);
    res.deviation = res.sum_excl_min + (q - 1) * std::log(2.0);
    res.C_eff = std::abs(res.deviation) / std::log(static_cast<double>(q));
    return res;
}

namespace {

double sin_factor(double theta, const std::vector<ZeroSpec>& zeros) {
    double f = 1;
    for (const auto& z : zeros)
        f *= std::pow(std::abs(std::sin(M_PI * (theta - z.theta))), z.tau);
    return f;
}

// offset-grid mean of ln g at N nodes
double mean_ln_g(const std::function<cplx(double)>& c,
                 const std::vector<ZeroSpec>& zeros, long N, double& inf_g,
                 double& sup_g) {
    double sum = 0;
    inf_g = kInf;
    sup_g = 0;
    for (long i = 0; i < N; ++i) {
        const double th = (i + 0.5) / static_cast<double>(N);
        const double den = sin_factor(th, zeros);
        if (den == 0) throw DegenerateZeros("zero hit the validation grid");
        const double g = std::abs(c(th)) / den;
        if (!(g > 0) || !std::isfinite(g))
            throw DegenerateZeros("envelope leaves (0, inf) on the grid");
        inf_g = std::min(inf_g, g);
        sup_g = std::max(sup_g, g);
        sum += std::log(g);
    }
    return sum / N;
}

}  // namespace

ProductZeroProfile make_zero_profile(const std::function<cplx(double)>& c,
                                     std::vector<ZeroSpec> zeros,
                                     int grid_pow) {
    for (const auto& z : zeros)
        if (!(z.tau > 0 && z.tau <= 1))
            throw DomainError("zero order must lie in (0, 1]");
    ProductZeroProfile p;
    p.zeros = std::move(zeros);
    for (const auto& z : p.zeros) p.tau_sum += z.tau;

    const long N = 1L << grid_pow;
    double i1, s1, i2, s2;
    const double m1 = mean_ln_g(c, p.zeros, N, i1, s1);
    const double m2 = mean_ln_g(c, p.zeros, N / 2, i2, s2);
    if (std::abs(m1 - m2) > 1e-5 * (1.0 + std::abs(m1)))
        throw NotConverged("mean-log quadrature did not settle");
    p.inf_g = i1;
    p.sup_g = s1;
    // one Richardson step on the offset-trapezoid pair, plus the exact
    // int ln|sin pi t| dt = -ln 2 contribution of each factor
    p.mean_log = m1 + (m1 - m2) / 3.0 - p.tau_sum * std::log(2.0);
    auto zs = p.zeros;
    p.g = [c, zs](double th) { return std::abs(c(th)) / sin_factor(th, zs); };
    return p;
}

ThetaTestResult theta_test(const ProductZeroProfile& profile, double theta,
                           double alpha, long n_range) {
    ThetaTestResult res;
    res.n_range = n_range;
    res.pass = true;
    auto circ = [](double x) {
        const double f = x - std::floor(x);
        return std::min(f, 1.0 - f);
    };
    for (const auto& z : profile.zeros) {
        const double d0 = circ(theta - z.theta);
        if (d0 == 0) {
            res.gamma.push_back(0);
            res.pass = false;
            continue;
        }
        double gamma = kInf;
        for (long n = 1; n <= n_range; ++n) {
            const double n2 = static_cast<double>(n) * n;
            gamma = std::min({gamma, n2 * circ(theta - z.theta + n * alpha),
                              n2 * circ(theta - z.theta - n * alpha)});
            if (gamma == 0) break;
        }
        res.gamma.push_back(gamma);
        if (gamma == 0) res.pass = false;
    }
    return res;
}

LambdaCertificate lambda_certificate(const ProductZeroProfile& profile,
                                     const CFExpansion& alpha_cf, double beta,
                                     double delta) {
    if (!(beta > 0)) throw DomainError("beta must be positive");
    const double beta_alpha = beta_estimate(alpha_cf).verdict_at_depth;
    if (!(2.0 * beta < beta_alpha))
        throw DomainError("need 2 beta < beta(alpha)");
    const double delta_cap =
        profile.tau_sum > 0
            ? 2.0 * profile.tau_sum / (1.0 + profile.tau_sum)
            : 1.0;
    if (!(delta > 0 && delta < delta_cap))
        throw DomainError("delta outside its admissible range");

    LambdaCertificate cert;
    cert.beta = beta;
    cert.delta = delta;
    cert.mean_log = profile.mean_log;
    const double bump = delta * delta * std::min(beta, 1.0);
    cert.Lambda1 = -profile.mean_log + 2.0 * bump;
    cert.Lambda = -profile.mean_log + 6.0 * bump;

    // denominators with ln q_{n+1} > 2 beta q_n
    for (int n = 1; n + 1 <= alpha_cf.depth(); ++n) {
        const double qn = alpha_cf.q(n).get_d();
        const double lq1 = std::log(alpha_cf.q(n + 1).get_d());
        if (lq1 > 2.0 * beta * qn)
            cert.q_sequence.push_back(alpha_cf.q(n).get_si());
    }
    if (cert.q_sequence.empty())
        throw NoQualifyingDenominator("no q_n with ln q_{n+1} > 2 beta q_n");
    return cert;
}

BlockCheckResult verify_lambda_bound_on_blocks(const OperatorModel& model,
                                               long q_n, double beta,
                                               double delta, double Lambda1,
                                               long window_cap) {
    if (q_n < 1) throw DomainError("q_n must be >= 1");
    PeriodicityParams params;
    params.beta = beta;
    params.delta = delta;
    params.q = q_n;
    params.window_cap = window_cap;
    const long K = std::max(1L, params.effective_window() / q_n);

    BlockCheckResult res;
    res.k_range = K;
    res.bound_log = -Lambda1 * q_n;
    res.worst_log_block = kInf;
    for (long k = -K; k <= K; ++k) {
        double s = 0;
        for (long j = k * q_n; j < (k + 1) * q_n; ++j) {
            const double a = std::abs(model.w(j));
            if (a == 0.0)
                throw ZeroInWindow("w = 0 at index " + std::to_string(j));
            s += std::log(a);
        }
        if (s < res.worst_log_block) {
            res.worst_log_block = s;
            res.worst_k = k;
        }
    }
    res.pass = res.worst_log_block > res.bound_log;
    return res;
}

}  // namespace qjl
