#include "qjlab/fourier.hpp"

#include <fftw3.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qjlab/errors.hpp"
#include "qjlab/scaled.hpp"

namespace qjl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// analytic extension of theta -> conj(c(theta)) off the real line
cplx cbar_eval(const SamplingFunction& c, cplx z) {
    return std::conj(c(std::conj(z)));
}

void require_analytic(const OperatorModel& model) {
    if (model.kind != OperatorModel::Kind::Quasiperiodic ||
        model.c.kind != SamplingFunction::Kind::TrigPoly ||
        model.v.kind != SamplingFunction::Kind::TrigPoly)
        throw NonAnalyticInput(
            "decomposition needs trig-polynomial sampling functions");
}

double mean_log_abs_c(const SamplingFunction& c) {
    const long M = 1L << 16;
    double s = 0;
    long used = 0;
    for (long j = 0; j < M; ++j) {
        const double a = std::abs(c((j + 0.5) / static_cast<double>(M)));
        if (a > 0) {
            s += std::log(a);
            ++used;
        }
    }
    if (used == 0) throw NonAnalyticInput("|c| vanishes identically");
    return s / static_cast<double>(used);
}

// ln || e^{-b n} D(n; z) ||^2_HS at complex z, renormalized product
double log_f_at(const OperatorModel& model, double E, long n, cplx z,
                double b) {
    ScaledMatrix2x2 P = ScaledMatrix2x2::identity();
    const double a = model.alpha;
    for (long j = 0; j < n; ++j) {
        const cplx zj = z + static_cast<double>(j) * a;
        const cplx vz = model.v(zj + model.v_theta_shift);
        const auto D = ScaledMatrix2x2::from(E - vz, -cbar_eval(model.c, zj - a),
                                             model.c(zj), 0.0, -b);
        P = D * P;
    }
    return 2.0 * P.log_hs_norm();
}

// measured strip growth rate: grid sup of ln||D~(m)||^2 at Im z = +-0.9 rho,
// least-squares slope over small m, floored by the deepest measured point
double measure_C1(const OperatorModel& model, double E, double rho, double b) {
    const double rp = 0.9 * rho;
    const int grid = 192;
    std::vector<long> ms = {4, 8, 12, 16};
    std::vector<double> s(ms.size(), -kInf);
    for (std::size_t i = 0; i < ms.size(); ++i)
        for (int g = 0; g < grid; ++g) {
            const double th = g / static_cast<double>(grid);
            for (double sgn : {1.0, -1.0})
                s[i] = std::max(s[i], log_f_at(model, E, ms[i],
                                               cplx(th, sgn * rp), b));
        }
    double sm = 0, ss = 0, smm = 0, sms = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        sm += ms[i];
        ss += s[i];
        smm += static_cast<double>(ms[i]) * ms[i];
        sms += ms[i] * s[i];
    }
    const double k = ms.size();
    const double slope = (k * sms - sm * ss) / (k * smm - sm * sm);
    return std::max(slope, s.back() / static_cast<double>(ms.back()));
}

std::size_t pow2_at_least(std::size_t n) {
    std::size_t p = 64;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

double TrigDecomposition::F(std::size_t j) const {
    return std::exp(log_f[j] - log_g[j]);
}

double TrigDecomposition::P_at(double theta) const {
    const long K = d * n;
    double s = fhat[0].real();
    for (long k = 1; k <= K; ++k)
        s += 2.0 * (fhat[k] * std::polar(1.0, 2.0 * M_PI * k * theta)).real();
    return s;
}

TrigDecomposition decompose_F(const OperatorModel& model, double E, long n) {
    require_analytic(model);
    if (n < 1 || n > 2000)
        throw BudgetExceeded("n out of range [1, 2000]: " + std::to_string(n));

    TrigDecomposition dec;
    dec.n = n;
    dec.E = E;
    dec.rho = std::min({model.c.rho, model.v.rho, 1.0});
    dec.b_rescale = mean_log_abs_c(model.c);
    dec.C1 = measure_C1(model, E, dec.rho, dec.b_rescale);
    const double pr = M_PI * dec.rho;
    dec.d = static_cast<long>(std::floor(dec.C1 / pr)) + 2;
    dec.n2_threshold = std::log(8.0 / (1.0 - std::exp(-pr))) / pr;

    const std::size_t N = pow2_at_least(static_cast<std::size_t>(8 * dec.d * n));
    if (N > (1u << 22))
        throw BudgetExceeded("grid of " + std::to_string(N) + " points");
    dec.grid_size = N;

    const double b = dec.b_rescale;
    dec.log_f.resize(N);
    dec.log_g.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double th = j / static_cast<double>(N);
        ScaledMatrix2x2 P = ScaledMatrix2x2::identity();
        double lg = 0;
        for (long i = 0; i < n; ++i) {
            const double ti = th + i * model.alpha;
            const cplx w = model.c(ti);
            const cplx wp = model.c(ti - model.alpha);
            const double vi = model.v(ti + model.v_theta_shift).real();
            P = ScaledMatrix2x2::from(E - vi, -std::conj(wp), w, 0.0, -b) * P;
            const double aw = std::abs(w);
            lg += aw > 0 ? 2.0 * (std::log(aw) - b) : -kInf;
        }
        dec.log_f[j] = 2.0 * P.log_hs_norm();
        dec.log_g[j] = lg;
    }

    const double fmax = *std::max_element(dec.log_f.begin(), dec.log_f.end());
    if (fmax > 700.0)
        throw Overflow("f_n reaches e^" + std::to_string(fmax) +
                       ", beyond double range");

    dec.f.resize(N);
    dec.g.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        dec.f[j] = std::exp(dec.log_f[j]);
        dec.g[j] = std::exp(dec.log_g[j]);
    }

    // FFT of f, coefficients normalized to f^(k) = <f, e^{2 pi i k .}>
    std::vector<double> in = dec.f;
    std::vector<cplx> out(N / 2 + 1);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(
        static_cast<int>(N), in.data(),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);
    for (auto& c : out) c /= static_cast<double>(N);
    dec.fhat = out;

    // truncation P_n keeps |k| <= d n; tail R_n = f - P_n
    std::vector<cplx> trunc = out;
    for (std::size_t k = static_cast<std::size_t>(dec.d * n) + 1;
         k < trunc.size(); ++k)
        trunc[k] = 0.0;
    dec.P.resize(N);
    fftw_plan bwd = fftw_plan_dft_c2r_1d(
        static_cast<int>(N), reinterpret_cast<fftw_complex*>(trunc.data()),
        dec.P.data(), FFTW_ESTIMATE);
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);

    dec.R.resize(N);
    dec.max_R = 0;
    for (std::size_t j = 0; j < N; ++j) {
        dec.R[j] = dec.f[j] - dec.P[j];
        dec.max_R = std::max(dec.max_R, std::abs(dec.R[j]));
    }
    // the analytic tail certificate; the measured f - P saturates at the FFT
    // noise floor (absolute error ~ eps * max f) long before the true tail,
    // so the measured value is only required to sit under bound-or-noise
    dec.log_tail_bound = std::log(8.0 / (1.0 - std::exp(-pr))) +
                         dec.C1 * n - pr * dec.d * n;
    dec.tail_certified = dec.log_tail_bound < 0.0;
    // accumulated FFT roundoff over millions of points with huge dynamic
    // range reaches ~1e-8 relative; 1e-6 relative is the honest floor here
    dec.tail_bound_ok = dec.max_R <= std::max(std::exp(dec.log_tail_bound),
                                              1e-6 * std::exp(fmax));
    const double noise_floor = 1e-12 * std::exp(fmax);

    // DFT Parseval, in units of e^{-fmax} to keep squares finite
    const double s0 = std::exp(-fmax);
    double lhs = std::norm(out[0] * s0) + std::norm(out[N / 2] * s0);
    for (std::size_t k = 1; k < N / 2; ++k) lhs += 2.0 * std::norm(out[k] * s0);
    double rhs = 0;
    for (std::size_t j = 0; j < N; ++j) rhs += std::norm(dec.f[j] * s0);
    rhs /= static_cast<double>(N);
    dec.parseval_rel = std::abs(lhs - rhs) / (rhs > 0 ? rhs : 1.0);

    // coefficient decay, checked only above the FFT noise floor
    dec.decay_ok = true;
    const double log4C = std::log(4.0) + dec.C1 * n;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double a = std::abs(out[k]);
        if (a > noise_floor &&
            std::log(a) > log4C - pr * static_cast<double>(k) + 1e-9)
            dec.decay_ok = false;
    }

    // cross-check log g against the phase-carrying scalar product
    dec.det_identity_rel = 0;
    const std::size_t stride = std::max<std::size_t>(1, N / 64);
    for (std::size_t j = 0; j < N; j += stride) {
        const double th = j / static_cast<double>(N);
        ScaledScalar p = ScaledScalar::one();
        for (long i = 0; i < n; ++i) {
            ScaledScalar ci =
                ScaledScalar::from(model.c(th + i * model.alpha));
            ci.log_mag -= b;
            p = p * ci;
        }
        if (std::isinf(p.log_mag)) continue;  // exact zero hit: g = 0 there
        const double rel = std::abs(2.0 * p.log_mag - dec.log_g[j]) /
                           (1.0 + std::abs(dec.log_g[j]));
        dec.det_identity_rel = std::max(dec.det_identity_rel, rel);
    }
    return dec;
}

LevelSetReport find_large_norm_interval(const TrigDecomposition& dec,
                                        double a) {
    if (!(a > 0)) throw DomainError("Lyapunov floor must be positive");
    if (2.0 * dec.C1 <= a)
        throw DomainError("floor exceeds the measured growth rate 2 C1");
    LevelSetReport rep;
    rep.a = a;
    rep.n = dec.n;
    rep.c2 = 3.0 * a / (2.0 * dec.C1 - a);
    rep.n0 = std::max(dec.n2_threshold, 4.0 / a);

    const std::size_t N = dec.grid_size;
    const double n_d = static_cast<double>(dec.n);
    const double t3 = n_d * a / 2.0, t1 = n_d * a / 8.0;
    const double t2 = std::exp(n_d * a / 3.0);
    std::vector<char> in2(N);
    long c1 = 0, c2 = 0, c3 = 0;
    rep.chain_ok = true;
    for (std::size_t j = 0; j < N; ++j) {
        const bool b3 = dec.log_f[j] > t3;
        const bool b2 = dec.P[j] > t2;
        const bool b1 = dec.log_f[j] - dec.log_g[j] > t1;
        in2[j] = b2;
        c1 += b1;
        c2 += b2;
        c3 += b3;
        if ((b3 && !b2) || (b2 && !b1)) rep.chain_ok = false;
    }
    rep.leb1 = c1 / static_cast<double>(N);
    rep.leb2 = c2 / static_cast<double>(N);
    rep.leb3 = c3 / static_cast<double>(N);
    rep.theta3_floor_ok = rep.leb3 >= rep.c2;

    if (c2 == 0) {
        const double fm =
            *std::max_element(dec.log_f.begin(), dec.log_f.end());
        throw EmptyLevelSet("P_n never exceeds e^{n a/3}; max ln f_n = " +
                            std::to_string(fm) + " vs threshold " +
                            std::to_string(n_d * a / 3.0));
    }

    // longest circular run of grid points inside {P_n > e^{na/3}}
    std::size_t best_len = 0, best_start = 0;
    if (static_cast<std::size_t>(c2) == N) {
        best_len = N;
    } else {
        std::size_t j0 = 0;
        while (in2[j0]) ++j0;  // start at an outside point
        std::size_t run = 0, start = 0;
        for (std::size_t t = 0; t < N; ++t) {
            const std::size_t j = (j0 + 1 + t) % N;
            if (in2[j]) {
                if (run == 0) start = j;
                if (++run > best_len) {
                    best_len = run;
                    best_start = start;
                }
            } else {
                run = 0;
            }
        }
    }

    const double h = 1.0 / static_cast<double>(N);
    if (best_len == N) {
        rep.delta_lo = 0.0;
        rep.delta_hi = 1.0;
    } else {
        // refine the two boundary crossings of P_n = e^{na/3} by bisection
        auto refine = [&](double lo, double hi, bool rising) {
            for (int it = 0; it < 50; ++it) {
                const double mid = 0.5 * (lo + hi);
                const bool inside = dec.P_at(mid) > t2;
                if (inside == rising)
                    hi = mid;
                else
                    lo = mid;
            }
            return 0.5 * (lo + hi);
        };
        const double s = best_start * h;
        const double e = (best_start + best_len - 1) * h;
        rep.delta_lo = refine(s - h, s, true);
        rep.delta_hi = refine(e, e + h, false);
        if (rep.delta_hi < rep.delta_lo) rep.delta_hi += 1.0;
    }
    rep.delta_len = rep.delta_hi - rep.delta_lo;
    rep.len_ok = rep.delta_len >= rep.c2 / (4.0 * dec.d * n_d);

    rep.norm_ok = true;
    for (std::size_t t = 0; t < best_len; ++t) {
        const std::size_t j = (best_start + t) % N;
        if (!(dec.log_f[j] - dec.log_g[j] > t1)) rep.norm_ok = false;
    }
    return rep;
}

namespace {

// ln ||A(k)||_HS for k = 1 .. kmax in one forward pass
std::vector<double> log_norm_sweep(const OperatorModel& model, double E,
                                   long kmax) {
    std::vector<double> out(static_cast<std::size_t>(kmax) + 1, 0.0);
    ScaledMatrix2x2 P = ScaledMatrix2x2::identity();
    double logw = 0;
    for (long k = 1; k <= kmax; ++k) {
        const long j = k - 1;
        const cplx w = model.w(j);
        const double aw = std::abs(w);
        if (aw == 0.0)
            throw SingularStep("c vanishes at step " + std::to_string(j));
        const cplx wp = model.w(j - 1);
        P = ScaledMatrix2x2::from(E - model.vdiag(j), -std::conj(wp), w, 0.0) *
            P;
        logw += std::log(aw);
        out[static_cast<std::size_t>(k)] = P.log_hs_norm() - logw;
    }
    return out;
}

}  // namespace

NormGrowthCertificate localization_density(const OperatorModel& model,
                                           double E, long q_n, double a,
                                           long M) {
    if (q_n < 2 || M < 1) throw DomainError("need q_n >= 2, M >= 1");
    auto dec = decompose_F(model, E, 32);
    NormGrowthCertificate cert;
    cert.q_n = q_n;
    cert.a = a;
    cert.C1 = dec.C1;
    cert.d = dec.d;
    if (2.0 * dec.C1 <= a)
        throw DomainError("floor exceeds the measured growth rate 2 C1");
    cert.c2 = 3.0 * a / (2.0 * dec.C1 - a);
    cert.c0 = cert.c2 / (320.0 * static_cast<double>(dec.d));
    cert.k_n =
        static_cast<long>(std::floor(cert.c2 * q_n / (4.0 * dec.d))) - 1;
    cert.threshold = cert.c0 * static_cast<double>(q_n) * a;

    const long kmax = 2 * M * q_n;
    auto logs = log_norm_sweep(model, E, kmax);

    cert.all_pass = true;
    for (long m = 0; m < M; ++m) {
        LocalizationEntry e;
        e.m = m;
        const long lo = std::max(2 * m * q_n, 1L);
        const long hi = (2 * m + 2) * q_n;  // exclusive
        e.j_m = lo;
        e.log_norm = logs[static_cast<std::size_t>(lo)];
        for (long j = lo + 1; j < hi; ++j)
            if (logs[static_cast<std::size_t>(j)] > e.log_norm) {
                e.log_norm = logs[static_cast<std::size_t>(j)];
                e.j_m = j;
            }
        e.pass = e.log_norm > cert.threshold;
        if (!e.pass)
            throw NotFound("m = " + std::to_string(m) + ": best ln||A|| = " +
                           std::to_string(e.log_norm) + " at j = " +
                           std::to_string(e.j_m) + " vs threshold " +
                           std::to_string(cert.threshold));
        cert.hits.push_back(e);
    }
    return cert;
}

SumNormGrowth sum_norm_growth(const OperatorModel& model, double E, long ell,
                              double c_over_beta) {
    if (ell < 2 || ell > 100'000)
        throw BudgetExceeded("ell out of range [2, 1e5]");
    if (model.kind != OperatorModel::Kind::Quasiperiodic)
        throw DomainError("needs a quasiperiodic model");

    auto lse = [](const std::vector<double>& v, long ell_) {
        double mx = -kInf;
        for (long k = 1; k <= ell_; ++k)
            mx = std::max(mx, 2.0 * v[static_cast<std::size_t>(k)]);
        double s = 0;
        for (long k = 1; k <= ell_; ++k)
            s += std::exp(2.0 * v[static_cast<std::size_t>(k)] - mx);
        return mx + std::log(s);
    };

    SumNormGrowth out;
    out.ell = ell;
    out.target = 1.0 + 2.0 * c_over_beta;
    out.log_sum_fwd = lse(log_norm_sweep(model, E, ell), ell);
    out.exponent_fwd = out.log_sum_fwd / std::log(static_cast<double>(ell));
    out.fwd_ok = out.exponent_fwd >= out.target;

    OperatorModel rev = model;  // direction (theta - alpha, -alpha)
    rev.theta = model.theta - model.alpha;
    rev.alpha = -model.alpha;
    out.log_sum_rev = lse(log_norm_sweep(rev, E, ell), ell);
    out.exponent_rev = out.log_sum_rev / std::log(static_cast<double>(ell));
    out.rev_ok = out.exponent_rev >= out.target;
    return out;
}

// ---------------------------------------------------------------------------
// sublevel-measure bound for real-rooted polynomials

namespace {

double poly_eval(const std::vector<double>& p, double x) {
    double s = 0;
    for (std::size_t i = p.size(); i-- > 0;) s = s * x + p[i];
    return s;
}

std::vector<double> poly_derivative(const std::vector<double>& p) {
    std::vector<double> d;
    for (std::size_t i = 1; i < p.size(); ++i)
        d.push_back(static_cast<double>(i) * p[i]);
    return d;
}

}  // namespace

namespace {

// all (complex) roots via the companion matrix
std::vector<cplx> companion_roots(const std::vector<double>& p) {
    std::vector<double> c = p;
    while (!c.empty() && std::abs(c.back()) < 1e-300) c.pop_back();
    if (c.size() <= 1) return {};
    const lapack_int n = static_cast<lapack_int>(c.size()) - 1;
    std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
    for (lapack_int i = 0; i + 1 < n; ++i)
        A[static_cast<std::size_t>(i + 1) + static_cast<std::size_t>(i) * n] =
            1.0;
    for (lapack_int i = 0; i < n; ++i)
        A[static_cast<std::size_t>(i) +
          static_cast<std::size_t>(n - 1) * n] = -c[i] / c.back();
    std::vector<double> wr(n), wi(n);
    const lapack_int info =
        LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n, wr.data(),
                      wi.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw NotConverged("companion eigensolve failed");
    std::vector<cplx> roots;
    for (lapack_int i = 0; i < n; ++i) roots.emplace_back(wr[i], wi[i]);
    return roots;
}

}  // namespace

std::vector<double> real_roots(const std::vector<double>& p) {
    auto all = companion_roots(p);
    double scale = 1.0;
    for (const auto& z : all) scale = std::max(scale, std::abs(z));
    std::vector<double> roots;
    for (const auto& z : all)
        if (std::abs(z.imag()) <= 1e-8 * scale) roots.push_back(z.real());
    std::sort(roots.begin(), roots.end());
    return roots;
}

SublevelBound sublevel_measure_bound(const std::vector<double>& p, double a,
                                     double b) {
    if (!(0.0 <= a && a < b)) throw DomainError("need 0 <= a < b");
    std::vector<double> c = p;
    while (!c.empty() && std::abs(c.back()) < 1e-300) c.pop_back();
    if (c.size() <= 1) throw DomainError("constant polynomial");
    const std::size_t deg = c.size() - 1;

    auto zeros = real_roots(c);
    if (zeros.size() != deg) throw DegenerateZeros("complex zeros present");
    const double span = zeros.back() - zeros.front();
    for (std::size_t i = 1; i < zeros.size(); ++i)
        if (zeros[i] - zeros[i - 1] <= 1e-8 * (1.0 + span))
            throw DegenerateZeros("repeated zero near " +
                                  std::to_string(zeros[i]));

    SublevelBound out;
    if (deg == 1) {
        out.vacuous_linear = true;
        out.zeta = kInf;
        out.bound = kInf;
    } else {
        auto crit = real_roots(poly_derivative(c));
        out.zeta = kInf;
        for (double y : crit)
            out.zeta = std::min(out.zeta, std::abs(poly_eval(c, y)));
    }

    // preimage of (a, b): breakpoints are the real solutions of p = a, p = b
    std::vector<double> pa = c, pb = c;
    pa[0] -= a;
    pb[0] -= b;
    auto ra = real_roots(pa);
    auto rb = real_roots(pb);
    std::vector<double> brk = ra;
    brk.insert(brk.end(), rb.begin(), rb.end());
    std::sort(brk.begin(), brk.end());
    for (std::size_t i = 1; i < brk.size(); ++i) {
        const double mid = 0.5 * (brk[i - 1] + brk[i]);
        const double v = poly_eval(c, mid);
        if (a < v && v < b) out.preimage_len += brk[i] - brk[i - 1];
    }

    // the diameter of the full complex zero set of p - a: with a above a
    // local maximum the real zeros alone can miss the preimage entirely
    auto za = companion_roots(pa);
    out.diam = 0.0;
    for (const auto& u : za)
        for (const auto& v : za)
            out.diam = std::max(out.diam, std::abs(u - v));
    if (!out.vacuous_linear) {
        const double t = (b - a) / (out.zeta + a);
        out.bound = 2.0 * out.diam * std::max(t, std::sqrt(t));
    }
    out.inequality_ok =
        out.preimage_len <= out.bound * (1.0 + 1e-9) + 1e-12;
    return out;
}

}  // namespace qjl
