#include "qjlab/lattice.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

#include "qjlab/errors.hpp"

namespace qjl {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
constexpr long kBoxCap = 20000;  // dense tridiagonal eigensolve budget
}  // namespace

cplx SamplingFunction::operator()(double theta) const {
    if (kind == Kind::Closure) return fn(theta);
    cplx s = 0;
    for (const auto& [k, ck] : coeffs)
        s += ck * std::polar(1.0, kTwoPi * k * theta);
    return s;
}

cplx SamplingFunction::operator()(cplx theta) const {
    if (kind == Kind::Closure)
        throw NonAnalyticInput("closure sampling function has no strip extension");
    cplx s = 0;
    for (const auto& [k, ck] : coeffs)
        s += ck * std::exp(cplx(0, kTwoPi * k) * theta);
    return s;
}

long SamplingFunction::degree() const {
    long d = 0;
    for (const auto& [k, ck] : coeffs)
        if (std::abs(ck) != 0.0) d = std::max(d, std::abs(k));
    return d;
}

bool SamplingFunction::is_real() const {
    if (kind == Kind::Closure) return false;
    for (const auto& [k, ck] : coeffs) {
        cplx conj_partner = 0;
        for (const auto& [k2, c2] : coeffs)
            if (k2 == -k) conj_partner = c2;
        if (std::abs(conj_partner - std::conj(ck)) > 1e-14) return false;
    }
    return true;
}

SamplingFunction SamplingFunction::constant(cplx c) {
    SamplingFunction f;
    f.coeffs = {{0, c}};
    return f;
}

SamplingFunction SamplingFunction::cosine(double amp, double shift) {
    SamplingFunction f;
    const cplx ph = std::polar(amp / 2.0, kTwoPi * shift);
    f.coeffs = {{1, ph}, {-1, std::conj(ph)}};
    return f;
}

SamplingFunction SamplingFunction::zero() {
    SamplingFunction f;
    f.coeffs = {};
    return f;
}

EHMClassification ehm_classify(const EHMParams& lam) {
    const double s = lam.l1 + lam.l3, t = lam.l2;
    if (lam.l1 < 0 || lam.l2 < 0 || lam.l3 < 0)
        throw DomainError("EHM couplings must be nonnegative");
    if (s == 0.0 && t == 0.0)
        throw Unclassifiable("lambda2 = 0 and lambda1+lambda3 = 0");

    EHMClassification out;
    // geometric label: boundary lines first, exact comparisons
    if (s == 1.0 && t <= 1.0 && t > 0.0) {
        out.geo = EHMRegionGeo::LI;
    } else if (t == 1.0 && s <= 1.0) {
        out.geo = EHMRegionGeo::LII;
    } else if (s == t && s >= 1.0) {
        out.geo = EHMRegionGeo::LIII;
    } else if (s <= 1.0 && t > 0.0 && t <= 1.0) {
        out.geo = EHMRegionGeo::I;
        out.interior = true;
    } else if (t >= std::max(s, 1.0) && s > 0.0) {
        out.geo = EHMRegionGeo::II;
        out.interior = true;
    } else if (s >= std::max(t, 1.0) && t > 0.0) {
        out.geo = EHMRegionGeo::III;
        out.interior = true;
    } else if (t > 1.0 && s == 0.0) {
        out.geo = EHMRegionGeo::II;  // s = 0 edge of region II
        out.interior = true;
    } else {
        // t = 0, s > 0: off every geometric region; treat as region III edge
        out.geo = EHMRegionGeo::III;
    }

    // R partition (has measure-zero gaps; r_region stays empty there)
    if (s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0)
        out.r_region = EHMRegionR::R1;
    else if ((t > std::max(s, 1.0)) ||
             (s > std::max(t, 1.0) && lam.l1 != lam.l3 && t > 0.0))
        out.r_region = EHMRegionR::R2;
    else if ((s <= 1.0 && t == 1.0) ||
             (s >= std::max(t, 1.0) && lam.l1 == lam.l3 && t > 0.0))
        out.r_region = EHMRegionR::R3;
    return out;
}

std::string EHMClassification::describe() const {
    std::string r = r_region
                        ? (*r_region == EHMRegionR::R1   ? "R1"
                           : *r_region == EHMRegionR::R2 ? "R2"
                                                         : "R3")
                        : "R-none";
    const char* g[] = {"I", "II", "III", "L_I", "L_II", "L_III"};
    return r + "/" + g[static_cast<int>(geo)];
}

double ehm_lyapunov_formula(const EHMParams& lam) {
    const double s = lam.l1 + lam.l3, t = lam.l2;
    if (s == 0.0 && t == 0.0)
        throw Unclassifiable("lambda2 = 0 and lambda1+lambda3 = 0");
    const bool in_I = (s <= 1.0 && t > 0.0 && t <= 1.0);
    if (!in_I) return 0.0;  // closed regions II/III: zero on the spectrum
    const double disc = std::sqrt(std::max(0.0, 1.0 - 4.0 * lam.l1 * lam.l3));
    if (t <= s) {
        const double denom = 2.0 * std::max(lam.l1, lam.l3);
        return std::log((1.0 + disc) / denom);
    }
    const double denom =
        t + std::sqrt(std::max(0.0, t * t - 4.0 * lam.l1 * lam.l3));
    return std::log((1.0 + disc) / denom);
}

SamplingFunction ehm_c(const EHMParams& lam, double alpha) {
    SamplingFunction f;
    f.coeffs = {{-1, lam.l1 * std::polar(1.0, -M_PI * alpha)},
                {0, cplx(lam.l2, 0)},
                {1, lam.l3 * std::polar(1.0, M_PI * alpha)}};
    return f;
}

cplx OperatorModel::w(long n) const {
    if (kind == Kind::Explicit) {
        const long i = n - lo;
        if (i < 0 || i >= static_cast<long>(w_arr.size()))
            throw WindowTooLarge("explicit arrays do not cover index");
        return w_arr[i];
    }
    return c(theta + n * alpha);
}

double OperatorModel::vdiag(long n) const {
    if (kind == Kind::Explicit) {
        const long i = n - v_lo;
        if (i < 0 || i >= static_cast<long>(v_arr.size()))
            throw WindowTooLarge("explicit arrays do not cover index");
        return v_arr[i];
    }
    return v(theta + v_theta_shift + n * alpha).real();
}

double OperatorModel::w_sup() const {
    if (kind == Kind::Explicit) {
        double m = 0;
        for (auto z : w_arr) m = std::max(m, std::abs(z));
        return m;
    }
    if (c.kind == SamplingFunction::Kind::TrigPoly) {
        double m = 0;  // L1 norm of coefficients bounds sup|c|
        for (const auto& [k, ck] : c.coeffs) m += std::abs(ck);
        return m;
    }
    double m = 0;
    for (int i = 0; i < 8192; ++i) m = std::max(m, std::abs(c(i / 8192.0)));
    return m;
}

double OperatorModel::v_sup() const {
    if (kind == Kind::Explicit) {
        double m = 0;
        for (auto x : v_arr) m = std::max(m, std::abs(x));
        return m;
    }
    if (v.kind == SamplingFunction::Kind::TrigPoly) {
        double m = 0;
        for (const auto& [k, ck] : v.coeffs) m += std::abs(ck);
        return m;
    }
    double m = 0;
    for (int i = 0; i < 8192; ++i) m = std::max(m, std::abs(v(i / 8192.0)));
    return m;
}

OperatorModel OperatorModel::quasiperiodic(SamplingFunction c,
                                           SamplingFunction v, double alpha,
                                           double theta) {
    OperatorModel m;
    m.kind = Kind::Quasiperiodic;
    m.c = std::move(c);
    m.v = std::move(v);
    m.alpha = alpha;
    m.theta = theta;
    return m;
}

OperatorModel OperatorModel::ehm_model(const EHMParams& lam, double alpha,
                                       double theta) {
    auto m = quasiperiodic(ehm_c(lam, alpha), SamplingFunction::cosine(2.0),
                           alpha, theta);
    m.ehm = lam;
    return m;
}

OperatorModel OperatorModel::schrodinger_cos(double coupling, double alpha,
                                             double theta) {
    return quasiperiodic(SamplingFunction::constant(1.0),
                         SamplingFunction::cosine(2.0 * coupling), alpha,
                         theta);
}

OperatorModel OperatorModel::free_laplacian() {
    return quasiperiodic(SamplingFunction::constant(1.0),
                         SamplingFunction::zero(), 0.0, 0.0);
}

OperatorModel OperatorModel::explicit_arrays(long lo, std::vector<cplx> w,
                                             std::vector<double> v) {
    OperatorModel m;
    m.kind = Kind::Explicit;
    m.lo = lo;
    m.v_lo = lo;
    m.w_arr = std::move(w);
    m.v_arr = std::move(v);
    return m;
}

OperatorModel OperatorModel::reflected() const {
    // (U psi)_n = psi_{1-n} gives w^_n = conj(w_{-n}), v^_n = v_{1-n}
    if (kind == Kind::Explicit) {
        const long len = static_cast<long>(w_arr.size());
        std::vector<cplx> wr(len);
        std::vector<double> vr(v_arr.size());
        // w covers [lo, lo+len); reflected w covers [-(lo+len-1), -lo]
        for (long i = 0; i < len; ++i) wr[i] = std::conj(w_arr[len - 1 - i]);
        const long vlen = static_cast<long>(v_arr.size());
        for (long i = 0; i < vlen; ++i) vr[i] = v_arr[vlen - 1 - i];
        auto m = explicit_arrays(-(lo + len - 1), std::move(wr), {});
        m.v_arr = std::move(vr);
        // v covers [v_lo, v_lo+vlen); reflected v covers 1 - that range
        m.v_lo = 1 - (v_lo + vlen - 1);
        return m;
    }
    OperatorModel m;
    m.kind = Kind::Quasiperiodic;
    m.alpha = -alpha;
    m.theta = theta;
    m.v = v;
    m.v_theta_shift = alpha;  // v^_n = v(theta + alpha + n(-alpha))
    if (c.kind == SamplingFunction::Kind::TrigPoly) {
        SamplingFunction cc;
        for (const auto& [k, ck] : c.coeffs)
            cc.coeffs.emplace_back(-k, std::conj(ck));
        cc.rho = c.rho;
        m.c = cc;
    } else {
        SamplingFunction cc;
        cc.kind = SamplingFunction::Kind::Closure;
        auto base = c.fn;
        cc.fn = [base](double x) { return std::conj(base(x)); };
        m.c = cc;
    }
    m.ehm = ehm;
    return m;
}

WindowSample sample_window(const OperatorModel& model, long lo, long hi) {
    if (hi < lo) throw DomainError("empty window");
    const long len = hi - lo + 1;
    if (len > 10'000'000L) throw WindowTooLarge("window exceeds 1e7 sites");
    WindowSample s;
    s.lo = lo;
    s.w.reserve(len);
    s.v.reserve(len);
    for (long n = lo; n <= hi; ++n) {
        cplx wn = model.w(n);
        s.w.push_back(wn);
        s.v.push_back(model.vdiag(n));
        if (std::abs(wn) == 0.0) s.zero_indices.push_back(n);
    }
    return s;
}

namespace {

// gauge the box [-L, L] to a real symmetric tridiagonal (d, e)
void box_tridiag(const OperatorModel& model, long L, std::vector<double>& d,
                 std::vector<double>& e) {
    if (2 * L + 1 > kBoxCap) throw WindowTooLarge("box exceeds eigensolve budget");
    const long N = 2 * L + 1;
    d.resize(N);
    e.resize(N - 1);
    for (long i = 0; i < N; ++i) d[i] = model.vdiag(i - L);
    for (long i = 0; i + 1 < N; ++i) e[i] = std::abs(model.w(i - L));
}

}  // namespace

std::vector<double> finite_box_spectrum(const OperatorModel& model, long L) {
    std::vector<double> d, e;
    box_tridiag(model, L, d, e);
    const lapack_int n = static_cast<lapack_int>(d.size());
    lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', n, d.data(),
                                    e.data(), nullptr, n);
    if (info != 0) throw NotConverged("tridiagonal eigensolve failed");
    return d;  // ascending per LAPACK contract
}

BoxEigensystem box_eigensystem(const OperatorModel& model, long L) {
    std::vector<double> d, e;
    box_tridiag(model, L, d, e);
    const lapack_int n = static_cast<lapack_int>(d.size());
    std::vector<double> z(static_cast<std::size_t>(n) * n);
    lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', n, d.data(),
                                    e.data(), z.data(), n);
    if (info != 0) throw NotConverged("tridiagonal eigensolve failed");
    BoxEigensystem sys;
    sys.L = L;
    sys.evals = d;
    sys.weight0.resize(n);
    sys.weight1.resize(n);
    const long i0 = L, i1 = L + 1;  // lattice sites 0 and 1
    for (lapack_int k = 0; k < n; ++k) {
        const double a = z[static_cast<std::size_t>(k) * n + i0];
        const double b =
            i1 < n ? z[static_cast<std::size_t>(k) * n + i1] : 0.0;
        sys.weight0[k] = a * a;
        sys.weight1[k] = b * b;
    }
    return sys;
}

}  // namespace qjl
