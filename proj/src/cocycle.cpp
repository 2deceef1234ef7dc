#include "qjlab/cocycle.hpp"

#include <algorithm>
#include <cmath>

#include "qjlab/errors.hpp"

namespace qjl {

namespace {

// unit phase w/|w| (the lower diagonal entry of T_n)
cplx t_phase(cplx w) {
    const double a = std::abs(w);
    if (a == 0.0) throw SingularStep("T_n undefined at w = 0");
    return w / a;
}

ScaledMatrix2x2 step_D(double E, double v, cplx w_n, cplx w_prev) {
    return ScaledMatrix2x2::from(cplx(E - v, 0), -std::conj(w_prev), w_n,
                                 cplx(0, 0));
}

ScaledMatrix2x2 forward_product(const OperatorModel& model, double E, long n,
                                long m, ProductKind kind) {
    // leftmost factor has index n+m-1; accumulate from the right
    auto P = ScaledMatrix2x2::identity();
    cplx w_prev = model.w(m - 1);
    for (long j = m; j < m + n; ++j) {
        const cplx w_j = model.w(j);
        auto Dj = step_D(E, model.vdiag(j), w_j, w_prev);
        if (kind == ProductKind::A) {
            if (std::abs(w_j) == 0.0)
                throw SingularStep("w = 0 inside an A-product window");
            P = Dj * ScaledScalar::from(w_j).inverse() * P;
        } else {
            P = Dj * P;
        }
        w_prev = w_j;
    }
    return P;
}

}  // namespace

StepMatrices step_matrices(double E, double v_n, cplx w_n, cplx w_prev) {
    StepMatrices out;
    out.D = step_D(E, v_n, w_n, w_prev);
    if (std::abs(w_n) == 0.0) {
        out.singular = true;
    } else {
        out.A = out.D * ScaledScalar::from(w_n).inverse();
    }
    return out;
}

ScaledMatrix2x2 product(const OperatorModel& model, double E, long n, long m,
                        ProductKind kind) {
    if (std::llabs(n) > kProductCap) throw WindowTooLarge("|n| exceeds 1e7");
    if (n == 0) return ScaledMatrix2x2::identity();
    if (n > 0) return forward_product(model, E, n, m, kind);
    return forward_product(model, E, -n, m + n, kind).inverse();
}

ScaledScalar product_w(const OperatorModel& model, long n, long m) {
    if (n < 1) throw DomainError("w(n,m) needs n >= 1");
    auto s = ScaledScalar::one();
    for (long j = m; j < m + n; ++j) s = s * ScaledScalar::from(model.w(j));
    return s;
}

ScaledScalar product_r(const OperatorModel& model, long n, long m) {
    if (n < 1) throw DomainError("r(n,m) needs n >= 1");
    auto s = ScaledScalar::one();
    for (long j = m; j < m + n; ++j) {
        const cplx wj = model.w(j), wj1 = model.w(j + 1);
        const double mag = std::abs(wj) * std::abs(wj1);
        if (mag == 0.0) throw SingularStep("r_j undefined at w = 0");
        auto rj = ScaledScalar::from(wj1);
        rj.log_mag -= 0.5 * std::log(mag);
        s = s * rj;
    }
    return s;
}

LyapunovEstimate lyapunov_birkhoff(const OperatorModel& base, double E, long n,
                                   const std::vector<double>& thetas) {
    if (n < 1000) throw DomainError("lyapunov_birkhoff needs n >= 1e3");
    if (thetas.size() < 4) throw DomainError("need at least 4 phases");
    LyapunovEstimate est;
    est.E = E;
    est.n = n;
    for (double th : thetas) {
        OperatorModel model = base;
        model.theta = th;
        // one pass accumulating D(n,1) and ln|w(n,1)| together
        auto P = ScaledMatrix2x2::identity();
        double log_w = 0;
        cplx w_prev = model.w(0);
        for (long j = 1; j <= n; ++j) {
            const cplx w_j = model.w(j);
            const double a = std::abs(w_j);
            if (a == 0.0) throw SingularStep("exact zero of w in window");
            log_w += std::log(a);
            P = step_D(E, model.vdiag(j), w_j, w_prev) * P;
            w_prev = w_j;
        }
        est.theta_values.push_back((P.log_op_norm() - log_w) / n);
    }
    double s = 0;
    for (double v : est.theta_values) s += v;
    est.mean = s / est.theta_values.size();
    double var = 0;
    for (double v : est.theta_values) var += (v - est.mean) * (v - est.mean);
    var /= (est.theta_values.size() - 1);
    est.std_error = std::sqrt(var / est.theta_values.size());
    return est;
}

RegularizedProduct regularize_product(const OperatorModel& model, double E,
                                      long n, long m) {
    if (n < 1) throw DomainError("regularize_product needs n >= 1");
    RegularizedProduct out;
    auto P = ScaledMatrix2x2::identity();
    auto det_acc = ScaledScalar::one();
    cplx w_prev = model.w(m - 1);
    if (std::abs(w_prev) == 0.0) throw SingularStep("w = 0 at window edge");
    for (long j = m; j < m + n; ++j) {
        const cplx w_j = model.w(j);
        const double aj = std::abs(w_j), ap = std::abs(w_prev);
        if (aj == 0.0) throw SingularStep("w = 0 inside window");
        const double pref = -0.5 * std::log(aj * ap);
        auto Mj = ScaledMatrix2x2::from(cplx(E - model.vdiag(j), 0),
                                        cplx(-ap, 0), cplx(aj, 0), cplx(0, 0),
                                        pref);
        const cplx dn = Mj.det_normalized();
        auto dj = ScaledScalar::from(dn);
        dj.log_mag += 2.0 * Mj.log_scale;
        det_acc = det_acc * dj;
        P = Mj * P;
        w_prev = w_j;
    }
    out.Atilde = P;
    out.det_tracked = det_acc;
    out.r = product_r(model, n, m - 1);
    out.T_right = t_phase(model.w(n + m - 1));
    out.T_left = t_phase(model.w(m - 1));

    // right-hand side of the conjugacy identity
    auto A = product(model, E, n, m, ProductKind::A);
    ScaledMatrix2x2 rhs = A;
    rhs.m[1] *= out.T_left;
    rhs.m[3] *= out.T_left;
    rhs.m[2] /= out.T_right;
    rhs.m[3] /= out.T_right;
    rhs = rhs * out.r;
    out.conjugacy_residual = out.Atilde.relative_diff(rhs);
    if (!(out.conjugacy_residual <= 1e-8))
        throw NotConverged("conjugacy residual above 1e-8");
    return out;
}

RegularityReport regularity_bounds_check(const OperatorModel& model, double E,
                                         long q, long window, double beta,
                                         double Lambda) {
    if (q < 1 || window < 0) throw DomainError("bad q or window");
    RegularityReport rep;
    rep.q = q;
    rep.window = window;
    rep.beta = beta;
    rep.Lambda = Lambda;
    const long M = window;

    // w samples over [-M-1, M+2q]
    std::vector<double> logw(2 * M + 2 * q + 2);
    std::vector<cplx> wv(2 * M + 2 * q + 2);
    auto widx = [&](long n) { return static_cast<std::size_t>(n + M + 1); };
    for (long n = -M - 1; n <= M + 2 * q; ++n) {
        wv[widx(n)] = model.w(n);
        const double a = std::abs(wv[widx(n)]);
        if (a == 0.0) throw ZeroInWindow("w = 0 at index " + std::to_string(n));
        logw[widx(n)] = std::log(a);
    }

    double worst_r = 0, worst_T = 0;
    for (long m = -M; m <= M; ++m) {
        // |r(q,m)| telescopes to sqrt(|w_{m+q}|/|w_m|)
        const double lr = 0.5 * (logw[widx(m + q)] - logw[widx(m)]);
        worst_r = std::max({worst_r, std::abs(std::exp(lr) - 1.0),
                            std::abs(std::exp(-lr) - 1.0)});
        const cplx z = wv[widx(m)] / wv[widx(m + q)];
        worst_T = std::max(worst_T, std::abs(z / std::abs(z) - 1.0));
    }

    // A(q,m) and A~(q,m) for all m in [-M, M+q], each computed once
    std::vector<ScaledMatrix2x2> As, Ats;
    As.reserve(2 * M + q + 1);
    Ats.reserve(2 * M + q + 1);
    for (long m = -M; m <= M + q; ++m) {
        As.push_back(product(model, E, q, m, ProductKind::A));
        Ats.push_back(regularize_product(model, E, q, m).Atilde);
    }
    double worst_A = 0, worst_At = 0, worst_tr = 0;
    for (long m = -M; m <= M; ++m) {
        const auto& A1 = As[m + M];
        const auto& A2 = As[m + M + q];
        worst_A = std::max(worst_A, A1.diff_op_norm(A2));
        worst_At = std::max(worst_At, Ats[m + M].diff_op_norm(Ats[m + M + q]));
        const double trA = std::exp(A1.log_abs_trace());
        const double trAt = std::exp(Ats[m + M].log_abs_trace());
        worst_tr = std::max(worst_tr, std::abs(trAt - trA));
    }

    auto mk = [&](const char* name, double obs, double bnd) {
        return BoundCheck{name, obs, bnd, obs <= bnd};
    };
    const double dq = static_cast<double>(q);
    rep.r_dev = mk("r_dev", worst_r, std::exp(-(beta - 2 * Lambda) * dq));
    rep.T_dev = mk("T_dev", worst_T, 4 * std::exp(-(beta - 2 * Lambda) * dq));
    rep.A_dev = mk("A_dev", worst_A, std::exp(-(beta - 6 * Lambda) * dq));
    rep.Atilde_dev =
        mk("Atilde_dev", worst_At, std::exp(-(beta - 6 * Lambda) * dq));
    rep.trace_dev =
        mk("trace_dev", worst_tr, 12 * std::exp(-(beta - 4 * Lambda) * dq));
    return rep;
}

std::vector<TraceClassification> trace_classify(
    const OperatorModel& model, long q, const std::vector<double>& energies,
    double Lambda, double kappa) {
    if (q < 1) throw DomainError("q must be >= 1");
    std::vector<TraceClassification> out;
    const double tol = 2.0 * std::exp(-kappa * Lambda * q);
    for (double E : energies) {
        TraceClassification tc;
        tc.E = E;
        auto A = product(model, E, q, 1, ProductKind::A);
        tc.log_trace_abs = A.log_abs_trace();
        tc.trace_abs = std::exp(tc.log_trace_abs);
        tc.dist_to_2 = std::abs(tc.trace_abs - 2.0);
        auto reg = regularize_product(model, E, q, 1);
        tc.trace_tilde_abs = std::exp(reg.Atilde.log_abs_trace());
        tc.tilde_gap = std::abs(tc.trace_tilde_abs - tc.trace_abs);
        if (tc.dist_to_2 < tol)
            tc.label = TraceLabel::S2;
        else if (tc.trace_abs > 2.0 + tol)
            tc.label = TraceLabel::S1;
        else
            tc.label = TraceLabel::EllipticStrict;
        out.push_back(tc);
    }
    return out;
}

namespace {

struct Mat2 {
    double a, b, c, d;
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
                c * o.b + d * o.d};
    }
    Mat2 operator-(const Mat2& o) const {
        return {a - o.a, b - o.b, c - o.c, d - o.d};
    }
    double norm() const {
        const double t = a * a + b * b + c * c + d * d;
        const double det = a * d - b * c;
        return std::sqrt(
            0.5 * (t + std::sqrt(std::max(0.0, t * t - 4 * det * det))));
    }
    static Mat2 id() { return {1, 0, 0, 1}; }
    Mat2 scaled(double s) const { return {s * a, s * b, s * c, s * d}; }
    Mat2 plus(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
};

}  // namespace

PowerGrowthDiagnostics hyperbolic_power_growth(const ScaledMatrix2x2& G,
                                               long N) {
    if (std::abs(G.log_scale) > 300.0)
        throw Overflow("represented matrix outside double range");
    const double s = std::exp(G.log_scale);
    for (const auto& e : G.m)
        if (std::abs(e.imag()) * s > 1e-9)
            throw DomainError("matrix must be real");
    Mat2 g{G.m[0].real() * s, G.m[1].real() * s, G.m[2].real() * s,
           G.m[3].real() * s};
    const double det = g.a * g.d - g.b * g.c;
    if (std::abs(det - 1.0) > 1e-10) throw DomainError("det must be 1");

    PowerGrowthDiagnostics diag;
    const double tr = g.a + g.d;
    diag.trace = tr;

    if (std::abs(tr) == 2.0) {
        diag.branch = PowerGrowthDiagnostics::Branch::Parabolic;
        // Tr = 2: G^k = k(G - I) + I;  Tr = -2: apply to -G
        const double sgn = tr > 0 ? 1.0 : -1.0;
        Mat2 base = g.scaled(sgn);
        Mat2 P = Mat2::id();
        double worst = 0;
        const long kmax = std::min<long>(N, 100);
        for (long k = 1; k <= kmax; ++k) {
            P = base * P;
            Mat2 F = (base - Mat2::id()).scaled(double(k)).plus(Mat2::id());
            worst = std::max(worst, (P - F).norm() / std::max(1.0, P.norm()));
        }
        diag.reconstruction_residual = worst;
        return diag;
    }

    if (std::abs(tr) > 2.0) {
        diag.branch = PowerGrowthDiagnostics::Branch::Hyperbolic;
        const double disc = std::sqrt(tr * tr - 4.0);
        const double l1 = (tr + (tr > 0 ? disc : -disc)) / 2.0;  // |l1| > 1
        const double l2 = 1.0 / l1;
        diag.rho_abs = std::abs(l1);
        auto evec = [&](double lam, double& x, double& y) {
            if (std::abs(g.b) + std::abs(lam - g.a) >=
                std::abs(lam - g.d) + std::abs(g.c)) {
                x = g.b;
                y = lam - g.a;
            } else {
                x = lam - g.d;
                y = g.c;
            }
            const double nn = std::hypot(x, y);
            x /= nn;
            y /= nn;
        };
        double x1, y1, x2, y2;
        evec(l1, x1, y1);
        evec(l2, x2, y2);
        Mat2 B{x1, x2, y1, y2};
        const double detB = B.a * B.d - B.b * B.c;
        if (std::abs(detB) < 1e-14)
            throw DegenerateDiagonalization("eigenvectors collapsed");
        const double f = 1.0 / std::sqrt(std::abs(detB));
        B = B.scaled(f);  // now |det B| = 1
        diag.B_norm = B.norm();
        diag.B_bound = std::sqrt(g.norm()) / std::sqrt(std::abs(tr) - 2.0);
        if (std::abs(tr) > 6.0) diag.B_bound *= 2.0;
        diag.B_ok = diag.B_norm <= diag.B_bound;
        const double detB2 = B.a * B.d - B.b * B.c;
        Mat2 Binv{B.d / detB2, -B.b / detB2, -B.c / detB2, B.a / detB2};
        Mat2 R = B * Mat2{l1, 0, 0, l2} * Binv;
        diag.reconstruction_residual = (R - g).norm() / g.norm();
        return diag;
    }

    // elliptic
    diag.branch = PowerGrowthDiagnostics::Branch::Elliptic;
    const double psi = std::acos(std::clamp(tr / 2.0, -1.0, 1.0));
    diag.psi = psi;
    Mat2 base = g;
    Mat2 half = g.plus(Mat2::id().scaled(-tr / 2.0));
    Mat2 P = Mat2::id();
    double worst = 0;
    const long jmax = std::min<long>(N, 500);
    for (long j = 1; j <= jmax; ++j) {
        P = base * P;
        const double coef = std::sin(j * psi) / std::sin(psi);
        Mat2 F = half.scaled(coef).plus(Mat2::id().scaled(std::cos(j * psi)));
        worst = std::max(worst, (P - F).norm() / std::max(1.0, P.norm()));
    }
    diag.reconstruction_residual = worst;

    const double tau = std::abs(std::abs(tr) - 2.0);
    if (tau > 0 && tau < 1) {
        // linear window asserted for k <= tau^{-1/2}; beyond that the
        // coefficient oscillates and the window is vacuous
        const long kmax = std::min<long>(N, static_cast<long>(1.0 / std::sqrt(tau)));
        diag.linear_window_k = kmax;
        for (long k = 1; k <= kmax; ++k) {
            const double coef = std::abs(std::sin(k * psi) / std::sin(psi));
            if (!(coef > k / 3.0 && coef < 4.0 * k)) {
                diag.linear_window_ok = false;
                break;
            }
        }
    }
    return diag;
}

}  // namespace qjl
