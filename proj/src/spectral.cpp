#include "qjlab/spectral.hpp"

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qjlab/errors.hpp"

namespace qjl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_phi(double phi) {  // into (-pi/2, pi/2]
    while (phi > M_PI / 2) phi -= M_PI;
    while (phi <= -M_PI / 2) phi += M_PI;
    return phi;
}

// log-sum-exp accumulator for sums of positive terms given in log form
struct LogSum {
    double max_log = -kInf;
    double acc = 0;  // sum of e^{l - max_log}
    void add(double l) {
        if (std::isinf(l) && l < 0) return;
        if (l > max_log) {
            if (std::isinf(max_log))
                acc = 1.0;
            else
                acc = acc * std::exp(max_log - l) + 1.0;
            max_log = l;
        } else {
            acc += std::exp(l - max_log);
        }
    }
    double log_value() const {
        if (std::isinf(max_log)) return -kInf;
        return max_log + std::log(acc);
    }
};
}  // namespace

double HalfLineSolution::log_abs(long n) const {
    const double a = std::abs(unit.at(n));
    if (a == 0.0) return -kInf;
    return std::log(a) + log_off[n];
}

HalfLineSolution half_line_solution(const OperatorModel& model, double E,
                                    double phi, HalfLineSolution::Side side,
                                    long length) {
    if (length < 2 || length > 1'000'000)
        throw DomainError("length outside [2, 1e6]");
    const OperatorModel m =
        side == HalfLineSolution::Side::Right ? model : model.reflected();

    HalfLineSolution s;
    s.phi = phi;
    s.side = side;
    s.E = E;
    s.unit.reserve(length + 1);
    s.log_off.reserve(length + 1);

    cplx a(-std::sin(phi), 0), b(std::cos(phi), 0);  // u_0, u_1
    double scale = 0;
    s.unit.push_back(a);
    s.log_off.push_back(0);
    s.unit.push_back(b);
    s.log_off.push_back(0);

    cplx w_prev = m.w(0);
    for (long n = 1; n < length; ++n) {
        const cplx w_n = m.w(n);
        if (std::abs(w_n) == 0.0) {
            s.truncated_at = n;
            break;
        }
        const double v_n = m.vdiag(n);
        const cplx c = ((E - v_n) * b - std::conj(w_prev) * a) / w_n;
        // recurrence residual at n, relative to the local magnitude
        const double loc =
            std::max({std::abs(a), std::abs(b), std::abs(c), 1e-300});
        const double res =
            std::abs(w_n * c + std::conj(w_prev) * a + (v_n - E) * b) / loc;
        s.max_residual = std::max(s.max_residual, res);

        a = b;
        b = c;
        const double mag = std::max(std::abs(a), std::abs(b));
        if (mag > 1e100 || (mag > 0 && mag < 1e-100)) {
            a /= mag;
            b /= mag;
            scale += std::log(mag);
        }
        s.unit.push_back(b);
        s.log_off.push_back(scale);
        w_prev = w_n;
    }
    return s;
}

HalfLineSolution orthogonal_partner(const OperatorModel& model,
                                    const HalfLineSolution& u) {
    return half_line_solution(model, u.E, wrap_phi(u.phi + M_PI / 2), u.side,
                              u.range());
}

double log_ell_norm(const HalfLineSolution& u, double ell) {
    if (ell < 1) throw DomainError("ell must be >= 1");
    const long fl = static_cast<long>(std::floor(ell));
    if (fl + 1 > u.range())
        throw RangeTooShort("need " + std::to_string(fl + 1) +
                            " sites, have " + std::to_string(u.range()));
    const double frac = ell - fl;
    LogSum ls;
    if (u.side == HalfLineSolution::Side::Right) {
        for (long n = 1; n <= fl; ++n) ls.add(2.0 * u.log_abs(n));
        if (frac > 0) ls.add(std::log(frac) + 2.0 * u.log_abs(fl + 1));
    } else {
        // left-side sum over u_{-1} .. u_{-[l]+1}, slots 2 .. [l], with the
        // fractional term at u_{-[l]}, slot [l]+1
        for (long n = 1; n <= fl - 1; ++n) ls.add(2.0 * u.log_abs(n + 1));
        if (frac > 0) ls.add(std::log(frac) + 2.0 * u.log_abs(fl + 1));
    }
    return 0.5 * ls.log_value();
}

double ell_norm(const HalfLineSolution& u, double ell) {
    return std::exp(log_ell_norm(u, ell));
}

double subordinacy_length(const HalfLineSolution& u,
                          const HalfLineSolution& v, double eps) {
    if (!(eps > 0)) throw DomainError("eps must be positive");
    const double target = -std::log(2.0 * eps);  // ln(1/(2 eps))
    const double hi_ell = static_cast<double>(
        std::min(u.range(), v.range()) - 1);
    auto F = [&](double ell) {
        return log_ell_norm(u, ell) + log_ell_norm(v, ell) - target;
    };
    if (F(hi_ell) < 0)
        throw RangeTooShort("norm product below 1/(2 eps) at max range");
    double lo = 1.0;
    if (F(lo) > 0) throw DomainError("eps too large: l would fall below 1");
    double hi = hi_ell;
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) > 0 ? hi : lo) = mid;
    }
    const double ell = 0.5 * (lo + hi);
    // constancy-of-Wronskian lower bound ||u|| ||v|| >= ([l]-1)/2
    const long fl = static_cast<long>(std::floor(ell));
    if (fl >= 2 &&
        target < std::log((fl - 1) / 2.0) - 1e-9)
        throw NotConverged("norm product fell below the Wronskian bound");
    return ell;
}

namespace {
cplx dirichlet_m_truncated(const OperatorModel& m, cplx z, long N) {
    cplx f = m.vdiag(N) - z;
    for (long n = N - 1; n >= 1; --n) {
        const double w2 = std::norm(m.w(n));
        f = m.vdiag(n) - z - w2 / f;
    }
    return 1.0 / f;
}

cplx rotate_m(cplx m, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return (m * c + s) / (c - m * s);
}
}  // namespace

MFunctionValue half_line_m(const OperatorModel& model, double phi, cplx z,
                           long N0, long Nmax) {
    if (!(z.imag() >= 1e-6)) throw DomainError("need Im z >= 1e-6");
    long N = std::max(2L, N0);
    cplx prev = dirichlet_m_truncated(model, z, N);
    while (true) {
        const cplx cur = dirichlet_m_truncated(model, z, 2 * N);
        const double gap = std::abs(cur - prev);
        if (gap < 1e-8) {
            MFunctionValue out;
            out.N = 2 * N;
            out.gap = gap;
            out.resolvent = cur;
            if (!(cur.imag() > 0))
                throw NotConverged("computed m is not Herglotz");
            // the boundary pairing with u^phi carries a conj(w_0) weight
            const cplx w0c = std::conj(model.w(0));
            out.coarse = rotate_m(w0c * prev, phi);
            out.value = rotate_m(w0c * cur, phi);
            return out;
        }
        if (2 * N >= Nmax)
            throw NotConverged("m did not settle: gap " + std::to_string(gap) +
                               " at N = " + std::to_string(2 * N));
        prev = cur;
        N *= 2;
    }
}

double DiscreteMeasure::mass() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
}

cplx DiscreteMeasure::borel(cplx z) const {
    cplx s = 0;
    for (std::size_t k = 0; k < atoms.size(); ++k)
        s += weights[k] / (atoms[k] - z);
    return s;
}

DiscreteMeasure box_trace_measure(const OperatorModel& model, long L) {
    auto sys = box_eigensystem(model, L);
    DiscreteMeasure mu;
    mu.atoms = sys.evals;
    mu.weights.resize(sys.evals.size());
    for (std::size_t k = 0; k < sys.evals.size(); ++k)
        mu.weights[k] = sys.weight0[k] + sys.weight1[k];
    return mu;
}

namespace {

// G(0,0) + G(1,1) of the box [-L, L]: two tridiagonal solves, algebraically
// the same value as the eigendecomposition sum over the trace measure
cplx box_green_trace(const OperatorModel& model, long L, cplx z) {
    const long N = 2 * L + 1;
    std::vector<cplx> dl(N - 1), d(N), du(N - 1), b(2 * N, cplx(0, 0));
    for (long i = 0; i < N; ++i) d[i] = cplx(model.vdiag(i - L), 0) - z;
    for (long i = 0; i + 1 < N; ++i) {
        const cplx w = model.w(i - L);  // row i couples to i+1 via w_i
        du[i] = w;
        dl[i] = std::conj(w);
    }
    b[L] = 1.0;             // rhs e_0 (site 0)
    b[N + L + 1] = 1.0;     // rhs e_1 (site 1)
    auto lc = [](cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); };
    const lapack_int info = LAPACKE_zgtsv(
        LAPACK_COL_MAJOR, static_cast<lapack_int>(N), 2, lc(dl.data()),
        lc(d.data()), lc(du.data()), lc(b.data()),
        static_cast<lapack_int>(N));
    if (info != 0) throw NotConverged("tridiagonal solve failed");
    return b[L] + b[N + L + 1];
}

// doubling-certified Borel value of the box trace measure
cplx adaptive_green_trace(const OperatorModel& model, cplx z, long L0,
                          long& box_used) {
    long L = std::max(200L, L0);
    cplx prev = box_green_trace(model, L, z);
    while (true) {
        const cplx cur = box_green_trace(model, 2 * L, z);
        if (std::abs(cur - prev) < 1e-7 * (1.0 + std::abs(cur))) {
            box_used = 2 * L;
            return cur;
        }
        if (2 * L >= (1L << 20))
            throw NotConverged("box Borel transform did not settle");
        prev = cur;
        L *= 2;
    }
}

}  // namespace

WholeLineM whole_line_M(const OperatorModel& model, cplx z) {
    if (!(z.imag() >= 1e-6)) throw DomainError("need Im z >= 1e-6");
    WholeLineM out;
    out.value = adaptive_green_trace(model, z, 500, out.box);
    out.mass = 2.0;  // ||delta_0||^2 + ||delta_1||^2
    out.borel_bound_ok = std::abs(out.value) <= out.mass / z.imag() + 1e-12;

    try {
        // gauge-invariant Dirichlet resolvent values of the two half lines;
        // M depends on the weights only through these and s = |w_0|, so the
        // classical two-sided m theory applies verbatim in the |w|-gauged
        // frame, where the half-line m's are s m and s m~
        const cplx m_dir = half_line_m(model, 0.0, z).resolvent;
        const cplx mt_dir = half_line_m(model.reflected(), 0.0, z).resolvent;
        const double s = std::abs(model.w(0));
        out.m_checks_evaluated = true;
        // M lies in the disk traced by (m + t)/(1 - s^2 m t) as the left
        // half-line m~ runs over the closed upper half plane, so the sup of
        // the boundary-condition family below dominates |M|; for s = 1 the
        // family is the classical phi-rotation
        out.dkl_sup = 0;
        for (int k = 0; k < 32; ++k) {
            const double phi = -M_PI / 2 + M_PI * (k + 1) / 32.0;
            const double c = std::cos(phi), sn = std::sin(phi);
            const cplx mphi = (m_dir * c + sn) / (c - s * s * m_dir * sn);
            out.dkl_sup = std::max(out.dkl_sup, std::abs(mphi));
        }
        out.dkl_ok = std::abs(out.value) <= out.dkl_sup + 1e-6;
        out.identity_gap = 0;
        for (double phi : {0.0, 0.3, 0.7, 1.2}) {
            const cplx mp = rotate_m(s * m_dir, phi);
            const cplx mtp = rotate_m(s * mt_dir, M_PI / 2 - phi);
            const cplx Mid = (mp * mtp - 1.0) / (mp + mtp) / s;
            out.identity_gap =
                std::max(out.identity_gap, std::abs(Mid - out.value));
        }
        out.identity_ok = out.identity_gap <= 1e-6 * (1.0 + std::abs(out.value));
    } catch (const NotConverged&) {
        out.m_checks_evaluated = false;
    }
    return out;
}

namespace {
void validate_eps_grid(const std::vector<double>& eps_grid) {
    if (eps_grid.size() < 4) throw GridTooCoarse("need at least 4 eps points");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (!(eps_grid[i] > 0)) throw DomainError("eps must be positive");
        if (i && !(eps_grid[i] > eps_grid[i - 1]))
            throw DomainError("eps grid must be increasing");
    }
    if (std::log10(eps_grid.back() / eps_grid.front()) < 3.0 - 1e-9)
        throw GridTooCoarse("eps grid must span at least 3 decades");
}

// verdicts for one energy from the sampled ln|M| profile
void scan_energy(double E, const std::vector<double>& logM,
                 const std::vector<double>& gammas,
                 const std::vector<double>& eps_grid, double ceiling,
                 double margin, GammaScanReport& rep) {
    const std::size_t tail = std::min<std::size_t>(5, eps_grid.size());
    double bracket_lo = 0, bracket_hi = 1;
    for (double g : gammas) {
        GammaScanEntry e;
        e.E = E;
        e.gamma = g;
        double min_q = kInf;
        std::vector<double> lq(eps_grid.size());
        for (std::size_t i = 0; i < eps_grid.size(); ++i) {
            lq[i] = (1.0 - g) * std::log(eps_grid[i]) + logM[i];
            min_q = std::min(min_q, std::exp(lq[i]));
        }
        e.min_quantity = min_q;
        // least-squares slope of ln Q vs ln eps over the small-eps tail
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < tail; ++i) {
            const double x = std::log(eps_grid[i]);
            sx += x;
            sy += lq[i];
            sxx += x * x;
            sxy += x * lq[i];
        }
        e.tail_slope = (tail * sxy - sx * sy) / (tail * sxx - sx * sx);
        if (e.min_quantity <= ceiling && e.tail_slope >= 0)
            e.verdict = GammaVerdict::Continuity;
        else if (e.tail_slope <= -margin)
            e.verdict = GammaVerdict::Singularity;
        if (e.verdict == GammaVerdict::Continuity)
            bracket_lo = std::max(bracket_lo, g);
        if (e.verdict == GammaVerdict::Singularity)
            bracket_hi = std::min(bracket_hi, g);
        rep.entries.push_back(e);
    }
    rep.dim_bracket.emplace_back(bracket_lo, bracket_hi);
}

}  // namespace

GammaScanReport gamma_scan_measure(const DiscreteMeasure& mu,
                                   const std::vector<double>& energies,
                                   const std::vector<double>& gammas,
                                   const std::vector<double>& eps_grid,
                                   double ceiling, double margin) {
    validate_eps_grid(eps_grid);
    GammaScanReport rep;
    rep.energies = energies;
    for (double E : energies) {
        std::vector<double> logM(eps_grid.size());
        for (std::size_t i = 0; i < eps_grid.size(); ++i)
            logM[i] = std::log(std::abs(mu.borel(cplx(E, eps_grid[i]))));
        scan_energy(E, logM, gammas, eps_grid, ceiling, margin, rep);
    }
    return rep;
}

GammaScanReport gamma_scan(const OperatorModel& model,
                           const std::vector<double>& energies,
                           const std::vector<double>& gammas,
                           const std::vector<double>& eps_grid, long box,
                           double ceiling, double margin) {
    validate_eps_grid(eps_grid);
    GammaScanReport rep;
    rep.energies = energies;
    for (double E : energies) {
        std::vector<double> logM(eps_grid.size());
        for (std::size_t i = 0; i < eps_grid.size(); ++i) {
            long used = 0;
            // boxes must outlive 1/eps for the measure to look continuous
            const long L0 = std::max(box, static_cast<long>(8.0 / eps_grid[i]));
            logM[i] = std::log(
                std::abs(adaptive_green_trace(model, cplx(E, eps_grid[i]),
                                              L0, used)));
        }
        scan_energy(E, logM, gammas, eps_grid, ceiling, margin, rep);
    }
    return rep;
}

PowerLawReport power_law_check(const OperatorModel& model, double E,
                               double gamma,
                               const std::vector<double>& eta_seq,
                               long length_budget, int n_phi) {
    PowerLawReport rep;
    long pass = 0, counted = 0;
    for (int k = 0; k < n_phi; ++k) {
        const double phi = -M_PI / 2 + M_PI * (k + 1) / n_phi;
        auto u = half_line_solution(model, E, phi,
                                    HalfLineSolution::Side::Right,
                                    length_budget);
        auto v = orthogonal_partner(model, u);
        for (double eta : eta_seq) {
            PowerLawEntry e;
            e.eta = eta;
            e.phi = phi;
            try {
                e.L = subordinacy_length(u, v, eta);
                e.log_norm2 = 2.0 * log_ell_norm(v, e.L);
                const double lnL = std::log(e.L);
                e.lower_ok = std::log(1.0 / 16.0) + gamma * lnL <= e.log_norm2;
                e.upper_ok = e.log_norm2 <= (2.0 - gamma) * lnL;
                ++counted;
                if (e.lower_ok && e.upper_ok) ++pass;
            } catch (const RangeTooShort&) {
                e.range_ok = false;
            }
            rep.entries.push_back(e);
        }
    }
    rep.pass_fraction = counted ? static_cast<double>(pass) / counted : 0.0;
    return rep;
}

JLReport jl_sandwich_check(const OperatorModel& model, double E, double eps,
                           const std::vector<double>& phis, long length,
                           double slack) {
    JLReport rep;
    const double lo_c = 5.0 - std::sqrt(24.0), hi_c = 5.0 + std::sqrt(24.0);
    for (double phi : phis) {
        JLEntry e;
        e.phi = phi;
        auto u = half_line_solution(model, E, phi,
                                    HalfLineSolution::Side::Right, length);
        auto v = orthogonal_partner(model, u);
        e.ell = subordinacy_length(u, v, eps);
        e.log_ratio = log_ell_norm(u, e.ell) - log_ell_norm(v, e.ell);
        e.m_abs = std::abs(half_line_m(model, phi, cplx(E, eps)).value);
        const double ratio = std::exp(e.log_ratio);
        e.pass = ratio > (lo_c / e.m_abs) * (1.0 - slack) &&
                 ratio < (hi_c / e.m_abs) * (1.0 + slack);
        rep.entries.push_back(e);
        rep.all_pass = rep.all_pass && e.pass;
    }
    return rep;
}

}  // namespace qjl
