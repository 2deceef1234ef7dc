#include "qjlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qjlab/errors.hpp"

namespace qjl {

namespace {

constexpr long kMaxSites = 100'000;
constexpr double kLeakTol = 1e-6;
constexpr double kStepBudget = 1e-10;  // certified truncation per step
constexpr double kStepTarget = 1e-13;  // internal target, keeps drift small

struct BoxOperator {
    long L = 0;
    std::vector<double> v;  // v[i] at site i - L
    std::vector<cplx> w;    // w[i] couples sites i-L and i-L+1, size 2L
    double scale = 1.0;     // ||H|| upper bound used for Chebyshev X = H/scale

    // y = (H/scale) x
    void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
        const std::size_t n = x.size();
        y.resize(n);
        const double s = 1.0 / scale;
        for (std::size_t i = 0; i < n; ++i) {
            cplx acc = v[i] * x[i];
            if (i + 1 < n) acc += w[i] * x[i + 1];
            if (i > 0) acc += std::conj(w[i - 1]) * x[i - 1];
            y[i] = acc * s;
        }
    }

    double energy(const std::vector<cplx>& x, std::vector<cplx>& scratch) const {
        apply(x, scratch);
        double e = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            e += (std::conj(x[i]) * scratch[i]).real();
        return e * scale;
    }
};

BoxOperator build_box(const OperatorModel& model, long L) {
    if (L < 0) throw DomainError("negative box size");
    if (2 * L + 1 > kMaxSites) throw DomainError("box exceeds 1e5 sites");
    BoxOperator box;
    box.L = L;
    box.v.reserve(2 * L + 1);
    for (long n = -L; n <= L; ++n) box.v.push_back(model.vdiag(n));
    box.w.reserve(2 * L);
    for (long n = -L; n < L; ++n) box.w.push_back(model.w(n));
    double vmax = 0, wmax = 0;
    for (double x : box.v) vmax = std::max(vmax, std::abs(x));
    for (auto z : box.w) wmax = std::max(wmax, std::abs(z));
    box.scale = 1.02 * (vmax + 2.0 * wmax);
    if (box.scale == 0.0) box.scale = 1.0;
    return box;
}

// e^{-i dt H} psi by the Chebyshev series e^{-iz X} =
// sum_k (2 - delta_{k0}) (-i)^k J_k(z) T_k(X), z = dt ||H||-bound.
// Returns the certified tail bound actually achieved.
double cheb_step(const BoxOperator& box, double dt, std::vector<cplx>& psi) {
    const double z = dt * box.scale;
    if (z == 0.0) return 0.0;
    const std::size_t n = psi.size();
    std::vector<cplx> ph0 = psi, ph1(n), ph2(n), acc(n);
    box.apply(ph0, ph1);
    const cplx mi(0.0, -1.0);
    cplx ik = 1.0;  // (-i)^k
    const double j0 = std::cyl_bessel_j(0, z);
    for (std::size_t i = 0; i < n; ++i) acc[i] = j0 * ph0[i];
    ik *= mi;
    const double j1 = std::cyl_bessel_j(1, z);
    for (std::size_t i = 0; i < n; ++i) acc[i] += 2.0 * ik * j1 * ph1[i];
    double tail = std::numeric_limits<double>::infinity();
    for (int k = 2; k <= 4000; ++k) {
        box.apply(ph1, ph2);
        for (std::size_t i = 0; i < n; ++i) ph2[i] = 2.0 * ph2[i] - ph0[i];
        ik *= mi;
        const double jk = std::cyl_bessel_j(k, z);
        for (std::size_t i = 0; i < n; ++i) acc[i] += 2.0 * ik * jk * ph2[i];
        ph0.swap(ph1);
        ph1.swap(ph2);
        // analytic remainder: for m > k >= z, |J_m(z)| <= (z/2)^m / m!
        if (k >= z) {
            const double r = 0.5 * z / (k + 2);
            if (r < 0.9) {
                const double lt =
                    (k + 1) * std::log(0.5 * z) - std::lgamma(k + 2.0);
                tail = 2.0 * std::exp(lt) / (1.0 - r);
                if (tail <= kStepTarget) break;
            }
        }
    }
    if (!(tail <= kStepBudget))
        throw NotConverged("Chebyshev tail not certified within term budget");
    psi.swap(acc);
    return tail;
}

}  // namespace

long auto_box_size(const OperatorModel& model, double t_max) {
    if (!(t_max > 0)) throw DomainError("t_max must be positive");
    const double speed = std::max(1.0, model.w_sup());
    const long L = static_cast<long>(std::ceil(4.0 * t_max * speed));
    return std::min(L, (kMaxSites - 1) / 2);
}

std::vector<double> abel_time_grid(double T_min, double T_max,
                                   double pts_per_efold, double horizon) {
    if (!(0 < T_min && T_min <= T_max) || pts_per_efold < 1 || horizon < 6)
        throw DomainError("bad Abel grid parameters");
    std::vector<double> t{0.0};
    const double t_end = horizon * T_max;
    while (t.back() < t_end) {
        const double Teff = std::max(T_min, t.back() / 6.0);
        t.push_back(t.back() + 0.5 * Teff / pts_per_efold);
    }
    return t;
}

Evolution evolve(const OperatorModel& model, long L,
                 const std::vector<double>& t_grid,
                 std::vector<double> p_orders) {
    if (t_grid.empty() || t_grid.front() < 0)
        throw DomainError("t grid must start at t >= 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] <= t_grid[i - 1])
            throw DomainError("t grid must be strictly increasing");
    for (double p : p_orders)
        if (!(p > 0)) throw DomainError("moment orders must be positive");

    auto box = build_box(model, L);
    const std::size_t n = 2 * L + 1;
    std::vector<std::vector<double>> pw(p_orders.size(),
                                        std::vector<double>(n));
    for (std::size_t q = 0; q < p_orders.size(); ++q)
        for (std::size_t i = 0; i < n; ++i)
            pw[q][i] = std::pow(std::abs(static_cast<double>(i) - L),
                                p_orders[q]);

    Evolution ev;
    ev.L = L;
    ev.p_orders = p_orders;

    std::vector<cplx> psi(n, cplx(0, 0)), scratch(n);
    psi[L] = 1.0;
    double t_cur = 0.0, e0 = 0.0;
    for (double t : t_grid) {
        const double tail = cheb_step(box, t - t_cur, psi);
        ev.step_tail_bound = std::max(ev.step_tail_bound, tail);
        t_cur = t;

        SnapshotStats s;
        s.t = t;
        double nrm2 = 0, leak = 0;
        for (std::size_t i = 0; i < n; ++i) nrm2 += std::norm(psi[i]);
        s.norm_err = std::abs(std::sqrt(nrm2) - 1.0);
        if (n > 4)
            leak = std::norm(psi[0]) + std::norm(psi[1]) +
                   std::norm(psi[n - 2]) + std::norm(psi[n - 1]);
        s.leakage = leak;
        s.energy = box.energy(psi, scratch);
        if (ev.snaps.empty()) e0 = s.energy;
        s.xmom.resize(p_orders.size());
        for (std::size_t q = 0; q < p_orders.size(); ++q) {
            double m = 0;
            for (std::size_t i = 0; i < n; ++i)
                m += pw[q][i] * std::norm(psi[i]);
            s.xmom[q] = m;
        }
        if (leak > kLeakTol) {
            ev.truncated = true;
            break;
        }
        ev.max_norm_err = std::max(ev.max_norm_err, s.norm_err);
        ev.max_energy_drift =
            std::max(ev.max_energy_drift,
                     std::abs(s.energy - e0) / (1.0 + std::abs(e0)));
        ev.max_leakage = std::max(ev.max_leakage, leak);
        ev.snaps.push_back(std::move(s));
        ev.psi_final = psi;
    }
    if (ev.snaps.empty())
        throw LeakageExceeded("boundary mass above 1e-6 at the first snapshot");
    return ev;
}

MomentSeries moments(const Evolution& ev, double p,
                     const std::vector<double>& T_grid) {
    std::size_t q = ev.p_orders.size();
    for (std::size_t i = 0; i < ev.p_orders.size(); ++i)
        if (std::abs(ev.p_orders[i] - p) < 1e-12) q = i;
    if (q == ev.p_orders.size())
        throw DomainError("moment order was not recorded by evolve");

    MomentSeries out;
    out.p = p;
    out.L = ev.L;
    out.truncated = ev.truncated;
    out.leakage = ev.max_leakage;
    const double t_reach = ev.snaps.back().t;
    const double Lp = std::pow(static_cast<double>(std::max(ev.L, 1L)), p);

    for (double T : T_grid) {
        if (!(T > 0)) throw DomainError("T must be positive");
        if (6.0 * T > t_reach * (1.0 + 1e-9)) {
            out.truncated = true;
            continue;
        }
        // verify the grid resolves e^{-2t/T} on [0, 6T]
        std::size_t end = 0;
        for (std::size_t i = 1; i < ev.snaps.size(); ++i) {
            if (ev.snaps[i - 1].t > 6.0 * T) break;
            if (ev.snaps[i].t - ev.snaps[i - 1].t > T / 16.0 * (1.0 + 1e-9))
                throw GridTooCoarse("snapshot spacing exceeds T/16 below 6T");
            end = i;
        }
        if (end < 2) throw GridTooCoarse("fewer than 3 snapshots below 6T");

        // trapezoid of (2/T) e^{-2t/T} A_p(t) over all usable snapshots,
        // extended past 6T while the weight still matters
        auto integrand = [&](std::size_t i) {
            return 2.0 / T * std::exp(-2.0 * ev.snaps[i].t / T) *
                   ev.snaps[i].xmom[q];
        };
        std::size_t stop = end;
        while (stop + 1 < ev.snaps.size() &&
               std::exp(-2.0 * ev.snaps[stop].t / T) > 1e-18)
            ++stop;
        double full = 0, coarse = 0;
        for (std::size_t i = 1; i <= stop; ++i)
            full += 0.5 * (ev.snaps[i].t - ev.snaps[i - 1].t) *
                    (integrand(i) + integrand(i - 1));
        for (std::size_t i = 2; i <= stop; i += 2)
            coarse += 0.5 * (ev.snaps[i].t - ev.snaps[i - 2].t) *
                      (integrand(i) + integrand(i - 2));
        if (stop % 2 == 1)
            coarse += 0.5 * (ev.snaps[stop].t - ev.snaps[stop - 1].t) *
                      (integrand(stop) + integrand(stop - 1));

        MomentEntry e;
        e.T = T;
        e.value = full;
        e.quad_err = std::abs(full - coarse);
        // tail past the last point, bounded by the unit norm: A_p <= L^p
        const double tail = Lp * std::exp(-2.0 * ev.snaps[stop].t / T);
        e.tail_rel = tail / std::max(full, 1e-300);
        out.entries.push_back(e);
    }
    if (out.entries.empty())
        throw RangeTooShort("no requested T fits the snapshot range");
    out.monotone_T = true;
    for (std::size_t i = 1; i < out.entries.size(); ++i)
        if (out.entries[i].value < out.entries[i - 1].value * (1.0 - 1e-12))
            out.monotone_T = false;
    return out;
}

TransportExponents transport_exponents(const MomentSeries& series) {
    TransportExponents out;
    out.p = series.p;
    const auto& es = series.entries;
    if (es.size() < 4) throw RangeTooShort("need at least 4 moment values");
    const double span = std::log10(es.back().T / es.front().T);
    if (span < 1.5 - 1e-9)
        throw RangeTooShort("need >= 1.5 decades of usable T");

    double vmax = 0;
    for (const auto& e : es) vmax = std::max(vmax, e.value);
    if (vmax < 1e-12) {  // mass pinned at the origin: exponents are zero
        out.degenerate = true;
        return out;
    }

    const double lmid =
        0.5 * (std::log(es.front().T) + std::log(es.back().T));
    const double half_dec = 0.5 * std::log(10.0);
    for (std::size_t i = 0; i < es.size(); ++i) {
        if (std::log(es[i].T) < lmid) continue;
        // window [T_i, T_i sqrt(10)]
        std::vector<double> lx, ly;
        std::size_t j = i;
        for (; j < es.size(); ++j) {
            lx.push_back(std::log(es[j].T));
            ly.push_back(std::log(std::max(es[j].value, 1e-300)));
            // stop once the window spans the half decade (may overshoot by
            // one grid point on sparse grids)
            if (std::log(es[j].T / es[i].T) >= half_dec - 1e-9) {
                ++j;
                break;
            }
        }
        if (lx.size() < 3 || lx.back() - lx.front() < half_dec - 1e-9)
            continue;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(lx.size());
        for (std::size_t k = 0; k < lx.size(); ++k) {
            sx += lx[k];
            sy += ly[k];
            sxx += lx[k] * lx[k];
            sxy += lx[k] * ly[k];
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        const double icpt = (sy - slope * sx) / m;
        double resid = 0;
        for (std::size_t k = 0; k < lx.size(); ++k)
            resid = std::max(resid,
                             std::abs(ly[k] - slope * lx[k] - icpt));
        FitWindow w;
        w.T_lo = es[i].T;
        w.T_hi = std::exp(lx.back());
        w.slope = slope / series.p;
        w.resid = resid;
        out.windows.push_back(w);
    }
    if (out.windows.empty())
        throw RangeTooShort("no half-decade window in the upper T range");
    out.beta_minus = out.windows.front().slope;
    out.beta_plus = out.windows.front().slope;
    for (const auto& w : out.windows) {
        out.beta_minus = std::min(out.beta_minus, w.slope);
        out.beta_plus = std::max(out.beta_plus, w.slope);
    }
    return out;
}

}  // namespace qjl
