#pragma once

// Quantum dynamics on truncated lattices: Chebyshev propagation of
// e^{-itH} delta_0, Abel-averaged position moments <|X|^p>(T), and the
// windowed-slope transport exponents beta^{+/-}(p).

#include <vector>

#include "qjlab/lattice.hpp"

namespace qjl {

struct SnapshotStats {
    double t = 0;
    double norm_err = 0;  // | ||psi|| - 1 |
    double energy = 0;    // <psi, H psi>
    double leakage = 0;   // mass on the outer two sites of each edge
    std::vector<double> xmom;  // sum_n |n|^{p_i} |psi_n|^2 per order
};

struct Evolution {
    long L = 0;  // box [-L, L], site 0 at offset L
    std::vector<double> p_orders;
    std::vector<SnapshotStats> snaps;
    bool truncated = false;  // leakage > 1e-6 ended the stream early
    double max_norm_err = 0;
    double max_energy_drift = 0;  // relative to 1 + |E(0)|
    double max_leakage = 0;
    double step_tail_bound = 0;   // worst certified Chebyshev tail, <= 1e-10
    std::vector<cplx> psi_final;  // wavefunction at the last kept snapshot
};

// Propagates delta_0 through the strictly increasing t_grid (t >= 0),
// recording per-snapshot stats for each moment order in p_orders.  The box
// must satisfy 2L+1 <= 1e5.  The stream stops at the first snapshot whose
// boundary mass exceeds 1e-6; LeakageExceeded only if nothing survives.
Evolution evolve(const OperatorModel& model, long L,
                 const std::vector<double>& t_grid,
                 std::vector<double> p_orders = {2.0});

// L >= 4 t_max * max(1, sup|w|): a light-cone margin for bounded H, capped
// at the 1e5-site budget
long auto_box_size(const OperatorModel& model, double t_max);

// Graded snapshot grid for Abel averages over T in [T_min, T_max]: spacing
// (T_eff/2)/pts_per_efold with T_eff = max(T_min, t/6), out to horizon*T_max;
// every T in range then has >= pts_per_efold points per e-fold of e^{-2t/T}
// on [0, 6T]
std::vector<double> abel_time_grid(double T_min, double T_max,
                                   double pts_per_efold = 8.0,
                                   double horizon = 12.0);

struct MomentEntry {
    double T = 0;
    double value = 0;     // (2/T) int_0^tend e^{-2t/T} sum |n|^p |psi_n|^2
    double quad_err = 0;  // coarse-grid refinement estimate
    double tail_rel = 0;  // unit-norm analytic bound L^p e^{-2 tend/T}, /value
};

struct MomentSeries {
    double p = 2;
    long L = 0;
    std::vector<MomentEntry> entries;
    bool truncated = false;  // requested T dropped (t-range or leakage)
    double leakage = 0;
    bool monotone_T = false;  // values nondecreasing along the T grid
};

// Requires p to be one of the orders recorded by evolve.  T values whose
// 6T horizon is beyond the (possibly leakage-truncated) snapshot range are
// dropped with the truncated flag; spacing coarser than (T/2)/8 on [0, 6T]
// throws GridTooCoarse.
MomentSeries moments(const Evolution& ev, double p,
                     const std::vector<double>& T_grid);

struct FitWindow {
    double T_lo = 0, T_hi = 0;
    double slope = 0;  // d ln<|X|^p> / d ln T / p over the window
    double resid = 0;  // max abs ln-residual of the fit
};

struct TransportExponents {
    double p = 2;
    double beta_minus = 0, beta_plus = 0;
    bool degenerate = false;  // series identically ~0, exponents pinned to 0
    std::vector<FitWindow> windows;
};

// limsup/liminf surrogate: extreme slopes over sliding half-decade windows
// in the upper half of the log-T range; needs >= 1.5 decades of usable T.
TransportExponents transport_exponents(const MomentSeries& series);

}  // namespace qjl
