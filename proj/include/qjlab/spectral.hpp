#pragma once

// Half-line solutions under phase boundary conditions, fractional ell-norms
// and subordinacy lengths, Weyl-Titchmarsh m-functions (truncated resolvent
// with a doubling certificate), the whole-line Borel transform of the box
// trace measure, gamma-scans for spectral continuity/singularity, the
// power-law test and the Jitomirskaya-Last sandwich.

#include <vector>

#include "qjlab/lattice.hpp"

namespace qjl {

struct HalfLineSolution {
    enum class Side { Right, Left };
    double phi = 0;
    Side side = Side::Right;
    double E = 0;
    // u at slot n is unit[n] * e^{log_off[n]}; slot n is lattice site n on
    // the right, site 1-n on the left (the reflection unitary's index map)
    std::vector<cplx> unit;
    std::vector<double> log_off;
    double max_residual = 0;  // recurrence residual, relative to local scale
    long truncated_at = -1;   // first zero of w hit, -1 if none

    long range() const { return static_cast<long>(unit.size()) - 1; }
    double log_abs(long n) const;  // ln|u at slot n| (-inf at exact zeros)
};

HalfLineSolution half_line_solution(const OperatorModel& model, double E,
                                    double phi, HalfLineSolution::Side side,
                                    long length);

// the orthogonal partner v^phi = u^{phi + pi/2}
HalfLineSolution orthogonal_partner(const OperatorModel& model,
                                    const HalfLineSolution& u);

// [ sum_{n=1}^{[l]} |u_n|^2 + (l - [l]) |u_{[l]+1}|^2 ]^{1/2}; the log
// variant survives exponentially growing solutions
double log_ell_norm(const HalfLineSolution& u, double ell);
double ell_norm(const HalfLineSolution& u, double ell);

// the unique l with ||u||_l ||v||_l = 1/(2 eps), by bisection on the logs
double subordinacy_length(const HalfLineSolution& u,
                          const HalfLineSolution& v, double eps);

struct MFunctionValue {
    cplx value;      // Weyl m for the phi boundary condition
    cplx coarse;     // same at half the truncation
    cplx resolvent;  // Dirichlet resolvent value, gauge invariant, Herglotz
    double gap = 0;
    long N = 0;
};

// Dirichlet m by backward continued fraction on the truncated half line,
// doubled until the value settles below 1e-8. The phi-boundary value pairs
// with the solutions u^phi of the complex model: the Weyl solution algebra
// gives m_phi = rotate(conj(w_0) m, phi) with
// rotate(m, phi) = (m cos phi + sin phi) / (cos phi - m sin phi).
// Im(resolvent) > 0 is asserted; for complex w_0 the rotated value itself
// need not lie in the upper half plane.
MFunctionValue half_line_m(const OperatorModel& model, double phi, cplx z,
                           long N0 = 256, long Nmax = 1L << 21);

struct DiscreteMeasure {
    std::vector<double> atoms;
    std::vector<double> weights;
    double mass() const;
    cplx borel(cplx z) const;  // sum w_k / (E_k - z)
};

// trace measure mu_{delta_0} + mu_{delta_1} of the finite box [-L, L]
DiscreteMeasure box_trace_measure(const OperatorModel& model, long L);

struct WholeLineM {
    cplx value;
    long box = 0;
    double mass = 0;
    bool borel_bound_ok = false;   // |M| <= mass / Im z
    bool dkl_ok = false;           // |M| <= sup_phi |m_phi|, 32 angles,
    double dkl_sup = 0;            // in the |w|-gauged frame
    bool identity_ok = false;      // s M = (m_phi m~_{pi/2-phi} - 1) /
    double identity_gap = 0;       //       (m_phi + m~_{pi/2-phi}), 4 angles,
                                   // gauged m's, s = |w_0|; for s = 1 this is
                                   // the classical two-sided m identity
    bool m_checks_evaluated = false;  // false when half_line_m cannot certify
};

WholeLineM whole_line_M(const OperatorModel& model, cplx z);

enum class GammaVerdict { Continuity, Singularity, Undecided };

struct GammaScanEntry {
    double E = 0, gamma = 0;
    double min_quantity = 0;   // min over the eps grid of eps^{1-gamma}|M|
    double tail_slope = 0;     // d ln Q / d ln eps over the small-eps end
    GammaVerdict verdict = GammaVerdict::Undecided;
};

struct GammaScanReport {
    std::vector<GammaScanEntry> entries;
    // per E: [largest continuity-consistent gamma, smallest
    // singularity-consistent gamma]
    std::vector<std::pair<double, double>> dim_bracket;
    std::vector<double> energies;
};

GammaScanReport gamma_scan_measure(const DiscreteMeasure& mu,
                                   const std::vector<double>& energies,
                                   const std::vector<double>& gammas,
                                   const std::vector<double>& eps_grid,
                                   double ceiling = 1e3,
                                   double margin = 0.1);

GammaScanReport gamma_scan(const OperatorModel& model,
                           const std::vector<double>& energies,
                           const std::vector<double>& gammas,
                           const std::vector<double>& eps_grid, long box = 4000,
                           double ceiling = 1e3, double margin = 0.1);

struct PowerLawEntry {
    double eta = 0, phi = 0, L = 0;
    double log_norm2 = 0;         // ln ||v^phi||_L^2
    bool lower_ok = false;        // 1/16 L^gamma <= ||v||^2
    bool upper_ok = false;        // ||v||^2 <= L^{2-gamma}
    bool range_ok = true;         // false when the scale exceeded the budget
};

struct PowerLawReport {
    std::vector<PowerLawEntry> entries;
    double pass_fraction = 0;  // over entries with range_ok
};

PowerLawReport power_law_check(const OperatorModel& model, double E,
                               double gamma,
                               const std::vector<double>& eta_seq,
                               long length_budget = 200'000, int n_phi = 16);

struct JLEntry {
    double phi = 0;
    double m_abs = 0;
    double ell = 0;
    double log_ratio = 0;  // ln(||u||_l / ||v||_l)
    bool pass = false;
};

struct JLReport {
    std::vector<JLEntry> entries;
    bool all_pass = true;
};

// both sides of the 5 +- sqrt(24) sandwich, with the stated relative slack;
// the solution norms and the m-function share no code path
JLReport jl_sandwich_check(const OperatorModel& model, double E, double eps,
                           const std::vector<double>& phis,
                           long length = 100'000, double slack = 0.05);

}  // namespace qjl
