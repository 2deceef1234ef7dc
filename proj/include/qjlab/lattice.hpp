#pragma once

// Operator models: sampling functions on the torus, quasiperiodic Jacobi
// sequences (w_n, v_n), the extended Harper family with its region partition
// and closed-form Lyapunov exponent, and finite-box spectra.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qjl {

using cplx = std::complex<double>;

// 1-periodic sampling function.  TrigPoly carries an explicit coefficient
// table sum_k c_k e^{2 pi i k theta} and extends to complex theta; Closure is
// an arbitrary callable (real theta only).
struct SamplingFunction {
    enum class Kind { TrigPoly, Closure } kind = Kind::TrigPoly;
    std::vector<std::pair<long, cplx>> coeffs;       // (k, c_k)
    std::function<cplx(double)> fn;                  // Closure only
    double rho = 1.0;  // analyticity width; trig polynomials capped at 1

    cplx operator()(double theta) const;
    cplx operator()(cplx theta) const;  // TrigPoly only
    long degree() const;                // max |k| with c_k != 0
    bool is_real() const;               // c_{-k} == conj(c_k)

    static SamplingFunction constant(cplx c);
    // amp * cos(2 pi (theta + shift))
    static SamplingFunction cosine(double amp, double shift = 0.0);
    static SamplingFunction zero();
};

struct EHMParams {
    double l1 = 0, l2 = 0, l3 = 0;
};

enum class EHMRegionGeo { I, II, III, LI, LII, LIII };
enum class EHMRegionR { R1, R2, R3 };

struct EHMClassification {
    std::optional<EHMRegionR> r_region;  // nullopt on the measure-zero gaps
    EHMRegionGeo geo;
    bool interior = false;  // geo is I/II/III (not a boundary line)
    std::string describe() const;
};

EHMClassification ehm_classify(const EHMParams& lam);
double ehm_lyapunov_formula(const EHMParams& lam);

// c_lambda(theta) = l1 e^{-2 pi i(theta + alpha/2)} + l2
//                 + l3 e^{ 2 pi i(theta + alpha/2)}   (alpha bound here)
SamplingFunction ehm_c(const EHMParams& lam, double alpha);

struct OperatorModel {
    enum class Kind { Quasiperiodic, Explicit } kind = Kind::Quasiperiodic;
    SamplingFunction c, v;
    double alpha = 0, theta = 0;
    double v_theta_shift = 0;  // used by reflected() models
    std::optional<EHMParams> ehm;  // metadata when built as EHM

    long lo = 0;    // Explicit: w_arr covers indices [lo, lo + len)
    long v_lo = 0;  // Explicit: v_arr covers [v_lo, v_lo + len)
    std::vector<cplx> w_arr;
    std::vector<double> v_arr;

    cplx w(long n) const;      // off-diagonal weight w_n
    double vdiag(long n) const;

    double w_sup() const;  // sup |c| estimate (coefficient L1 norm / max)
    double v_sup() const;

    static OperatorModel quasiperiodic(SamplingFunction c, SamplingFunction v,
                                       double alpha, double theta);
    static OperatorModel ehm_model(const EHMParams& lam, double alpha,
                                   double theta);
    static OperatorModel schrodinger_cos(double coupling, double alpha,
                                         double theta);
    static OperatorModel free_laplacian();
    static OperatorModel explicit_arrays(long lo, std::vector<cplx> w,
                                         std::vector<double> v);
    // same operator reflected by (U psi)_n = psi_{1-n}
    OperatorModel reflected() const;
};

struct WindowSample {
    long lo = 0;
    std::vector<cplx> w;
    std::vector<double> v;
    std::vector<long> zero_indices;  // exact zeros of w, surfaced not hidden
};

// inclusive index range [lo, hi]
WindowSample sample_window(const OperatorModel& model, long lo, long hi);

// Eigenvalues of H restricted to [-L, L] with Dirichlet boundary, sorted.
// The complex Hermitian tridiagonal matrix is gauged to a real symmetric one
// (off-diagonals |w_n|); eigenvalues and |psi_n| are gauge invariant.
std::vector<double> finite_box_spectrum(const OperatorModel& model, long L);

// Same eigensolve keeping the spectral weights |psi_k(0)|^2 and |psi_k(1)|^2
// needed for whole-line Borel transforms.
struct BoxEigensystem {
    long L = 0;
    std::vector<double> evals;
    std::vector<double> weight0, weight1;  // |psi_k(0)|^2, |psi_k(1)|^2
};
BoxEigensystem box_eigensystem(const OperatorModel& model, long L);

}  // namespace qjl
