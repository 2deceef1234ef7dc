#pragma once

// Overflow-safe 2x2 matrices and scalars: a normalized part together with a
// natural-log magnitude, so products of length 1e6 never leave the double
// range.

#include <array>
#include <cmath>
#include <complex>
#include <limits>

namespace qjl {

using cplx = std::complex<double>;

struct ScaledScalar {
    cplx phase{1.0, 0.0};  // unit modulus
    double log_mag = 0.0;

    static ScaledScalar one() { return {}; }
    static ScaledScalar from(cplx z) {
        ScaledScalar s;
        const double a = std::abs(z);
        if (a == 0.0) {
            s.phase = 1.0;
            s.log_mag = -std::numeric_limits<double>::infinity();
        } else {
            s.phase = z / a;
            s.log_mag = std::log(a);
        }
        return s;
    }
    bool is_zero() const { return std::isinf(log_mag) && log_mag < 0; }
    ScaledScalar operator*(const ScaledScalar& o) const {
        ScaledScalar s;
        s.phase = phase * o.phase;
        const double a = std::abs(s.phase);
        if (a > 0) s.phase /= a;  // keep |phase| = 1 against rounding drift
        s.log_mag = log_mag + o.log_mag;
        return s;
    }
    ScaledScalar inverse() const {
        ScaledScalar s;
        s.phase = std::conj(phase);
        s.log_mag = -log_mag;
        return s;
    }
    cplx value() const { return phase * std::exp(log_mag); }
    double abs_value() const { return std::exp(log_mag); }
};

struct ScaledMatrix2x2 {
    // row-major normalized entries (max modulus kept in [1/2, 2])
    std::array<cplx, 4> m{cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(1, 0)};
    double log_scale = 0.0;

    static ScaledMatrix2x2 identity() { return {}; }
    static ScaledMatrix2x2 from(cplx a, cplx b, cplx c, cplx d,
                                double log_prefactor = 0.0) {
        ScaledMatrix2x2 r;
        r.m = {a, b, c, d};
        r.log_scale = log_prefactor;
        r.renormalize();
        return r;
    }

    double max_entry_abs() const {
        double s = 0;
        for (const auto& e : m) s = std::max(s, std::abs(e));
        return s;
    }

    void renormalize() {
        const double s = max_entry_abs();
        if (s == 0.0) {
            log_scale = -std::numeric_limits<double>::infinity();
            return;
        }
        if (s < 0.5 || s > 2.0) {
            const double ls = std::log(s);
            for (auto& e : m) e /= s;
            log_scale += ls;
        }
    }

    ScaledMatrix2x2 operator*(const ScaledMatrix2x2& o) const {
        ScaledMatrix2x2 r;
        r.m[0] = m[0] * o.m[0] + m[1] * o.m[2];
        r.m[1] = m[0] * o.m[1] + m[1] * o.m[3];
        r.m[2] = m[2] * o.m[0] + m[3] * o.m[2];
        r.m[3] = m[2] * o.m[1] + m[3] * o.m[3];
        r.log_scale = log_scale + o.log_scale;
        r.renormalize();
        return r;
    }

    ScaledMatrix2x2 operator*(const ScaledScalar& s) const {
        ScaledMatrix2x2 r = *this;
        for (auto& e : r.m) e *= s.phase;
        r.log_scale += s.log_mag;
        return r;
    }

    cplx det_normalized() const { return m[0] * m[3] - m[1] * m[2]; }
    // represented determinant = e^{2 log_scale} det_normalized
    cplx det() const { return det_normalized() * std::exp(2.0 * log_scale); }
    double log_abs_det() const {
        return 2.0 * log_scale + std::log(std::abs(det_normalized()));
    }

    cplx trace_normalized() const { return m[0] + m[3]; }
    cplx trace() const { return trace_normalized() * std::exp(log_scale); }
    double log_abs_trace() const {
        return log_scale + std::log(std::abs(trace_normalized()));
    }

    double hs_norm_normalized() const {
        double s = 0;
        for (const auto& e : m) s += std::norm(e);
        return std::sqrt(s);
    }
    double op_norm_normalized() const {
        const double t = hs_norm_normalized();
        const double t2 = t * t;
        const double d2 = std::norm(det_normalized());
        const double disc = std::max(0.0, t2 * t2 - 4.0 * d2);
        return std::sqrt(0.5 * (t2 + std::sqrt(disc)));
    }
    double log_op_norm() const {
        return log_scale + std::log(op_norm_normalized());
    }
    double log_hs_norm() const {
        return log_scale + std::log(hs_norm_normalized());
    }

    ScaledMatrix2x2 inverse() const {
        const cplx dt = det_normalized();
        ScaledMatrix2x2 r;
        r.m = {m[3] / dt, -m[1] / dt, -m[2] / dt, m[0] / dt};
        r.log_scale = -log_scale;
        r.renormalize();
        return r;
    }

    // || this - other || / || this ||, both in represented value (computed
    // through the scale difference, safe while the gap fits a double)
    double relative_diff(const ScaledMatrix2x2& o) const {
        const double rel_scale = std::exp(o.log_scale - log_scale);
        double num = 0, den = 0;
        for (int i = 0; i < 4; ++i) {
            num += std::norm(m[i] - o.m[i] * rel_scale);
            den += std::norm(m[i]);
        }
        return std::sqrt(num / den);
    }

    // represented difference 2-norm: e^{s1} N1 - e^{s2} N2
    double diff_op_norm(const ScaledMatrix2x2& o) const {
        const double base = std::max(log_scale, o.log_scale);
        const double f1 = std::exp(log_scale - base);
        const double f2 = std::exp(o.log_scale - base);
        ScaledMatrix2x2 d;
        for (int i = 0; i < 4; ++i) d.m[i] = m[i] * f1 - o.m[i] * f2;
        d.log_scale = base;
        d.renormalize();
        return std::exp(d.log_op_norm());
    }
};

}  // namespace qjl
