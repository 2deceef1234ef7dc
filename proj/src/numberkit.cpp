#include "qjlab/numberkit.hpp"

#include <mpfr.h>

#include <cmath>
#include <limits>

#include "qjlab/errors.hpp"

namespace qjl {

namespace {

// ln q for arbitrary-size q > 0
double log_mpz(const mpz_class& q) {
    long e = 0;
    double d = mpz_get_d_2exp(&e, q.get_mpz_t());
    return std::log(d) + static_cast<double>(e) * M_LN2;
}

// ln(q_{n+1}) / q_n from the logs, safe when q_n does not fit a double
double safe_level(double lnq_next, double lnq_n) {
    if (lnq_n < 700.0) return lnq_next / std::exp(lnq_n);
    if (lnq_next <= 0.0) return 0.0;
    return std::exp(std::log(lnq_next) - lnq_n);
}

void push_convergent(CFExpansion& cf, const mpz_class& a) {
    const auto n = cf.convergents.size();
    if (n == 1) {
        cf.convergents.emplace_back(1, a);
    } else {
        const auto& [p1, q1] = cf.convergents[n - 1];
        const auto& [p0, q0] = cf.convergents[n - 2];
        cf.convergents.emplace_back(a * p1 + p0, a * q1 + q0);
    }
    cf.quotients.push_back(a);
}

void fill_levels_from_convergents(CFExpansion& cf) {
    cf.beta_levels.clear();
    for (int n = 1; n + 1 <= cf.depth(); ++n)
        cf.beta_levels.push_back(safe_level(log_mpz(cf.q(n + 1)), log_mpz(cf.q(n))));
}

// exact a_{n+1} = ceil(e^{c q_n}) via mpfr at just-enough precision
mpz_class exp_rule_quotient(double c, const mpz_class& qn) {
    const double bits = c * mpz_get_d(qn.get_mpz_t()) / M_LN2 + 64;
    mpfr_t t;
    mpfr_init2(t, static_cast<mpfr_prec_t>(bits));
    mpfr_set_z(t, qn.get_mpz_t(), MPFR_RNDN);
    mpfr_mul_d(t, t, c, MPFR_RNDN);
    mpfr_exp(t, t, MPFR_RNDN);
    mpfr_ceil(t, t);
    mpz_class a;
    mpfr_get_z(a.get_mpz_t(), t, MPFR_RNDN);
    mpfr_clear(t);
    return a;
}

}  // namespace

mpf_class golden_mean(unsigned prec_bits) {
    mpf_class r(5, prec_bits);
    r = sqrt(r);
    return (r - 1) / 2;
}

mpf_class sqrt2_minus_1(unsigned prec_bits) {
    mpf_class r(2, prec_bits);
    r = sqrt(r);
    return r - 1;
}

QuotientRule QuotientRule::constant_rule(const mpz_class& k) {
    QuotientRule r;
    r.kind = Kind::Constant;
    r.constant = k;
    return r;
}

QuotientRule QuotientRule::list_rule(std::vector<mpz_class> v) {
    QuotientRule r;
    r.kind = Kind::List;
    r.list = std::move(v);
    return r;
}

QuotientRule QuotientRule::exp_rule(double c) {
    QuotientRule r;
    r.kind = Kind::Exp;
    r.exp_c = c;
    return r;
}

CFExpansion cf_expand(const mpf_class& x, int depth) {
    if (depth < 1) throw DomainError("depth must be >= 1");
    if (x <= 0 || x >= 1) throw DomainError("x must lie in (0,1)");

    const unsigned prec = x.get_prec();
    mpf_class eps(0, prec + 32);
    mpf_div_2exp(eps.get_mpf_t(), mpf_class(1, prec + 32).get_mpf_t(), prec - 1);
    if (x < eps) throw PrecisionExhausted("input below 2^{1-P}");

    CFExpansion cf;
    cf.value = x;
    cf.convergents.emplace_back(0, 1);

    mpf_class r(x, prec + 32);
    for (int n = 0; n < depth; ++n) {
        mpf_class inv(0, prec + 32);
        inv = 1 / r;
        mpf_class fl(0, prec + 32);
        mpf_floor(fl.get_mpf_t(), inv.get_mpf_t());
        mpz_class a(fl);
        if (a < 1) a = 1;
        push_convergent(cf, a);
        r = inv - fl;
        if (r == 0) {
            cf.rational = true;
            break;
        }
        if (r < eps) {
            cf.truncated = true;
            break;
        }
    }
    fill_levels_from_convergents(cf);
    return cf;
}

CFExpansion alpha_from_quotients(const QuotientRule& rule, int depth,
                                 unsigned prec_bits, std::size_t bit_budget) {
    if (depth < 1) throw DomainError("depth must be >= 1");
    if (rule.kind == QuotientRule::Kind::List &&
        static_cast<int>(rule.list.size()) < depth)
        throw DomainError("rule list shorter than requested depth");

    CFExpansion cf;
    cf.convergents.emplace_back(0, 1);

    int n_exact = 0;
    for (; n_exact < depth; ++n_exact) {
        const mpz_class& qn = cf.convergents.back().second;
        mpz_class a;
        switch (rule.kind) {
            case QuotientRule::Kind::Constant: a = rule.constant; break;
            case QuotientRule::Kind::List: a = rule.list[n_exact]; break;
            case QuotientRule::Kind::Exp: {
                const double need_bits =
                    rule.exp_c * mpz_get_d(qn.get_mpz_t()) / M_LN2;
                if (!(need_bits < static_cast<double>(bit_budget))) goto log_tail;
                a = exp_rule_quotient(rule.exp_c, qn);
                break;
            }
        }
        if (a < 1) throw DomainError("rule produced a quotient < 1");
        if (mpz_sizeinbase(cf.convergents.back().second.get_mpz_t(), 2) >
            bit_budget)
            throw Overflow("q_n exceeds the big-integer budget");
        push_convergent(cf, a);
    }
log_tail:
    fill_levels_from_convergents(cf);

    if (n_exact < depth) {
        // Exp rule past the exact budget: continue ln q_n only.
        // ln a_{n+1} = c q_n up to the negligible ceil() correction.
        const double c = rule.exp_c;
        double Lprev = log_mpz(cf.q(n_exact - 1));
        double Ln = log_mpz(cf.q(n_exact));
        for (int n = n_exact; n < depth; ++n) {
            double level, Lnext;
            if (Ln < 700.0) {
                const double qn = std::exp(Ln);
                const double lnA = c * qn;
                Lnext = lnA + Ln + std::log1p(std::exp(Lprev - lnA - Ln));
                level = Lnext / qn;
            } else {
                level = c;  // + ln(q_n) e^{-ln q_n}, below double resolution
                Lnext = std::numeric_limits<double>::infinity();
            }
            cf.beta_levels.push_back(level);
            Lprev = Ln;
            Ln = Lnext;
        }
        cf.truncated = true;
    }

    // value = deepest exact convergent at extended precision
    mpf_class p(cf.p(cf.depth()), prec_bits), q(cf.q(cf.depth()), prec_bits);
    cf.value = p / q;
    return cf;
}

BetaEstimate beta_estimate(const CFExpansion& cf) {
    if (cf.rational) throw DomainError("rational-terminated expansion");
    if (cf.beta_levels.empty()) throw DomainError("need >= 2 convergents");

    BetaEstimate est;
    const int N = static_cast<int>(cf.beta_levels.size());
    for (int i = 0; i < N; ++i)
        est.levels.emplace_back(i + 1, cf.beta_levels[i]);
    est.running_sup_tail.assign(N, 0.0);
    double sup = -std::numeric_limits<double>::infinity();
    for (int i = N - 1; i >= 0; --i) {
        sup = std::max(sup, cf.beta_levels[i]);
        est.running_sup_tail[i] = sup;
    }
    const int tail = (N + 1) / 2;
    est.verdict_at_depth = est.running_sup_tail[N - tail];
    return est;
}

double rotation_distance(const mpz_class& k, const mpf_class& alpha) {
    if (k == 0) throw DomainError("k must be nonzero");
    const unsigned prec =
        alpha.get_prec() + static_cast<unsigned>(mpz_sizeinbase(k.get_mpz_t(), 2)) + 32;
    mpf_class t(alpha, prec);
    t *= mpf_class(abs(k), prec);
    mpf_class fl(0, prec);
    mpf_floor(fl.get_mpf_t(), t.get_mpf_t());
    t -= fl;  // fractional part in [0,1)
    mpf_class d = t <= mpf_class(1, prec) - t ? t : 1 - t;
    return d.get_d();
}

double rotation_distance(long k, const mpf_class& alpha) {
    return rotation_distance(mpz_class(k), alpha);
}

}  // namespace qjl
