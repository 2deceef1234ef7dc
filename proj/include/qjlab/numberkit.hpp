#pragma once

// Continued-fraction arithmetic for irrational frequencies: expansions,
// convergents, beta(alpha) levels, prescribed-quotient constructions and
// rotation distances ||k alpha||.

#include <gmpxx.h>

#include <cstdint>
#include <utility>
#include <vector>

namespace qjl {

constexpr unsigned kDefaultPrecBits = 1024;

// alpha helpers at a given bit precision
mpf_class golden_mean(unsigned prec_bits = kDefaultPrecBits);
mpf_class sqrt2_minus_1(unsigned prec_bits = kDefaultPrecBits);

struct CFExpansion {
    std::vector<mpz_class> quotients;  // a_1..a_N (exact part)
    // convergents[n] = (p_n, q_n) for n = 0..N with (p_0,q_0) = (0,1)
    std::vector<std::pair<mpz_class, mpz_class>> convergents;
    mpf_class value;        // alpha carried at extended precision
    bool rational = false;  // expansion terminated exactly
    bool truncated = false; // stopped early (precision or bigint budget)
    // ln q_{n+1}/q_n for n = 1..depth-1.  For exact levels this is computed
    // from the convergents; rule-built expansions may extend past the bigint
    // budget in log form (see alpha_from_quotients).
    std::vector<double> beta_levels;

    int depth() const { return static_cast<int>(convergents.size()) - 1; }
    const mpz_class& p(int n) const { return convergents.at(n).first; }
    const mpz_class& q(int n) const { return convergents.at(n).second; }
};

struct BetaEstimate {
    std::vector<std::pair<int, double>> levels;  // (n, ln q_{n+1}/q_n)
    std::vector<double> running_sup_tail;        // sup of levels[i..] per i
    double verdict_at_depth = 0.0;  // sup over the last ceil(N/2) levels
};

// Quotient generators for alpha_from_quotients.
struct QuotientRule {
    enum class Kind { Constant, List, Exp } kind = Kind::Constant;
    mpz_class constant = 1;            // a_n == constant
    std::vector<mpz_class> list;       // explicit quotients
    double exp_c = 1.0;                // a_{n+1} = ceil(e^{c q_n})

    static QuotientRule constant_rule(const mpz_class& k);
    static QuotientRule list_rule(std::vector<mpz_class> v);
    static QuotientRule exp_rule(double c);
};

// Expand x in (0,1) to the requested depth at the precision x carries.
// Terminating (rational) inputs set cf.rational; exhausted precision sets
// cf.truncated.  Throws DomainError if x outside (0,1).
CFExpansion cf_expand(const mpf_class& x, int depth);

// Build an expansion from a prescribed rule.  Exact bigint convergents are
// produced while quotients fit bit_budget bits; Exp rules then continue in
// log form (beta_levels only), other rules throw Overflow.
CFExpansion alpha_from_quotients(const QuotientRule& rule, int depth,
                                 unsigned prec_bits = kDefaultPrecBits,
                                 std::size_t bit_budget = 1u << 20);

// limsup surrogate over the stored levels: verdict = sup of the last half.
BetaEstimate beta_estimate(const CFExpansion& cf);

// ||k alpha||_T = min_n |k alpha - n|, evaluated at the precision of alpha.
double rotation_distance(const mpz_class& k, const mpf_class& alpha);
double rotation_distance(long k, const mpf_class& alpha);

}  // namespace qjl
