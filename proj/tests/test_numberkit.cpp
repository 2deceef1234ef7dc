#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qjlab/errors.hpp"
#include "qjlab/numberkit.hpp"

using namespace qjl;

TEST_CASE("golden mean expands to all-ones quotients / Fibonacci q") {
    auto cf = cf_expand(golden_mean(), 10);
    REQUIRE(cf.depth() == 10);
    const long fib[] = {1, 2, 3, 5, 8, 13, 21, 34, 55, 89};
    for (int n = 1; n <= 10; ++n) {
        CHECK(cf.quotients[n - 1] == 1);
        CHECK(cf.q(n) == fib[n - 1]);
    }
    CHECK_FALSE(cf.rational);
}

TEST_CASE("sqrt2-1 expands to all-twos quotients") {
    auto cf = cf_expand(sqrt2_minus_1(256), 6);
    REQUIRE(cf.depth() == 6);
    for (const auto& a : cf.quotients) CHECK(a == 2);
}

TEST_CASE("rational input terminates with a flag") {
    mpf_class half(0.5, kDefaultPrecBits);
    auto cf = cf_expand(half, 10);
    CHECK(cf.rational);
    CHECK(cf.quotients.size() == 1);
    CHECK(cf.quotients[0] == 2);
    CHECK_THROWS_AS(beta_estimate(cf), DomainError);
}

TEST_CASE("domain checks") {
    CHECK_THROWS_AS(cf_expand(mpf_class(1.5, 64), 3), DomainError);
    CHECK_THROWS_AS(cf_expand(mpf_class(0.3, 64), 0), DomainError);
}

TEST_CASE("convergent recursion, coprimality and approximation quality") {
    auto cf = cf_expand(sqrt2_minus_1(512), 14);
    for (int n = 2; n <= cf.depth(); ++n) {
        CHECK(cf.p(n) == cf.quotients[n - 1] * cf.p(n - 1) + cf.p(n - 2));
        CHECK(cf.q(n) == cf.quotients[n - 1] * cf.q(n - 1) + cf.q(n - 2));
    }
    for (int n = 1; n <= cf.depth(); ++n) {
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), cf.p(n).get_mpz_t(), cf.q(n).get_mpz_t());
        CHECK(g == 1);
    }
    // |alpha - p_N/q_N| <= 1/(q_N q_{N+1}) needs q_{N+1}; check at N-1
    auto deeper = cf_expand(sqrt2_minus_1(512), 15);
    const int N = 14;
    mpf_class approx(0, 512), err(0, 512);
    approx = mpf_class(cf.p(N), 512) / mpf_class(cf.q(N), 512);
    err = abs(cf.value - approx);
    mpf_class bound(0, 512);
    bound = mpf_class(1, 512) /
            (mpf_class(cf.q(N), 512) * mpf_class(deeper.q(N + 1), 512));
    CHECK(err <= bound);
}

TEST_CASE("alpha_from_quotients: constant rules") {
    auto g = alpha_from_quotients(QuotientRule::constant_rule(1), 12);
    CHECK(g.q(12) == 233);  // F_13
    // depth-8 value is the CF approximation error 1/(q_8 q_9) ~ 4e-7;
    // 1e-9 needs depth ~12+
    auto s = alpha_from_quotients(QuotientRule::constant_rule(2), 8, 512);
    mpf_class diff(0, 512);
    diff = abs(s.value - sqrt2_minus_1(512));
    CHECK(diff < 1e-6);
    auto s14 = alpha_from_quotients(QuotientRule::constant_rule(2), 14, 512);
    diff = abs(s14.value - sqrt2_minus_1(512));
    CHECK(diff < 1e-9);
}

TEST_CASE("round-trip: cf_expand recovers a rule's quotients") {
    auto built = alpha_from_quotients(
        QuotientRule::list_rule({3, 1, 4, 1, 5, 9, 2, 6}), 8, 512);
    auto back = cf_expand(built.value, 7);  // final quotient may be perturbed
    for (int i = 0; i < 7; ++i) CHECK(back.quotients[i] == built.quotients[i]);
}

TEST_CASE("beta levels: golden mean tends to zero") {
    auto cf = alpha_from_quotients(QuotientRule::constant_rule(1), 30);
    auto est = beta_estimate(cf);
    CHECK(est.verdict_at_depth <= 0.1);
    // tail sups are non-increasing in the starting index
    for (std::size_t i = 1; i < est.running_sup_tail.size(); ++i)
        CHECK(est.running_sup_tail[i] <= est.running_sup_tail[i - 1] + 1e-15);
    // level values match ln q_{n+1}/q_n from the stored convergents
    for (int n = 1; n < cf.depth(); ++n) {
        double expect = std::log(mpz_get_d(cf.q(n + 1).get_mpz_t())) /
                        mpz_get_d(cf.q(n).get_mpz_t());
        CHECK(std::abs(est.levels[n - 1].second - expect) < 1e-12);
    }
}

TEST_CASE("beta levels: a_{n+1}=ceil(e^{q_n}) reaches beta ~ 1 by depth 6") {
    auto cf = alpha_from_quotients(QuotientRule::exp_rule(1.0), 6);
    auto est = beta_estimate(cf);
    CHECK(est.verdict_at_depth > 0.9);
    CHECK(est.verdict_at_depth < 1.1);
}

TEST_CASE("exp rule keeps exact convergents while they fit") {
    auto cf = alpha_from_quotients(QuotientRule::exp_rule(1.0), 6);
    // q1=3, q2=64 from a1=ceil(e)=3, a2=ceil(e^3)=21
    REQUIRE(cf.depth() >= 2);
    CHECK(cf.q(1) == 3);
    CHECK(cf.q(2) == 64);
    CHECK(cf.truncated);
    CHECK(cf.beta_levels.size() == 5);
}

TEST_CASE("overflow surfaced for exact-only rules") {
    std::vector<mpz_class> huge;
    mpz_class big = 1;
    mpz_mul_2exp(big.get_mpz_t(), big.get_mpz_t(), 3000);
    for (int i = 0; i < 6; ++i) huge.push_back(big);
    CHECK_THROWS_AS(
        alpha_from_quotients(QuotientRule::list_rule(huge), 6, 256, 8000),
        Overflow);
}

TEST_CASE("rotation distance: sandwich and monotonicity at golden mean") {
    auto alpha = golden_mean();
    auto cf = cf_expand(alpha, 12);
    // 1/(2 q_{n+1}) <= ||q_n alpha|| <= 1/q_{n+1}
    for (int n = 1; n < 12; ++n) {
        double d = rotation_distance(cf.q(n), alpha);
        double qn1 = mpz_get_d(cf.q(n + 1).get_mpz_t());
        CHECK(d >= 1.0 / (2.0 * qn1) - 1e-15);
        CHECK(d <= 1.0 / qn1 + 1e-15);
    }
    // ||q_5 alpha|| minimal among k = q_5 .. q_6 - 1 (q_5 = 8, q_6 = 13)
    double dq5 = rotation_distance(8L, alpha);
    for (long k = 8; k < 13; ++k)
        CHECK(dq5 <= rotation_distance(k, alpha) + 1e-15);
    CHECK_THROWS_AS(rotation_distance(0L, alpha), DomainError);
}

TEST_CASE("rotation distance: rational period hits zero") {
    mpf_class q(0.25, 64);
    CHECK(rotation_distance(4L, q) == 0.0);
}
