#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "qjlab/errors.hpp"
#include "qjlab/periodicity.hpp"

using namespace qjl;

namespace {
const double kGolden = golden_mean().get_d();

std::function<cplx(long)> cos_seq(double theta, double alpha) {
    return [theta, alpha](long n) {
        long double x = theta + static_cast<long double>(n) * alpha;
        x -= floorl(x);
        return cplx(static_cast<double>(cosl(2.0L * M_PIl * x)), 0.0);
    };
}
}  // namespace

TEST_CASE("constant sequence is exactly periodic") {
    PeriodicityParams p;
    p.beta = 0.5;
    p.delta = 0.5;
    p.q = 10;
    auto res = check_beta_almost_periodic([](long) { return cplx(1.3, 0); }, p);
    CHECK(res.pass);
    CHECK(std::isinf(res.worst_margin));
    CHECK(res.worst_margin < 0);
}

TEST_CASE("cosine sequence at a deep Fibonacci denominator") {
    // q = 39088169, next denominator 63245986: the shift error ~ 2pi/1e8
    // sits just under the q_{next}^{-0.9} margin
    const long q = 39088169;
    const double lnq1 = std::log(63245986.0);
    PeriodicityParams p;
    p.beta = 0.9 * lnq1 / q;
    p.delta = 0.5;
    p.q = q;
    p.window_cap = 3000;
    auto res = check_beta_almost_periodic(cos_seq(0.37, kGolden), p);
    CHECK(res.pass);
    CHECK(res.worst_margin < 0);

    // one off the denominator the shift is order one and the check fails
    p.q = q + 1;
    auto bad = check_beta_almost_periodic(cos_seq(0.37, kGolden), p);
    CHECK(!bad.pass);
}

TEST_CASE("lambda-beta bound: unit weights and the EHM scan") {
    PeriodicityParams p;
    p.beta = 0.1;
    p.delta = 0.5;
    p.Lambda = 0.01;
    p.q = 34;
    p.window_cap = 2000;
    auto unit = check_lambda_beta_bound([](long) { return cplx(1, 0); }, p);
    CHECK(unit.pass);
    CHECK(unit.min_log_product == 0.0);
    CHECK(unit.partial_pass);
    CHECK(unit.single_pass);
    CHECK(unit.ratio_dev == 0.0);

    auto m = OperatorModel::ehm_model({0.2, 0.3, 0.2}, kGolden, 0.123);
    p.Lambda = 1.7;  // generous certificate for a desk-scale scan
    auto res = check_lambda_beta_bound([&m](long j) { return m.w(j); }, p);
    CHECK(res.pass);
    // the induced bounds follow with 2 Lambda whenever the main bound holds
    CHECK(res.partial_pass);
    CHECK(res.single_pass);
    const bool partial_implied = res.min_log_partial > -2 * p.Lambda * p.q;
    CHECK(partial_implied);

    CHECK_THROWS_AS(
        check_lambda_beta_bound(
            [](long j) { return j == 5 ? cplx(0, 0) : cplx(1, 0); }, p),
        ZeroInWindow);
}

TEST_CASE("rational sine-product oracle validates the kernel") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<long> qs(7, 10000);
    int done = 0;
    while (done < 50) {
        const long q = qs(rng);
        long pnum = 1 + static_cast<long>(uni(rng) * (q - 1));
        if (std::gcd(pnum, q) != 1) continue;
        const double theta = 0.05 + 0.9 * uni(rng);
        const double lhs = log2sin_sum_rational(theta, pnum, q);
        const double rhs =
            std::log(2.0 * std::abs(std::sin(M_PI * q * theta)));
        CHECK(std::abs(lhs - rhs) < 1e-9);
        // the floating kernel agrees up to the p/q representation drift
        const double fk = log2sin_sum(theta, double(pnum) / double(q), q);
        CHECK(std::abs(fk - lhs) < 1e-6);
        ++done;
    }
}

TEST_CASE("sine-product deviation at golden denominators") {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> uni(0.01, 0.99);
    for (int t = 0; t < 20; ++t) {
        auto d = sine_product_deviation(uni(rng), kGolden, 89);
        CHECK(d.C_eff <= 20.0);
    }
    CHECK_THROWS_AS(sine_product_deviation(0.0, kGolden, 89), ExactZeroTerm);
    CHECK_THROWS_AS(sine_product_deviation(0.3, kGolden, 90), DomainError);
}

TEST_CASE("zero profile of 0.3 + 0.4 cos") {
    // |c| vanishes at +-theta0, theta0 = acos(-3/4)/2pi; mean log is the
    // classical ln(b/2)
    const double th0 = std::acos(-0.75) / (2.0 * M_PI);
    auto c = [](double th) { return cplx(0.3 + 0.4 * std::cos(2 * M_PI * th), 0); };
    auto prof = make_zero_profile(c, {{th0, 1.0}, {1.0 - th0, 1.0}});
    CHECK(prof.mean_log == doctest::Approx(std::log(0.2)).epsilon(1e-6));
    CHECK(prof.inf_g > 0);
    CHECK(prof.tau_sum == doctest::Approx(2.0));

    auto one = make_zero_profile([](double) { return cplx(1, 0); }, {});
    CHECK(std::abs(one.mean_log) < 1e-12);

    CHECK_THROWS_AS(make_zero_profile(c, {{th0, 1.5}}), DomainError);
}

TEST_CASE("theta test accepts generic points and rejects exact zeros") {
    auto c = [](double th) { return cplx(1.0 + std::cos(2 * M_PI * th), 0); };
    auto prof = make_zero_profile(c, {{0.5, 1.0}, {0.5, 1.0}});
    auto ok = theta_test(prof, 0.123, kGolden, 10000);
    CHECK(ok.pass);
    for (double g : ok.gamma) CHECK(g > 0);
    auto bad = theta_test(prof, 0.5, kGolden, 10000);
    CHECK(!bad.pass);
    CHECK(bad.gamma[0] == 0.0);
}

TEST_CASE("lambda certificate formulas and denominators") {
    auto cf = alpha_from_quotients(QuotientRule::exp_rule(1.0), 8);
    auto one = make_zero_profile([](double) { return cplx(1, 0); }, {});
    auto cert = lambda_certificate(one, cf, 0.4, 0.3);
    const double bump = 0.3 * 0.3 * 0.4;
    CHECK(cert.Lambda == doctest::Approx(6.0 * bump).epsilon(1e-12));
    CHECK(cert.Lambda1 == doctest::Approx(2.0 * bump).epsilon(1e-12));
    CHECK(!cert.q_sequence.empty());

    // Lambda decreases to -mean_log as delta -> 0
    double prev = cert.Lambda;
    for (double d : {0.2, 0.1, 0.05}) {
        auto c2 = lambda_certificate(one, cf, 0.4, d);
        CHECK(c2.Lambda < prev);
        prev = c2.Lambda;
    }
    CHECK(prev > -one.mean_log);

    // golden alpha has beta = 0: the 2 beta < beta(alpha) gate rejects
    auto gcf = cf_expand(golden_mean(), 40);
    CHECK_THROWS_AS(lambda_certificate(one, gcf, 0.4, 0.3), DomainError);
}

TEST_CASE("block bound verification") {
    auto free = OperatorModel::free_laplacian();
    auto b = verify_lambda_bound_on_blocks(free, 8, 0.4, 0.3, 0.2, 1000);
    CHECK(b.pass);
    CHECK(b.worst_log_block == 0.0);

    // EHM with a double zero of c, Liouville-type alpha, theta vetted by the
    // theta test
    auto cf = alpha_from_quotients(QuotientRule::exp_rule(1.0), 8);
    const double alpha = cf.value.get_d();
    auto m = OperatorModel::ehm_model({0.5, 1, 0.5}, alpha, 0.123);
    const double thz = 0.5 - alpha / 2.0;
    auto prof = make_zero_profile([&m](double th) { return m.c(th); },
                                  {{thz, 1.0}, {thz, 1.0}});
    auto cert = lambda_certificate(prof, cf, 0.4, 0.3);
    const long qn = cert.q_sequence.front();
    auto tt = theta_test(prof, 0.123, alpha, 10000);
    REQUIRE(tt.pass);
    auto blk =
        verify_lambda_bound_on_blocks(m, qn, 0.4, 0.3, cert.Lambda1, 100000);
    CHECK(blk.pass);
}
