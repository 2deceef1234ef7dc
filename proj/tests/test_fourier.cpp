#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qjlab/errors.hpp"
#include "qjlab/fourier.hpp"
#include "qjlab/numberkit.hpp"

using namespace qjl;

namespace {
const double kGolden = golden_mean().get_d();

OperatorModel constant_toy() {
    return OperatorModel::quasiperiodic(SamplingFunction::constant(1.0),
                                        SamplingFunction::zero(), kGolden,
                                        0.2);
}
}  // namespace

TEST_CASE("decomposition: Schrodinger weights give g = 1 and F = f") {
    auto m = OperatorModel::schrodinger_cos(0.8, kGolden, 0.3);
    auto dec = decompose_F(m, 0.5, 40);
    CHECK(std::abs(dec.b_rescale) < 1e-12);
    for (std::size_t j = 0; j < dec.grid_size; j += 17) {
        CHECK(dec.g[j] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dec.F(j) == doctest::Approx(dec.f[j]).epsilon(1e-10));
    }
    CHECK(dec.parseval_rel < 1e-6);
    CHECK(dec.det_identity_rel < 1e-9);
}

TEST_CASE("decomposition: constant hyperbolic toy matches e^{2Ln}") {
    const double L = std::log((3.0 + std::sqrt(5.0)) / 2.0);
    auto dec = decompose_F(constant_toy(), 3.0, 100);
    for (std::size_t j = 0; j < dec.grid_size; j += 31)
        CHECK(dec.log_f[j] / (2.0 * 100) == doctest::Approx(L).epsilon(5e-2));
    // measured strip rate of a theta-independent cocycle is just 2L
    CHECK(dec.C1 == doctest::Approx(2.0 * L).epsilon(5e-2));
    CHECK(dec.tail_bound_ok);
    CHECK(dec.decay_ok);

    auto rep = find_large_norm_interval(dec, 0.8);
    CHECK(rep.leb3 == 1.0);  // the whole circle is in the top level set
    CHECK(rep.chain_ok);
    CHECK(rep.theta3_floor_ok);
    CHECK(rep.delta_len == doctest::Approx(1.0));
    CHECK(rep.len_ok);
    CHECK(rep.norm_ok);
}

TEST_CASE("decomposition: EHM tail, Parseval and level sets") {
    auto m = OperatorModel::ehm_model({0.2, 0.3, 0.2}, kGolden, 0.205);
    for (long n : {100L, 200L}) {
        auto dec = decompose_F(m, 0.267, n);
        // at these n the measured grid residual sits at the FFT noise floor
        // (~eps max f, astronomically large); the sub-unit tail comes from the
        // certificate C1 - pi rho d < 0
        CHECK(dec.tail_certified);
        CHECK(dec.log_tail_bound < 0.0);
        CHECK(dec.tail_bound_ok);
        CHECK(dec.parseval_rel < 1e-6);
        CHECK(dec.decay_ok);
        CHECK(dec.det_identity_rel < 1e-9);
        CHECK(dec.grid_size >= static_cast<std::size_t>(8 * dec.d * n));
        // P + R = f by construction; confirm the split is well-conditioned
        double worst = 0;
        for (std::size_t j = 0; j < dec.grid_size; j += 13)
            worst = std::max(worst, std::abs(dec.P[j] + dec.R[j] - dec.f[j]) /
                                        (1.0 + dec.f[j]));
        CHECK(worst < 1e-8);

        auto rep = find_large_norm_interval(dec, 1.0);
        CHECK(rep.chain_ok);
        CHECK(rep.theta3_floor_ok);
        CHECK(rep.len_ok);
        CHECK(rep.norm_ok);
        CHECK(rep.delta_len > 0.0);
    }
}

TEST_CASE("decomposition: log-mean of g shrinks with n") {
    auto m = OperatorModel::ehm_model({0.2, 0.3, 0.2}, kGolden, 0.205);
    auto mean_lg = [&](long n) {
        auto dec = decompose_F(m, 0.267, n);
        double s = 0;
        for (double x : dec.log_g) s += x;
        return std::abs(s / dec.log_g.size() / n);
    };
    const double m50 = mean_lg(50), m200 = mean_lg(200);
    CHECK(m200 < 0.05);
    CHECK(m200 < m50 + 1e-12);
}

TEST_CASE("level sets: region-II EHM has an empty superlevel set") {
    auto m = OperatorModel::ehm_model({0, 2, 0}, kGolden, 0.123);
    auto dec = decompose_F(m, 0.4, 100);
    CHECK_THROWS_AS(find_large_norm_interval(dec, 1.0), EmptyLevelSet);
}

TEST_CASE("localization density on the EHM instance") {
    auto m = OperatorModel::ehm_model({0.2, 0.3, 0.2}, kGolden, 0.205);
    auto cert = localization_density(m, 0.267, 89, 1.0, 20);
    CHECK(cert.all_pass);
    CHECK(cert.hits.size() == 20);
    CHECK(cert.c0 ==
          doctest::Approx(cert.c2 / (320.0 * cert.d)).epsilon(1e-12));
    for (const auto& e : cert.hits) {
        const long lo = std::max(2 * e.m * 89, 1L);
        CHECK(e.j_m >= lo);
        CHECK(e.j_m < (2 * e.m + 2) * 89);
        CHECK(e.log_norm > cert.threshold);
    }
}

TEST_CASE("localization density: constant toy and the bounded falsifier") {
    auto cert = localization_density(constant_toy(), 3.0, 89, 0.9, 5);
    CHECK(cert.all_pass);

    // free Laplacian at E = 0: ||A(k)|| = sqrt(2) for every k, so a deep
    // denominator pushes the threshold past the plateau
    auto free = OperatorModel::free_laplacian();
    CHECK_THROWS_AS(localization_density(free, 0.0, 4181, 0.04, 2), NotFound);
}

TEST_CASE("sum-of-norms growth") {
    auto free = OperatorModel::free_laplacian();
    auto s = sum_norm_growth(free, 0.0, 10000, 0.01);
    // sum = 2 ell exactly: exponent ln(2 ell)/ln(ell)
    CHECK(s.log_sum_fwd ==
          doctest::Approx(std::log(2.0e4)).epsilon(1e-10));
    CHECK(s.exponent_fwd > 1.0);
    CHECK(s.fwd_ok);
    CHECK(s.rev_ok);
    auto tight = sum_norm_growth(free, 0.0, 10000, 0.5);
    CHECK(!tight.fwd_ok);  // bounded norms cannot reach 1 + 2c/beta = 2

    auto toy = sum_norm_growth(constant_toy(), 3.0, 2000, 0.5);
    CHECK(toy.exponent_fwd > 100.0);  // geometric e^{2 L ell}
    CHECK(toy.fwd_ok);

    // even sampling functions: the two directions agree closely
    auto sym = OperatorModel::quasiperiodic(SamplingFunction::constant(1.0),
                                            SamplingFunction::cosine(3.0),
                                            kGolden, 0.0);
    auto r = sum_norm_growth(sym, 0.5, 5000, 0.1);
    CHECK(std::abs(r.log_sum_fwd - r.log_sum_rev) <
          0.1 * std::abs(r.log_sum_fwd));

    CHECK_THROWS_AS(sum_norm_growth(free, 0.0, 200000, 0.1), BudgetExceeded);
}

TEST_CASE("sublevel bound: closed forms") {
    auto q = sublevel_measure_bound({-1.0, 0.0, 1.0}, 0.0, 0.5);
    CHECK(q.preimage_len ==
          doctest::Approx(2.0 * (std::sqrt(1.5) - 1.0)).epsilon(1e-9));
    CHECK(q.zeta == doctest::Approx(1.0));
    CHECK(q.diam == doctest::Approx(2.0));
    CHECK(q.bound == doctest::Approx(2.0 * 2.0 * std::sqrt(0.5)).epsilon(1e-9));
    CHECK(q.inequality_ok);

    auto lin = sublevel_measure_bound({0.0, 1.0}, 0.0, 1.0);
    CHECK(lin.vacuous_linear);
    CHECK(lin.preimage_len == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lin.inequality_ok);

    // homogeneity: p -> 2p with (a,b) -> (2a,2b) changes neither side
    auto s1 = sublevel_measure_bound({-1.0, 0.0, 1.0}, 0.1, 0.5);
    auto s2 = sublevel_measure_bound({-2.0, 0.0, 2.0}, 0.2, 1.0);
    CHECK(s1.preimage_len == doctest::Approx(s2.preimage_len).epsilon(1e-9));
    CHECK(s1.bound == doctest::Approx(s2.bound).epsilon(1e-9));

    CHECK_THROWS_AS(sublevel_measure_bound({1.0, 0.0, 1.0}, 0.0, 1.0),
                    DegenerateZeros);  // x^2 + 1
    CHECK_THROWS_AS(sublevel_measure_bound({0.0, 0.0, 1.0}, 0.0, 1.0),
                    DegenerateZeros);  // x^2, repeated zero
    CHECK_THROWS_AS(sublevel_measure_bound({-1.0, 0.0, 1.0}, 0.5, 0.2),
                    DomainError);
}

TEST_CASE("sublevel bound: random cubics and quartics") {
    std::mt19937_64 rng(31415);
    std::uniform_real_distribution<double> root(-3.0, 3.0), lvl(0.0, 2.0);
    for (int t = 0; t < 60; ++t) {
        const int deg = 3 + (t % 2);
        std::vector<double> zs;
        bool ok = true;
        for (int i = 0; i < deg; ++i) {
            const double z = root(rng);
            for (double z0 : zs)
                if (std::abs(z - z0) < 0.05) ok = false;
            zs.push_back(z);
        }
        if (!ok) continue;
        std::vector<double> p = {1.0};
        for (double z : zs) {
            std::vector<double> np(p.size() + 1, 0.0);
            for (std::size_t i = 0; i < p.size(); ++i) {
                np[i + 1] += p[i];
                np[i] -= z * p[i];
            }
            p = np;
        }
        double a = lvl(rng), b = lvl(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-3) b = a + 1e-3;
        auto r = sublevel_measure_bound(p, a, b);
        CHECK(r.inequality_ok);
    }
}

TEST_CASE("decomposition guards") {
    auto m = OperatorModel::ehm_model({0.2, 0.3, 0.2}, kGolden, 0.205);
    CHECK_THROWS_AS(decompose_F(m, 0.0, 5000), BudgetExceeded);
    OperatorModel closure = m;
    closure.c.kind = SamplingFunction::Kind::Closure;
    closure.c.fn = [](double) { return cplx(1.0, 0.0); };
    CHECK_THROWS_AS(decompose_F(closure, 0.0, 50), NonAnalyticInput);
}
