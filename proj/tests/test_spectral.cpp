#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qjlab/errors.hpp"
#include "qjlab/numberkit.hpp"
#include "qjlab/spectral.hpp"

using namespace qjl;

namespace {
const double kGolden = golden_mean().get_d();

HalfLineSolution const_solution(long len, double val = 1.0) {
    HalfLineSolution s;
    s.unit.assign(len + 1, cplx(val, 0));
    s.log_off.assign(len + 1, 0.0);
    return s;
}
}  // namespace

TEST_CASE("half-line solution: free pattern and boundary conditions") {
    auto free = OperatorModel::free_laplacian();
    auto u = half_line_solution(free, 0.0, 0.0, HalfLineSolution::Side::Right,
                                20);
    // u_{n+1} = -u_{n-1}: 0, 1, 0, -1, 0, 1, ...
    const double expect[8] = {0, 1, 0, -1, 0, 1, 0, -1};
    for (int n = 0; n < 8; ++n)
        CHECK(std::abs(u.unit[n] * std::exp(u.log_off[n]) - expect[n]) <
              1e-12);
    CHECK(u.max_residual < 1e-12);

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ph(-M_PI / 2 + 0.01, M_PI / 2);
    auto m = OperatorModel::ehm_model({0.3, 0.6, 0.1}, kGolden, 0.27);
    for (int t = 0; t < 20; ++t) {
        const double phi = ph(rng);
        auto s = half_line_solution(m, 0.4, phi,
                                    HalfLineSolution::Side::Right, 500);
        const cplx u0 = s.unit[0], u1 = s.unit[1];
        CHECK(std::abs(u0 * std::cos(phi) + u1 * std::sin(phi)) < 1e-12);
        CHECK(std::abs(std::norm(u0) + std::norm(u1) - 1.0) < 1e-12);
        CHECK(s.max_residual < 1e-9 * (1.0 + 0.4));
    }
}

TEST_CASE("ell norms") {
    auto c = const_solution(10);
    CHECK(ell_norm(c, 4.5) == doctest::Approx(std::sqrt(4.5)).epsilon(1e-12));
    CHECK(ell_norm(c, 4.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ell_norm(c, 7.0) > ell_norm(c, 6.5));
    CHECK_THROWS_AS(ell_norm(c, 10.5), RangeTooShort);

    auto free = OperatorModel::free_laplacian();
    auto u = half_line_solution(free, 0.0, 0.0, HalfLineSolution::Side::Right,
                                20);
    CHECK(ell_norm(u, 10.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("subordinacy length") {
    auto c = const_solution(2000);
    const double eps = 1e-3;
    // ||u||_l^2 = l for u = 1, so l = 1/(2 eps)
    CHECK(subordinacy_length(c, c, eps) ==
          doctest::Approx(500.0).epsilon(1e-9));
    CHECK(subordinacy_length(c, c, eps / 2) > subordinacy_length(c, c, eps));
    CHECK_THROWS_AS(subordinacy_length(c, c, 1e-6), RangeTooShort);

    auto free = OperatorModel::free_laplacian();
    auto u = half_line_solution(free, 0.0, 0.0, HalfLineSolution::Side::Right,
                                3000);
    auto v = orthogonal_partner(free, u);
    const double ell = subordinacy_length(u, v, 1e-3);
    const double prod = ell_norm(u, ell) * ell_norm(v, ell);
    CHECK(prod == doctest::Approx(500.0).epsilon(1e-6));
}

TEST_CASE("half-line m: free-model closed form") {
    auto free = OperatorModel::free_laplacian();
    auto mi = half_line_m(free, 0.0, cplx(0, 1));
    CHECK(std::abs(mi.value - cplx(0, (std::sqrt(5.0) - 1) / 2)) < 1e-7);
    CHECK(mi.gap < 1e-8);

    // m = (-z + sqrt(z^2-4))/2, branch with positive imaginary part
    const cplx z(0.5, 0.3);
    cplx root = std::sqrt(z * z - 4.0);
    if (((-z + root) / 2.0).imag() < 0) root = -root;
    auto mv = half_line_m(free, 0.0, z);
    CHECK(std::abs(mv.value - (-z + root) / 2.0) < 1e-6);
    CHECK(mv.value.imag() > 0);

    // Herglotz at a rotated boundary condition too
    auto mr = half_line_m(free, 0.8, z);
    CHECK(mr.value.imag() > 0);
}

TEST_CASE("whole-line M on the free model") {
    auto free = OperatorModel::free_laplacian();
    const cplx z(0, 2);
    auto M = whole_line_M(free, z);
    // -2/sqrt(z^2-4) with the Herglotz branch: i/sqrt(2) at z = 2i
    CHECK(std::abs(M.value - cplx(0, 1.0 / std::sqrt(2.0))) < 1e-3);
    CHECK(M.value.imag() > 0);
    CHECK(M.mass == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(M.borel_bound_ok);
    REQUIRE(M.m_checks_evaluated);
    CHECK(M.dkl_ok);
    CHECK(M.identity_ok);
}

TEST_CASE("whole-line M consistency checks with complex weights") {
    auto m = OperatorModel::ehm_model({0.1, 0.6, 0.2}, kGolden, 0.130368);
    for (cplx z : {cplx(-0.3634, 0.05), cplx(0.4, 0.2)}) {
        auto M = whole_line_M(m, z);
        REQUIRE(M.m_checks_evaluated);
        CHECK(M.identity_ok);
        CHECK(M.identity_gap < 1e-8);
        CHECK(M.dkl_ok);
        CHECK(M.borel_bound_ok);
    }
}

TEST_CASE("whole-line M in a finite-box spectral gap") {
    auto m = OperatorModel::ehm_model({0, 0.5, 0}, kGolden, 0.123);
    auto ev = finite_box_spectrum(m, 2000);
    // midpoint of the widest interior gap of the box spectrum
    double gapE = 0, gapw = 0;
    for (std::size_t k = 1; k < ev.size(); ++k) {
        const double w = ev[k] - ev[k - 1];
        if (w > gapw) {
            gapw = w;
            gapE = 0.5 * (ev[k] + ev[k - 1]);
        }
    }
    REQUIRE(gapw > 1e-2);
    auto M = whole_line_M(m, cplx(gapE, 1e-4));
    double dist = 1e9;
    for (double a : ev) dist = std::min(dist, std::abs(a - gapE));
    const double ref = 1.0 / dist;
    CHECK(std::abs(M.value) > ref / 2.0);
    CHECK(std::abs(M.value) < ref * 2.0);
    CHECK(M.value.imag() > 0);
}

TEST_CASE("gamma scan: point mass vs absolutely continuous") {
    std::vector<double> eps;
    for (int i = 0; i <= 24; ++i)
        eps.push_back(3e-3 * std::pow(10.0, 3.0 * i / 24.0));

    DiscreteMeasure point{{0.7}, {1.0}};
    auto rep = gamma_scan_measure(point, {0.7}, {0.2, 0.5, 0.9}, eps);
    for (const auto& e : rep.entries)
        CHECK(e.verdict == GammaVerdict::Singularity);

    // gamma = 0 is continuity-consistent for any finite measure
    auto rep0 = gamma_scan_measure(point, {0.7}, {0.0}, eps);
    CHECK(rep0.entries[0].verdict == GammaVerdict::Continuity);

    auto free = OperatorModel::free_laplacian();
    auto repf = gamma_scan(free, {0.5}, {0.9}, eps, 4000);
    CHECK(repf.entries[0].verdict == GammaVerdict::Continuity);
    CHECK(repf.dim_bracket[0].first == doctest::Approx(0.9));

    std::vector<double> bad = {1e-3, 1e-2, 1e-1, 0.5};
    CHECK_THROWS_AS(gamma_scan_measure(point, {0.7}, {0.5}, bad),
                    GridTooCoarse);
}

TEST_CASE("power-law test: ballistic free model vs supercritical EHM") {
    auto free = OperatorModel::free_laplacian();
    auto ok = power_law_check(free, 0.0, 0.9, {1e-2, 3e-3, 1e-3}, 20000);
    CHECK(ok.pass_fraction == 1.0);

    auto amo = OperatorModel::ehm_model({0, 1.0 / 3.0, 0}, kGolden, 0.205);
    auto bad = power_law_check(amo, 0.0, 0.9, {1e-2, 1e-3, 1e-4}, 20000);
    CHECK(bad.pass_fraction < 1.0);
    bool upper_failed = false;
    for (const auto& e : bad.entries)
        if (e.range_ok && !e.upper_ok) upper_failed = true;
    CHECK(upper_failed);
}

TEST_CASE("Jitomirskaya-Last sandwich") {
    CHECK(5.0 - std::sqrt(24.0) == doctest::Approx(0.10102).epsilon(1e-4));
    CHECK(5.0 + std::sqrt(24.0) == doctest::Approx(9.89898).epsilon(1e-4));

    auto free = OperatorModel::free_laplacian();
    auto rep = jl_sandwich_check(free, 0.0, 1e-3, {0.0}, 20000);
    CHECK(rep.all_pass);

    // seeded random suite across models, energies, scales and angles
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> uE(-1.5, 1.5), uph(-1.4, 1.5),
        ueps(1e-3, 1e-2), uth(0.0, 1.0);
    int done = 0;
    while (done < 20) {
        OperatorModel m =
            done % 2 ? OperatorModel::ehm_model({0.1, 0.6, 0.2}, kGolden,
                                                uth(rng))
                     : OperatorModel::free_laplacian();
        auto r = jl_sandwich_check(m, uE(rng), ueps(rng), {uph(rng)}, 60000);
        CHECK(r.all_pass);
        ++done;
    }
}

TEST_CASE("sub-linear growth evidence on the free model") {
    auto free = OperatorModel::free_laplacian();
    double worst = 0;
    for (double ell : {100.0, 1000.0, 10000.0}) {
        double best = 1e300;
        for (int k = 0; k < 8; ++k) {
            const double phi = -M_PI / 2 + M_PI * (k + 1) / 8.0;
            auto u = half_line_solution(
                free, 0.3, phi, HalfLineSolution::Side::Right, 12000);
            best = std::min(best, ell_norm(u, ell) /
                                      (std::sqrt(ell) * std::log(ell)));
        }
        worst = std::max(worst, best);
    }
    CHECK(worst < 10.0);  // reported as evidence of sub-linear growth
}
