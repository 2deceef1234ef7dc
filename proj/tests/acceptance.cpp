// Acceptance gate: one pass/fail line per criterion.  Exit status is the
// number of failed criteria.  argv[1] is the path of the qjlab CLI binary
// (used by the determinism criterion).

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qjlab/cocycle.hpp"
#include "qjlab/errors.hpp"
#include "qjlab/fourier.hpp"
#include "qjlab/numberkit.hpp"
#include "qjlab/periodicity.hpp"
#include "qjlab/spectral.hpp"
#include "qjlab/transport.hpp"

using namespace qjl;

namespace {

int g_failures = 0;

void report(int id, const char* desc, bool ok, const std::string& note = "") {
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", id, desc,
                note.empty() ? "" : " -- ", note.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

template <class F>
void criterion(int id, const char* desc, F&& body) {
    try {
        std::string note;
        const bool ok = body(note);
        report(id, desc, ok, note);
    } catch (const std::exception& e) {
        report(id, desc, false, e.what());
    }
}

const double kGolden = golden_mean().get_d();

OperatorModel random_zero_free_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uc0(0.6, 1.4), ur(0.0, 0.5),
        uph(0.0, 2 * M_PI), uv(0.0, 1.5), uth(0.0, 1.0);
    SamplingFunction c;
    const double c0 = uc0(rng);
    c.coeffs = {{0, cplx(c0, 0)},
                {1, std::polar(ur(rng) * c0, uph(rng))}};
    return OperatorModel::quasiperiodic(
        c, SamplingFunction::cosine(uv(rng)), kGolden, uth(rng));
}

// adaptive root-bracketed Leb{a < p < b}, independent of the bound's own
// companion-matrix path
double bracketed_preimage(const std::vector<double>& p, double a, double b) {
    auto eval = [&](double x) {
        double r = 0;
        for (std::size_t i = p.size(); i-- > 0;) r = r * x + p[i];
        return r;
    };
    auto rts = real_roots(p);
    const double lo = rts.front() - 10.0, hi = rts.back() + 10.0;
    const int N = 200000;
    std::vector<double> cuts;
    for (double lvl : {a, b}) {
        double prev = eval(lo) - lvl;
        for (int i = 1; i <= N; ++i) {
            const double x = lo + (hi - lo) * i / N;
            const double cur = eval(x) - lvl;
            if ((prev < 0) != (cur < 0)) {
                double xl = lo + (hi - lo) * (i - 1) / N, xr = x;
                for (int it = 0; it < 80; ++it) {
                    const double xm = 0.5 * (xl + xr);
                    if ((eval(xm) - lvl < 0) == (prev < 0))
                        xl = xm;
                    else
                        xr = xm;
                }
                cuts.push_back(0.5 * (xl + xr));
            }
            prev = cur;
        }
    }
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double len = 0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double mid = 0.5 * (cuts[i - 1] + cuts[i]);
        const double v = eval(mid);
        if (v > a && v < b) len += cuts[i] - cuts[i - 1];
    }
    return len;
}

std::string run_cli(const std::string& bin, const std::string& args,
                    const std::string& outfile) {
    const std::string cmd = bin + " " + args + " > " + outfile + " 2>&1";
    if (std::system(cmd.c_str()) != 0) throw IoError("CLI run failed: " + cmd);
    std::ifstream f(outfile);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";

    criterion(1, "EHM Lyapunov closed form at n = 1e5", [&](std::string& note) {
        std::mt19937_64 rng(1001);
        std::uniform_real_distribution<double> uth(0.0, 1.0);
        bool ok = true;
        for (EHMParams lam : {EHMParams{0, 0.5, 0}, EHMParams{0.2, 0.3, 0.2}}) {
            auto m = OperatorModel::ehm_model(lam, kGolden, 0.205);
            auto ev = finite_box_spectrum(m, 1000);
            std::uniform_int_distribution<std::size_t> pick(0, ev.size() - 1);
            std::vector<double> thetas;
            for (int i = 0; i < 8; ++i) thetas.push_back(uth(rng));
            auto est = lyapunov_birkhoff(m, ev[pick(rng)], 100000, thetas);
            const double gap = std::abs(est.mean - ehm_lyapunov_formula(lam));
            note += (note.empty() ? "gaps " : ", ") + std::to_string(gap);
            ok = ok && gap <= 2e-2;
        }
        return ok;
    });

    criterion(2, "det A~ = 1 to 1e-10, 100 random draws at n = 1e4",
              [&](std::string& note) {
        std::mt19937_64 rng(1002);
        std::uniform_real_distribution<double> uE(-2.0, 2.0);
        std::uniform_int_distribution<long> um(-100, 100);
        double worst = 0;
        for (int t = 0; t < 100; ++t) {
            auto m = random_zero_free_model(rng);
            auto reg = regularize_product(m, uE(rng), 10000, um(rng));
            worst = std::max(worst,
                             std::abs(reg.det_tracked.value() - cplx(1, 0)));
        }
        note = "worst |det - 1| = " + std::to_string(worst);
        return worst < 1e-10;
    });

    criterion(3, "conjugacy residual <= 1e-8, 50 random draws at n = 1e4",
              [&](std::string& note) {
        std::mt19937_64 rng(1003);
        std::uniform_real_distribution<double> uE(-2.0, 2.0);
        std::uniform_int_distribution<long> um(-100, 100);
        double worst = 0;
        for (int t = 0; t < 50; ++t) {
            auto m = random_zero_free_model(rng);
            auto reg = regularize_product(m, uE(rng), 10000, um(rng));
            worst = std::max(worst, reg.conjugacy_residual);
        }
        note = "worst residual = " + std::to_string(worst);
        return worst <= 1e-8;
    });

    criterion(4, "regularity bounds at q_10 with measured Lambda",
              [&](std::string& note) {
        auto cf = cf_expand(golden_mean(), 12);
        const long q10 = cf.q(10).get_si(), q11 = cf.q(11).get_si();
        const double beta = 0.9 * std::log(static_cast<double>(q11)) / q10;
        auto m = OperatorModel::ehm_model({0.3, 0.6, 0.1}, kGolden, 0.29);
        // measured Lambda: worst q-block of -ln prod |w| over the window
        double run = 0, worst_block = 0;
        std::vector<double> logs;
        for (long j = 1; j <= 10000 + q10; ++j) {
            logs.push_back(std::log(std::abs(m.w(j))));
            run += logs.back();
            if (static_cast<long>(logs.size()) > q10)
                run -= logs[logs.size() - 1 - q10];
            if (static_cast<long>(logs.size()) >= q10)
                worst_block = std::max(worst_block, -run);
        }
        const double Lambda = std::max(0.0, worst_block / q10);
        auto rep = regularity_bounds_check(m, 0.5, q10, 10000, beta, Lambda);
        note = "q = " + std::to_string(q10) + ", Lambda = " +
               std::to_string(Lambda);
        return rep.all_pass();
    });

    criterion(5, "rational sine-product kernel identity to 1e-9",
              [&](std::string& note) {
        std::mt19937_64 rng(1005);
        std::uniform_int_distribution<long> uq(2, 10000);
        std::uniform_real_distribution<double> uth(0.0, 1.0);
        double worst = 0;
        int done = 0;
        while (done < 50) {
            const long q = uq(rng);
            std::uniform_int_distribution<long> up(1, q - 1);
            const long pnum = up(rng);
            if (std::gcd(pnum, q) != 1) continue;
            const double th = uth(rng);
            const double qth = q * th - std::floor(q * th);
            if (std::min(qth, 1 - qth) < 1e-4) continue;  // kernel zero
            const double lhs = log2sin_sum_rational(th, pnum, q);
            const double rhs =
                std::log(2.0 * std::abs(std::sin(M_PI * q * th)));
            worst = std::max(worst, std::abs(lhs - rhs));
            ++done;
        }
        note = "worst gap = " + std::to_string(worst);
        return worst < 1e-9;
    });

    criterion(6, "AJ09 deviation constant <= 20 up to q = 10946",
              [&](std::string& note) {
        std::mt19937_64 rng(1006);
        std::uniform_real_distribution<double> uth(0.0, 1.0);
        double worst = 0;
        for (long q : {89L, 233L, 610L, 1597L, 4181L, 10946L}) {
            int done = 0;
            while (done < 100) {
                try {
                    auto d = sine_product_deviation(uth(rng), kGolden, q);
                    worst = std::max(worst, d.C_eff);
                    ++done;
                } catch (const ExactZeroTerm&) {
                }
            }
        }
        note = "worst C_eff = " + std::to_string(worst);
        return worst <= 20.0;
    });

    criterion(7, "beta estimator: Liouville-type vs golden",
              [&](std::string& note) {
        auto liou = beta_estimate(
            alpha_from_quotients(QuotientRule::exp_rule(1.0), 6));
        auto gold = beta_estimate(cf_expand(golden_mean(), 30));
        note = "liouville " + std::to_string(liou.verdict_at_depth) +
               ", golden " + std::to_string(gold.verdict_at_depth);
        return liou.verdict_at_depth >= 0.9 && liou.verdict_at_depth <= 1.1 &&
               gold.verdict_at_depth <= 0.1;
    });

    criterion(8, "Tr D(q;E) is a degree-q polynomial, q in {5,13,34}",
              [&](std::string& note) {
        auto m = OperatorModel::ehm_model({0.2, 0.3, 0.2}, kGolden, 0.205);
        std::mt19937_64 rng(1008);
        // nodes inside the spectrum hull: pushing R past the spectrum edge
        // inflates the node values exponentially (e^{~q gamma(E)}) and the
        // interpolation's absolute error floor with them
        const double R = 2.0;
        std::uniform_real_distribution<double> uE(-R, R);
        double worst = 0;
        for (long q : {5L, 13L, 34L}) {
            const long n = q + 1;  // Chebyshev first-kind nodes and weights
            std::vector<double> x(n), wt(n);
            std::vector<cplx> f(n);
            for (long j = 0; j < n; ++j) {
                const double ang = (2 * j + 1) * M_PI / (2 * n);
                x[j] = R * std::cos(ang);
                wt[j] = (j % 2 ? -1.0 : 1.0) * std::sin(ang);
                f[j] = product(m, x[j], q, 1, ProductKind::D).trace();
            }
            for (int t = 0; t < 50; ++t) {
                const double E = uE(rng);
                cplx num = 0;
                double den = 0;
                bool at_node = false;
                for (long j = 0; j < n; ++j) {
                    const double d = E - x[j];
                    if (std::abs(d) < 1e-13) at_node = true;
                    num += wt[j] / d * f[j];
                    den += wt[j] / d;
                }
                if (at_node) continue;
                const cplx direct =
                    product(m, E, q, 1, ProductKind::D).trace();
                worst = std::max(worst, std::abs(num / den - direct) /
                                            std::abs(direct));
            }
        }
        note = "worst rel err = " + std::to_string(worst);
        return worst <= 1e-8;
    });

    criterion(9, "Jitomirskaya-Last sandwich, 20 seeded probes",
              [&](std::string& note) {
        std::mt19937_64 rng(20240817);
        std::uniform_real_distribution<double> uE(-1.5, 1.5), uph(-1.4, 1.5),
            ueps(1e-3, 1e-2), uth(0.0, 1.0);
        int passed = 0;
        for (int done = 0; done < 20; ++done) {
            OperatorModel m =
                done % 2 ? OperatorModel::ehm_model({0.1, 0.6, 0.2}, kGolden,
                                                    uth(rng))
                         : OperatorModel::free_laplacian();
            auto r =
                jl_sandwich_check(m, uE(rng), ueps(rng), {uph(rng)}, 60000);
            if (r.all_pass) ++passed;
        }
        note = std::to_string(passed) + "/20";
        return passed == 20;
    });

    criterion(10, "free-Laplacian transport is ballistic",
              [&](std::string& note) {
        auto free = OperatorModel::free_laplacian();
        std::vector<double> Ts;
        for (int k = 0; k <= 24; ++k)
            Ts.push_back(25.0 * std::pow(10.0, 1.6 * k / 24.0));
        auto tg = abel_time_grid(Ts.front(), Ts.back());
        auto ev = evolve(free, auto_box_size(free, tg.back()), tg);
        auto b = transport_exponents(moments(ev, 2.0, Ts));
        note = "beta- " + std::to_string(b.beta_minus) + ", beta+ " +
               std::to_string(b.beta_plus) + ", unitarity " +
               std::to_string(ev.max_norm_err);
        return !ev.truncated && ev.max_norm_err < 1e-9 &&
               ev.max_energy_drift < 1e-8 && b.beta_minus >= 0.9 &&
               b.beta_plus <= 1.05;
    });

    criterion(11, "supercritical EHM quasilocalization evidence",
              [&](std::string& note) {
        auto m = OperatorModel::ehm_model({0, 1.0 / 3.0, 0}, kGolden, 0.205);
        std::vector<double> Ts;
        for (int k = 0; k <= 24; ++k)
            Ts.push_back(25.0 * std::pow(10.0, 1.6 * k / 24.0));
        auto tg = abel_time_grid(Ts.front(), Ts.back());
        auto ev = evolve(m, 4000, tg);
        auto b = transport_exponents(moments(ev, 2.0, Ts));
        note = "beta+ " + std::to_string(b.beta_plus) + " (loose evidence)";
        return !ev.truncated && ev.max_leakage < 1e-6 && b.beta_plus <= 0.4;
    });

    criterion(12, "Fourier decomposition and Delta_n at n in {100,200}",
              [&](std::string& note) {
        auto m = OperatorModel::ehm_model({0.2, 0.3, 0.2}, kGolden, 0.205);
        bool ok = true;
        for (long n : {100L, 200L}) {
            auto dec = decompose_F(m, 0.267, n);
            auto rep = find_large_norm_interval(dec, 1.0);
            ok = ok && dec.tail_certified && dec.parseval_rel < 1e-6 &&
                 dec.grid_size >= static_cast<std::size_t>(8 * dec.d * n) &&
                 rep.chain_ok && rep.delta_len > 0 && rep.len_ok &&
                 rep.norm_ok;
            if (n == 200)
                note = "tail bound e^" + std::to_string(dec.log_tail_bound) +
                       ", |Delta| = " + std::to_string(rep.delta_len);
        }
        return ok;
    });

    criterion(13, "localization density at q_n = 89, M = 20",
              [&](std::string& note) {
        auto m = OperatorModel::ehm_model({0.2, 0.3, 0.2}, kGolden, 0.205);
        auto cert = localization_density(m, 0.267, 89, 1.0, 20);
        bool ok = cert.all_pass && cert.hits.size() == 20;
        for (const auto& e : cert.hits) {
            const long lo = std::max(2 * e.m * 89, 1L);
            ok = ok && e.j_m >= lo && e.j_m < (2 * e.m + 2) * 89 &&
                 e.log_norm > cert.threshold;
        }
        note = "threshold " + std::to_string(cert.threshold);
        return ok;
    });

    criterion(14, "sublevel bound on 100 random real-rooted polynomials",
              [&](std::string& note) {
        std::mt19937_64 rng(1014);
        std::uniform_real_distribution<double> root(-3.0, 3.0), lvl(0.0, 2.0);
        int done = 0, holds = 0;
        double worst_meas = 0;
        while (done < 100) {
            const int deg = 3 + (done % 2);
            std::vector<double> zs;
            bool distinct = true;
            for (int i = 0; i < deg; ++i) {
                const double z = root(rng);
                for (double z0 : zs)
                    if (std::abs(z - z0) < 0.05) distinct = false;
                zs.push_back(z);
            }
            if (!distinct) continue;
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
            const double indep = bracketed_preimage(p, a, b);
            worst_meas = std::max(worst_meas,
                                  std::abs(indep - r.preimage_len));
            if (r.inequality_ok && std::abs(indep - r.preimage_len) <= 1e-6 &&
                indep <= r.bound * (1 + 1e-9))
                ++holds;
            ++done;
        }
        note = std::to_string(holds) + "/100, worst measure gap " +
               std::to_string(worst_meas);
        return holds == 100;
    });

    criterion(15, "seeded CLI reruns are byte-identical",
              [&](std::string& note) {
        if (cli.empty()) {
            note = "qjlab path not supplied";
            return false;
        }
        const auto tmp = std::filesystem::temp_directory_path();
        bool ok = true;
        const std::vector<std::string> runs = {
            "--seed 4242 cocycle --op lyapunov --ehm 0,0.5,0 --E -1:1:5 "
            "--n 2000",
            "--seed 4242 freq --alpha rule:exp:1 --depth 6",
            "--seed 4242 spectral --op m --E 0.3 --eps-decades 1:2 "
            "--eps-points 4 --ehm 0.2,0.3,0.2"};
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto f1 = (tmp / ("qj_a" + std::to_string(i))).string();
            const auto f2 = (tmp / ("qj_b" + std::to_string(i))).string();
            ok = ok && run_cli(cli, runs[i], f1) == run_cli(cli, runs[i], f2);
        }
        note = ok ? "3 commands, 2 runs each" : "outputs differ";
        return ok;
    });

    std::printf("%s: %d/15 criteria passed\n",
                g_failures == 0 ? "OK" : "FAILED", 15 - g_failures);
    return g_failures;
}
