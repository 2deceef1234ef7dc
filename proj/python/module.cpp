// pybind11 surface: a thin slice of the core for scripting and plotting —
// model construction, box spectra, Lyapunov means, m-functions and the
// transport pipeline. Heavy sweeps stay on the C++ CLI.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qjlab/cocycle.hpp"
#include "qjlab/fourier.hpp"
#include "qjlab/lattice.hpp"
#include "qjlab/numberkit.hpp"
#include "qjlab/spectral.hpp"
#include "qjlab/transport.hpp"

namespace py = pybind11;
using namespace qjl;

PYBIND11_MODULE(_qjlab, m) {
    m.doc() = "singular quasiperiodic Jacobi operator laboratory";

    m.def("golden_mean", [] { return golden_mean().get_d(); });
    m.def("sqrt2_minus_1", [] { return sqrt2_minus_1().get_d(); });
    m.def(
        "beta_verdict",
        [](double alpha, int depth) {
            return beta_estimate(cf_expand(mpf_class(alpha, 256), depth))
                .verdict_at_depth;
        },
        py::arg("alpha"), py::arg("depth") = 20);

    py::class_<EHMParams>(m, "EHMParams")
        .def(py::init([](double l1, double l2, double l3) {
                 return EHMParams{l1, l2, l3};
             }),
             py::arg("l1"), py::arg("l2"), py::arg("l3"))
        .def_readwrite("l1", &EHMParams::l1)
        .def_readwrite("l2", &EHMParams::l2)
        .def_readwrite("l3", &EHMParams::l3);
    m.def("ehm_lyapunov_formula", &ehm_lyapunov_formula);

    py::class_<OperatorModel>(m, "OperatorModel")
        .def_static("ehm",
                    [](const EHMParams& lam, double alpha, double theta) {
                        return OperatorModel::ehm_model(lam, alpha, theta);
                    })
        .def_static("free_laplacian", &OperatorModel::free_laplacian)
        .def_static("schrodinger_cos", &OperatorModel::schrodinger_cos,
                    py::arg("coupling"), py::arg("alpha"), py::arg("theta"))
        .def("w", &OperatorModel::w)
        .def("v", &OperatorModel::vdiag)
        .def("w_sup", &OperatorModel::w_sup)
        .def("v_sup", &OperatorModel::v_sup)
        .def_readonly("alpha", &OperatorModel::alpha)
        .def_readonly("theta", &OperatorModel::theta);

    m.def("finite_box_spectrum", &finite_box_spectrum, py::arg("model"),
          py::arg("L"));

    m.def(
        "lyapunov",
        [](const OperatorModel& model, double E, long n,
           const std::vector<double>& thetas) {
            auto est = lyapunov_birkhoff(model, E, n, thetas);
            return py::make_tuple(est.mean, est.std_error);
        },
        py::arg("model"), py::arg("E"), py::arg("n"), py::arg("thetas"));

    m.def(
        "whole_line_M",
        [](const OperatorModel& model, cplx z) {
            auto M = whole_line_M(model, z);
            py::dict d;
            d["value"] = M.value;
            d["mass"] = M.mass;
            d["borel_bound_ok"] = M.borel_bound_ok;
            d["identity_ok"] = M.identity_ok;
            d["dkl_ok"] = M.dkl_ok;
            return d;
        },
        py::arg("model"), py::arg("z"));

    m.def(
        "decompose_summary",
        [](const OperatorModel& model, double E, long n) {
            auto dec = decompose_F(model, E, n);
            py::dict d;
            d["C1"] = dec.C1;
            d["d"] = dec.d;
            d["grid_size"] = dec.grid_size;
            d["tail_certified"] = dec.tail_certified;
            d["parseval_rel"] = dec.parseval_rel;
            return d;
        },
        py::arg("model"), py::arg("E"), py::arg("n"));

    m.def(
        "transport_beta",
        [](const OperatorModel& model, double T_min, double T_max, int points,
           double p) {
            std::vector<double> Ts;
            for (int k = 0; k < points; ++k)
                Ts.push_back(T_min * std::pow(T_max / T_min,
                                              static_cast<double>(k) /
                                                  (points - 1)));
            auto tg = abel_time_grid(T_min, T_max);
            auto ev = evolve(model, auto_box_size(model, tg.back()), tg, {p});
            auto b = transport_exponents(moments(ev, p, Ts));
            return py::make_tuple(b.beta_minus, b.beta_plus);
        },
        py::arg("model"), py::arg("T_min"), py::arg("T_max"),
        py::arg("points") = 25, py::arg("p") = 2.0);
}
