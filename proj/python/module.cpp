#include "sispatch/asymptotics.hpp"
#include "sispatch/equilibrium.hpp"
#include "sispatch/error.hpp"
#include "sispatch/patch_graph.hpp"
#include "sispatch/reproduction.hpp"
#include "sispatch/simulator.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

namespace py = pybind11;
using namespace sispatch;

namespace {

PatchRates rates(const Vector& beta, const Vector& gamma)
{
    PatchRates r{beta, gamma};
    return r;
}

ConnectivityMatrix from_rows(const std::vector<std::vector<double>>& rows)
{
    return build_connectivity(DenseMatrix::from_rows(rows));
}

std::vector<std::vector<double>> to_rows(const ConnectivityMatrix& l)
{
    std::vector<std::vector<double>> out(l.size(), std::vector<double>(l.size()));
    for (std::size_t j = 0; j < l.size(); ++j) {
        for (std::size_t k = 0; k < l.size(); ++k) {
            out[j][k] = l(j, k);
        }
    }
    return out;
}

std::vector<int> one_based(const std::vector<std::size_t>& set)
{
    std::vector<int> out;
    for (std::size_t j : set) {
        out.push_back(static_cast<int>(j) + 1);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Patch SIS model with asymmetric connectivity";

    static py::handle error_type = py::exception<Error>(m, "SispatchError", PyExc_RuntimeError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    py::class_<ConnectivityMatrix>(m, "ConnectivityMatrix")
        .def(py::init(&from_rows), py::arg("rows"), "Off-diagonal flows L[j][k] from k into j; the diagonal is rebuilt.")
        .def_property_readonly("size", &ConnectivityMatrix::size)
        .def("to_list", &to_rows)
        .def("is_symmetric", &ConnectivityMatrix::is_symmetric, py::arg("tol") = 1e-12);

    m.def("star_graph", [](const Vector& a, const Vector& b) { return star_graph(a, b); }, py::arg("a"),
          py::arg("b"));
    m.def("perron_vector", [](const ConnectivityMatrix& l) { return perron_vector(l).alpha; }, py::arg("L"));

    m.def(
        "r0", [](const ConnectivityMatrix& l, const Vector& beta, const Vector& gamma,
                 double dI) { return r0(l, rates(beta, gamma), dI); },
        py::arg("L"), py::arg("beta"), py::arg("gamma"), py::arg("dI"));
    m.def(
        "find_dI_star",
        [](const ConnectivityMatrix& l, const Vector& beta, const Vector& gamma) {
            return find_dI_star(l, perron_vector(l).alpha, rates(beta, gamma));
        },
        py::arg("L"), py::arg("beta"), py::arg("gamma"));
    m.def(
        "find_dI_star_star",
        [](const ConnectivityMatrix& l, const Vector& beta, const Vector& gamma) -> std::optional<double> {
            const PatchRates r = rates(beta, gamma);
            const Vector alpha = perron_vector(l).alpha;
            return find_dI_star_star(l, r, alpha, risk_partition(r), find_dI_star(l, alpha, r));
        },
        py::arg("L"), py::arg("beta"), py::arg("gamma"));
    m.def(
        "h_functions",
        [](const ConnectivityMatrix& l, const Vector& beta, const Vector& gamma, double dI) {
            const PatchRates r = rates(beta, gamma);
            return h_functions(l, r, perron_vector(l).alpha, dI, risk_partition(r));
        },
        py::arg("L"), py::arg("beta"), py::arg("gamma"), py::arg("dI"));

    m.def(
        "solve_auxiliary",
        [](const ConnectivityMatrix& l, const Vector& beta, const Vector& gamma, double dI, double d) {
            return solve_auxiliary(l, rates(beta, gamma), perron_vector(l).alpha, dI, d).I_check;
        },
        py::arg("L"), py::arg("beta"), py::arg("gamma"), py::arg("dI"), py::arg("d"));

    m.def(
        "endemic_equilibrium",
        [](const ConnectivityMatrix& l, const Vector& beta, const Vector& gamma, double dS, double dI, double N) {
            EpidemicParameters p{rates(beta, gamma), dS, dI, N};
            const EndemicEquilibrium eq = endemic_equilibrium(l, p, perron_vector(l).alpha);
            py::dict out;
            out["S"] = eq.S;
            out["I"] = eq.I;
            out["kappa"] = eq.kappa;
            out["residual"] = eq.residual;
            return out;
        },
        py::arg("L"), py::arg("beta"), py::arg("gamma"), py::arg("dS"), py::arg("dI"), py::arg("N"));

    m.def(
        "classify_J",
        [](const ConnectivityMatrix& l, const Vector& beta, const Vector& gamma, double dI, bool numeric) {
            const PatchRates r = rates(beta, gamma);
            const JClassification c =
                classify_J(l, r, perron_vector(l).alpha, dI, risk_partition(r),
                           numeric ? ClassificationMode::Numeric : ClassificationMode::Auto);
            return py::make_tuple(one_based(c.J_plus), one_based(c.J_minus), std::string(to_string(c.method)));
        },
        py::arg("L"), py::arg("beta"), py::arg("gamma"), py::arg("dI"), py::arg("numeric") = false,
        "J+ and J- as 1-based patch lists plus the method used.");

    m.def(
        "dI_to_zero_profiles",
        [](const ConnectivityMatrix& l, const Vector& beta, const Vector& gamma, double N, double d0) {
            const LimitState s = dI_to_zero_profiles(rates(beta, gamma), perron_vector(l).alpha, N, d0);
            return py::make_tuple(s.S, s.I);
        },
        py::arg("L"), py::arg("beta"), py::arg("gamma"), py::arg("N"), py::arg("d0"));

    m.def(
        "simulate",
        [](const ConnectivityMatrix& l, const Vector& beta, const Vector& gamma, double dS, double dI,
           const Vector& S0, const Vector& I0, double t_end, double stride) {
            double N = 0.0;
            for (std::size_t j = 0; j < S0.size(); ++j) {
                N += S0[j] + (j < I0.size() ? I0[j] : 0.0);
            }
            EpidemicParameters p{rates(beta, gamma), dS, dI, N};
            SimulationOptions opts;
            opts.t_end = t_end;
            opts.stride = stride;
            opts.stop_on_convergence = false;
            const Trajectory tr = simulate(l, p, SimulationState{0.0, S0, I0}, opts);
            std::vector<double> t;
            std::vector<Vector> S;
            std::vector<Vector> I;
            for (const auto& s : tr.samples) {
                t.push_back(s.t);
                S.push_back(s.S);
                I.push_back(s.I);
            }
            return py::make_tuple(t, S, I);
        },
        py::arg("L"), py::arg("beta"), py::arg("gamma"), py::arg("dS"), py::arg("dI"), py::arg("S0"),
        py::arg("I0"), py::arg("t_end") = 100.0, py::arg("stride") = 1.0);
}
