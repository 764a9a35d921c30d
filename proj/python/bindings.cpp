#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.hpp"
#include "nnkr/certificates.hpp"
#include "nnkr/diagnostics.hpp"
#include "nnkr/ensemble.hpp"
#include "nnkr/errors.hpp"
#include "nnkr/numerics.hpp"
#include "nnkr/solver.hpp"

namespace py = pybind11;
using namespace nnkr;

namespace {

SubgaussianLaw law_of(const std::string& tag) { return SubgaussianLaw::standard(parse_law(tag)); }

py::dict chain_dict(const ConstantChain& chain) {
    py::dict values;
    for (const auto& c : chain.constants) values[py::str(c.name)] = c.value;
    py::dict out;
    out["eta"] = chain.eta;
    out["delta"] = chain.delta;
    out["constants"] = values;
    out["notes"] = chain.notes;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Nonnegative recovery from rank-one measurements: solver, certificates and diagnostics.";
    m.attr("__version__") = NNKR_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<MeasurementEnsemble>(m, "Ensemble")
        .def_static(
            "sample",
            [](std::size_t n, std::size_t count, const std::string& law, std::uint64_t seed) {
                return MeasurementEnsemble::sample(n, count, law_of(law), seed);
            },
            py::arg("n"), py::arg("N"), py::arg("law") = "complex-gaussian", py::arg("seed") = 0)
        .def_static("from_vectors", &MeasurementEnsemble::from_vectors, py::arg("columns"))
        .def_property_readonly("n", &MeasurementEnsemble::n)
        .def_property_readonly("N", &MeasurementEnsemble::size)
        .def_property_readonly("m", &MeasurementEnsemble::m)
        .def_property_readonly("vectors", &MeasurementEnsemble::vectors)
        .def("squared_norms", &MeasurementEnsemble::squared_norms);

    m.def("forward", &forward, py::arg("ensemble"), py::arg("x"), "A(x) = sum_i x_i a_i a_i^*");
    m.def("adjoint", &adjoint, py::arg("ensemble"), py::arg("T"), "A^*(T) = (a_i^* T a_i)_i");
    m.def("build_phi", &build_phi, py::arg("ensemble"));
    m.def("p_vectorize", &p_vectorize, py::arg("M"));
    m.def("fourth_order_poly", &fourth_order_poly, py::arg("v"));

    m.def(
        "solve_nnls",
        [](const MeasurementEnsemble& e, const ComplexMatrix& y, const std::string& algorithm, double tol,
           std::size_t max_iterations) {
            SolverConfig cfg;
            cfg.algorithm = parse_algorithm(algorithm);
            cfg.kkt_tolerance = tol;
            cfg.max_iterations = max_iterations;
            const RecoveryReport r = solve_nnls(e, y, cfg);
            py::dict out;
            out["x"] = r.x_sharp;
            out["residual"] = r.residual_frobenius;
            out["kkt"] = r.kkt_residual;
            out["iterations"] = r.iterations;
            out["converged"] = r.converged;
            return out;
        },
        py::arg("ensemble"), py::arg("Y"), py::arg("algorithm") = "active-set", py::arg("kkt_tolerance") = 1e-9,
        py::arg("max_iterations") = 50000);

    m.def(
        "rip_to_nsp",
        [](double delta) {
            const NspCertificate c = rip_to_nsp(delta, 1);
            return py::make_tuple(c.rho, c.tau);
        },
        py::arg("delta"), "(rho, tau) from delta_2s");
    m.def(
        "cd_constants",
        [](double rho) {
            const CdConstants c = cd_constants(rho);
            return py::make_tuple(c.C, c.D);
        },
        py::arg("rho"));
    m.def(
        "constant_chain",
        [](double eta, double delta, std::size_t n, std::size_t count) {
            return chain_dict(constant_chain(eta, delta, n, count));
        },
        py::arg("eta") = 1.0 / 3.0, py::arg("delta") = 1.0 / 6.0, py::arg("n") = 0, py::arg("N") = 0);
    m.def(
        "rip_exhaustive",
        [](const RealMatrix& phi, std::size_t s, std::size_t workers) {
            return rip_exhaustive(phi, s, workers).delta;
        },
        py::arg("phi"), py::arg("s"), py::arg("workers") = 1);

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "nnkr");
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line; returns (exit code, stdout, stderr).");
}
