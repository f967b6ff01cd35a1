// Python bindings for the core bounds, channels and scenario runner.
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qbound/check_suite.hpp"
#include "qbound/measurement.hpp"
#include "qbound/scenario.hpp"
#include "qbound/states.hpp"

namespace py = pybind11;
using namespace qbound;

namespace {

std::vector<int> dims_or_qubits(const CMatrix& m, std::optional<std::vector<int>> dims) {
  if (dims) return *dims;
  const int d = static_cast<int>(m.rows());
  int n = 0;
  while ((1 << n) < d) ++n;
  if ((1 << n) != d) return {d};
  return qubit_dims(n);
}

DensityMatrix density(const CMatrix& m, std::optional<std::vector<int>> dims) { return DensityMatrix(m, dims_or_qubits(m, dims)); }

KrausChannel named_noise(const std::string& kind, double strength) {
  if (kind == "dephasing") return dephasing_kraus(strength);
  if (kind == "amplitude_damping") return amplitude_damping_kraus(strength);
  throw ContractError("unknown noise kind '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_qbound, m) {
  m.doc() = "Multiparameter quantum estimation bounds";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_RuntimeError);

  m.def("pauli", &pauli, py::arg("k"));
  m.def("ghz_density", [](int direction, int n) { return DensityMatrix(ghz_state(direction, n)).matrix(); },
        py::arg("direction"), py::arg("n"));
  m.def("dephased_ghz_marginals",
        [](int direction, double lambda) {
          const Marginals mg = dephased_ghz_marginals(direction, dephasing_kraus(lambda));
          return py::make_tuple(mg.rho1.matrix(), mg.rho2.matrix());
        },
        py::arg("direction"), py::arg("lambda_"));
  m.def("marginals",
        [](const CMatrix& rho, std::optional<std::vector<int>> dims) {
          const Marginals mg = marginals_of(density(rho, dims));
          return py::make_tuple(mg.rho1.matrix(), mg.rho2.matrix());
        },
        py::arg("rho"), py::arg("dims") = py::none());

  m.def("qfim_exact",
        [](const std::vector<CMatrix>& hamiltonian_terms, const CMatrix& rho0, const RVector& theta,
           std::optional<std::vector<int>> dims) {
          return qfim_unitary_exact(GeneratorSet::unitary(hamiltonian_terms), density(rho0, dims), theta);
        },
        py::arg("generators"), py::arg("rho0"), py::arg("theta"), py::arg("dims") = py::none());
  m.def("qfim_rdm",
        [](const CMatrix& rho1, const CMatrix& rho2, const std::vector<CMatrix>& single_particle_terms, const RVector& theta, int n) {
          const int d = static_cast<int>(rho1.rows());
          return qfim_rdm(DensityMatrix(rho1, {d}), DensityMatrix(rho2, {d, d}), b_operators(single_particle_terms, theta), n);
        },
        py::arg("rho1"), py::arg("rho2"), py::arg("single_particle_terms"), py::arg("theta"), py::arg("n"));
  m.def("magfield_qfim1", &magfield_qfim1, py::arg("theta"));
  m.def("magfield_qfim_full", &magfield_qfim_full, py::arg("theta"), py::arg("lambda_"), py::arg("n"));
  m.def("fidelity_qfim",
        [](const std::function<CMatrix(const RVector&)>& rho_of_theta, const RVector& theta, double eps) {
          return qfim_fidelity_oracle([&](const RVector& t) { return DensityMatrix(rho_of_theta(t), dims_or_qubits(rho_of_theta(t), {})); },
                                      theta, eps);
        },
        py::arg("rho_of_theta"), py::arg("theta"), py::arg("eps") = kDefaultFidelityStep);

  m.def("cq_bound",
        [](const std::vector<std::vector<CMatrix>>& generators, const CMatrix& rho0, const RVector& theta,
           std::optional<std::vector<int>> dims) {
          return cq_bound(KrausChannel::exponential_family(GeneratorSet(generators), theta), density(rho0, dims), theta);
        },
        py::arg("generators"), py::arg("rho0"), py::arg("theta"), py::arg("dims") = py::none(),
        "C_Q for the family K_l = exp(-i sum_k theta_k G_lk) / sqrt(L); generators are indexed [l][k].");
  m.def("noisy_cq_bound",
        [](const std::vector<CMatrix>& hamiltonian_terms, const std::string& noise, double strength, const CMatrix& rho0,
           const RVector& theta) {
          const KrausChannel ch = KrausChannel::sequence(unitary_channel(hamiltonian_terms, theta), named_noise(noise, strength));
          return cq_bound(ch, density(rho0, {}), theta);
        },
        py::arg("generators"), py::arg("noise"), py::arg("strength"), py::arg("rho0"), py::arg("theta"));
  m.def("pauli_split_cq_bound",
        [](const CMatrix& rho0, const RVector& theta) { return cq_bound(pauli_split_channel(theta), density(rho0, {}), theta); },
        py::arg("rho0"), py::arg("theta"));
  m.def("is_unital",
        [](const std::vector<CMatrix>& kraus) {
          const UnitalityReport r = is_unital(KrausChannel::constant(kraus));
          return py::make_tuple(r.unital, r.residual);
        },
        py::arg("kraus_ops"));
  m.def("saturation_residual",
        [](const std::vector<CMatrix>& hamiltonian_terms, const CMatrix& rho0, const RVector& theta, std::optional<std::vector<int>> dims) {
          return saturation_residual_unitary(GeneratorSet::unitary(hamiltonian_terms), density(rho0, dims), theta);
        },
        py::arg("generators"), py::arg("rho0"), py::arg("theta"), py::arg("dims") = py::none());

  m.def("run_config",
        [](const std::string& json_text, bool sweep, std::uint64_t seed) {
          const ScenarioConfig cfg = parse_config(json_text);
          return to_json(sweep ? scaling_sweep(cfg) : run_scenario(cfg), seed);
        },
        py::arg("json_text"), py::arg("sweep") = false, py::arg("seed") = 0,
        "Run a scenario given as JSON text and return the JSON report; sweep=True adds the log-log fit.");
  m.def("magfield",
        [](double lambda, const RVector& theta, int n_min, int n_max, int exact_cap) {
          return to_json(magfield_experiment({lambda, theta, n_min, n_max, exact_cap}), 0);
        },
        py::arg("lambda_") = 0.3, py::arg("theta") = MagfieldOptions{}.theta, py::arg("n_min") = 2, py::arg("n_max") = 8,
        py::arg("exact_cap") = 5);
  m.def("check_suite",
        [](std::uint64_t seed) {
          py::list out;
          for (const auto& r : run_check_suite(seed))
            out.append(py::dict(py::arg("module") = r.module, py::arg("name") = r.name, py::arg("passed") = r.passed,
                                py::arg("metric") = r.metric, py::arg("detail") = r.detail));
          return out;
        },
        py::arg("seed") = 0);
}
