#include "qbound/check_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "qbound/measurement.hpp"
#include "qbound/scenario.hpp"
#include "qbound/states.hpp"

namespace qbound {

double Sampler::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

int Sampler::integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

CVector Sampler::gaussian_vector(int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(dim);
  for (int i = 0; i < dim; ++i) {
    const double re = normal(engine_);
    const double im = normal(engine_);
    v(i) = Complex(re, im);
  }
  return v;
}

PureState Sampler::pure_state(const std::vector<int>& dims) {
  CVector v = gaussian_vector(product_of(dims));
  v.normalize();
  return PureState(std::move(v), dims);
}

DensityMatrix Sampler::mixed_state(const std::vector<int>& dims) {
  const int d = product_of(dims);
  CMatrix g(d, d);
  for (int c = 0; c < d; ++c) g.col(c) = gaussian_vector(d);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint());
  return DensityMatrix(std::move(rho), dims);
}

CMatrix Sampler::hermitian(int dim) {
  CMatrix g(dim, dim);
  for (int c = 0; c < dim; ++c) g.col(c) = gaussian_vector(dim);
  return 0.5 * (g + g.adjoint());
}

CMatrix Sampler::unitary(int dim) {
  CMatrix g(dim, dim);
  for (int c = 0; c < dim; ++c) g.col(c) = gaussian_vector(dim);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

RVector Sampler::theta(int q, double limit) {
  RVector t(q);
  for (int k = 0; k < q; ++k) t(k) = uniform(-limit, limit);
  return t;
}

namespace {

class Suite {
 public:
  void add(std::string module, std::string name, double metric, double tol, std::string detail = {}) {
    results_.push_back({std::move(module), std::move(name), std::isfinite(metric) && metric <= tol, metric, std::move(detail)});
  }
  // Runs a check body; an exception fails the check instead of aborting the suite.
  void guard(const std::string& module, const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      results_.push_back({module, name, false, NAN, std::string("threw: ") + e.what()});
    }
  }
  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::vector<CheckResult> results_;
};

double rel_frobenius(const RMatrix& a, const RMatrix& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

void linalg_checks(Suite& s, Sampler& rng) {
  s.guard("linalg", "herm_eig reconstructs", [&] {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const CMatrix h = rng.hermitian(rng.integer(1, 8));
      worst = std::max(worst, max_abs(CMatrix(herm_eig(h).reconstruct() - h)));
    }
    s.add("linalg", "herm_eig reconstructs", worst, 1e-10);
  });
  s.guard("linalg", "unitary_exp is unitary", [&] {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const CMatrix h = rng.hermitian(4);
      const CMatrix u = unitary_exp(h);
      worst = std::max(worst, max_abs(CMatrix(u.adjoint() * u - identity(4))));
    }
    s.add("linalg", "unitary_exp is unitary", worst, 1e-12);
  });
  s.guard("linalg", "partial_trace of kron", [&] {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const DensityMatrix a = rng.mixed_state({2});
      const DensityMatrix b = rng.mixed_state({3});
      const CMatrix ab = kron(a.matrix(), b.matrix());
      worst = std::max(worst, max_abs(CMatrix(partial_trace(ab, {2, 3}, {0}) - a.matrix())));
      worst = std::max(worst, max_abs(CMatrix(partial_trace(ab, {2, 3}, {1}) - b.matrix())));
    }
    s.add("linalg", "partial_trace of kron", worst, 1e-12);
  });
  s.guard("linalg", "alpha integral vs quadrature", [&] {
    const CMatrix h = rng.hermitian(3);
    const CMatrix x = rng.hermitian(3);
    CMatrix quad = CMatrix::Zero(3, 3);
    const int steps = 2000;  // Simpson on [0, 1]
    for (int i = 0; i <= steps; ++i) {
      const double a = static_cast<double>(i) / steps;
      const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const CMatrix u = unitary_exp(-a * h);
      quad += w * u * x * u.adjoint();
    }
    quad /= 3.0 * steps;
    s.add("linalg", "alpha integral vs quadrature", max_abs(CMatrix(quad - alpha_conjugation_integral(h, x))), 1e-9);
  });
}

void density_checks(Suite& s, Sampler& rng) {
  s.guard("states", "fidelity bounds and symmetry", [&] {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const DensityMatrix a = rng.mixed_state({2, 2});
      const DensityMatrix b = rng.mixed_state({2, 2});
      const double fab = bures_fidelity(a, b);
      worst = std::max({worst, std::abs(fab - bures_fidelity(b, a)), std::abs(bures_fidelity(a, a) - 1.0),
                        std::max(0.0, fab - 1.0), std::max(0.0, -fab)});
    }
    s.add("states", "fidelity bounds and symmetry", worst, 1e-9);
  });
  s.guard("states", "GHZ permutation invariant", [&] {
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k) worst = std::max(worst, is_permutationally_invariant(DensityMatrix(ghz_state(k, 4))).residual);
    worst = std::max(worst, is_permutationally_invariant(DensityMatrix(superposed_ghz({0.1, 0.2, 0.3}, 4))).residual);
    s.add("states", "GHZ permutation invariant", worst, 1e-12);
  });
  s.guard("states", "dephased GHZ marginals closed form", [&] {
    const double lambda = rng.uniform(0.0, 1.0);
    const KrausChannel noise = dephasing_kraus(lambda);
    double worst = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const Marginals closed = dephased_ghz_marginals(k, noise);
      const Marginals brute = marginals_of(apply_uniform_local_channel(ghz_state(k, 4), noise));
      worst = std::max({worst, max_abs(CMatrix(closed.rho1.matrix() - brute.rho1.matrix())),
                        max_abs(CMatrix(closed.rho2.matrix() - brute.rho2.matrix()))});
    }
    s.add("states", "dephased GHZ marginals closed form", worst, 1e-12);
  });
}

void channel_checks(Suite& s, Sampler& rng) {
  s.guard("channels", "completeness of library channels", [&] {
    const RVector th = rng.theta(3, 1.0);
    double worst = 0.0;
    for (const auto& ch : {pauli_split_channel(th), dephasing_kraus(0.4), amplitude_damping_kraus(0.5), unitary_channel(pauli_terms(3), th)})
      worst = std::max(worst, completeness_residual(ch.kraus_ops()));
    s.add("channels", "completeness of library channels", worst, 1e-12);
  });
  s.guard("channels", "unitality gate", [&] {
    const RVector th = rng.theta(3, 1.0);
    const bool ok = is_unital(pauli_split_channel(th)).unital && is_unital(dephasing_kraus(0.7)).unital &&
                    !is_unital(amplitude_damping_kraus(0.5)).unital;
    const double gap = std::abs(is_unital(amplitude_damping_kraus(0.5)).residual - std::exp(-1.0));
    s.add("channels", "unitality gate", ok ? gap : 1.0, 1e-12);
  });
  s.guard("channels", "dilation is an isometry", [&] {
    const KrausChannel ch = pauli_split_channel(rng.theta(3, 1.0));
    const CMatrix v = stinespring_dilation(ch);
    s.add("channels", "dilation is an isometry", max_abs(CMatrix(v.adjoint() * v - identity(ch.dim()))), 1e-12);
  });
  s.guard("channels", "analytic vs finite-difference derivatives", [&] {
    const RVector th = rng.theta(3, 1.0);
    const KrausChannel analytic = pauli_split_channel(th);
    const KrausChannel numeric = KrausChannel::from_function([](const RVector& t) { return pauli_split_channel(t).kraus_ops(); }, th);
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
      const KrausList a = kraus_derivatives(analytic, th, k);
      const KrausList b = kraus_derivatives(numeric, th, k);
      for (std::size_t l = 0; l < a.size(); ++l) worst = std::max(worst, max_abs(CMatrix(a[l] - b[l])));
    }
    s.add("channels", "analytic vs finite-difference derivatives", worst, 1e-8);
  });
}

void bound_checks(Suite& s, Sampler& rng) {
  const RVector th = (RVector(3) << 0.3, 0.2, 0.1).finished();
  s.guard("bounds", "qfim_rdm equals exact QFIM", [&] {
    double worst = 0.0;
    for (int n = 2; n <= 4; ++n) {
      const DensityMatrix rho = apply_uniform_local_channel(ghz_state(rng.integer(1, 3), n), dephasing_kraus(rng.uniform(0.0, 1.0)));
      const Marginals m = marginals_of(rho);
      const RMatrix exact = qfim_unitary_exact(collective_generators(pauli_terms(3), n), rho, th);
      worst = std::max(worst, rel_frobenius(qfim_rdm(m.rho1, m.rho2, b_operators(pauli_terms(3), th), n), exact));
    }
    s.add("bounds", "qfim_rdm equals exact QFIM", worst, 1e-8);
  });
  s.guard("bounds", "QFIM matches fidelity oracle (pure)", [&] {
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      const GeneratorSet gen = collective_generators(pauli_terms(3), 2);
      const DensityMatrix rho0(rng.pure_state({2, 2}));
      const RVector point = rng.theta(3, 1.0);
      const RMatrix exact = qfim_unitary_exact(gen, rho0, point);
      const RMatrix fid = qfim_fidelity_oracle([&](const RVector& x) { return evolve_unitary(gen, rho0, x); }, point);
      worst = std::max(worst, max_abs(RMatrix(exact - fid)));
    }
    s.add("bounds", "QFIM matches fidelity oracle (pure)", worst, 5e-4);
  });
  s.guard("bounds", "C_Q dominates fidelity QFIM", [&] {
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      const RVector point = rng.theta(2, 1.0);
      const KrausChannel ch = KrausChannel::sequence(unitary_channel(pauli_terms(2), point), dephasing_kraus(rng.uniform(0.0, 1.0)));
      const DensityMatrix rho0 = rng.mixed_state({2});
      const RMatrix cq = cq_bound(ch, rho0, point);
      const RMatrix fid = qfim_fidelity_oracle([&](const RVector& x) { return apply_channel(ch.at(x), rho0); }, point);
      worst = std::max(worst, -min_eigenvalue(RMatrix(cq - fid)));
    }
    s.add("bounds", "C_Q dominates fidelity QFIM", worst, 1e-7);
  });
  s.guard("bounds", "Holevo witness inverse", [&] {
    const GeneratorSet gen = collective_generators(pauli_terms(3), 2);
    const DensityMatrix rho0(rng.pure_state({2, 2}));
    const AldSet alds = ald_unitary(gen, rho0, th);
    const RMatrix jq = qfim_unitary_exact(gen, rho0, th);
    const HolevoWitness w = holevo_witness(jq, alds, alds.rho_theta);
    s.add("bounds", "Holevo witness inverse", max_abs(RMatrix(w.w.real() - inverse_checked(jq))), 1e-7);
  });
  s.guard("bounds", "identity channel gives zero C_Q", [&] {
    const KrausChannel id = KrausChannel::constant({identity(2)});
    s.add("bounds", "identity channel gives zero C_Q", max_abs(cq_bound(id, rng.mixed_state({2}), RVector::Zero(1))), 1e-14);
  });
}

void measurement_checks(Suite& s, Sampler& rng) {
  s.guard("measurement", "classical FIM below QFIM", [&] {
    double worst = 0.0;
    const GeneratorSet gen = collective_generators(pauli_terms(2), 1);
    for (int t = 0; t < 5; ++t) {
      const DensityMatrix rho0 = rng.mixed_state({2});
      const RVector point = rng.theta(2, 1.0);
      const StateFamily family = [&](const RVector& x) { return evolve_unitary(gen, rho0, x); };
      const Povm povm = projective_povm(rng.unitary(2));
      const RMatrix jc = classical_fim_fd(povm, family, point).fim;
      const RMatrix cq = cq_bound(KrausChannel::exponential_family(gen, point), rho0, point);
      worst = std::max(worst, -min_eigenvalue(RMatrix(cq - jc)));
    }
    s.add("measurement", "classical FIM below QFIM", worst, 1e-6);
  });
  s.guard("measurement", "probabilities sum to one", [&] {
    const Povm povm = projective_povm(rng.unitary(4));
    s.add("measurement", "probabilities sum to one", std::abs(outcome_probs(povm, rng.mixed_state({2, 2})).sum() - 1.0), 1e-12);
  });
}

void scenario_checks(Suite& s, Sampler& rng) {
  s.guard("experiments", "power-law slope recovered", [&] {
    const double exponent = rng.uniform(0.5, 3.0);
    std::vector<double> n;
    std::vector<double> v;
    for (int k = 2; k <= 64; k *= 2) {
      n.push_back(k);
      v.push_back(3.0 * std::pow(k, exponent));
    }
    s.add("experiments", "power-law slope recovered", std::abs(fit_log_log(n, v).slope - exponent), 1e-12);
  });
  s.guard("experiments", "product marginals scale linearly", [&] {
    const DensityMatrix rho1 = rng.mixed_state({2});
    const DensityMatrix rho2(kron(rho1.matrix(), rho1.matrix()), {2, 2});
    const auto b = b_operators(pauli_terms(3), rng.theta(3, 1.0));
    std::vector<double> n;
    std::vector<double> v;
    for (int k = 4; k <= 512; k *= 2) {
      n.push_back(k);
      v.push_back(qfim_rdm(rho1, rho2, b, k).trace());
    }
    s.add("experiments", "product marginals scale linearly", std::abs(fit_log_log(n, v).slope - 1.0), 1e-9);
  });
}

}  // namespace

std::vector<CheckResult> run_check_suite(std::uint64_t seed) {
  Sampler rng(seed);
  Suite suite;
  linalg_checks(suite, rng);
  density_checks(suite, rng);
  channel_checks(suite, rng);
  bound_checks(suite, rng);
  measurement_checks(suite, rng);
  scenario_checks(suite, rng);
  return suite.take();
}

std::string format_check_table(const std::vector<CheckResult>& results) {
  std::ostringstream out;
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.module.size() + r.name.size() + 3);
  int failed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width)) << (r.module + " : " + r.name)
        << "  " << std::scientific << std::setprecision(3) << r.metric;
    if (!r.detail.empty()) out << "  " << r.detail;
    out << '\n';
    if (!r.passed) ++failed;
  }
  out << results.size() - static_cast<std::size_t>(failed) << '/' << results.size() << " checks passed\n";
  return out.str();
}

}  // namespace qbound
