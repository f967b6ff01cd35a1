#include "qbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qbound {

namespace {

constexpr Complex kI{0.0, 1.0};

// Tr(a b) without forming the product.
Complex trace_product(const CMatrix& a, const CMatrix& b) { return (a.transpose().cwiseProduct(b)).sum(); }

void require_unitary_family(const GeneratorSet& gen, std::string_view what) {
  if (gen.num_kraus() != 1) throw ContractError(std::string(what) + ": expected a unitary generator set");
}

void require_theta(const RVector& theta, int q, std::string_view what) {
  if (theta.size() != q) throw DimensionError(std::string(what) + ": theta length differs from parameter count");
}

struct KrausPoint {
  KrausList ops;
  std::vector<KrausList> derivs;  // [k][l]
};

KrausPoint evaluate(const KrausChannel& ch, const RVector& theta) {
  KrausPoint p;
  p.ops = ch.is_constant() ? ch.kraus_ops() : ch.at(theta).kraus_ops();
  for (int k = 0; k < theta.size(); ++k) p.derivs.push_back(kraus_derivatives(ch, theta, k));
  return p;
}

RMatrix symmetrized(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

DensityMatrix evolve_unitary(const GeneratorSet& gen, const DensityMatrix& rho0, const RVector& theta) {
  require_unitary_family(gen, "evolve_unitary");
  const CMatrix u = unitary_exp(gen.combined(0, theta));
  CMatrix out = u * rho0.matrix() * u.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out), rho0.factor_dims());
}

AldSet ald_unitary(const GeneratorSet& gen, const DensityMatrix& rho0, const RVector& theta) {
  require_unitary_family(gen, "ald_unitary");
  require_theta(theta, gen.num_params(), "ald_unitary");
  if (gen.dim() != rho0.dim()) throw DimensionError("ald_unitary: generator and state dimensions differ");
  const HermEig eig = herm_eig(gen.combined(0, theta));
  const CMatrix u = eig.apply([](double lambda) { return std::exp(-kI * lambda); });
  CMatrix rho = u * rho0.matrix() * u.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  DensityMatrix rho_theta(rho, rho0.factor_dims());

  AldSet out{{}, {}, {}, rho_theta};
  const CMatrix id = identity(gen.dim());
  for (int k = 0; k < gen.num_params(); ++k) {
    CMatrix a = alpha_conjugation_integral(eig, gen.at(0, k));
    CMatrix m = u * a * u.adjoint();
    const Complex mean = trace_product(m, rho);
    out.ops.push_back(-2.0 * kI * (m - mean * id));
    out.integrals.push_back(std::move(a));
    out.generators.push_back(std::move(m));
  }
  return out;
}

RMatrix qfim_unitary_exact(const GeneratorSet& gen, const DensityMatrix& rho0, const RVector& theta) {
  require_unitary_family(gen, "qfim_unitary_exact");
  require_theta(theta, gen.num_params(), "qfim_unitary_exact");
  if (gen.dim() != rho0.dim()) throw DimensionError("qfim_unitary_exact: generator and state dimensions differ");
  if (gen.dim() > kMaxExactQfimDim) throw DimensionError("qfim_unitary_exact: dimension exceeds exact-path cap");
  const int q = gen.num_params();
  const HermEig eig = herm_eig(gen.combined(0, theta));
  const CMatrix& rho = rho0.matrix();
  const CMatrix id = identity(gen.dim());
  std::vector<CMatrix> centered;
  std::vector<CMatrix> times_rho;
  for (int k = 0; k < q; ++k) {
    const CMatrix a = alpha_conjugation_integral(eig, gen.at(0, k));
    centered.push_back(a - trace_product(a, rho) * id);
    times_rho.push_back(centered.back() * rho);
  }
  RMatrix j(q, q);
  for (int r = 0; r < q; ++r)
    for (int c = r; c < q; ++c) {
      // 2 Tr[(dA_r dA_c + dA_c dA_r) rho] = 4 Re Tr(dA_r dA_c rho)
      j(r, c) = j(c, r) = 4.0 * trace_product(centered[static_cast<std::size_t>(r)], times_rho[static_cast<std::size_t>(c)]).real();
    }
  return j;
}

std::vector<CMatrix> b_operators(const std::vector<CMatrix>& single_particle_terms, const RVector& theta) {
  if (static_cast<Eigen::Index>(single_particle_terms.size()) != theta.size())
    throw DimensionError("b_operators: theta length differs from generator count");
  CMatrix h = CMatrix::Zero(single_particle_terms.front().rows(), single_particle_terms.front().cols());
  for (int k = 0; k < theta.size(); ++k) h += theta(k) * single_particle_terms[static_cast<std::size_t>(k)];
  const HermEig eig = herm_eig(h);
  std::vector<CMatrix> out;
  for (const auto& hk : single_particle_terms) out.push_back(alpha_conjugation_integral(eig, hk));
  return out;
}

RMatrix qfim_rdm(const DensityMatrix& rho1, const DensityMatrix& rho2, const std::vector<CMatrix>& b_ops, int n) {
  const int d = rho1.dim();
  if (rho2.dim() != d * d) throw DimensionError("qfim_rdm: two-particle marginal has wrong dimension");
  if (n < 1) throw ContractError("qfim_rdm: resource count must be positive");
  const int q = static_cast<int>(b_ops.size());
  std::vector<Complex> mean(static_cast<std::size_t>(q));
  for (int k = 0; k < q; ++k) {
    if (b_ops[static_cast<std::size_t>(k)].rows() != d) throw DimensionError("qfim_rdm: operator dimension mismatch");
    mean[static_cast<std::size_t>(k)] = rho1.expectation(b_ops[static_cast<std::size_t>(k)]);
  }
  RMatrix one(q, q);
  RMatrix two(q, q);
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k) {
      const CMatrix& bj = b_ops[static_cast<std::size_t>(j)];
      const CMatrix& bk = b_ops[static_cast<std::size_t>(k)];
      const Complex centre = mean[static_cast<std::size_t>(j)] * mean[static_cast<std::size_t>(k)];
      one(j, k) = 4.0 * (trace_product(rho1.matrix(), bj * bk) - centre).real();
      two(j, k) = 4.0 * (trace_product(rho2.matrix(), kron(bj, bk)) - centre).real();
    }
  const double nn = static_cast<double>(n);
  return symmetrized(nn * one + nn * (nn - 1.0) * two);
}

RMatrix magfield_qfim1(const RVector& theta) {
  if (theta.size() != 3) throw DimensionError("magfield_qfim1: expects three parameters");
  const double xi = theta.norm();
  const double sinc = xi == 0.0 ? 1.0 : std::sin(xi) / xi;
  const RVector eta = xi == 0.0 ? RVector::Zero(3) : RVector(theta / xi);
  return 4.0 * ((1.0 - sinc * sinc) * eta * eta.transpose() + sinc * sinc * RMatrix::Identity(3, 3));
}

RMatrix magfield_qfim_full(const RVector& theta, double lambda, int n) {
  if (theta.size() != 3) throw DimensionError("magfield_qfim_full: expects three parameters");
  if (!(lambda >= 0.0)) throw ContractError("magfield_qfim_full: lambda must be non-negative");
  if (n < 1) throw ContractError("magfield_qfim_full: resource count must be positive");
  const std::vector<CMatrix> b = b_operators(pauli_terms(3), theta);
  // Diagonal real dephasing Kraus operators, so E b E equals E b E^dagger.
  const double damp = std::exp(-lambda);
  const double rest = std::sqrt(-std::expm1(-2.0 * lambda));
  CMatrix e0 = CMatrix::Zero(2, 2);
  CMatrix e1 = CMatrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  e0(1, 1) = damp;
  e1(1, 1) = rest;
  std::vector<CMatrix> f;
  for (const auto& bj : b) f.push_back(e0 * bj * e0 + e1 * bj * e1);
  RMatrix two(3, 3);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) two(j, k) = trace_product(f[static_cast<std::size_t>(j)], f[static_cast<std::size_t>(k)]).real();
  const double nn = static_cast<double>(n);
  return symmetrized(nn * magfield_qfim1(theta) + (2.0 * nn * (nn - 1.0) / 3.0) * two);
}

RMatrix cq_bound(const KrausChannel& ch, const DensityMatrix& rho0, const RVector& theta) {
  if (ch.dim() != rho0.dim()) throw DimensionError("cq_bound: channel and state dimensions differ");
  const KrausPoint p = evaluate(ch, theta);
  const int q = static_cast<int>(theta.size());
  const CMatrix& rho = rho0.matrix();
  std::vector<Complex> k2(static_cast<std::size_t>(q));
  for (int k = 0; k < q; ++k) {
    Complex acc = 0.0;
    for (std::size_t l = 0; l < p.ops.size(); ++l) acc += trace_product(p.derivs[static_cast<std::size_t>(k)][l].adjoint() * p.ops[l], rho);
    k2[static_cast<std::size_t>(k)] = kI * acc;
  }
  RMatrix c(q, q);
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k) {
      Complex k1 = 0.0;
      for (std::size_t l = 0; l < p.ops.size(); ++l)
        k1 += trace_product(p.derivs[static_cast<std::size_t>(j)][l].adjoint() * p.derivs[static_cast<std::size_t>(k)][l], rho);
      c(j, k) = 4.0 * (k1 - k2[static_cast<std::size_t>(j)] * k2[static_cast<std::size_t>(k)]).real();
    }
  return symmetrized(c);
}

RMatrix cq_bound_plus_form(const KrausChannel& ch, const DensityMatrix& rho0, const RVector& theta) {
  if (ch.dim() != rho0.dim()) throw DimensionError("cq_bound_plus_form: channel and state dimensions differ");
  const KrausPoint p = evaluate(ch, theta);
  const int q = static_cast<int>(theta.size());
  const CMatrix& rho = rho0.matrix();
  std::vector<Complex> expect(static_cast<std::size_t>(q));
  for (int k = 0; k < q; ++k)
    for (std::size_t l = 0; l < p.ops.size(); ++l)
      expect[static_cast<std::size_t>(k)] += trace_product(p.derivs[static_cast<std::size_t>(k)][l].adjoint() * p.ops[l], rho);
  RMatrix c(q, q);
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k) {
      Complex k1 = 0.0;
      for (std::size_t l = 0; l < p.ops.size(); ++l)
        k1 += trace_product(p.derivs[static_cast<std::size_t>(j)][l].adjoint() * p.derivs[static_cast<std::size_t>(k)][l], rho);
      c(j, k) = 4.0 * (k1 + expect[static_cast<std::size_t>(j)] * expect[static_cast<std::size_t>(k)]).real();
    }
  return symmetrized(c);
}

std::vector<std::vector<CMatrix>> d_operators(const GeneratorSet& per_particle, const RVector& theta) {
  require_theta(theta, per_particle.num_params(), "d_operators");
  const double inv_l = 1.0 / per_particle.num_kraus();
  std::vector<std::vector<CMatrix>> out(static_cast<std::size_t>(per_particle.num_kraus()));
  for (int l = 0; l < per_particle.num_kraus(); ++l) {
    const HermEig eig = herm_eig(per_particle.combined(l, theta));
    for (int k = 0; k < per_particle.num_params(); ++k)
      out[static_cast<std::size_t>(l)].push_back(inv_l * alpha_conjugation_integral(eig, per_particle.at(l, k)));
  }
  return out;
}

RMatrix cq_rdm(const DensityMatrix& rho1, const DensityMatrix& rho2, const std::vector<std::vector<CMatrix>>& d_ops, int n) {
  const int d = rho1.dim();
  if (rho2.dim() != d * d) throw DimensionError("cq_rdm: two-particle marginal has wrong dimension");
  if (n < 1) throw ContractError("cq_rdm: resource count must be positive");
  if (d_ops.empty() || d_ops.front().empty()) throw ContractError("cq_rdm: no d operators");
  const std::size_t kraus_count = d_ops.size();
  const int q = static_cast<int>(d_ops.front().size());
  std::vector<CMatrix> t(static_cast<std::size_t>(q), CMatrix::Zero(d, d));
  for (const auto& row : d_ops) {
    if (static_cast<int>(row.size()) != q) throw DimensionError("cq_rdm: ragged d operator table");
    for (int k = 0; k < q; ++k) {
      if (row[static_cast<std::size_t>(k)].rows() != d) throw DimensionError("cq_rdm: operator dimension mismatch");
      t[static_cast<std::size_t>(k)] += row[static_cast<std::size_t>(k)];
    }
  }
  std::vector<Complex> mean;
  for (const auto& tk : t) mean.push_back(rho1.expectation(tk));
  RMatrix one(q, q);
  RMatrix two(q, q);
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k) {
      // The first term is summed over both Kraus labels, the second label being a spectator.
      Complex local = 0.0;
      for (const auto& row : d_ops) local += trace_product(rho1.matrix(), row[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(k)]);
      local *= static_cast<double>(kraus_count);
      const Complex centre = mean[static_cast<std::size_t>(j)] * mean[static_cast<std::size_t>(k)];
      one(j, k) = 4.0 * (local - centre).real();
      two(j, k) = 4.0 * (trace_product(rho2.matrix(), kron(t[static_cast<std::size_t>(j)], t[static_cast<std::size_t>(k)])) - centre).real();
    }
  const double nn = static_cast<double>(n);
  return symmetrized(nn * one + nn * (nn - 1.0) * two);
}

RMatrix cq_rdm_channel(const KrausChannel& per_particle, const RVector& theta, const DensityMatrix& rho1,
                       const DensityMatrix& rho2, int n) {
  const int d = rho1.dim();
  if (per_particle.dim() != d) throw DimensionError("cq_rdm_channel: channel and marginal dimensions differ");
  if (rho2.dim() != d * d) throw DimensionError("cq_rdm_channel: two-particle marginal has wrong dimension");
  if (n < 1) throw ContractError("cq_rdm_channel: resource count must be positive");
  const KrausPoint p = evaluate(per_particle, theta);
  const int q = static_cast<int>(theta.size());
  // u_k = sum dPi^dag Pi, s_k = sum Pi^dag dPi
  std::vector<CMatrix> u(static_cast<std::size_t>(q), CMatrix::Zero(d, d));
  std::vector<CMatrix> s(static_cast<std::size_t>(q), CMatrix::Zero(d, d));
  for (int k = 0; k < q; ++k)
    for (std::size_t l = 0; l < p.ops.size(); ++l) {
      u[static_cast<std::size_t>(k)] += p.derivs[static_cast<std::size_t>(k)][l].adjoint() * p.ops[l];
      s[static_cast<std::size_t>(k)] += p.ops[l].adjoint() * p.derivs[static_cast<std::size_t>(k)][l];
    }
  std::vector<Complex> a;
  for (const auto& uk : u) a.push_back(kI * rho1.expectation(uk));
  RMatrix one(q, q);
  RMatrix two(q, q);
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k) {
      Complex k1 = 0.0;
      for (std::size_t l = 0; l < p.ops.size(); ++l)
        k1 += trace_product(rho1.matrix(), p.derivs[static_cast<std::size_t>(j)][l].adjoint() * p.derivs[static_cast<std::size_t>(k)][l]);
      const Complex centre = a[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k)];
      one(j, k) = 4.0 * (k1 - centre).real();
      two(j, k) = 4.0 * (trace_product(rho2.matrix(), kron(u[static_cast<std::size_t>(j)], s[static_cast<std::size_t>(k)])) - centre).real();
    }
  const double nn = static_cast<double>(n);
  return symmetrized(nn * one + nn * (nn - 1.0) * two);
}

double saturation_residual_unitary(const GeneratorSet& gen, const DensityMatrix& rho0, const RVector& theta) {
  const AldSet alds = ald_unitary(gen, rho0, theta);
  const CMatrix& rho = alds.rho_theta.matrix();
  double worst = 0.0;
  for (std::size_t j = 0; j < alds.ops.size(); ++j)
    for (std::size_t k = j + 1; k < alds.ops.size(); ++k) {
      const CMatrix comm = alds.ops[j] * alds.ops[k] - alds.ops[k] * alds.ops[j];
      worst = std::max(worst, std::abs(trace_product(comm, rho)));
    }
  return worst;
}

double saturation_residual_rdm(const DensityMatrix& rho1, const std::vector<CMatrix>& b_ops, int n) {
  double worst = 0.0;
  for (std::size_t j = 0; j < b_ops.size(); ++j)
    for (std::size_t k = j + 1; k < b_ops.size(); ++k)
      worst = std::max(worst, std::abs(4.0 * n * trace_product(rho1.matrix(), b_ops[j] * b_ops[k]).imag()));
  return worst;
}

double saturation_residual_noisy(const KrausChannel& ch, const DensityMatrix& rho0, const RVector& theta) {
  if (ch.dim() != rho0.dim()) throw DimensionError("saturation_residual_noisy: channel and state dimensions differ");
  const KrausPoint p = evaluate(ch, theta);
  double worst = 0.0;
  for (std::size_t j = 0; j < p.derivs.size(); ++j)
    for (std::size_t k = j + 1; k < p.derivs.size(); ++k) {
      Complex acc = 0.0;
      for (std::size_t l = 0; l < p.ops.size(); ++l) acc += trace_product(p.derivs[j][l].adjoint() * p.derivs[k][l], rho0.matrix());
      worst = std::max(worst, std::abs(acc.imag()));
    }
  return worst;
}

RMatrix qfim_fidelity_oracle(const StateFamily& rho_of_theta, const RVector& theta, double eps) {
  if (!(eps > 0.0)) throw ContractError("qfim_fidelity_oracle: step must be positive");
  const int q = static_cast<int>(theta.size());
  const DensityMatrix centre = rho_of_theta(theta);
  auto fidelity_at = [&](const RVector& shift) {
    const double f = bures_fidelity(centre, rho_of_theta(theta + shift));
    if (f > 1.0 + 1e-9) {
      std::ostringstream msg;
      msg << "qfim_fidelity_oracle: fidelity " << f << " exceeds 1";
      throw ContractError(msg.str());
    }
    return f;
  };
  // F = 1 - (1/8) v^T J v + O(|v|^3); averaging +-v cancels odd orders.
  auto quadratic_form = [&](const RVector& dir, double step) {
    const double f = 0.5 * (fidelity_at(step * dir) + fidelity_at(-step * dir));
    return 8.0 * (1.0 - f) / (step * step);
  };
  auto richardson = [&](const RVector& dir) { return (4.0 * quadratic_form(dir, 0.5 * eps) - quadratic_form(dir, eps)) / 3.0; };

  RMatrix j = RMatrix::Zero(q, q);
  for (int k = 0; k < q; ++k) j(k, k) = richardson(RVector::Unit(q, k));
  for (int a = 0; a < q; ++a)
    for (int b = a + 1; b < q; ++b) {
      const double diag_sum = richardson(RVector::Unit(q, a) + RVector::Unit(q, b));
      j(a, b) = j(b, a) = 0.5 * (diag_sum - j(a, a) - j(b, b));
    }
  return j;
}

RMatrix inverse_checked(const RMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DimensionError("inverse_checked: expected a square matrix");
  const RMatrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(sym);
  const RVector& values = solver.eigenvalues();
  const double largest = values.cwiseAbs().maxCoeff();
  const double smallest = values.cwiseAbs().minCoeff();
  if (largest == 0.0 || smallest * kConditionCap <= largest) {
    std::ostringstream msg;
    msg << "matrix is rank deficient (eigenvalue magnitudes " << smallest << " .. " << largest << ")";
    throw RankDeficiencyError(msg.str());
  }
  return solver.eigenvectors() * values.cwiseInverse().asDiagonal() * solver.eigenvectors().transpose();
}

double min_eigenvalue(const RMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

void require_symmetric_psd(const RMatrix& m, std::string_view what) {
  if (!m.allFinite()) throw ContractError(std::string(what) + ": non-finite entry");
  const double asym = max_abs(RMatrix(m - m.transpose()));
  if (asym > 1e-9) {
    std::ostringstream msg;
    msg << what << ": not symmetric (residual " << asym << ")";
    throw ContractError(msg.str());
  }
  const double floor = kMatrixPsdFloor * std::max(1.0, max_abs(m));
  const double lowest = min_eigenvalue(m);
  if (lowest < floor) {
    std::ostringstream msg;
    msg << what << ": not positive semidefinite (min eigenvalue " << lowest << ")";
    throw ContractError(msg.str());
  }
}

HolevoWitness holevo_witness(const RMatrix& j_q, const AldSet& alds, const DensityMatrix& rho_theta) {
  const int q = static_cast<int>(alds.ops.size());
  if (j_q.rows() != q) throw DimensionError("holevo_witness: QFIM size differs from ALD count");
  const RMatrix inv = inverse_checked(j_q);
  std::vector<CMatrix> x;
  for (int j = 0; j < q; ++j) {
    CMatrix xj = CMatrix::Zero(rho_theta.dim(), rho_theta.dim());
    for (int k = 0; k < q; ++k) xj += inv(j, k) * alds.ops[static_cast<std::size_t>(k)];
    x.push_back(std::move(xj));
  }
  CMatrix w(q, q);
  double max_imag = 0.0;
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k) {
      w(j, k) = trace_product(x[static_cast<std::size_t>(j)].adjoint() * x[static_cast<std::size_t>(k)], rho_theta.matrix());
      max_imag = std::max(max_imag, std::abs(w(j, k).imag()));
    }
  return {w, max_imag};
}

SuperHeisenbergTerms super_heisenberg_bound(const KrausChannel& per_particle, const DensityMatrix& rho2_evolved, int n,
                                            const RVector& theta) {
  const int d = per_particle.dim();
  if (rho2_evolved.dim() != d * d || rho2_evolved.num_factors() != 2)
    throw DimensionError("super_heisenberg_bound: expected a two-particle marginal");
  if (n < 1) throw ContractError("super_heisenberg_bound: resource count must be positive");
  const CMatrix mixed = identity(d) / static_cast<double>(d);
  for (int site = 0; site < 2; ++site) {
    const double gap = max_abs(CMatrix(rho2_evolved.reduced({site}).matrix() - mixed));
    if (gap > 1e-8) {
      std::ostringstream msg;
      msg << "super_heisenberg_bound: single-particle marginal " << site << " is not maximally mixed (gap " << gap << ")";
      throw ContractError(msg.str());
    }
  }
  const KrausPoint p = evaluate(per_particle, theta);
  const int q = static_cast<int>(theta.size());
  // left_k = sum Pi dPi^dag, right_k = sum dPi Pi^dag, y_k = Tr(i left_k)
  std::vector<CMatrix> left(static_cast<std::size_t>(q), CMatrix::Zero(d, d));
  std::vector<CMatrix> right(static_cast<std::size_t>(q), CMatrix::Zero(d, d));
  std::vector<Complex> y(static_cast<std::size_t>(q));
  for (int k = 0; k < q; ++k) {
    for (std::size_t l = 0; l < p.ops.size(); ++l) {
      left[static_cast<std::size_t>(k)] += p.ops[l] * p.derivs[static_cast<std::size_t>(k)][l].adjoint();
      right[static_cast<std::size_t>(k)] += p.derivs[static_cast<std::size_t>(k)][l] * p.ops[l].adjoint();
    }
    y[static_cast<std::size_t>(k)] = kI * left[static_cast<std::size_t>(k)].trace();
  }
  const double inv_d = 1.0 / d;
  RMatrix one(q, q);
  RMatrix two(q, q);
  for (int j = 0; j < q; ++j)
    for (int k = 0; k < q; ++k) {
      Complex x = 0.0;
      for (std::size_t l = 0; l < p.ops.size(); ++l)
        x += (p.ops[l] * p.derivs[static_cast<std::size_t>(j)][l].adjoint() * p.derivs[static_cast<std::size_t>(k)][l] * p.ops[l].adjoint()).trace();
      const Complex centre = 4.0 * inv_d * inv_d * y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(k)];
      one(j, k) = (4.0 * inv_d * x - centre).real();
      two(j, k) = (4.0 * trace_product(kron(left[static_cast<std::size_t>(j)], right[static_cast<std::size_t>(k)]), rho2_evolved.matrix()) - centre).real();
    }
  const double nn = static_cast<double>(n);
  return {one, two, nn * one + nn * (nn - 1.0) * two, n};
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Exact:
      return "exact";
    case Method::Rdm:
      return "rdm";
    case Method::FidelityOracle:
      return "fidelity-oracle";
    case Method::LimitFormula:
      return "limit-formula";
    case Method::FiniteDifference:
      return "finite-difference";
    case Method::ClosedForm:
      return "closed-form";
  }
  return "unknown";
}

void BoundReport::set_cost(const RMatrix& cost_matrix, double repetitions) {
  if (!(repetitions > 0.0)) throw ContractError("BoundReport: repetition count must be positive");
  const std::optional<TaggedMatrix>& source = j_q ? j_q : c_q;
  if (!source) throw ContractError("BoundReport: no matrix available for the cost");
  if (cost_matrix.rows() != source->value.rows() || cost_matrix.cols() != source->value.cols())
    throw DimensionError("BoundReport: cost matrix size differs from bound matrix");
  scalar_cost = (cost_matrix * inverse_checked(source->value)).trace() / repetitions;
}

void BoundReport::validate() const {
  for (const auto* m : {&j_q, &j_c, &c_q})
    if (*m) require_symmetric_psd((*m)->value, "BoundReport");
  if (j_q && c_q) {
    const RMatrix gap = c_q->value - j_q->value;
    const double floor = kMatrixPsdFloor * std::max(1.0, max_abs(c_q->value));
    if (min_eigenvalue(gap) < floor) throw ContractError("BoundReport: C_Q - J_Q is not positive semidefinite");
  }
}

}  // namespace qbound
