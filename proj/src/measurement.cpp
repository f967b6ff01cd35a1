#include "qbound/measurement.hpp"

#include <cmath>
#include <sstream>

namespace qbound {

namespace {

Complex trace_product(const CMatrix& a, const CMatrix& b) { return (a.transpose().cwiseProduct(b)).sum(); }

}  // namespace

Povm::Povm(std::vector<CMatrix> elements, std::vector<std::string> labels)
    : elements_(std::move(elements)), labels_(std::move(labels)) {
  if (elements_.empty()) throw ContractError("Povm: no elements");
  if (labels_.size() != elements_.size()) throw ContractError("Povm: label count differs from element count");
  const auto d = elements_.front().rows();
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& e : elements_) {
    require_hermitian(e, "Povm element");
    if (e.rows() != d) throw DimensionError("Povm: elements differ in dimension");
    sum += e;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(e, Eigen::EigenvaluesOnly);
    min_eigenvalues_.push_back(solver.eigenvalues()(0));
  }
  completeness_residual_ = max_abs(CMatrix(sum - identity(static_cast<int>(d))));
  if (completeness_residual_ > kPovmCompletenessTol) {
    std::ostringstream msg;
    msg << "Povm: elements do not sum to identity (residual " << completeness_residual_ << ")";
    throw ContractError(msg.str());
  }
}

bool Povm::is_valid(double floor) const {
  for (double v : min_eigenvalues_)
    if (v < floor) return false;
  return true;
}

Povm build_saturating_povm(const DensityMatrix& rho_theta, const std::vector<CMatrix>& derivs) {
  const int d = rho_theta.dim();
  std::vector<CMatrix> elements{rho_theta.matrix()};
  std::vector<std::string> labels{"rho"};
  CMatrix rest = identity(d) - rho_theta.matrix();
  for (std::size_t m = 0; m < derivs.size(); ++m) {
    const CMatrix& dm = derivs[m];
    if (dm.rows() != d) throw DimensionError("build_saturating_povm: derivative dimension mismatch");
    if (std::abs(dm.trace()) > 1e-8) throw ContractError("build_saturating_povm: derivative is not traceless");
    elements.push_back(dm);
    labels.push_back("d" + std::to_string(m + 1) + "rho");
    rest -= dm;
  }
  elements.push_back(rest);
  labels.push_back("normalizer");
  return Povm(std::move(elements), std::move(labels));
}

Povm projective_povm(const CMatrix& basis) {
  require_square(basis, "projective_povm");
  const double defect = max_abs(CMatrix(basis.adjoint() * basis - identity(static_cast<int>(basis.rows()))));
  if (defect > 1e-10) throw ContractError("projective_povm: basis is not unitary");
  std::vector<CMatrix> elements;
  std::vector<std::string> labels;
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    CMatrix p = basis.col(c) * basis.col(c).adjoint();
    elements.push_back(0.5 * (p + p.adjoint()));
    labels.push_back("e" + std::to_string(c));
  }
  return Povm(std::move(elements), std::move(labels));
}

RVector outcome_probs(const Povm& povm, const DensityMatrix& rho) {
  if (povm.dim() != rho.dim()) throw DimensionError("outcome_probs: POVM and state dimensions differ");
  RVector p(static_cast<Eigen::Index>(povm.size()));
  for (std::size_t m = 0; m < povm.size(); ++m) p(static_cast<Eigen::Index>(m)) = trace_product(povm.elements()[m], rho.matrix()).real();
  return p;
}

FimResult classical_fim_fd(const Povm& povm, const StateFamily& rho_of_theta, const RVector& theta, double step) {
  const RVector p = outcome_probs(povm, rho_of_theta(theta));
  for (Eigen::Index m = 0; m < p.size(); ++m) {
    if (p(m) < -kProbabilityFloor) {
      std::ostringstream msg;
      msg << "classical_fim_fd: invalid POVM, outcome '" << povm.labels()[static_cast<std::size_t>(m)] << "' has probability " << p(m);
      throw ContractError(msg.str());
    }
  }
  const int q = static_cast<int>(theta.size());
  RMatrix dp(p.size(), q);
  for (int k = 0; k < q; ++k) {
    RVector plus = theta;
    RVector minus = theta;
    plus(k) += step;
    minus(k) -= step;
    dp.col(k) = (outcome_probs(povm, rho_of_theta(plus)) - outcome_probs(povm, rho_of_theta(minus))) / (2.0 * step);
  }
  FimResult out{RMatrix::Zero(q, q), 0};
  for (Eigen::Index m = 0; m < p.size(); ++m) {
    if (p(m) < kProbabilityFloor) {
      ++out.dropped_outcomes;
      continue;
    }
    out.fim += dp.row(m).transpose() * dp.row(m) / p(m);
  }
  return out;
}

std::vector<CMatrix> state_first_derivatives(const StateFamily& rho_of_theta, const RVector& theta, double step) {
  std::vector<CMatrix> out;
  for (int k = 0; k < theta.size(); ++k)
    out.push_back(central_diff([&](const RVector& t) { return rho_of_theta(t).matrix(); }, theta, k, step));
  return out;
}

std::vector<std::vector<CMatrix>> state_second_derivatives(const StateFamily& rho_of_theta, const RVector& theta, double step) {
  const int q = static_cast<int>(theta.size());
  auto at = [&](int j, double sj, int k, double sk) {
    RVector t = theta;
    t(j) += sj;
    t(k) += sk;
    return rho_of_theta(t).matrix();
  };
  const CMatrix centre = rho_of_theta(theta).matrix();
  std::vector<std::vector<CMatrix>> out(static_cast<std::size_t>(q), std::vector<CMatrix>(static_cast<std::size_t>(q)));
  for (int j = 0; j < q; ++j) {
    out[j][j] = (at(j, step, j, 0.0) - 2.0 * centre + at(j, -step, j, 0.0)) / (step * step);
    for (int k = j + 1; k < q; ++k) {
      out[j][k] = (at(j, step, k, step) - at(j, step, k, -step) - at(j, -step, k, step) + at(j, -step, k, -step)) / (4.0 * step * step);
      out[k][j] = out[j][k];
    }
  }
  return out;
}

RMatrix classical_fim_limit(const DensityMatrix& rho_theta, const std::vector<CMatrix>& first_derivs,
                            const std::vector<std::vector<CMatrix>>& second_derivs) {
  const int q = static_cast<int>(first_derivs.size());
  if (static_cast<int>(second_derivs.size()) != q) throw DimensionError("classical_fim_limit: derivative tables differ in size");
  (void)rho_theta;
  RMatrix j(q, q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      j(a, b) = (-second_derivs[a][b].trace() - first_derivs[a].trace() * first_derivs[b].trace()).real();
  return 0.5 * (j + j.transpose());
}

RMatrix classical_fim_limit_unreduced(const DensityMatrix& rho_theta, const std::vector<CMatrix>& first_derivs,
                                      const std::vector<std::vector<CMatrix>>& second_derivs) {
  const int q = static_cast<int>(first_derivs.size());
  if (static_cast<int>(second_derivs.size()) != q) throw DimensionError("classical_fim_limit_unreduced: derivative tables differ in size");
  CMatrix normalizer = identity(rho_theta.dim()) - rho_theta.matrix();
  for (const auto& d : first_derivs) normalizer -= d;
  RMatrix j(q, q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      j(a, b) = (-second_derivs[a][b].trace() - trace_product(first_derivs[a], first_derivs[b]) +
                 trace_product(second_derivs[a][b], normalizer))
                    .real();
  return 0.5 * (j + j.transpose());
}

}  // namespace qbound
