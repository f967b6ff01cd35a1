#pragma once

#include <string>
#include <vector>

#include "qbound/bounds.hpp"
#include "qbound/density.hpp"

namespace qbound {

inline constexpr double kPovmCompletenessTol = 1e-8;
inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kSecondDiffStep = 1e-4;

// Measurement with enforced completeness. Element positivity is only diagnosed.
class Povm {
 public:
  Povm(std::vector<CMatrix> elements, std::vector<std::string> labels);

  const std::vector<CMatrix>& elements() const { return elements_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& min_eigenvalues() const { return min_eigenvalues_; }
  double completeness_residual() const { return completeness_residual_; }
  int dim() const { return static_cast<int>(elements_.front().rows()); }
  std::size_t size() const { return elements_.size(); }
  // Every element positive semidefinite up to roundoff.
  bool is_valid(double floor = -1e-12) const;

 private:
  std::vector<CMatrix> elements_;
  std::vector<std::string> labels_;
  std::vector<double> min_eigenvalues_;
  double completeness_residual_;
};

// {rho, d_1 rho, ..., d_q rho, I - rho - sum d_m rho}
Povm build_saturating_povm(const DensityMatrix& rho_theta, const std::vector<CMatrix>& derivs);
// Rank-one projectors onto the columns of a unitary.
Povm projective_povm(const CMatrix& basis);

RVector outcome_probs(const Povm& povm, const DensityMatrix& rho);

struct FimResult {
  RMatrix fim;
  int dropped_outcomes;
};

FimResult classical_fim_fd(const Povm& povm, const StateFamily& rho_of_theta, const RVector& theta, double step = kDefaultFdStep);

std::vector<CMatrix> state_first_derivatives(const StateFamily& rho_of_theta, const RVector& theta, double step = kDefaultFdStep);
// [j][k] central second differences.
std::vector<std::vector<CMatrix>> state_second_derivatives(const StateFamily& rho_of_theta, const RVector& theta,
                                                          double step = kSecondDiffStep);

// -Tr(d_j d_k rho) - Tr(d_j rho) Tr(d_k rho).
RMatrix classical_fim_limit(const DensityMatrix& rho_theta, const std::vector<CMatrix>& first_derivs,
                            const std::vector<std::vector<CMatrix>>& second_derivs);
// -Tr(d_j d_k rho) - Tr(d_j rho d_k rho) + Tr(d_j d_k rho P_last), with P_last the normalizing element.
RMatrix classical_fim_limit_unreduced(const DensityMatrix& rho_theta, const std::vector<CMatrix>& first_derivs,
                                      const std::vector<std::vector<CMatrix>>& second_derivs);

}  // namespace qbound
