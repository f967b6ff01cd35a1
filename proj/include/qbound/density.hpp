#pragma once

#include <vector>

#include "qbound/linalg.hpp"

namespace qbound {

inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdFloor = -1e-9;
inline constexpr double kNormTol = 1e-10;

// Unit-norm state vector on a tensor product of factors.
class PureState {
 public:
  PureState(CVector amplitudes, std::vector<int> factor_dims);

  const CVector& amplitudes() const { return amplitudes_; }
  const std::vector<int>& factor_dims() const { return factor_dims_; }
  int dim() const { return static_cast<int>(amplitudes_.size()); }

 private:
  CVector amplitudes_;
  std::vector<int> factor_dims_;
};

// Hermitian, unit-trace, positive semidefinite matrix with a tensor structure.
class DensityMatrix {
 public:
  DensityMatrix(CMatrix matrix, std::vector<int> factor_dims);
  explicit DensityMatrix(const PureState& psi);

  static DensityMatrix maximally_mixed(std::vector<int> factor_dims);
  // n qubits
  static DensityMatrix maximally_mixed_qubits(int n);

  const CMatrix& matrix() const { return matrix_; }
  const std::vector<int>& factor_dims() const { return factor_dims_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  int num_factors() const { return static_cast<int>(factor_dims_.size()); }

  // Marginal on the listed factors.
  DensityMatrix reduced(const std::vector<int>& keep) const;
  Complex expectation(const CMatrix& op) const { return (matrix_ * op).trace(); }

 private:
  CMatrix matrix_;
  std::vector<int> factor_dims_;
};

std::vector<int> qubit_dims(int n);
int product_of(const std::vector<int>& dims);

// Tr sqrt(sqrt(r1) r2 sqrt(r1)).
double bures_fidelity(const DensityMatrix& r1, const DensityMatrix& r2);

}  // namespace qbound
