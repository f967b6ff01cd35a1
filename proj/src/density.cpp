#include "qbound/density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qbound {

int product_of(const std::vector<int>& dims) {
  long p = 1;
  for (int d : dims) {
    if (d <= 0) throw DimensionError("factor dimensions must be positive");
    p *= d;
    if (p > kMaxDim) throw DimensionError("tensor product dimension exceeds cap");
  }
  return static_cast<int>(p);
}

std::vector<int> qubit_dims(int n) {
  if (n < 1) throw ContractError("qubit count must be positive");
  return std::vector<int>(static_cast<std::size_t>(n), 2);
}

PureState::PureState(CVector amplitudes, std::vector<int> factor_dims)
    : amplitudes_(std::move(amplitudes)), factor_dims_(std::move(factor_dims)) {
  if (product_of(factor_dims_) != amplitudes_.size()) throw DimensionError("PureState: factor dims do not match length");
  if (!amplitudes_.allFinite()) throw ContractError("PureState: non-finite amplitude");
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > kNormTol) {
    std::ostringstream msg;
    msg << "PureState: norm " << norm << " is not 1";
    throw ContractError(msg.str());
  }
}

DensityMatrix::DensityMatrix(CMatrix matrix, std::vector<int> factor_dims)
    : matrix_(std::move(matrix)), factor_dims_(std::move(factor_dims)) {
  require_hermitian(matrix_, "DensityMatrix");
  if (product_of(factor_dims_) != matrix_.rows()) throw DimensionError("DensityMatrix: factor dims do not match dim");
  const Complex tr = matrix_.trace();
  if (std::abs(tr - 1.0) > kTraceTol) {
    std::ostringstream msg;
    msg << "DensityMatrix: trace " << tr.real() << "+" << tr.imag() << "i is not 1";
    throw ContractError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues()(0) < kPsdFloor) {
    std::ostringstream msg;
    msg << "DensityMatrix: negative eigenvalue " << solver.eigenvalues()(0);
    throw ContractError(msg.str());
  }
}

DensityMatrix::DensityMatrix(const PureState& psi)
    : DensityMatrix(CMatrix(psi.amplitudes() * psi.amplitudes().adjoint()), psi.factor_dims()) {}

DensityMatrix DensityMatrix::maximally_mixed(std::vector<int> factor_dims) {
  const int d = product_of(factor_dims);
  return DensityMatrix(identity(d) / static_cast<double>(d), std::move(factor_dims));
}

DensityMatrix DensityMatrix::maximally_mixed_qubits(int n) { return maximally_mixed(qubit_dims(n)); }

DensityMatrix DensityMatrix::reduced(const std::vector<int>& keep) const {
  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  CMatrix out = partial_trace(matrix_, factor_dims_, kept);
  std::vector<int> dims;
  for (int k : kept) dims.push_back(factor_dims_[static_cast<std::size_t>(k)]);
  // Partial trace of a Hermitian matrix is Hermitian up to summation order.
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out), std::move(dims));
}

namespace {

// sqrt(rho) restricted to its numerical support, as V D^{1/2} with V isometric.
CMatrix support_root(const DensityMatrix& rho) {
  const HermEig eig = herm_eig(rho.matrix());
  if (eig.values(0) < kSqrtClampFloor) throw ContractError("bures_fidelity: state has a negative eigenvalue");
  const double cutoff = 1e-14 * std::max(1.0, eig.values.maxCoeff());
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) > cutoff) kept.push_back(i);
  CMatrix root(eig.vectors.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c)
    root.col(static_cast<Eigen::Index>(c)) = eig.vectors.col(kept[c]) * std::sqrt(eig.values(kept[c]));
  return root;
}

}  // namespace

double bures_fidelity(const DensityMatrix& r1, const DensityMatrix& r2) {
  if (r1.dim() != r2.dim()) throw DimensionError("bures_fidelity: dimension mismatch");
  // Tr sqrt(sqrt(r1) r2 sqrt(r1)) is the nuclear norm of sqrt(r1) sqrt(r2). Working on the
  // supports keeps roundoff-level eigenvalues out of the square roots.
  const CMatrix overlap = support_root(r1).adjoint() * support_root(r2);
  if (overlap.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(overlap);
  return svd.singularValues().sum();
}

}  // namespace qbound
