#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qbound {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Violated pre/postcondition of a library operation.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Shape or size mismatch, including the dimension cap.
class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

// A matrix that must be inverted is (numerically) singular.
class RankDeficiencyError : public ContractError {
 public:
  using ContractError::ContractError;
};

inline constexpr double kHermitianTol = 1e-10;
inline constexpr int kMaxDim = 1 << 13;
inline constexpr double kTaylorGap = 1e-8;
inline constexpr double kDefaultFdStep = 1e-5;
inline constexpr double kSqrtClampFloor = -1e-9;

double max_abs(const CMatrix& m);
double max_abs(const RMatrix& m);
double hermiticity_residual(const CMatrix& m);

void require_square(const CMatrix& m, std::string_view what);
void require_finite(const CMatrix& m, std::string_view what);
void require_hermitian(const CMatrix& m, std::string_view what);

CMatrix identity(int dim);
// sigma_1, sigma_2, sigma_3 for k = 1, 2, 3.
CMatrix pauli(int k);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix kron_all(const std::vector<CMatrix>& factors);

// op acting on factor `site` of n_sites identical factors, identity elsewhere.
CMatrix embed(const CMatrix& op, int site, int n_sites);

CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims, const std::vector<int>& keep);

struct HermEig {
  RVector values;   // ascending
  CMatrix vectors;  // columns

  CMatrix reconstruct() const;
  // f applied to the spectrum: V f(diag) V^dagger.
  CMatrix apply(const std::function<Complex(double)>& f) const;
};

HermEig herm_eig(const CMatrix& m);

// e^{-ih} for Hermitian h.
CMatrix unitary_exp(const CMatrix& h);

// Integral over alpha in [0,1] of e^{i alpha h} x e^{-i alpha h}.
CMatrix alpha_conjugation_integral(const CMatrix& h, const CMatrix& x);
CMatrix alpha_conjugation_integral(const HermEig& h_eig, const CMatrix& x);

// (e^{id} - 1) / (id) with a Taylor branch near d = 0.
Complex phase_average(double gap);

using MatrixFunction = std::function<CMatrix(const RVector&)>;

CMatrix central_diff(const MatrixFunction& f, const RVector& theta, int k, double step = kDefaultFdStep);

// Square root of a positive semidefinite matrix; eigenvalues in [-1e-9, 0) are
// clamped to zero, anything lower is a contract error.
CMatrix sqrt_psd(const CMatrix& m);

}  // namespace qbound
