#include "qbound/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qbound {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_dim_cap(long dim, std::string_view what) {
  if (dim > kMaxDim) {
    std::ostringstream msg;
    msg << what << ": dimension " << dim << " exceeds cap " << kMaxDim;
    throw DimensionError(msg.str());
  }
}

}  // namespace

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double max_abs(const RMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_residual(const CMatrix& m) { return max_abs(CMatrix(m - m.adjoint())); }

void require_square(const CMatrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream msg;
    msg << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(msg.str());
  }
}

void require_finite(const CMatrix& m, std::string_view what) {
  if (!m.allFinite()) throw ContractError(std::string(what) + ": non-finite entry");
}

void require_hermitian(const CMatrix& m, std::string_view what) {
  require_square(m, what);
  require_finite(m, what);
  const double residual = hermiticity_residual(m);
  if (residual > kHermitianTol) {
    std::ostringstream msg;
    msg << what << ": not Hermitian (residual " << residual << ")";
    throw ContractError(msg.str());
  }
}

CMatrix identity(int dim) { return CMatrix::Identity(dim, dim); }

CMatrix pauli(int k) {
  CMatrix s = CMatrix::Zero(2, 2);
  switch (k) {
    case 1:
      s(0, 1) = 1.0;
      s(1, 0) = 1.0;
      break;
    case 2:
      s(0, 1) = -kI;
      s(1, 0) = kI;
      break;
    case 3:
      s(0, 0) = 1.0;
      s(1, 1) = -1.0;
      break;
    default:
      throw ContractError("pauli: index must be 1, 2 or 3");
  }
  return s;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  require_finite(a, "kron");
  require_finite(b, "kron");
  require_dim_cap(a.rows() * b.rows(), "kron");
  require_dim_cap(a.cols() * b.cols(), "kron");
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix kron_all(const std::vector<CMatrix>& factors) {
  if (factors.empty()) throw ContractError("kron_all: empty factor list");
  CMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

CMatrix embed(const CMatrix& op, int site, int n_sites) {
  if (site < 0 || site >= n_sites) throw ContractError("embed: site out of range");
  const int d = static_cast<int>(op.rows());
  const int left = static_cast<int>(std::pow(d, site));
  const int right = static_cast<int>(std::pow(d, n_sites - site - 1));
  return kron(kron(identity(left), op), identity(right));
}

CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims, const std::vector<int>& keep) {
  require_square(m, "partial_trace");
  const int n = static_cast<int>(dims.size());
  long total = 1;
  for (int d : dims) {
    if (d <= 0) throw DimensionError("partial_trace: factor dimensions must be positive");
    total *= d;
  }
  if (total != m.rows()) {
    std::ostringstream msg;
    msg << "partial_trace: factor dims multiply to " << total << " but matrix has dim " << m.rows();
    throw DimensionError(msg.str());
  }
  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.empty()) throw DimensionError("partial_trace: keep set is empty");
  if (kept.front() < 0 || kept.back() >= n) throw DimensionError("partial_trace: keep index out of range");

  std::vector<long> stride(n);
  long s = 1;
  for (int i = n - 1; i >= 0; --i) {
    stride[i] = s;
    s *= dims[i];
  }
  std::vector<bool> is_kept(n, false);
  for (int k : kept) is_kept[k] = true;

  // Full index = kept offset + traced offset, since digits contribute additively.
  auto offsets = [&](bool kept_side) {
    std::vector<long> out{0};
    for (int i = 0; i < n; ++i) {
      if (is_kept[i] != kept_side) continue;
      std::vector<long> next;
      next.reserve(out.size() * dims[i]);
      for (long base : out)
        for (int digit = 0; digit < dims[i]; ++digit) next.push_back(base + digit * stride[i]);
      out = std::move(next);
    }
    return out;
  };
  const std::vector<long> kept_off = offsets(true);
  const std::vector<long> traced_off = offsets(false);

  const long kd = static_cast<long>(kept_off.size());
  CMatrix out = CMatrix::Zero(kd, kd);
  for (long r = 0; r < kd; ++r) {
    for (long c = 0; c < kd; ++c) {
      Complex acc = 0.0;
      for (long t : traced_off) acc += m(kept_off[r] + t, kept_off[c] + t);
      out(r, c) = acc;
    }
  }
  return out;
}

CMatrix HermEig::reconstruct() const {
  return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

CMatrix HermEig::apply(const std::function<Complex(double)>& f) const {
  CVector diag(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) diag(i) = f(values(i));
  return vectors * diag.asDiagonal() * vectors.adjoint();
}

HermEig herm_eig(const CMatrix& m) {
  require_hermitian(m, "herm_eig");
  require_dim_cap(m.rows(), "herm_eig");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
  if (solver.info() != Eigen::Success) throw ContractError("herm_eig: eigensolver did not converge");
  return HermEig{solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix unitary_exp(const CMatrix& h) {
  return herm_eig(h).apply([](double lambda) { return std::exp(-kI * lambda); });
}

Complex phase_average(double gap) {
  if (std::abs(gap) < kTaylorGap) return Complex{1.0 - gap * gap / 6.0, gap / 2.0};
  return (std::exp(kI * gap) - 1.0) / (kI * gap);
}

CMatrix alpha_conjugation_integral(const HermEig& h_eig, const CMatrix& x) {
  const Eigen::Index d = h_eig.values.size();
  if (x.rows() != d || x.cols() != d) throw DimensionError("alpha_conjugation_integral: dimension mismatch");
  require_finite(x, "alpha_conjugation_integral");
  CMatrix rotated = h_eig.vectors.adjoint() * x * h_eig.vectors;
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index n = 0; n < d; ++n) rotated(m, n) *= phase_average(h_eig.values(m) - h_eig.values(n));
  return h_eig.vectors * rotated * h_eig.vectors.adjoint();
}

CMatrix alpha_conjugation_integral(const CMatrix& h, const CMatrix& x) {
  return alpha_conjugation_integral(herm_eig(h), x);
}

CMatrix central_diff(const MatrixFunction& f, const RVector& theta, int k, double step) {
  if (!(step > 0.0)) throw ContractError("central_diff: step must be positive");
  if (k < 0 || k >= theta.size()) throw ContractError("central_diff: parameter index out of range");
  RVector plus = theta;
  RVector minus = theta;
  plus(k) += step;
  minus(k) -= step;
  return (f(plus) - f(minus)) / (2.0 * step);
}

CMatrix sqrt_psd(const CMatrix& m) {
  const HermEig eig = herm_eig(m);
  if (eig.values.size() > 0 && eig.values(0) < kSqrtClampFloor) {
    std::ostringstream msg;
    msg << "sqrt_psd: eigenvalue " << eig.values(0) << " below clamp floor";
    throw ContractError(msg.str());
  }
  return eig.apply([](double lambda) { return Complex{std::sqrt(std::max(lambda, 0.0)), 0.0}; });
}

}  // namespace qbound
