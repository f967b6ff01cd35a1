#include "qbound/states.hpp"

#include <cmath>
#include <sstream>

namespace qbound {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_qubit_count(int n, int cap, std::string_view what) {
  if (n < 1 || n > cap) {
    std::ostringstream msg;
    msg << what << ": particle count " << n << " outside [1, " << cap << "]";
    throw DimensionError(msg.str());
  }
}

CVector tensor_power(const CVector& v, int n) {
  CMatrix out = v;
  for (int i = 1; i < n; ++i) out = kron(out, CMatrix(v));
  return out.col(0);
}

CMatrix channel_image(const KrausChannel& ch, const CMatrix& x) { return apply_kraus(ch.kraus_ops(), x); }

// Index permutation realizing the exchange of factors i and i+1.
std::vector<long> swap_permutation(const std::vector<int>& dims, int i) {
  const int n = static_cast<int>(dims.size());
  std::vector<long> stride(n);
  long s = 1;
  for (int f = n - 1; f >= 0; --f) {
    stride[f] = s;
    s *= dims[f];
  }
  std::vector<long> perm(static_cast<std::size_t>(s));
  for (long idx = 0; idx < s; ++idx) {
    const long a = (idx / stride[i]) % dims[i];
    const long b = (idx / stride[i + 1]) % dims[i + 1];
    perm[static_cast<std::size_t>(idx)] = idx - a * stride[i] - b * stride[i + 1] + b * stride[i] + a * stride[i + 1];
  }
  return perm;
}

}  // namespace

CVector pauli_eigenvector(int k, int sign) {
  if (sign != 1 && sign != -1) throw ContractError("pauli_eigenvector: sign must be +1 or -1");
  const double r = 1.0 / std::sqrt(2.0);
  CVector v(2);
  switch (k) {
    case 1:
      v << r, sign * r;
      break;
    case 2:
      v << r, static_cast<double>(sign) * kI * r;
      break;
    case 3:
      if (sign == 1) {
        v << 1.0, 0.0;
      } else {
        v << 0.0, 1.0;
      }
      break;
    default:
      throw ContractError("pauli_eigenvector: direction must be 1, 2 or 3");
  }
  return v;
}

PureState ghz_state(int direction, int n) {
  require_qubit_count(n, kMaxPureQubits, "ghz_state");
  const CVector plus = tensor_power(pauli_eigenvector(direction, 1), n);
  const CVector minus = tensor_power(pauli_eigenvector(direction, -1), n);
  return PureState((plus + minus) / std::sqrt(2.0), qubit_dims(n));
}

PureState superposed_ghz(const std::array<double, 3>& deltas, int n) {
  require_qubit_count(n, kMaxPureQubits, "superposed_ghz");
  CVector sum = CVector::Zero(1L << n);
  for (int k = 1; k <= 3; ++k) sum += std::exp(kI * deltas[static_cast<std::size_t>(k - 1)]) * ghz_state(k, n).amplitudes();
  const double norm = sum.norm();
  if (norm < 1e-12) throw ContractError("superposed_ghz: superposition cancels to zero norm");
  return PureState(sum / norm, qubit_dims(n));
}

KrausChannel dephasing_kraus(double lambda) {
  if (!(lambda >= 0.0)) throw ContractError("dephasing_kraus: lambda must be non-negative");
  CMatrix e0 = CMatrix::Zero(2, 2);
  CMatrix e1 = CMatrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  e0(1, 1) = std::exp(-lambda);
  e1(1, 1) = std::sqrt(-std::expm1(-2.0 * lambda));
  return KrausChannel::constant({e0, e1});
}

KrausChannel amplitude_damping_kraus(double kappa) {
  if (!(kappa >= 0.0)) throw ContractError("amplitude_damping_kraus: kappa must be non-negative");
  CMatrix e0 = CMatrix::Zero(2, 2);
  CMatrix e1 = CMatrix::Zero(2, 2);
  e0(0, 0) = 1.0;
  e0(1, 1) = std::sqrt(-std::expm1(-2.0 * kappa));
  e1(0, 1) = std::exp(-kappa);
  return KrausChannel::constant({e0, e1});
}

DensityMatrix apply_uniform_local_channel(const DensityMatrix& rho, const KrausChannel& single_qubit) {
  const int n = rho.num_factors();
  const int d = single_qubit.dim();
  for (int f : rho.factor_dims())
    if (f != d) throw DimensionError("apply_uniform_local_channel: factor dims differ from channel dim");
  if (rho.dim() > (1 << kMaxMixedQubits)) throw DimensionError("apply_uniform_local_channel: state exceeds dimension cap");

  // Superoperator S[(i,j),(a,b)] = sum_r E_r[i,a] conj(E_r[j,b]).
  CMatrix super = CMatrix::Zero(d * d, d * d);
  for (const auto& e : single_qubit.kraus_ops())
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) super(i * d + j, a * d + b) += e(i, a) * std::conj(e(j, b));

  CMatrix current = rho.matrix();
  const long dim = rho.dim();
  long stride = dim;
  for (int site = 0; site < n; ++site) {
    stride /= d;
    CMatrix next(dim, dim);
    // Visit every (row, col) pair whose site digit is zero, then fill the d x d block.
    for (long r0 = 0; r0 < dim; ++r0) {
      if ((r0 / stride) % d != 0) continue;
      for (long c0 = 0; c0 < dim; ++c0) {
        if ((c0 / stride) % d != 0) continue;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            Complex acc = 0.0;
            for (int a = 0; a < d; ++a)
              for (int b = 0; b < d; ++b) acc += super(i * d + j, a * d + b) * current(r0 + a * stride, c0 + b * stride);
            next(r0 + i * stride, c0 + j * stride) = acc;
          }
      }
    }
    current = std::move(next);
  }
  current = 0.5 * (current + current.adjoint()).eval();
  return DensityMatrix(std::move(current), rho.factor_dims());
}

DensityMatrix apply_uniform_local_channel(const PureState& psi, const KrausChannel& single_qubit) {
  return apply_uniform_local_channel(DensityMatrix(psi), single_qubit);
}

Marginals dephased_ghz_marginals(int direction, const KrausChannel& single_qubit) {
  if (single_qubit.dim() != 2) throw DimensionError("dephased_ghz_marginals: expects a single-qubit channel");
  const CMatrix one = channel_image(single_qubit, identity(2));
  const CMatrix sigma = channel_image(single_qubit, pauli(direction));
  CMatrix rho1 = 0.5 * one;
  CMatrix rho2 = 0.25 * (kron(one, one) + kron(sigma, sigma));
  return {DensityMatrix(std::move(rho1), qubit_dims(1)), DensityMatrix(std::move(rho2), qubit_dims(2))};
}

DensityMatrix averaged_rdm2(const KrausChannel& single_qubit) {
  CMatrix sum = CMatrix::Zero(4, 4);
  for (int k = 1; k <= 3; ++k) sum += dephased_ghz_marginals(k, single_qubit).rho2.matrix();
  return DensityMatrix(sum / 3.0, qubit_dims(2));
}

Marginals marginals_of(const DensityMatrix& rho) {
  if (rho.num_factors() < 2) throw DimensionError("marginals_of: need at least two factors");
  return {rho.reduced({0}), rho.reduced({0, 1})};
}

CMatrix adjacent_swap(const std::vector<int>& dims, int i) {
  if (i < 0 || i + 1 >= static_cast<int>(dims.size())) throw ContractError("adjacent_swap: index out of range");
  const std::vector<long> perm = swap_permutation(dims, i);
  CMatrix s = CMatrix::Zero(static_cast<Eigen::Index>(perm.size()), static_cast<Eigen::Index>(perm.size()));
  for (std::size_t idx = 0; idx < perm.size(); ++idx) s(perm[idx], static_cast<Eigen::Index>(idx)) = 1.0;
  return s;
}

PermutationCheck is_permutationally_invariant(const DensityMatrix& rho, double tol) {
  const auto& dims = rho.factor_dims();
  for (int d : dims)
    if (d != dims.front()) throw DimensionError("is_permutationally_invariant: factor dims differ");
  double worst = 0.0;
  const CMatrix& m = rho.matrix();
  for (int i = 0; i + 1 < static_cast<int>(dims.size()); ++i) {
    const std::vector<long> perm = swap_permutation(dims, i);
    for (long r = 0; r < m.rows(); ++r)
      for (long c = 0; c < m.cols(); ++c)
        worst = std::max(worst, std::abs(m(perm[static_cast<std::size_t>(r)], perm[static_cast<std::size_t>(c)]) - m(r, c)));
  }
  return {worst < tol, worst};
}

}  // namespace qbound
