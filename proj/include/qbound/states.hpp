#pragma once

#include <array>
#include <utility>

#include "qbound/channels.hpp"
#include "qbound/density.hpp"

namespace qbound {

inline constexpr int kMaxPureQubits = 12;
inline constexpr int kMaxMixedQubits = 10;

// Eigenvector of sigma_k with eigenvalue +1 (sign = +1) or -1 (sign = -1).
CVector pauli_eigenvector(int k, int sign);

// (|phi_k^+>^n + |phi_k^->^n) / sqrt(2).
PureState ghz_state(int direction, int n);

// Normalized sum_k e^{i delta_k} |GHZ_k>.
PureState superposed_ghz(const std::array<double, 3>& deltas, int n);

KrausChannel dephasing_kraus(double lambda);
KrausChannel amplitude_damping_kraus(double kappa);

// Applies the same single-qubit channel to every qubit.
DensityMatrix apply_uniform_local_channel(const DensityMatrix& rho, const KrausChannel& single_qubit);
DensityMatrix apply_uniform_local_channel(const PureState& psi, const KrausChannel& single_qubit);

struct Marginals {
  DensityMatrix rho1;
  DensityMatrix rho2;
};

// One- and two-qubit marginals of a locally noisy GHZ_k state for N >= 3.
Marginals dephased_ghz_marginals(int direction, const KrausChannel& single_qubit);

// Equal mixture over the three GHZ directions of the two-qubit marginal.
DensityMatrix averaged_rdm2(const KrausChannel& single_qubit);

// First two factors, and the first factor, of a permutation-invariant state.
Marginals marginals_of(const DensityMatrix& rho);

struct PermutationCheck {
  bool invariant;
  double residual;
};
PermutationCheck is_permutationally_invariant(const DensityMatrix& rho, double tol = 1e-10);

// Permutation matrix exchanging factors i and i+1.
CMatrix adjacent_swap(const std::vector<int>& dims, int i);

}  // namespace qbound
