#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qbound/channels.hpp"
#include "qbound/density.hpp"

namespace qbound {

inline constexpr int kMaxExactQfimDim = 1 << 10;
inline constexpr double kConditionCap = 1e8;
inline constexpr double kMatrixPsdFloor = -1e-8;
inline constexpr double kDefaultFidelityStep = 1e-3;

using StateFamily = std::function<DensityMatrix(const RVector&)>;

// Anti-Hermitian logarithmic derivatives of a unitary family at one point.
struct AldSet {
  std::vector<CMatrix> ops;         // L_k
  std::vector<CMatrix> integrals;   // A_k, acting before the evolution
  std::vector<CMatrix> generators;  // M_k = U A_k U^dagger
  DensityMatrix rho_theta;
};

AldSet ald_unitary(const GeneratorSet& gen, const DensityMatrix& rho0, const RVector& theta);

// rho0 evolved by exp(-i sum_k theta_k H_k).
DensityMatrix evolve_unitary(const GeneratorSet& gen, const DensityMatrix& rho0, const RVector& theta);

RMatrix qfim_unitary_exact(const GeneratorSet& gen, const DensityMatrix& rho0, const RVector& theta);

// b_k = integral of e^{i a h} h_k e^{-i a h} with h = sum_k theta_k h_k.
std::vector<CMatrix> b_operators(const std::vector<CMatrix>& single_particle_terms, const RVector& theta);

RMatrix qfim_rdm(const DensityMatrix& rho1, const DensityMatrix& rho2, const std::vector<CMatrix>& b_ops, int n);

// Single-particle term for Pauli generators with a maximally mixed marginal.
RMatrix magfield_qfim1(const RVector& theta);
// Full QFIM for the superposed GHZ probe under local dephasing.
RMatrix magfield_qfim_full(const RVector& theta, double lambda, int n);

RMatrix cq_bound(const KrausChannel& ch, const DensityMatrix& rho0, const RVector& theta);
// Same quantity written with the expectation product Tr(dPi^dag Pi rho) Tr(dPi^dag Pi rho) added.
RMatrix cq_bound_plus_form(const KrausChannel& ch, const DensityMatrix& rho0, const RVector& theta);

// d_lk = (1/L) integral of e^{i a pi_l} pi_lk e^{-i a pi_l}, indexed [l][k].
std::vector<std::vector<CMatrix>> d_operators(const GeneratorSet& per_particle, const RVector& theta);

RMatrix cq_rdm(const DensityMatrix& rho1, const DensityMatrix& rho2, const std::vector<std::vector<CMatrix>>& d_ops, int n);
// The same decomposition from arbitrary per-particle Kraus derivatives.
RMatrix cq_rdm_channel(const KrausChannel& per_particle, const RVector& theta, const DensityMatrix& rho1,
                       const DensityMatrix& rho2, int n);

double saturation_residual_unitary(const GeneratorSet& gen, const DensityMatrix& rho0, const RVector& theta);
// max |4 n Im Tr(rho1 b_j b_k)|
double saturation_residual_rdm(const DensityMatrix& rho1, const std::vector<CMatrix>& b_ops, int n);
double saturation_residual_noisy(const KrausChannel& ch, const DensityMatrix& rho0, const RVector& theta);

RMatrix qfim_fidelity_oracle(const StateFamily& rho_of_theta, const RVector& theta, double eps = kDefaultFidelityStep);

struct HolevoWitness {
  CMatrix w;
  double max_imag;
};
HolevoWitness holevo_witness(const RMatrix& j_q, const AldSet& alds, const DensityMatrix& rho_theta);

struct SuperHeisenbergTerms {
  RMatrix one_body;  // per-particle term, before the factor n
  RMatrix two_body;  // per-pair term, before the factor n(n-1)
  RMatrix total;
  int n;
};
SuperHeisenbergTerms super_heisenberg_bound(const KrausChannel& per_particle, const DensityMatrix& rho2_evolved, int n,
                                            const RVector& theta);

// Inverse through the eigendecomposition; throws RankDeficiencyError above the condition cap.
RMatrix inverse_checked(const RMatrix& m);
double min_eigenvalue(const RMatrix& m);
// Symmetric within 1e-9 and min-eigenvalue above the scaled floor.
void require_symmetric_psd(const RMatrix& m, std::string_view what);

enum class Method { Exact, Rdm, FidelityOracle, LimitFormula, FiniteDifference, ClosedForm };
std::string to_string(Method m);

struct TaggedMatrix {
  RMatrix value;
  Method method;
};

struct BoundReport {
  int q = 0;
  std::optional<TaggedMatrix> j_q;
  std::optional<TaggedMatrix> j_c;
  std::optional<TaggedMatrix> c_q;
  std::map<std::string, double> saturation_residuals;
  std::optional<double> scalar_cost;

  // Tr(G M^{-1}) / repetitions for the tightest available matrix (j_q, else c_q).
  void set_cost(const RMatrix& cost_matrix, double repetitions);
  // Throws ContractError if any stored matrix breaks symmetry or PSD or the j_q <= c_q ordering.
  void validate() const;
};

}  // namespace qbound
