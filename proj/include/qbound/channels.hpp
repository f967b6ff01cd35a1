#pragma once

#include <array>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "qbound/density.hpp"
#include "qbound/linalg.hpp"

namespace qbound {

inline constexpr double kCompletenessTol = 1e-10;
inline constexpr double kUnitalTol = 1e-10;
inline constexpr int kMaxDilationKraus = 16;

using KrausList = std::vector<CMatrix>;
using KrausFunction = std::function<KrausList(const RVector&)>;

// Hermitian generators indexed [l][k]: Kraus operator l is
// (1/sqrt(L)) exp(-i sum_k theta_k G_lk). A unitary family is the case L = 1.
class GeneratorSet {
 public:
  explicit GeneratorSet(std::vector<std::vector<CMatrix>> generators);
  static GeneratorSet unitary(std::vector<CMatrix> hamiltonian_terms);

  int num_kraus() const { return static_cast<int>(generators_.size()); }
  int num_params() const { return static_cast<int>(generators_.front().size()); }
  int dim() const { return static_cast<int>(generators_.front().front().rows()); }
  const CMatrix& at(int l, int k) const { return generators_[l][k]; }
  // For L = 1 families.
  const std::vector<CMatrix>& terms() const { return generators_.front(); }

  // sum_k theta_k G_lk
  CMatrix combined(int l, const RVector& theta) const;

 private:
  std::vector<std::vector<CMatrix>> generators_;
};

// Collective generators sum_n h_k^[n] on n identical particles.
GeneratorSet collective_generators(const std::vector<CMatrix>& single_particle, int n);
// sigma_1..sigma_q on one qubit.
std::vector<CMatrix> pauli_terms(int q);

class KrausChannel;

namespace dependence {
struct Constant {};
struct ExponentialFamily {
  GeneratorSet generators;
};
struct FiniteDifference {
  KrausFunction kraus_at;
  double step;
};
// Tensor product of independent factors, first factor slowest in the Kraus index.
struct Product {
  std::shared_ptr<const std::vector<KrausChannel>> factors;
};
// Apply `first` then `second`; Kraus index (a, b) -> second_b * first_a, a slowest.
struct Sequence {
  std::shared_ptr<const KrausChannel> first;
  std::shared_ptr<const KrausChannel> second;
};
}  // namespace dependence

using Dependence = std::variant<dependence::Constant, dependence::ExponentialFamily, dependence::FiniteDifference,
                                dependence::Product, dependence::Sequence>;

// Kraus operators evaluated at theta() together with their theta dependence.
class KrausChannel {
 public:
  static KrausChannel constant(KrausList ops);
  static KrausChannel exponential_family(GeneratorSet generators, const RVector& theta);
  static KrausChannel from_function(KrausFunction kraus_at, const RVector& theta, double step = kDefaultFdStep);
  static KrausChannel sequence(const KrausChannel& first, const KrausChannel& second);

  const KrausList& kraus_ops() const { return ops_; }
  const Dependence& dependence() const { return dependence_; }
  const RVector& theta() const { return theta_; }
  int dim() const { return static_cast<int>(ops_.front().rows()); }
  int num_kraus() const { return static_cast<int>(ops_.size()); }
  bool is_constant() const;

  // Same family re-evaluated at another parameter point.
  KrausChannel at(const RVector& theta) const;

 private:
  friend KrausChannel product_channel(const std::vector<KrausChannel>& per_particle);
  KrausChannel(KrausList ops, Dependence dep, RVector theta);

  KrausList ops_;
  Dependence dependence_;
  RVector theta_;
};

double completeness_residual(const KrausList& ops);
void require_complete(const KrausList& ops, std::string_view what);

CMatrix apply_kraus(const KrausList& ops, const CMatrix& rho);
DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho);

struct UnitalityReport {
  bool unital;
  double residual;
};
UnitalityReport is_unital(const KrausChannel& ch);

// Isometry V = sum_l Pi_l (x) |l>, bath factor last.
CMatrix stinespring_dilation(const KrausChannel& ch);
CMatrix stinespring_dilation(const KrausList& ops);

KrausList kraus_derivatives(const KrausChannel& ch, const RVector& theta, int k);

// Splitting matrices pi_lk indexed [l][k-1].
using PauliSplitting = std::array<std::array<CMatrix, 3>, 2>;
// The triangular splitting of sigma_1 and sigma_2 exactly as commonly displayed;
// its exponentials are not unitary, see README.
PauliSplitting displayed_pauli_splitting();
// Hermitian splitting sigma_k = P_k^+ - P_k^- used by pauli_split_channel.
PauliSplitting hermitian_pauli_splitting();

// Two-Kraus unital channel Pi_l = exp(-i sum_k theta_k pi_lk) / sqrt(2).
KrausChannel pauli_split_channel(const RVector& theta);
GeneratorSet pauli_split_generators(int q = 3);

KrausChannel product_channel(const std::vector<KrausChannel>& per_particle);
KrausChannel unitary_channel(const std::vector<CMatrix>& hamiltonian_terms, const RVector& theta);

}  // namespace qbound
