#include "qbound/channels.hpp"

#include <cmath>
#include <sstream>

namespace qbound {

namespace {

constexpr Complex kI{0.0, 1.0};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_same_dims(const KrausList& ops, std::string_view what) {
  if (ops.empty()) throw ContractError(std::string(what) + ": empty Kraus list");
  const auto d = ops.front().rows();
  for (const auto& op : ops) {
    require_square(op, what);
    require_finite(op, what);
    if (op.rows() != d) throw DimensionError(std::string(what) + ": Kraus operators differ in dimension");
  }
}

KrausList zeros_like(const KrausList& ops) {
  KrausList out;
  out.reserve(ops.size());
  for (const auto& op : ops) out.push_back(CMatrix::Zero(op.rows(), op.cols()));
  return out;
}

// Parameter vector shared by composite channels; constant parts carry none.
RVector shared_theta(const std::vector<const KrausChannel*>& parts) {
  RVector theta;
  for (const auto* p : parts) {
    if (p->theta().size() == 0) continue;
    if (theta.size() == 0) {
      theta = p->theta();
    } else if (theta.size() != p->theta().size() || (theta - p->theta()).cwiseAbs().maxCoeff() > 0.0) {
      throw ContractError("composite channel: parts evaluated at different parameter points");
    }
  }
  return theta;
}

KrausList product_ops(const std::vector<KrausList>& factor_ops) {
  KrausList out{CMatrix::Identity(1, 1)};
  for (const auto& ops : factor_ops) {
    KrausList next;
    next.reserve(out.size() * ops.size());
    for (const auto& left : out)
      for (const auto& right : ops) next.push_back(kron(left, right));
    out = std::move(next);
  }
  return out;
}

KrausList sequence_ops(const KrausList& first, const KrausList& second) {
  KrausList out;
  out.reserve(first.size() * second.size());
  for (const auto& a : first)
    for (const auto& b : second) out.push_back(b * a);
  return out;
}

KrausList exponential_ops(const GeneratorSet& gens, const RVector& theta) {
  if (theta.size() != gens.num_params()) throw DimensionError("exponential family: theta length differs from parameter count");
  const double scale = 1.0 / std::sqrt(static_cast<double>(gens.num_kraus()));
  KrausList ops;
  for (int l = 0; l < gens.num_kraus(); ++l) ops.push_back(scale * unitary_exp(gens.combined(l, theta)));
  return ops;
}

}  // namespace

GeneratorSet::GeneratorSet(std::vector<std::vector<CMatrix>> generators) : generators_(std::move(generators)) {
  if (generators_.empty() || generators_.front().empty()) throw ContractError("GeneratorSet: empty");
  const auto q = generators_.front().size();
  const auto d = generators_.front().front().rows();
  for (const auto& row : generators_) {
    if (row.size() != q) throw DimensionError("GeneratorSet: ragged parameter count");
    for (const auto& g : row) {
      require_hermitian(g, "GeneratorSet");
      if (g.rows() != d) throw DimensionError("GeneratorSet: generators differ in dimension");
    }
  }
}

GeneratorSet GeneratorSet::unitary(std::vector<CMatrix> hamiltonian_terms) {
  return GeneratorSet({std::move(hamiltonian_terms)});
}

CMatrix GeneratorSet::combined(int l, const RVector& theta) const {
  if (theta.size() != num_params()) throw DimensionError("GeneratorSet: theta length differs from parameter count");
  CMatrix g = CMatrix::Zero(dim(), dim());
  for (int k = 0; k < num_params(); ++k) g += theta(k) * generators_[l][k];
  return g;
}

GeneratorSet collective_generators(const std::vector<CMatrix>& single_particle, int n) {
  std::vector<CMatrix> terms;
  for (const auto& h : single_particle) {
    CMatrix total = CMatrix::Zero(static_cast<Eigen::Index>(std::pow(h.rows(), n)), static_cast<Eigen::Index>(std::pow(h.rows(), n)));
    for (int site = 0; site < n; ++site) total += embed(h, site, n);
    terms.push_back(std::move(total));
  }
  return GeneratorSet::unitary(std::move(terms));
}

std::vector<CMatrix> pauli_terms(int q) {
  if (q < 1 || q > 3) throw ContractError("pauli_terms: q must be 1, 2 or 3");
  std::vector<CMatrix> out;
  for (int k = 1; k <= q; ++k) out.push_back(pauli(k));
  return out;
}

KrausChannel::KrausChannel(KrausList ops, Dependence dep, RVector theta)
    : ops_(std::move(ops)), dependence_(std::move(dep)), theta_(std::move(theta)) {
  require_same_dims(ops_, "KrausChannel");
  require_complete(ops_, "KrausChannel");
}

KrausChannel KrausChannel::constant(KrausList ops) { return KrausChannel(std::move(ops), dependence::Constant{}, RVector()); }

KrausChannel KrausChannel::exponential_family(GeneratorSet generators, const RVector& theta) {
  KrausList ops = exponential_ops(generators, theta);
  return KrausChannel(std::move(ops), dependence::ExponentialFamily{std::move(generators)}, theta);
}

KrausChannel KrausChannel::from_function(KrausFunction kraus_at, const RVector& theta, double step) {
  if (!kraus_at) throw ContractError("KrausChannel::from_function: missing function");
  if (!(step > 0.0)) throw ContractError("KrausChannel::from_function: step must be positive");
  KrausList ops = kraus_at(theta);
  return KrausChannel(std::move(ops), dependence::FiniteDifference{std::move(kraus_at), step}, theta);
}

KrausChannel KrausChannel::sequence(const KrausChannel& first, const KrausChannel& second) {
  if (first.dim() != second.dim()) throw DimensionError("KrausChannel::sequence: dimension mismatch");
  RVector theta = shared_theta({&first, &second});
  return KrausChannel(sequence_ops(first.ops_, second.ops_),
                      dependence::Sequence{std::make_shared<const KrausChannel>(first),
                                           std::make_shared<const KrausChannel>(second)},
                      std::move(theta));
}

bool KrausChannel::is_constant() const {
  return std::visit(Overloaded{
                        [](const dependence::Constant&) { return true; },
                        [](const dependence::Product& p) {
                          for (const auto& f : *p.factors)
                            if (!f.is_constant()) return false;
                          return true;
                        },
                        [](const dependence::Sequence& s) { return s.first->is_constant() && s.second->is_constant(); },
                        [](const auto&) { return false; },
                    },
                    dependence_);
}

KrausChannel KrausChannel::at(const RVector& theta) const {
  return std::visit(
      Overloaded{
          [&](const dependence::Constant&) { return KrausChannel(ops_, dependence_, theta); },
          [&](const dependence::ExponentialFamily& e) { return KrausChannel(exponential_ops(e.generators, theta), dependence_, theta); },
          [&](const dependence::FiniteDifference& f) { return KrausChannel(f.kraus_at(theta), dependence_, theta); },
          [&](const dependence::Product& p) {
            std::vector<KrausChannel> factors;
            for (const auto& f : *p.factors) factors.push_back(f.is_constant() ? f : f.at(theta));
            return product_channel(factors);
          },
          [&](const dependence::Sequence& s) {
            const KrausChannel first = s.first->is_constant() ? *s.first : s.first->at(theta);
            const KrausChannel second = s.second->is_constant() ? *s.second : s.second->at(theta);
            return sequence(first, second);
          },
      },
      dependence_);
}

double completeness_residual(const KrausList& ops) {
  CMatrix sum = CMatrix::Zero(ops.front().cols(), ops.front().cols());
  for (const auto& op : ops) sum += op.adjoint() * op;
  return max_abs(CMatrix(sum - identity(static_cast<int>(sum.rows()))));
}

void require_complete(const KrausList& ops, std::string_view what) {
  const double residual = completeness_residual(ops);
  if (residual > kCompletenessTol) {
    std::ostringstream msg;
    msg << what << ": Kraus completeness violated (residual " << residual << ")";
    throw ContractError(msg.str());
  }
}

CMatrix apply_kraus(const KrausList& ops, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(ops.front().rows(), ops.front().rows());
  for (const auto& op : ops) out += op * rho * op.adjoint();
  return out;
}

DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho) {
  if (ch.dim() != rho.dim()) throw DimensionError("apply_channel: channel and state dimensions differ");
  CMatrix out = apply_kraus(ch.kraus_ops(), rho.matrix());
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityMatrix(std::move(out), rho.factor_dims());
}

UnitalityReport is_unital(const KrausChannel& ch) {
  CMatrix sum = CMatrix::Zero(ch.dim(), ch.dim());
  for (const auto& op : ch.kraus_ops()) sum += op * op.adjoint();
  const double residual = max_abs(CMatrix(sum - identity(ch.dim())));
  return {residual < kUnitalTol, residual};
}

CMatrix stinespring_dilation(const KrausList& ops) {
  require_same_dims(ops, "stinespring_dilation");
  require_complete(ops, "stinespring_dilation");
  const int bath = static_cast<int>(ops.size());
  if (bath > kMaxDilationKraus) throw DimensionError("stinespring_dilation: more Kraus operators than the bath cap");
  const int d = static_cast<int>(ops.front().rows());
  CMatrix v = CMatrix::Zero(static_cast<Eigen::Index>(d) * bath, d);
  for (int l = 0; l < bath; ++l) {
    CMatrix ket = CMatrix::Zero(bath, 1);
    ket(l, 0) = 1.0;
    v += kron(ops[static_cast<std::size_t>(l)], ket);
  }
  return v;
}

CMatrix stinespring_dilation(const KrausChannel& ch) { return stinespring_dilation(ch.kraus_ops()); }

KrausList kraus_derivatives(const KrausChannel& ch, const RVector& theta, int k) {
  return std::visit(
      Overloaded{
          [&](const dependence::Constant&) { return zeros_like(ch.kraus_ops()); },
          [&](const dependence::ExponentialFamily& e) {
            const GeneratorSet& gens = e.generators;
            if (k < 0 || k >= gens.num_params()) throw ContractError("kraus_derivatives: parameter index out of range");
            const double scale = 1.0 / std::sqrt(static_cast<double>(gens.num_kraus()));
            KrausList out;
            for (int l = 0; l < gens.num_kraus(); ++l) {
              const HermEig eig = herm_eig(gens.combined(l, theta));
              const CMatrix u = eig.apply([](double lambda) { return std::exp(-kI * lambda); });
              out.push_back(-kI * scale * u * alpha_conjugation_integral(eig, gens.at(l, k)));
            }
            return out;
          },
          [&](const dependence::FiniteDifference& f) {
            const KrausList base = f.kraus_at(theta);
            KrausList out;
            for (std::size_t l = 0; l < base.size(); ++l) {
              out.push_back(central_diff([&](const RVector& t) { return f.kraus_at(t)[l]; }, theta, k, f.step));
            }
            return out;
          },
          [&](const dependence::Product& p) {
            std::vector<KrausList> values;
            std::vector<KrausList> derivs;
            for (const auto& f : *p.factors) {
              values.push_back(f.is_constant() ? f.kraus_ops() : f.at(theta).kraus_ops());
              derivs.push_back(kraus_derivatives(f, theta, k));
            }
            KrausList out;
            for (std::size_t which = 0; which < values.size(); ++which) {
              std::vector<KrausList> parts = values;
              parts[which] = derivs[which];
              KrausList term = product_ops(parts);
              if (out.empty()) {
                out = std::move(term);
              } else {
                for (std::size_t l = 0; l < out.size(); ++l) out[l] += term[l];
              }
            }
            return out;
          },
          [&](const dependence::Sequence& s) {
            const KrausList a = s.first->is_constant() ? s.first->kraus_ops() : s.first->at(theta).kraus_ops();
            const KrausList b = s.second->is_constant() ? s.second->kraus_ops() : s.second->at(theta).kraus_ops();
            const KrausList da = kraus_derivatives(*s.first, theta, k);
            const KrausList db = kraus_derivatives(*s.second, theta, k);
            KrausList out;
            for (std::size_t i = 0; i < a.size(); ++i)
              for (std::size_t j = 0; j < b.size(); ++j) out.push_back(db[j] * a[i] + b[j] * da[i]);
            return out;
          },
      },
      ch.dependence());
}

PauliSplitting displayed_pauli_splitting() {
  PauliSplitting s;
  for (auto& row : s)
    for (auto& m : row) m = CMatrix::Zero(2, 2);
  s[0][0](0, 1) = 1.0;
  s[0][1](0, 1) = -kI;
  s[0][2](0, 0) = 1.0;
  s[1][0](1, 0) = 1.0;
  s[1][1](1, 0) = kI;
  s[1][2](1, 1) = -1.0;
  return s;
}

PauliSplitting hermitian_pauli_splitting() {
  PauliSplitting s;
  for (int k = 1; k <= 3; ++k) {
    const CMatrix sigma = pauli(k);
    s[0][k - 1] = 0.5 * (identity(2) + sigma);
    s[1][k - 1] = 0.5 * (sigma - identity(2));
  }
  return s;
}

GeneratorSet pauli_split_generators(int q) {
  if (q < 1 || q > 3) throw ContractError("pauli_split_generators: q must be 1, 2 or 3");
  const PauliSplitting split = hermitian_pauli_splitting();
  std::vector<std::vector<CMatrix>> gens(2);
  for (int l = 0; l < 2; ++l)
    for (int k = 0; k < q; ++k) gens[static_cast<std::size_t>(l)].push_back(split[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]);
  return GeneratorSet(std::move(gens));
}

KrausChannel pauli_split_channel(const RVector& theta) {
  return KrausChannel::exponential_family(pauli_split_generators(static_cast<int>(theta.size())), theta);
}

KrausChannel product_channel(const std::vector<KrausChannel>& per_particle) {
  if (per_particle.empty()) throw ContractError("product_channel: no factors");
  std::vector<const KrausChannel*> parts;
  std::vector<KrausList> ops;
  long dim = 1;
  for (const auto& f : per_particle) {
    parts.push_back(&f);
    ops.push_back(f.kraus_ops());
    dim *= f.dim();
    if (dim > kMaxDim) throw DimensionError("product_channel: total dimension exceeds cap");
  }
  RVector theta = shared_theta(parts);
  return KrausChannel(product_ops(ops), dependence::Product{std::make_shared<const std::vector<KrausChannel>>(per_particle)},
                      std::move(theta));
}

KrausChannel unitary_channel(const std::vector<CMatrix>& hamiltonian_terms, const RVector& theta) {
  return KrausChannel::exponential_family(GeneratorSet::unitary(hamiltonian_terms), theta);
}

}  // namespace qbound
