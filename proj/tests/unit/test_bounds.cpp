#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "qbound/bounds.hpp"
#include "qbound/check_suite.hpp"
#include "qbound/states.hpp"
#include "test_support.hpp"

using namespace qbound;
using namespace qbound::testing;

namespace {

const RVector kField = vec({0.3, 0.2, 0.1});

DensityMatrix plus_state() { return DensityMatrix(PureState(pauli_eigenvector(1, 1), {2})); }

StateFamily unitary_family(const GeneratorSet& gen, const DensityMatrix& rho0) {
  return [gen, rho0](const RVector& t) { return evolve_unitary(gen, rho0, t); };
}

DensityMatrix symmetrized_pair(Sampler& rng) {
  const DensityMatrix r = rng.mixed_state({2, 2});
  const CMatrix swap = adjacent_swap({2, 2}, 0);
  return DensityMatrix(0.5 * (r.matrix() + swap * r.matrix() * swap), {2, 2});
}

}  // namespace

TEST_CASE("ALD defining properties") {
  const GeneratorSet gen = collective_generators(pauli_terms(3), 2);
  Sampler rng(1);
  const DensityMatrix rho0 = rng.mixed_state({2, 2});
  const AldSet alds = ald_unitary(gen, rho0, kField);
  const StateFamily family = unitary_family(gen, rho0);
  for (int k = 0; k < 3; ++k) {
    const CMatrix& l = alds.ops[static_cast<std::size_t>(k)];
    CHECK(gap(CMatrix(l.adjoint()), CMatrix(-l)) < 1e-9);
    CHECK(std::abs((alds.rho_theta.matrix() * l).trace()) < 1e-8);
    const CMatrix drho = central_diff([&](const RVector& t) { return family(t).matrix(); }, kField, k);
    CHECK(gap(CMatrix(0.5 * (l * alds.rho_theta.matrix() + alds.rho_theta.matrix() * l.adjoint())), drho) < 1e-7);
  }
}

TEST_CASE("ALD commuting single-qubit case") {
  const AldSet alds = ald_unitary(GeneratorSet::unitary({pauli(3)}), plus_state(), vec({0.0}));
  CHECK(gap(alds.generators[0], pauli(3)) < 1e-14);
  CHECK(gap(alds.ops[0], CMatrix(-2.0 * kI * pauli(3))) < 1e-14);

  const DensityMatrix mixed = DensityMatrix::maximally_mixed_qubits(1);
  const AldSet flat = ald_unitary(GeneratorSet::unitary({pauli(1)}), mixed, vec({0.4}));
  const CMatrix& l = flat.ops[0];
  CHECK(max_abs(CMatrix(0.5 * (l * mixed.matrix() + mixed.matrix() * l.adjoint()))) < 1e-15);
}

TEST_CASE("exact QFIM") {
  const RMatrix plus = qfim_unitary_exact(GeneratorSet::unitary({pauli(3)}), plus_state(), vec({0.0}));
  CHECK(plus(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
  for (int n : {2, 3}) {
    const RMatrix ghz = qfim_unitary_exact(collective_generators({pauli(3)}, n), DensityMatrix(ghz_state(3, n)), vec({0.2}));
    CHECK(ghz(0, 0) == doctest::Approx(4.0 * n * n).epsilon(1e-12));
  }
  // the ALD form evaluates the generator variance even on the maximally mixed state
  const RMatrix flat = qfim_unitary_exact(GeneratorSet::unitary({pauli(3)}), DensityMatrix::maximally_mixed_qubits(1), vec({0.3}));
  CHECK(flat(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("RDM QFIM") {
  const auto b = b_operators(pauli_terms(3), kField);
  SUBCASE("product marginals are additive") {
    Sampler rng(2);
    const DensityMatrix r1 = rng.mixed_state({2});
    const DensityMatrix r2(kron(r1.matrix(), r1.matrix()), {2, 2});
    const RMatrix one = qfim_rdm(r1, r2, b, 1);
    for (int n : {2, 5, 40}) CHECK(gap(qfim_rdm(r1, r2, b, n), RMatrix(n * one)) < 1e-12 * n);
  }
  SUBCASE("matches the exact QFIM on dephased GHZ") {
    const DensityMatrix rho = apply_uniform_local_channel(ghz_state(1, 3), dephasing_kraus(0.3));
    const Marginals m = marginals_of(rho);
    CHECK(rel_gap(qfim_rdm(m.rho1, m.rho2, b, 3), qfim_unitary_exact(collective_generators(pauli_terms(3), 3), rho, kField)) < 1e-8);
  }
  SUBCASE("maximally mixed marginals lose the pair term") {
    const DensityMatrix r1 = DensityMatrix::maximally_mixed_qubits(1);
    const DensityMatrix r2 = DensityMatrix::maximally_mixed_qubits(2);
    CHECK(gap(qfim_rdm(r1, r2, b, 7), RMatrix(7.0 * qfim_rdm(r1, r2, b, 1))) < 1e-12);
  }
  CHECK_THROWS_AS(qfim_rdm(DensityMatrix::maximally_mixed_qubits(1), DensityMatrix::maximally_mixed_qubits(1), b, 2), DimensionError);
  CHECK_THROWS_AS(qfim_rdm(DensityMatrix::maximally_mixed_qubits(1), DensityMatrix::maximally_mixed_qubits(2), b, 0), ContractError);
}

TEST_CASE("magnetic-field closed forms") {
  CHECK(gap(magfield_qfim1(vec({0.0, 0.0, 0.0})), RMatrix(4.0 * RMatrix::Identity(3, 3))) < 1e-14);
  CHECK(gap(magfield_qfim1(vec({1e-9, 0.0, 0.0})), RMatrix(4.0 * RMatrix::Identity(3, 3))) < 1e-12);
  RMatrix expected = RMatrix::Zero(3, 3);
  expected.diagonal() << 4.0, 16.0 / (kPi * kPi), 16.0 / (kPi * kPi);
  CHECK(gap(magfield_qfim1(vec({kPi / 2.0, 0.0, 0.0})), expected) < 1e-12);

  const DensityMatrix r1 = DensityMatrix::maximally_mixed_qubits(1);
  const DensityMatrix r2 = DensityMatrix::maximally_mixed_qubits(2);
  Sampler rng(3);
  for (int t = 0; t < 10; ++t) {
    const RVector th = rng.theta(3, 1.5);
    CHECK(gap(magfield_qfim1(th), qfim_rdm(r1, r2, b_operators(pauli_terms(3), th), 1)) < 1e-8);
  }

  const auto b = b_operators(pauli_terms(3), kField);
  for (double lambda : {0.0, 0.3}) {
    const RMatrix closed = magfield_qfim_full(kField, lambda, 4);
    const RMatrix rdm = qfim_rdm(r1, averaged_rdm2(dephasing_kraus(lambda)), b, 4);
    CHECK(gap(closed, rdm) < 1e-8);
  }
  // N = 8 superposed GHZ has exactly the averaged marginal
  const DensityMatrix s8 = apply_uniform_local_channel(superposed_ghz({0.0, 0.0, 0.0}, 8), dephasing_kraus(0.3));
  const Marginals m8 = marginals_of(s8);
  CHECK(gap(magfield_qfim_full(kField, 0.3, 8), qfim_rdm(m8.rho1, m8.rho2, b, 8)) < 1e-8);
  // a forced maximally mixed pair marginal leaves only the linear term
  CHECK(gap(qfim_rdm(r1, r2, b, 8), RMatrix(8.0 * magfield_qfim1(kField))) < 1e-12);
}

TEST_CASE("C_Q bound") {
  Sampler rng(4);
  SUBCASE("single unitary Kraus equals the exact QFIM") {
    const GeneratorSet gen = collective_generators(pauli_terms(3), 2);
    const DensityMatrix rho0 = rng.mixed_state({2, 2});
    const KrausChannel ch = KrausChannel::exponential_family(gen, kField);
    CHECK(gap(cq_bound(ch, rho0, kField), qfim_unitary_exact(gen, rho0, kField)) < 1e-9);
    CHECK(gap(cq_bound_plus_form(ch, rho0, kField), cq_bound(ch, rho0, kField)) < 1e-9);
  }
  SUBCASE("constant channel gives zero") {
    CHECK(max_abs(cq_bound(amplitude_damping_kraus(0.4), rng.mixed_state({2}), vec({0.1, 0.2}))) == 0.0);
  }
  SUBCASE("dominates the fidelity QFIM for a split-Pauli product channel") {
    const RVector th = vec({0.2, 0.1, 0.05});
    const KrausChannel ch = product_channel({pauli_split_channel(th), pauli_split_channel(th)});
    for (int t = 0; t < 5; ++t) {
      const DensityMatrix rho0 = symmetrized_pair(rng);
      const RMatrix fid = qfim_fidelity_oracle([&](const RVector& x) { return apply_channel(ch.at(x), rho0); }, th);
      CHECK(min_eigenvalue(RMatrix(cq_bound(ch, rho0, th) - fid)) >= -1e-7);
    }
  }
}

TEST_CASE("RDM form of C_Q") {
  const RVector th = vec({0.2, 0.1, 0.05});
  const KrausChannel single = pauli_split_channel(th);
  SUBCASE("product and maximally mixed marginals have no pair term") {
    Sampler rng(5);
    const DensityMatrix r1 = rng.mixed_state({2});
    const DensityMatrix r2(kron(r1.matrix(), r1.matrix()), {2, 2});
    CHECK(gap(cq_rdm_channel(single, th, r1, r2, 6), RMatrix(6.0 * cq_rdm_channel(single, th, r1, r2, 1))) < 1e-12);
    const DensityMatrix m1 = DensityMatrix::maximally_mixed_qubits(1);
    const DensityMatrix m2 = DensityMatrix::maximally_mixed_qubits(2);
    CHECK(gap(cq_rdm_channel(single, th, m1, m2, 6), RMatrix(6.0 * cq_rdm_channel(single, th, m1, m2, 1))) < 1e-12);
  }
  SUBCASE("equals the full bound on the product channel") {
    for (int n : {2, 3}) {
      const DensityMatrix rho = apply_uniform_local_channel(ghz_state(1, n), dephasing_kraus(0.3));
      const Marginals m = marginals_of(rho);
      const KrausChannel full = product_channel(std::vector<KrausChannel>(static_cast<std::size_t>(n), single));
      CHECK(gap(cq_rdm_channel(single, th, m.rho1, m.rho2, n), cq_bound(full, rho, th)) < 1e-7);
      // generator-based operators reproduce the same matrix
      CHECK(gap(cq_rdm(m.rho1, m.rho2, d_operators(pauli_split_generators(3), th), n), cq_bound(full, rho, th)) < 1e-7);
    }
  }
}

TEST_CASE("saturation residuals") {
  const DensityMatrix plus = plus_state();
  CHECK(saturation_residual_unitary(GeneratorSet::unitary({pauli(1)}), plus, vec({0.3})) < 1e-15);
  const GeneratorSet commuting = collective_generators({pauli(3), CMatrix(2.0 * pauli(3))}, 2);
  Sampler rng(6);
  CHECK(saturation_residual_unitary(commuting, rng.mixed_state({2, 2}), vec({0.3, 0.1})) < 1e-12);

  SUBCASE("unitary residual is twice the one-body RDM expression") {
    const auto b = b_operators(pauli_terms(3), kField);
    const GeneratorSet gen = collective_generators(pauli_terms(3), 3);
    const DensityMatrix mixed_marginal = apply_uniform_local_channel(ghz_state(2, 3), dephasing_kraus(0.2));
    const double full = saturation_residual_unitary(gen, mixed_marginal, kField);
    const double rdm = saturation_residual_rdm(marginals_of(mixed_marginal).rho1, b, 3);
    MESSAGE("I/2 marginal residuals: " << full << " vs " << rdm);
    CHECK(full < 1e-12);
    CHECK(rdm < 1e-12);
    const DensityMatrix r1(CMatrix((identity(2) + 0.4 * pauli(1) + 0.3 * pauli(3)) / 2.0), {2});
    const DensityMatrix prod(kron_all({r1.matrix(), r1.matrix(), r1.matrix()}), {2, 2, 2});
    const double full_p = saturation_residual_unitary(gen, prod, kField);
    const double rdm_p = saturation_residual_rdm(r1, b, 3);
    CHECK(full_p > 1e-3);
    CHECK(full_p == doctest::Approx(2.0 * rdm_p).epsilon(1e-10));
  }
  SUBCASE("noisy residual") {
    CHECK(saturation_residual_noisy(pauli_split_channel(vec({0.4})), rng.mixed_state({2}), vec({0.4})) < 1e-15);
    const KrausFunction real_rotation = [](const RVector& t) {
      CMatrix r(2, 2);
      r << std::cos(t(0)), -std::sin(t(0)), std::sin(t(0)), std::cos(t(0));
      CMatrix s(2, 2);
      s << std::cos(t(1)), std::sin(t(1)), -std::sin(t(1)), std::cos(t(1));
      return KrausList{r / std::sqrt(2.0), s / std::sqrt(2.0)};
    };
    const RVector th = vec({0.3, 0.7});
    const KrausChannel ch = KrausChannel::from_function(real_rotation, th);
    const DensityMatrix real_rho(CMatrix((identity(2) + 0.5 * pauli(1) + 0.2 * pauli(3)) / 2.0), {2});
    CHECK(saturation_residual_noisy(ch, real_rho, th) < 1e-12);
    const double split = saturation_residual_noisy(pauli_split_channel(rng.theta(3, 1.0)), DensityMatrix::maximally_mixed_qubits(1), kField);
    MESSAGE("split-Pauli channel residual on I/2: " << split);
    CHECK(std::isfinite(split));
  }
}

TEST_CASE("fidelity oracle") {
  const RMatrix constant = qfim_fidelity_oracle([](const RVector&) { return DensityMatrix::maximally_mixed_qubits(1); }, vec({0.2, 0.4}));
  // Richardson on eps and eps/2 amplifies an ulp of 1 - F by about 45 / eps^2
  CHECK(max_abs(constant) < 64.0 * std::numeric_limits<double>::epsilon() / (1e-3 * 1e-3));
  const StateFamily plus = unitary_family(GeneratorSet::unitary({pauli(3)}), plus_state());
  CHECK(qfim_fidelity_oracle(plus, vec({0.0}))(0, 0) == doctest::Approx(4.0).epsilon(1e-6));

  const GeneratorSet gen = collective_generators(pauli_terms(3), 2);
  const auto b = b_operators(pauli_terms(3), kField);
  SUBCASE("pure GHZ pair matches the RDM QFIM") {
    const DensityMatrix rho(ghz_state(3, 2));
    const Marginals m = marginals_of(rho);
    CHECK(gap(qfim_fidelity_oracle(unitary_family(gen, rho), kField), qfim_rdm(m.rho1, m.rho2, b, 2)) < 1e-4);
  }
  SUBCASE("dephased GHZ pair stays below the ALD QFIM") {
    // The ALD QFIM is an upper bound for mixed probes, so only the ordering is asserted.
    const DensityMatrix rho = apply_uniform_local_channel(ghz_state(3, 2), dephasing_kraus(0.3));
    const Marginals m = marginals_of(rho);
    const RMatrix fid = qfim_fidelity_oracle(unitary_family(gen, rho), kField);
    const RMatrix ald = qfim_rdm(m.rho1, m.rho2, b, 2);
    MESSAGE("dephased GHZ N=2: max |J_ALD - J_fid| = " << gap(ald, fid));
    CHECK(min_eigenvalue(RMatrix(ald - fid)) >= -1e-7);
  }
}

TEST_CASE("Holevo witness") {
  const DensityMatrix plus = plus_state();
  const GeneratorSet one = GeneratorSet::unitary({pauli(3)});
  const RMatrix j1 = qfim_unitary_exact(one, plus, vec({0.1}));
  const HolevoWitness w1 = holevo_witness(j1, ald_unitary(one, plus, vec({0.1})), evolve_unitary(one, plus, vec({0.1})));
  CHECK(std::abs(w1.w(0, 0) - 1.0 / j1(0, 0)) < 1e-12);
  CHECK(w1.max_imag < 1e-15);

  Sampler rng(7);
  const GeneratorSet pair = GeneratorSet::unitary({kron(pauli(3), identity(2)), kron(identity(2), pauli(3))});
  const DensityMatrix pp(PureState(rng.pure_state({2, 2})));
  const RVector th = vec({0.2, -0.3});
  const AldSet commuting_alds = ald_unitary(pair, pp, th);
  const HolevoWitness wc = holevo_witness(qfim_unitary_exact(pair, pp, th), commuting_alds, commuting_alds.rho_theta);
  CHECK(saturation_residual_unitary(pair, pp, th) < 1e-10);
  CHECK(wc.max_imag < 1e-9);

  const GeneratorSet noncommuting = GeneratorSet::unitary({pauli(1), pauli(2)});
  const DensityMatrix zero(PureState(pauli_eigenvector(3, 1), {2}));
  const RVector tn = vec({0.0, 0.0});
  const AldSet alds = ald_unitary(noncommuting, zero, tn);
  const RMatrix jq = qfim_unitary_exact(noncommuting, zero, tn);
  const HolevoWitness wn = holevo_witness(jq, alds, alds.rho_theta);
  CHECK(saturation_residual_unitary(noncommuting, zero, tn) > 1.0);
  CHECK(wn.max_imag > 1e-3);
  // Im W = J^-1 Im(D) J^-1 with D_jk = Tr(rho L_j^dag L_k)
  RMatrix im_d(2, 2);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) im_d(j, k) = (alds.rho_theta.matrix() * alds.ops[j].adjoint() * alds.ops[k]).trace().imag();
  const RMatrix inv = inverse_checked(jq);
  CHECK(gap(RMatrix(wn.w.imag()), RMatrix(inv * im_d * inv)) < 1e-12);
  CHECK(gap(RMatrix(wn.w.real()), inv) < 1e-7);
}

TEST_CASE("super-Heisenberg structure") {
  const RVector th = vec({0.2, 0.1, 0.05});
  const KrausChannel split = pauli_split_channel(th);
  const SuperHeisenbergTerms mixed = super_heisenberg_bound(split, DensityMatrix::maximally_mixed_qubits(2), 4, th);
  CHECK(max_abs(mixed.two_body) < 1e-14);

  const CVector bell = (basis(4, 0) + basis(4, 3)) / std::sqrt(2.0);
  const DensityMatrix bell_rho(PureState(bell, {2, 2}));
  const SuperHeisenbergTerms still = super_heisenberg_bound(KrausChannel::constant({identity(2)}), bell_rho, 4, vec({0.1}));
  CHECK(max_abs(still.two_body) == 0.0);

  const SuperHeisenbergTerms at_n = super_heisenberg_bound(split, bell_rho, 5, th);
  const SuperHeisenbergTerms at_2n = super_heisenberg_bound(split, bell_rho, 10, th);
  CHECK(max_abs(at_n.two_body) > 1e-3);
  const RMatrix pair_n = at_n.total - 5.0 * at_n.one_body;
  const RMatrix pair_2n = at_2n.total - 10.0 * at_2n.one_body;
  CHECK(gap(pair_2n, RMatrix(pair_n * (10.0 * 9.0) / (5.0 * 4.0))) < 1e-12 * max_abs(pair_2n));
  CHECK(gap(pair_n, RMatrix(20.0 * at_n.two_body)) < 1e-12 * max_abs(pair_n));

  const DensityMatrix biased(kron(CMatrix((identity(2) + 0.5 * pauli(3)) / 2.0), identity(2) / 2.0), {2, 2});
  CHECK_THROWS_AS(super_heisenberg_bound(split, biased, 4, th), ContractError);
}

TEST_CASE("inverse and report validation") {
  RMatrix singular = RMatrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(inverse_checked(singular), RankDeficiencyError);
  RMatrix spd(2, 2);
  spd << 2.0, 0.5, 0.5, 1.0;
  CHECK(gap(RMatrix(inverse_checked(spd) * spd), RMatrix(RMatrix::Identity(2, 2))) < 1e-14);

  RMatrix indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -0.1;
  CHECK_THROWS_AS(require_symmetric_psd(indefinite, "test"), ContractError);

  BoundReport report;
  report.q = 2;
  report.j_q = TaggedMatrix{spd, Method::Exact};
  report.c_q = TaggedMatrix{RMatrix(spd + RMatrix::Identity(2, 2)), Method::Rdm};
  CHECK_NOTHROW(report.validate());
  report.set_cost(RMatrix::Identity(2, 2), 10.0);
  CHECK(*report.scalar_cost == doctest::Approx(inverse_checked(spd).trace() / 10.0));
  report.c_q = TaggedMatrix{RMatrix(spd - 0.1 * RMatrix::Identity(2, 2)), Method::Rdm};
  CHECK_THROWS_AS(report.validate(), ContractError);
  CHECK(to_string(Method::FidelityOracle) == "fidelity-oracle");
}
