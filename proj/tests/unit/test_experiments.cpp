#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "qbound/scenario.hpp"
#include "test_support.hpp"

using namespace qbound;
using namespace qbound::testing;

namespace {

const std::string kMixedMarginals = R"({"type": "marginals",
  "rho1": [[0.5, 0], [0, 0.5]],
  "rho2": [[0.25, 0, 0, 0], [0, 0.25, 0, 0], [0, 0, 0.25, 0], [0, 0, 0, 0.25]]})";

std::string sweep_config(const std::string& probe) {
  return R"({"scenario_id": "s", "probe": )" + probe +
         R"(, "channel": {"type": "unitary"}, "theta": [0.3, 0.2, 0.1], "n_list": [4, 8, 16, 32, 64, 128, 256, 512]})";
}

const RMatrix& matrix_named(const ScenarioPoint& p, const std::string& name) {
  for (const auto& [n, m] : p.matrices)
    if (n == name) return m.value;
  throw std::runtime_error("missing matrix " + name);
}

double scalar_named(const ScenarioPoint& p, const std::string& name) {
  for (const auto& [n, v] : p.scalars)
    if (n == name) return v;
  throw std::runtime_error("missing scalar " + name);
}

}  // namespace

TEST_CASE("config parsing") {
  const ScenarioConfig cfg = parse_config(R"({
    "scenario_id": "x", "probe": {"type": "ghz", "direction": 2, "noise": {"type": "dephasing", "lambda": 0.3}},
    "channel": {"type": "dephasing", "lambda": 0.1}, "theta": [0.1, 0.2], "n_list": [2, 3],
    "compute": ["cq", "fim_fd"], "povm": "saturating", "cost": {"matrix": [[1, 0], [0, 2]], "repetitions": 5},
    "tolerances": {"fidelity_step": 0.002}, "output": {"dir": "out", "format": "json"}})");
  CHECK(cfg.scenario_id == "x");
  CHECK(cfg.probe.direction == 2);
  CHECK(cfg.probe.noise == NoiseKind::Dephasing);
  CHECK(cfg.channel.kind == ChannelKind::Dephasing);
  CHECK(cfg.q() == 2);
  CHECK(cfg.n_list == std::vector<int>{2, 3});
  CHECK(cfg.compute.count("fim_fd") == 1);
  CHECK(cfg.povm == PovmKind::Saturating);
  CHECK((*cfg.cost_matrix)(1, 1) == 2.0);
  CHECK(cfg.repetitions == 5.0);
  CHECK(cfg.fidelity_step == 0.002);
  CHECK(cfg.output_format == "json");
}

TEST_CASE("config errors name the field") {
  const auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("{").find("parse error") != std::string::npos);
  CHECK(message("{\n\"theta\": [0.1],\n \"oops\" }").find("line 3") != std::string::npos);
  CHECK(message(R"({"probe": {"type": "ghz"}, "channel": {"type": "unitary"}})").find("theta") != std::string::npos);
  CHECK(message(R"({"probe": {"type": "ghz"}, "channel": {"type": "warp"}, "theta": [1]})").find("channel.type") != std::string::npos);
  CHECK(message(R"({"probe": {"type": "ghz"}, "channel": {"type": "unitary"}, "theta": [1], "n_list": [0]})").find("n_list") != std::string::npos);
  CHECK(message(R"({"probe": {"type": "ghz"}, "channel": {"type": "unitary"}, "theta": [1], "extra": 1})").find("extra") != std::string::npos);
  CHECK(message(R"({"probe": {"type": "ghz"}, "channel": {"type": "unitary"}, "theta": [1], "compute": ["nope"]})").find("compute") != std::string::npos);
  CHECK(message(R"({"probe": {"type": "ghz"}, "channel": {"type": "explicit_kraus", "ops": [[[1, 0], [0, 0.5]]]}, "theta": [1]})").find("channel.ops") !=
        std::string::npos);
  CHECK(message(R"({"probe": {"type": "explicit", "factor_dims": [2], "state": [[1, 0], [0, 1]]}, "channel": {"type": "unitary"}, "theta": [1]})")
            .find("probe.state") != std::string::npos);
  CHECK(message(R"({"probe": {"type": "ghz"}, "channel": {"type": "unitary", "generators": [[[1, 0], [0, -1]]]}, "theta": [1, 2]})")
            .find("generators") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("identity channel gives zero C_Q") {
  const ScenarioConfig cfg = parse_config(R"({"probe": {"type": "ghz", "direction": 1},
    "channel": {"type": "explicit_kraus", "ops": [[[1, 0], [0, 1]]]}, "theta": [0.2, 0.1], "n_list": [2, 3],
    "compute": ["cq", "cq_rdm"]})");
  const ScenarioResult result = run_scenario(cfg);
  for (const auto& p : result.points) {
    CHECK(max_abs(matrix_named(p, "cq")) == 0.0);
    CHECK(max_abs(matrix_named(p, "cq_rdm")) == 0.0);
  }
}

TEST_CASE("unitary scenario agrees across methods") {
  const ScenarioConfig cfg = parse_config(R"({"probe": {"type": "ghz", "direction": 3, "noise": {"type": "dephasing", "lambda": 0.3}},
    "channel": {"type": "unitary"}, "theta": [0.3, 0.2, 0.1], "n_list": [2, 3, 4],
    "compute": ["jq_exact", "jq_rdm", "cq", "saturation", "holevo"]})");
  const ScenarioResult result = run_scenario(cfg);
  REQUIRE(result.points.size() == 3);
  for (const auto& p : result.points) {
    CHECK(rel_gap(matrix_named(p, "jq_rdm"), matrix_named(p, "jq_exact")) < 1e-8);
    CHECK(gap(matrix_named(p, "cq"), matrix_named(p, "jq_exact")) < 1e-9);
    CHECK(scalar_named(p, "holevo.max_imag") < 1e-9);
    CHECK(p.report.saturation_residuals.count("rdm") == 1);
  }
  CHECK(result.rows.front().quantity == "jq_exact.eigenvalue");
}

TEST_CASE("noisy scenario orders the bounds") {
  const ScenarioConfig cfg = parse_config(R"({"probe": {"type": "ghz", "direction": 1},
    "channel": {"type": "amplitude_damping", "kappa": 0.4}, "theta": [0.3, 0.2], "n_list": [1, 2],
    "compute": ["cq", "cq_rdm", "fidelity_oracle", "fim_fd"]})");
  const ScenarioResult result = run_scenario(cfg);
  for (const auto& p : result.points) {
    const RMatrix& cq = matrix_named(p, "cq");
    CHECK(gap(matrix_named(p, "cq_rdm"), cq) < 1e-9);
    CHECK(min_eigenvalue(RMatrix(cq - matrix_named(p, "j_fid"))) >= -1e-7);
    CHECK(min_eigenvalue(RMatrix(matrix_named(p, "j_fid") - matrix_named(p, "fim_fd"))) >= -1e-5);
  }
}

TEST_CASE("saturating POVM at its design point") {
  const ScenarioConfig cfg = parse_config(R"({"probe": {"type": "ghz", "direction": 1},
    "channel": {"type": "unitary"}, "theta": [0.3], "n_list": [1], "compute": ["fim_fd"], "povm": "saturating"})");
  const ScenarioResult result = run_scenario(cfg);
  const ScenarioPoint& p = result.points.front();
  CHECK(scalar_named(p, "povm.min_eigenvalue") < 0.0);
  // the finite-difference stencil leaves the design point, where the POVM yields negative probabilities
  REQUIRE(p.notes.size() == 1);
  CHECK(p.notes.front().find("fim_fd skipped") != std::string::npos);
  CHECK(p.notes.front().find("invalid POVM") != std::string::npos);
  CHECK(p.report.j_c.has_value() == false);
}

TEST_CASE("large-N probes without closed-form marginals are rejected") {
  const ScenarioConfig cfg = parse_config(R"({"probe": {"type": "superposed_ghz", "deltas": [0.1, 0, 0]},
    "channel": {"type": "unitary"}, "theta": [0.3, 0.2, 0.1], "n_list": [20], "compute": ["jq_rdm"]})");
  CHECK_THROWS_AS(run_scenario(cfg), ContractError);
  const ScenarioConfig exact_big = parse_config(R"({"probe": {"type": "ghz"},
    "channel": {"type": "unitary"}, "theta": [0.3, 0.2, 0.1], "n_list": [11], "compute": ["jq_exact"]})");
  CHECK_THROWS_AS(run_scenario(exact_big), ContractError);
}

TEST_CASE("scaling sweeps") {
  SUBCASE("dephased GHZ marginals grow quadratically") {
    for (int k = 1; k <= 3; ++k) {
      const ScenarioResult r = scaling_sweep(parse_config(
          sweep_config(R"({"type": "ghz", "direction": )" + std::to_string(k) + R"(, "noise": {"type": "dephasing", "lambda": 0.3}})")));
      MESSAGE("direction " << k << " slope " << *r.slope);
      CHECK(std::abs(*r.slope - 2.0) < 0.05);
    }
  }
  SUBCASE("product marginals grow linearly") {
    const ScenarioResult r = scaling_sweep(parse_config(sweep_config(R"({"type": "product", "rho1": [[0.8, 0.1], [0.1, 0.2]]})")));
    CHECK(std::abs(*r.slope - 1.0) < 0.02);
  }
  SUBCASE("maximally mixed marginals grow linearly") {
    const ScenarioResult r = scaling_sweep(parse_config(sweep_config(kMixedMarginals)));
    CHECK(std::abs(*r.slope - 1.0) < 1e-9);
  }
  SUBCASE("C_Q sweep through the split-Pauli channel") {
    std::string text = sweep_config(R"({"type": "ghz", "direction": 1, "noise": {"type": "dephasing", "lambda": 0.3}})");
    text.replace(text.find(R"({"type": "unitary"})"), 19, R"({"type": "pauli_split"})");
    text.back() = ',';
    text += R"( "scaling": {"quantity": "cq_rdm"}})";
    const ScenarioResult r = scaling_sweep(parse_config(text));
    CHECK(*r.slope > 1.5);
  }
  CHECK_THROWS_AS(scaling_sweep(parse_config(R"({"probe": {"type": "ghz"}, "channel": {"type": "unitary"}, "theta": [1], "n_list": [2, 3, 4]})")),
                  ConfigError);
}

TEST_CASE("log-log fit") {
  const SlopeFit fit = fit_log_log({1, 2, 4, 8}, {3, 12, 48, 192});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0));
  CHECK(fit.residual < 1e-12);
  CHECK_THROWS_AS(fit_log_log({2, 2, 2}, {1, 2, 3}), ContractError);
  CHECK_THROWS_AS(fit_log_log({1, 2}, {1, 0}), ContractError);
}

TEST_CASE("magnetic-field experiment") {
  const ScenarioResult r = magfield_experiment(MagfieldOptions{});
  REQUIRE(r.points.size() == 7);
  double closed_gap = -1.0;
  double wide_slope = 0.0;
  for (const auto& [name, value] : r.summary) {
    if (name == "qfim1_closed_vs_numeric") closed_gap = value;
    if (name == "closed_form_slope_4_512") wide_slope = value;
  }
  CHECK(closed_gap >= 0.0);
  CHECK(closed_gap < 1e-8);
  MESSAGE("closed-form slope 4..512 " << wide_slope << ", fitted slope 2..8 " << *r.slope);
  for (const auto& p : r.points) {
    if (p.n <= 5) CHECK(scalar_named(p, "rdm_vs_exact_relative_error") < 1e-8);
    // pair term vanishes with maximally mixed marginals
    CHECK(gap(matrix_named(p, "jq_mixed_marginals"), RMatrix(p.n * matrix_named(r.points.front(), "jq_mixed_marginals") / r.points.front().n)) < 1e-10);
  }
  const ScenarioPoint& eight = r.points.back();
  CHECK(scalar_named(eight, "closed_form_vs_rdm") < 1e-8);
  CHECK_THROWS_AS(magfield_experiment(MagfieldOptions{.lambda = -1.0}), ConfigError);
}

TEST_CASE("serialization is deterministic and flat") {
  const ScenarioConfig cfg = parse_config(R"({"scenario_id": "det", "probe": {"type": "ghz", "direction": 1},
    "channel": {"type": "pauli_split"}, "theta": [0.2, 0.1, 0.05], "n_list": [2], "compute": ["cq", "fidelity_oracle"]})");
  const ScenarioResult a = run_scenario(cfg);
  const ScenarioResult b = run_scenario(cfg);
  CHECK(to_csv(a.rows) == to_csv(b.rows));
  CHECK(to_json(a, 0) == to_json(b, 0));
  const std::string csv = to_csv(a.rows);
  CHECK(csv.rfind("scenario_id,n,quantity,index,value,method\n", 0) == 0);
  CHECK(csv.find("det,2,cq.eigenvalue,0,") != std::string::npos);
  CHECK(csv.find(",fidelity-oracle\n") != std::string::npos);
  CHECK(to_json(a, 0).find("\"seed\": 0") != std::string::npos);
}
