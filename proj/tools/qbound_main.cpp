// qbound command-line front end.
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qbound/check_suite.hpp"
#include "qbound/scenario.hpp"

namespace {

using namespace qbound;

constexpr int kExitOk = 0;
constexpr int kExitContract = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
  std::string config;
  std::string out;
  std::string format;
  std::uint64_t seed = 0;
};

std::set<std::string> select_items(const ScenarioConfig& cfg, const std::set<std::string>& family, const std::string& fallback) {
  std::set<std::string> chosen;
  for (const auto& item : cfg.compute)
    if (family.count(item)) chosen.insert(item);
  if (chosen.empty()) chosen.insert(fallback);
  return chosen;
}

RVector parse_theta(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ConfigError("--theta: cannot parse '" + token + "'");
    }
  }
  if (values.size() != 3) throw ConfigError("--theta: expected three comma-separated values");
  return Eigen::Map<RVector>(values.data(), 3);
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const int n = std::stoi(text);
      return {n, n};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("--n: expected a range like 2:8");
  }
}

void print_points(const ScenarioResult& result) {
  for (const auto& point : result.points) {
    std::cout << "n = " << point.n << '\n';
    for (const auto& [name, tagged] : point.matrices) {
      Eigen::SelfAdjointEigenSolver<RMatrix> eig(tagged.value, Eigen::EigenvaluesOnly);
      std::cout << "  " << name << " [" << to_string(tagged.method) << "] eigenvalues: " << eig.eigenvalues().transpose() << '\n';
    }
    for (const auto& [name, value] : point.scalars) std::cout << "  " << name << " = " << value << '\n';
    for (const auto& note : point.notes) std::cout << "  note: " << note << '\n';
  }
  for (const auto& [name, value] : result.summary) std::cout << name << " = " << value << '\n';
}

void emit(const ScenarioResult& result, const CommonOptions& opts, const std::string& cfg_dir, const std::string& cfg_format) {
  const std::string dir = !opts.out.empty() ? opts.out : cfg_dir;
  const std::string format = !opts.format.empty() ? opts.format : cfg_format;
  if (dir.empty()) {
    print_points(result);
    return;
  }
  for (const auto& path : write_outputs(result, dir, format, opts.seed)) std::cout << "wrote " << path.string() << '\n';
}

int run_config_command(const CommonOptions& opts, const std::set<std::string>& family, const std::string& fallback) {
  ScenarioConfig cfg = load_config(opts.config);
  if (!family.empty()) cfg.compute = select_items(cfg, family, fallback);
  const ScenarioResult result = run_scenario(cfg);
  if (!opts.out.empty() || !cfg.output_dir.empty()) print_points(result);
  emit(result, opts, cfg.output_dir, cfg.output_format);
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_config) {
  auto* config = cmd->add_option("--config", opts.config, "Scenario config (JSON)");
  if (needs_config) config->required();
  cmd->add_option("--out", opts.out, "Output directory for report files");
  cmd->add_option("--format", opts.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--seed", opts.seed, "Seed for randomized checks");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiparameter quantum estimation bounds"};
  app.require_subcommand(1);
  CommonOptions opts;

  auto* run = app.add_subcommand("run", "Run a scenario exactly as configured");
  auto* qfim = app.add_subcommand("qfim", "Quantum Fisher information (exact, RDM, fidelity oracle, Holevo witness)");
  auto* cq = app.add_subcommand("cq", "Computable upper bound C_Q (full and RDM forms)");
  auto* fim = app.add_subcommand("fim", "Classical Fisher information of a POVM");
  auto* saturate = app.add_subcommand("saturate", "Saturation residuals and limit FIM");
  auto* scaling = app.add_subcommand("scaling", "Largest-eigenvalue scaling sweep with log-log slope");
  for (auto* cmd : {run, qfim, cq, fim, saturate, scaling}) add_common(cmd, opts, true);

  auto* magfield = app.add_subcommand("magfield", "Magnetic-field reference experiment");
  add_common(magfield, opts, false);
  double lambda = 0.3;
  std::string theta_text = "0.3,0.2,0.1";
  std::string n_text = "2:8";
  int exact_cap = 5;
  magfield->add_option("--lambda", lambda, "Dephasing strength");
  magfield->add_option("--theta", theta_text, "theta_1,theta_2,theta_3");
  magfield->add_option("--n", n_text, "Particle range, e.g. 2:8");
  magfield->add_option("--exact-cap", exact_cap, "Largest n for the brute-force QFIM");

  auto* check = app.add_subcommand("check", "Run the invariant suite and print a pass/fail table");
  check->add_option("--seed", opts.seed, "Seed for random probes and channels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return run_config_command(opts, {}, "");
    if (*qfim) {
      const ScenarioConfig cfg = load_config(opts.config);
      const std::string fallback = cfg.channel.kind == ChannelKind::Unitary ? "jq_rdm" : "fidelity_oracle";
      return run_config_command(opts, {"jq_exact", "jq_rdm", "fidelity_oracle", "holevo"}, fallback);
    }
    if (*cq) return run_config_command(opts, {"cq", "cq_rdm"}, "cq_rdm");
    if (*fim) return run_config_command(opts, {"fim_fd", "fim_limit"}, "fim_fd");
    if (*saturate) return run_config_command(opts, {"saturation", "holevo", "fim_limit"}, "saturation");
    if (*scaling) {
      const ScenarioConfig cfg = load_config(opts.config);
      const ScenarioResult result = scaling_sweep(cfg);
      std::cout << "slope = " << *result.slope << " (log residual " << *result.slope_residual << ")\n";
      const std::string dir = !opts.out.empty() ? opts.out : cfg.output_dir;
      const std::string format = !opts.format.empty() ? opts.format : cfg.output_format;
      if (!dir.empty())
        for (const auto& path : write_outputs(result, dir, format, opts.seed)) std::cout << "wrote " << path.string() << '\n';
      else
        std::cout << to_csv(result.rows);
      return kExitOk;
    }
    if (*magfield) {
      MagfieldOptions mo;
      mo.lambda = lambda;
      mo.theta = parse_theta(theta_text);
      std::tie(mo.n_min, mo.n_max) = parse_range(n_text);
      mo.exact_cap = exact_cap;
      const ScenarioResult result = magfield_experiment(mo);
      print_points(result);
      if (!opts.out.empty()) {
        const std::string format = opts.format.empty() ? "both" : opts.format;
        for (const auto& path : write_outputs(result, opts.out, format, opts.seed)) std::cout << "wrote " << path.string() << '\n';
      }
      return kExitOk;
    }
    if (*check) {
      const auto results = run_check_suite(opts.seed);
      std::cout << "seed " << opts.seed << '\n' << format_check_table(results);
      for (const auto& r : results)
        if (!r.passed) return kExitContract;
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractError& e) {
    std::cerr << "contract violation: " << e.what() << '\n';
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitContract;
  }
  return kExitOk;
}
