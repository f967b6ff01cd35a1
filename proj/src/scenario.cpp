#include "qbound/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "qbound/measurement.hpp"

namespace qbound {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

const std::vector<std::string> kComputeItems = {"jq_exact", "jq_rdm",     "cq",      "cq_rdm",         "fim_fd",
                                                "fim_limit", "saturation", "holevo", "fidelity_oracle"};

namespace {

constexpr int kMaxNoisyBruteForce = 6;

[[noreturn]] void config_fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

const Json& require_field(const Json& node, const std::string& key, const std::string& path) {
  if (!node.is_object() || !node.contains(key)) config_fail(path + key, "missing");
  return node.at(key);
}

double number_at(const Json& node, const std::string& path) {
  if (!node.is_number()) config_fail(path, "expected a number");
  return node.get<double>();
}

int integer_at(const Json& node, const std::string& path) {
  if (!node.is_number_integer()) config_fail(path, "expected an integer");
  return node.get<int>();
}

std::string string_at(const Json& node, const std::string& path) {
  if (!node.is_string()) config_fail(path, "expected a string");
  return node.get<std::string>();
}

void reject_unknown(const Json& node, const std::set<std::string>& allowed, const std::string& path) {
  for (const auto& [key, value] : node.items()) {
    (void)value;
    if (!allowed.count(key)) config_fail(path + key, "unknown key");
  }
}

RMatrix real_table(const Json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) config_fail(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(node.size());
  Eigen::Index cols = -1;
  RMatrix out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = node[static_cast<std::size_t>(r)];
    if (!row.is_array()) config_fail(path, "row " + std::to_string(r) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      out.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) config_fail(path, "ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = number_at(row[static_cast<std::size_t>(c)], path);
  }
  return out;
}

// Either a nested real array or {"real": [[..]], "imag": [[..]]}.
CMatrix complex_matrix(const Json& node, const std::string& path) {
  if (node.is_array()) {
    const RMatrix re = real_table(node, path);
    if (re.rows() != re.cols()) config_fail(path, "matrix must be square");
    return re.cast<Complex>();
  }
  if (!node.is_object()) config_fail(path, "expected a matrix");
  reject_unknown(node, {"real", "imag"}, path + ".");
  const RMatrix re = real_table(require_field(node, "real", path + "."), path + ".real");
  RMatrix im = RMatrix::Zero(re.rows(), re.cols());
  if (node.contains("imag")) im = real_table(node.at("imag"), path + ".imag");
  if (re.rows() != re.cols() || im.rows() != re.rows() || im.cols() != re.cols()) config_fail(path, "real/imag shapes differ or not square");
  CMatrix out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

DensityMatrix density_from(const Json& node, const std::string& path, std::vector<int> dims) {
  try {
    return DensityMatrix(complex_matrix(node, path), std::move(dims));
  } catch (const ContractError& e) {
    config_fail(path, e.what());
  }
}

KrausChannel noise_channel(NoiseKind kind, double strength) {
  switch (kind) {
    case NoiseKind::Dephasing:
      return dephasing_kraus(strength);
    case NoiseKind::AmplitudeDamping:
      return amplitude_damping_kraus(strength);
    case NoiseKind::None:
      break;
  }
  return KrausChannel::constant({identity(2)});
}

std::vector<CMatrix> hamiltonian_terms(const ScenarioConfig& cfg) {
  return cfg.channel.generators.empty() ? pauli_terms(cfg.q()) : cfg.channel.generators;
}

bool is_unitary(const ScenarioConfig& cfg) { return cfg.channel.kind == ChannelKind::Unitary; }

int local_dim(const ScenarioConfig& cfg) {
  switch (cfg.channel.kind) {
    case ChannelKind::Unitary:
    case ChannelKind::Dephasing:
    case ChannelKind::AmplitudeDamping:
      return static_cast<int>(hamiltonian_terms(cfg).front().rows());
    case ChannelKind::ExplicitKraus:
      return static_cast<int>(cfg.channel.kraus.front().rows());
    case ChannelKind::PauliSplit:
      break;
  }
  return 2;
}

// Whole-register channel for brute-force paths.
KrausChannel full_channel(const ScenarioConfig& cfg, int n) {
  if (is_unitary(cfg)) return KrausChannel::exponential_family(collective_generators(hamiltonian_terms(cfg), n), cfg.theta);
  if (n > kMaxNoisyBruteForce)
    throw ContractError("brute-force noisy channel limited to n <= " + std::to_string(kMaxNoisyBruteForce) + " particles");
  return product_channel(std::vector<KrausChannel>(static_cast<std::size_t>(n), per_particle_channel(cfg)));
}

const DensityMatrix& require_state(const std::optional<DensityMatrix>& state, const std::string& item) {
  if (!state) throw ContractError(item + ": needs the full probe state, but the probe only provides marginals");
  return *state;
}

void require_unitary_item(const ScenarioConfig& cfg, const std::string& item) {
  if (!is_unitary(cfg)) throw ContractError(item + ": only defined for unitary channels");
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(root, {"scenario_id", "probe", "channel", "theta", "n_list", "compute", "povm", "cost", "tolerances", "scaling", "output", "description"}, "");

  ScenarioConfig cfg;
  if (root.contains("scenario_id")) cfg.scenario_id = string_at(root.at("scenario_id"), "scenario_id");

  const Json& theta = require_field(root, "theta", "");
  if (!theta.is_array() || theta.empty() || theta.size() > 3) config_fail("theta", "expected 1 to 3 numbers");
  cfg.theta.resize(static_cast<Eigen::Index>(theta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) cfg.theta(static_cast<Eigen::Index>(i)) = number_at(theta[i], "theta[" + std::to_string(i) + "]");

  if (root.contains("n_list")) {
    const Json& nl = root.at("n_list");
    if (!nl.is_array() || nl.empty()) config_fail("n_list", "expected a non-empty array");
    cfg.n_list.clear();
    for (std::size_t i = 0; i < nl.size(); ++i) {
      const int n = integer_at(nl[i], "n_list[" + std::to_string(i) + "]");
      if (n < 1) config_fail("n_list[" + std::to_string(i) + "]", "entries must be >= 1");
      cfg.n_list.push_back(n);
    }
  }

  // Channel
  const Json& ch = require_field(root, "channel", "");
  const std::string ch_type = string_at(require_field(ch, "type", "channel."), "channel.type");
  if (ch_type == "unitary") {
    cfg.channel.kind = ChannelKind::Unitary;
    reject_unknown(ch, {"type", "generators"}, "channel.");
  } else if (ch_type == "dephasing") {
    cfg.channel.kind = ChannelKind::Dephasing;
    reject_unknown(ch, {"type", "generators", "lambda"}, "channel.");
    cfg.channel.strength = number_at(require_field(ch, "lambda", "channel."), "channel.lambda");
    if (cfg.channel.strength < 0) config_fail("channel.lambda", "must be non-negative");
  } else if (ch_type == "amplitude_damping") {
    cfg.channel.kind = ChannelKind::AmplitudeDamping;
    reject_unknown(ch, {"type", "generators", "kappa"}, "channel.");
    cfg.channel.strength = number_at(require_field(ch, "kappa", "channel."), "channel.kappa");
    if (cfg.channel.strength < 0) config_fail("channel.kappa", "must be non-negative");
  } else if (ch_type == "pauli_split") {
    cfg.channel.kind = ChannelKind::PauliSplit;
    reject_unknown(ch, {"type"}, "channel.");
  } else if (ch_type == "explicit_kraus") {
    cfg.channel.kind = ChannelKind::ExplicitKraus;
    reject_unknown(ch, {"type", "ops"}, "channel.");
    const Json& ops = require_field(ch, "ops", "channel.");
    if (!ops.is_array() || ops.empty()) config_fail("channel.ops", "expected a non-empty array of matrices");
    for (std::size_t i = 0; i < ops.size(); ++i) cfg.channel.kraus.push_back(complex_matrix(ops[i], "channel.ops[" + std::to_string(i) + "]"));
    try {
      (void)KrausChannel::constant(cfg.channel.kraus);
    } catch (const ContractError& e) {
      config_fail("channel.ops", e.what());
    }
  } else {
    config_fail("channel.type", "unknown channel type '" + ch_type + "'");
  }
  if (ch.contains("generators")) {
    const Json& g = ch.at("generators");
    if (g.is_string()) {
      if (g.get<std::string>() != "pauli") config_fail("channel.generators", "only \"pauli\" or a list of matrices");
    } else {
      if (!g.is_array() || g.size() != theta.size()) config_fail("channel.generators", "expected one matrix per theta entry");
      for (std::size_t i = 0; i < g.size(); ++i) {
        CMatrix m = complex_matrix(g[i], "channel.generators[" + std::to_string(i) + "]");
        if (hermiticity_residual(m) > kHermitianTol) config_fail("channel.generators[" + std::to_string(i) + "]", "not Hermitian");
        cfg.channel.generators.push_back(std::move(m));
      }
    }
  }

  // Probe
  const Json& probe = require_field(root, "probe", "");
  const std::string p_type = string_at(require_field(probe, "type", "probe."), "probe.type");
  if (p_type == "ghz") {
    cfg.probe.kind = ProbeKind::Ghz;
    reject_unknown(probe, {"type", "direction", "noise"}, "probe.");
    if (probe.contains("direction")) cfg.probe.direction = integer_at(probe.at("direction"), "probe.direction");
    if (cfg.probe.direction < 1 || cfg.probe.direction > 3) config_fail("probe.direction", "must be 1, 2 or 3");
  } else if (p_type == "superposed_ghz") {
    cfg.probe.kind = ProbeKind::SuperposedGhz;
    reject_unknown(probe, {"type", "deltas", "noise"}, "probe.");
    if (probe.contains("deltas")) {
      const Json& d = probe.at("deltas");
      if (!d.is_array() || d.size() != 3) config_fail("probe.deltas", "expected three phases");
      for (std::size_t i = 0; i < 3; ++i) cfg.probe.deltas[i] = number_at(d[i], "probe.deltas[" + std::to_string(i) + "]");
    }
  } else if (p_type == "explicit") {
    cfg.probe.kind = ProbeKind::Explicit;
    reject_unknown(probe, {"type", "state", "factor_dims", "noise"}, "probe.");
    const Json& dims_node = require_field(probe, "factor_dims", "probe.");
    if (!dims_node.is_array() || dims_node.empty()) config_fail("probe.factor_dims", "expected a non-empty array");
    std::vector<int> dims;
    for (std::size_t i = 0; i < dims_node.size(); ++i) dims.push_back(integer_at(dims_node[i], "probe.factor_dims"));
    cfg.probe.explicit_state = density_from(require_field(probe, "state", "probe."), "probe.state", dims);
    cfg.n_list = {static_cast<int>(dims.size())};
  } else if (p_type == "marginals") {
    cfg.probe.kind = ProbeKind::Marginals;
    reject_unknown(probe, {"type", "rho1", "rho2"}, "probe.");
    cfg.probe.rho1 = density_from(require_field(probe, "rho1", "probe."), "probe.rho1", {2});
    cfg.probe.rho2 = density_from(require_field(probe, "rho2", "probe."), "probe.rho2", {2, 2});
  } else if (p_type == "product") {
    cfg.probe.kind = ProbeKind::Product;
    reject_unknown(probe, {"type", "rho1"}, "probe.");
    cfg.probe.rho1 = density_from(require_field(probe, "rho1", "probe."), "probe.rho1", {2});
  } else {
    config_fail("probe.type", "unknown probe type '" + p_type + "'");
  }
  if (probe.contains("noise")) {
    const Json& noise = probe.at("noise");
    const std::string n_type = string_at(require_field(noise, "type", "probe.noise."), "probe.noise.type");
    if (n_type == "dephasing") {
      reject_unknown(noise, {"type", "lambda"}, "probe.noise.");
      cfg.probe.noise = NoiseKind::Dephasing;
      cfg.probe.noise_strength = number_at(require_field(noise, "lambda", "probe.noise."), "probe.noise.lambda");
    } else if (n_type == "amplitude_damping") {
      reject_unknown(noise, {"type", "kappa"}, "probe.noise.");
      cfg.probe.noise = NoiseKind::AmplitudeDamping;
      cfg.probe.noise_strength = number_at(require_field(noise, "kappa", "probe.noise."), "probe.noise.kappa");
    } else {
      config_fail("probe.noise.type", "unknown noise type '" + n_type + "'");
    }
    if (cfg.probe.noise_strength < 0) config_fail("probe.noise", "strength must be non-negative");
  }

  if (root.contains("compute")) {
    const Json& c = root.at("compute");
    if (!c.is_array()) config_fail("compute", "expected an array of names");
    for (const auto& item : c) {
      const std::string name = string_at(item, "compute");
      if (std::find(kComputeItems.begin(), kComputeItems.end(), name) == kComputeItems.end()) config_fail("compute", "unknown item '" + name + "'");
      cfg.compute.insert(name);
    }
  }
  if (root.contains("povm")) {
    const std::string p = string_at(root.at("povm"), "povm");
    if (p == "computational") {
      cfg.povm = PovmKind::Computational;
    } else if (p == "saturating") {
      cfg.povm = PovmKind::Saturating;
    } else {
      config_fail("povm", "expected \"computational\" or \"saturating\"");
    }
  }
  if (root.contains("cost")) {
    const Json& cost = root.at("cost");
    reject_unknown(cost, {"matrix", "repetitions"}, "cost.");
    cfg.cost_matrix = real_table(require_field(cost, "matrix", "cost."), "cost.matrix");
    if (cfg.cost_matrix->rows() != cfg.q() || cfg.cost_matrix->cols() != cfg.q()) config_fail("cost.matrix", "must be q x q");
    if (cost.contains("repetitions")) cfg.repetitions = number_at(cost.at("repetitions"), "cost.repetitions");
    if (!(cfg.repetitions > 0)) config_fail("cost.repetitions", "must be positive");
  }
  if (root.contains("tolerances")) {
    const Json& tol = root.at("tolerances");
    reject_unknown(tol, {"fidelity_step", "fd_step"}, "tolerances.");
    if (tol.contains("fidelity_step")) cfg.fidelity_step = number_at(tol.at("fidelity_step"), "tolerances.fidelity_step");
    if (tol.contains("fd_step")) cfg.fd_step = number_at(tol.at("fd_step"), "tolerances.fd_step");
    if (!(cfg.fidelity_step > 0) || !(cfg.fd_step > 0)) config_fail("tolerances", "steps must be positive");
  }
  if (root.contains("scaling")) {
    const Json& sc = root.at("scaling");
    reject_unknown(sc, {"quantity"}, "scaling.");
    if (sc.contains("quantity")) cfg.scaling_quantity = string_at(sc.at("quantity"), "scaling.quantity");
    if (cfg.scaling_quantity != "jq_rdm" && cfg.scaling_quantity != "cq_rdm") config_fail("scaling.quantity", "expected \"jq_rdm\" or \"cq_rdm\"");
  }
  if (root.contains("output")) {
    const Json& out = root.at("output");
    reject_unknown(out, {"dir", "format"}, "output.");
    if (out.contains("dir")) cfg.output_dir = string_at(out.at("dir"), "output.dir");
    if (out.contains("format")) cfg.output_format = string_at(out.at("format"), "output.format");
    if (cfg.output_format != "csv" && cfg.output_format != "json" && cfg.output_format != "both") config_fail("output.format", "expected csv, json or both");
  }

  // Cross-field consistency.
  if (cfg.channel.kind == ChannelKind::PauliSplit || cfg.channel.kind == ChannelKind::ExplicitKraus) {
    if (!cfg.channel.generators.empty()) config_fail("channel.generators", "not used by this channel type");
  }
  const int d = local_dim(cfg);
  if ((cfg.probe.kind == ProbeKind::Ghz || cfg.probe.kind == ProbeKind::SuperposedGhz) && d != 2)
    config_fail("probe.type", "GHZ probes need qubit channels");
  if (cfg.probe.explicit_state) {
    for (int f : cfg.probe.explicit_state->factor_dims())
      if (f != d) config_fail("probe.factor_dims", "factor dims differ from the channel dimension");
  }
  if (cfg.probe.rho1 && cfg.probe.rho1->dim() != d) config_fail("probe.rho1", "dimension differs from the channel dimension");
  if (cfg.probe.noise != NoiseKind::None && d != 2) config_fail("probe.noise", "probe noise is defined for qubits only");
  for (const auto& g : cfg.channel.generators)
    if (g.rows() != cfg.channel.generators.front().rows()) config_fail("channel.generators", "generators differ in dimension");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

KrausChannel per_particle_channel(const ScenarioConfig& cfg) {
  switch (cfg.channel.kind) {
    case ChannelKind::Unitary:
      return unitary_channel(hamiltonian_terms(cfg), cfg.theta);
    case ChannelKind::Dephasing:
      return KrausChannel::sequence(unitary_channel(hamiltonian_terms(cfg), cfg.theta), dephasing_kraus(cfg.channel.strength));
    case ChannelKind::AmplitudeDamping:
      return KrausChannel::sequence(unitary_channel(hamiltonian_terms(cfg), cfg.theta),
                                    amplitude_damping_kraus(cfg.channel.strength));
    case ChannelKind::PauliSplit:
      return pauli_split_channel(cfg.theta);
    case ChannelKind::ExplicitKraus:
      return KrausChannel::constant(cfg.channel.kraus);
  }
  throw ContractError("unknown channel kind");
}

std::optional<DensityMatrix> probe_state(const ScenarioConfig& cfg, int n) {
  const ProbeSpec& p = cfg.probe;
  auto noisy = [&](DensityMatrix rho) {
    if (p.noise == NoiseKind::None) return rho;
    return apply_uniform_local_channel(rho, noise_channel(p.noise, p.noise_strength));
  };
  auto require_cap = [&] {
    if (n > kMaxMixedQubits) throw ContractError("full probe state limited to n <= " + std::to_string(kMaxMixedQubits));
  };
  switch (p.kind) {
    case ProbeKind::Ghz:
      require_cap();
      return noisy(DensityMatrix(ghz_state(p.direction, n)));
    case ProbeKind::SuperposedGhz:
      require_cap();
      return noisy(DensityMatrix(superposed_ghz(p.deltas, n)));
    case ProbeKind::Explicit:
      if (n != p.explicit_state->num_factors()) throw ContractError("explicit probe has a fixed particle count");
      return noisy(*p.explicit_state);
    case ProbeKind::Product: {
      require_cap();
      CMatrix m = p.rho1->matrix();
      std::vector<int> dims{p.rho1->dim()};
      for (int i = 1; i < n; ++i) {
        m = kron(m, p.rho1->matrix());
        dims.push_back(p.rho1->dim());
      }
      return DensityMatrix(std::move(m), std::move(dims));
    }
    case ProbeKind::Marginals:
      return std::nullopt;
  }
  return std::nullopt;
}

Marginals probe_marginals(const ScenarioConfig& cfg, int n) {
  const ProbeSpec& p = cfg.probe;
  if (p.kind == ProbeKind::Marginals) return {*p.rho1, *p.rho2};
  if (p.kind == ProbeKind::Product) return {*p.rho1, DensityMatrix(kron(p.rho1->matrix(), p.rho1->matrix()), {p.rho1->dim(), p.rho1->dim()})};
  if (n <= kMaxMixedQubits || p.kind == ProbeKind::Explicit) {
    const DensityMatrix rho = *probe_state(cfg, n);
    if (n == 1) return {rho, DensityMatrix(kron(rho.matrix(), rho.matrix()), {rho.dim(), rho.dim()})};
    const PermutationCheck sym = is_permutationally_invariant(rho, 1e-8);
    if (!sym.invariant) throw ContractError("RDM formulas need a permutation-invariant probe");
    return marginals_of(rho);
  }
  const KrausChannel noise = noise_channel(p.noise, p.noise_strength);
  if (p.kind == ProbeKind::Ghz) return dephased_ghz_marginals(p.direction, noise);
  const bool zero_phases = p.deltas[0] == 0.0 && p.deltas[1] == 0.0 && p.deltas[2] == 0.0;
  if (zero_phases && n % 8 == 0) return {dephased_ghz_marginals(3, noise).rho1, averaged_rdm2(noise)};
  throw ContractError("no closed-form marginals for this probe at n = " + std::to_string(n));
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  ScenarioResult result;
  result.scenario_id = cfg.scenario_id;
  const std::set<std::string> compute = cfg.compute.empty() ? std::set<std::string>{"jq_rdm", "cq_rdm"} : cfg.compute;
  const KrausChannel single = per_particle_channel(cfg);

  for (int n : cfg.n_list) {
    ScenarioPoint point;
    point.n = n;
    point.report.q = cfg.q();
    std::optional<DensityMatrix> state;
    auto need_state = [&](const std::string& item) -> const DensityMatrix& {
      if (!state) state = probe_state(cfg, n);
      return require_state(state, item);
    };
    std::optional<KrausChannel> full;
    auto need_full = [&]() -> const KrausChannel& {
      if (!full) full = full_channel(cfg, n);
      return *full;
    };
    std::optional<Marginals> marg;
    auto need_marginals = [&]() -> const Marginals& {
      if (!marg) marg = probe_marginals(cfg, n);
      return *marg;
    };
    auto add_matrix = [&](const std::string& name, RMatrix value, Method method) {
      require_symmetric_psd(value, name);
      point.matrices.emplace_back(name, TaggedMatrix{std::move(value), method});
      return point.matrices.back().second;
    };
    StateFamily output_family = [&](const RVector& t) { return apply_channel(need_full().at(t), need_state("output family")); };

    if (compute.count("jq_exact")) {
      require_unitary_item(cfg, "jq_exact");
      const auto gen = collective_generators(hamiltonian_terms(cfg), n);
      point.report.j_q = add_matrix("jq_exact", qfim_unitary_exact(gen, need_state("jq_exact"), cfg.theta), Method::Exact);
    }
    if (compute.count("jq_rdm")) {
      require_unitary_item(cfg, "jq_rdm");
      const Marginals& m = need_marginals();
      const auto tagged = add_matrix("jq_rdm", qfim_rdm(m.rho1, m.rho2, b_operators(hamiltonian_terms(cfg), cfg.theta), n), Method::Rdm);
      if (!point.report.j_q) point.report.j_q = tagged;
    }
    if (compute.count("cq")) {
      point.report.c_q = add_matrix("cq", cq_bound(need_full(), need_state("cq"), cfg.theta), Method::Exact);
    }
    if (compute.count("cq_rdm")) {
      const Marginals& m = need_marginals();
      const auto tagged = add_matrix("cq_rdm", cq_rdm_channel(single, cfg.theta, m.rho1, m.rho2, n), Method::Rdm);
      if (!point.report.c_q) point.report.c_q = tagged;
    }
    if (compute.count("fidelity_oracle")) {
      need_state("fidelity_oracle");
      add_matrix("j_fid", qfim_fidelity_oracle(output_family, cfg.theta, cfg.fidelity_step), Method::FidelityOracle);
    }
    if (compute.count("fim_fd")) {
      const DensityMatrix rho_theta = output_family(cfg.theta);
      Povm povm = cfg.povm == PovmKind::Computational
                      ? projective_povm(identity(rho_theta.dim()))
                      : build_saturating_povm(rho_theta, state_first_derivatives(output_family, cfg.theta, cfg.fd_step));
      double lowest = 0.0;
      for (double v : povm.min_eigenvalues()) lowest = std::min(lowest, v);
      point.scalars.emplace_back("povm.min_eigenvalue", lowest);
      try {
        const FimResult fim = classical_fim_fd(povm, output_family, cfg.theta, cfg.fd_step);
        point.report.j_c = add_matrix("fim_fd", fim.fim, Method::FiniteDifference);
        point.scalars.emplace_back("fim_fd.dropped_outcomes", fim.dropped_outcomes);
      } catch (const ContractError& e) {
        point.notes.push_back(std::string("fim_fd skipped: ") + e.what());
      }
    }
    if (compute.count("fim_limit")) {
      const DensityMatrix rho_theta = output_family(cfg.theta);
      const auto first = state_first_derivatives(output_family, cfg.theta, cfg.fd_step);
      const auto second = state_second_derivatives(output_family, cfg.theta);
      add_matrix("fim_limit", classical_fim_limit(rho_theta, first, second), Method::LimitFormula);
    }
    if (compute.count("saturation")) {
      if (is_unitary(cfg)) {
        if (cfg.probe.kind != ProbeKind::Marginals && n <= kMaxMixedQubits) {
          const auto gen = collective_generators(hamiltonian_terms(cfg), n);
          const double r = saturation_residual_unitary(gen, need_state("saturation"), cfg.theta);
          point.scalars.emplace_back("saturation.unitary", r);
          point.report.saturation_residuals["unitary"] = r;
        }
        const double r = saturation_residual_rdm(need_marginals().rho1, b_operators(hamiltonian_terms(cfg), cfg.theta), n);
        point.scalars.emplace_back("saturation.rdm", r);
        point.report.saturation_residuals["rdm"] = r;
      } else {
        const double r = saturation_residual_noisy(need_full(), need_state("saturation"), cfg.theta);
        point.scalars.emplace_back("saturation.noisy", r);
        point.report.saturation_residuals["noisy"] = r;
      }
    }
    if (compute.count("holevo")) {
      require_unitary_item(cfg, "holevo");
      const auto gen = collective_generators(hamiltonian_terms(cfg), n);
      const DensityMatrix& rho0 = need_state("holevo");
      const AldSet alds = ald_unitary(gen, rho0, cfg.theta);
      const RMatrix jq = qfim_unitary_exact(gen, rho0, cfg.theta);
      const HolevoWitness w = holevo_witness(jq, alds, alds.rho_theta);
      point.scalars.emplace_back("holevo.max_imag", w.max_imag);
      point.scalars.emplace_back("holevo.re_w_vs_inverse", max_abs(RMatrix(w.w.real() - inverse_checked(jq))));
    }

    for (const auto& [name, tagged] : point.matrices) {
      try {
        point.scalars.emplace_back(name + ".trace_inverse", inverse_checked(tagged.value).trace());
      } catch (const RankDeficiencyError&) {
        point.notes.push_back(name + " is rank deficient; trace of inverse omitted");
      }
    }
    if (cfg.cost_matrix && (point.report.j_q || point.report.c_q)) {
      point.report.set_cost(*cfg.cost_matrix, cfg.repetitions);
      point.scalars.emplace_back("cost", *point.report.scalar_cost);
    }
    point.report.validate();
    result.points.push_back(std::move(point));
  }
  for (const auto& p : result.points) {
    auto rows = rows_for(result.scenario_id, p);
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  return result;
}

SlopeFit fit_log_log(const std::vector<double>& n_values, const std::vector<double>& values) {
  if (n_values.size() != values.size() || n_values.size() < 2) throw ContractError("fit_log_log: need at least two points");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(n_values[i] > 0.0) || !(values[i] > 0.0)) throw ContractError("fit_log_log: degenerate fit, non-positive value");
    x.push_back(std::log(n_values[i]));
    y.push_back(std::log(values[i]));
  }
  const double count = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ContractError("fit_log_log: degenerate fit, all n equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - (intercept + slope * x[i]), 2);
  return {slope, intercept, std::sqrt(ss / count)};
}

ScenarioResult scaling_sweep(const ScenarioConfig& cfg) {
  if (cfg.n_list.size() < 4) throw ConfigError("config field 'n_list': scaling sweeps need at least 4 entries");
  ScenarioResult result;
  result.scenario_id = cfg.scenario_id;
  const KrausChannel single = per_particle_channel(cfg);
  std::vector<double> ns;
  std::vector<double> peaks;
  for (int n : cfg.n_list) {
    const Marginals m = probe_marginals(cfg, n);
    ScenarioPoint point;
    point.n = n;
    point.report.q = cfg.q();
    RMatrix value;
    Method method = Method::Rdm;
    if (cfg.scaling_quantity == "jq_rdm") {
      require_unitary_item(cfg, "scaling jq_rdm");
      value = qfim_rdm(m.rho1, m.rho2, b_operators(hamiltonian_terms(cfg), cfg.theta), n);
      point.report.j_q = TaggedMatrix{value, method};
    } else {
      value = cq_rdm_channel(single, cfg.theta, m.rho1, m.rho2, n);
      point.report.c_q = TaggedMatrix{value, method};
    }
    require_symmetric_psd(value, cfg.scaling_quantity);
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(value, Eigen::EigenvaluesOnly);
    ns.push_back(n);
    peaks.push_back(eig.eigenvalues().maxCoeff());
    point.scalars.emplace_back(cfg.scaling_quantity + ".max_eigenvalue", peaks.back());
    point.matrices.emplace_back(cfg.scaling_quantity, TaggedMatrix{std::move(value), method});
    if (cfg.cost_matrix) {
      point.report.set_cost(*cfg.cost_matrix, cfg.repetitions);
      point.scalars.emplace_back("cost", *point.report.scalar_cost);
    }
    result.points.push_back(std::move(point));
  }
  const SlopeFit fit = fit_log_log(ns, peaks);
  result.slope = fit.slope;
  result.slope_residual = fit.residual;
  result.summary.emplace_back("slope", fit.slope);
  result.summary.emplace_back("slope_residual", fit.residual);
  for (const auto& p : result.points) {
    auto rows = rows_for(result.scenario_id, p);
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  for (const auto& [name, value] : result.summary) result.rows.push_back({result.scenario_id, 0, name, 0, value, "fit"});
  return result;
}

ScenarioResult magfield_experiment(const MagfieldOptions& opts) {
  if (opts.theta.size() != 3) throw ConfigError("magfield: theta needs three components");
  if (opts.n_min < 1 || opts.n_max < opts.n_min) throw ConfigError("magfield: invalid particle range");
  if (opts.n_max > kMaxMixedQubits) throw ConfigError("magfield: n range limited to " + std::to_string(kMaxMixedQubits));
  if (!(opts.lambda >= 0.0)) throw ConfigError("magfield: lambda must be non-negative");
  ScenarioResult result;
  {
    std::ostringstream id;
    id << "magfield-lambda" << opts.lambda;
    result.scenario_id = id.str();
  }
  const KrausChannel noise = dephasing_kraus(opts.lambda);
  const std::vector<CMatrix> terms = pauli_terms(3);
  const std::vector<CMatrix> b = b_operators(terms, opts.theta);
  const DensityMatrix mixed1 = DensityMatrix::maximally_mixed_qubits(1);
  const DensityMatrix mixed2 = DensityMatrix::maximally_mixed_qubits(2);

  // Single-particle closed form against the numeric b-operator route.
  const double closed_gap = max_abs(RMatrix(magfield_qfim1(opts.theta) - qfim_rdm(mixed1, mixed2, b, 1)));
  result.summary.emplace_back("qfim1_closed_vs_numeric", closed_gap);

  std::vector<double> ns;
  std::vector<double> peaks;
  for (int n = opts.n_min; n <= opts.n_max; ++n) {
    ScenarioPoint point;
    point.n = n;
    point.report.q = 3;
    const DensityMatrix rho = apply_uniform_local_channel(superposed_ghz({0.0, 0.0, 0.0}, n), noise);
    const Marginals m = n == 1 ? Marginals{rho, mixed2} : marginals_of(rho);
    RMatrix rdm = qfim_rdm(m.rho1, m.rho2, b, n);
    require_symmetric_psd(rdm, "jq_rdm");
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(rdm, Eigen::EigenvaluesOnly);
    ns.push_back(n);
    peaks.push_back(eig.eigenvalues().maxCoeff());
    point.report.j_q = TaggedMatrix{rdm, Method::Rdm};
    point.matrices.emplace_back("jq_rdm", TaggedMatrix{rdm, Method::Rdm});
    if (n <= opts.exact_cap) {
      const auto gen = collective_generators(terms, n);
      RMatrix exact = qfim_unitary_exact(gen, rho, opts.theta);
      require_symmetric_psd(exact, "jq_exact");
      point.scalars.emplace_back("rdm_vs_exact_relative_error", (rdm - exact).norm() / exact.norm());
      point.scalars.emplace_back("saturation.unitary", saturation_residual_unitary(gen, rho, opts.theta));
      point.matrices.emplace_back("jq_exact", TaggedMatrix{std::move(exact), Method::Exact});
    }
    RMatrix closed = magfield_qfim_full(opts.theta, opts.lambda, n);
    require_symmetric_psd(closed, "jq_closed_form");
    point.scalars.emplace_back("closed_form_vs_rdm", max_abs(RMatrix(closed - rdm)));
    point.matrices.emplace_back("jq_closed_form", TaggedMatrix{std::move(closed), Method::ClosedForm});
    RMatrix lost = qfim_rdm(mixed1, mixed2, b, n);
    point.matrices.emplace_back("jq_mixed_marginals", TaggedMatrix{std::move(lost), Method::Rdm});
    const double r = saturation_residual_rdm(m.rho1, b, n);
    point.scalars.emplace_back("saturation.rdm", r);
    point.report.saturation_residuals["rdm"] = r;
    result.points.push_back(std::move(point));
  }
  if (ns.size() >= 2) {
    const SlopeFit fit = fit_log_log(ns, peaks);
    result.slope = fit.slope;
    result.slope_residual = fit.residual;
    result.summary.emplace_back("slope", fit.slope);
    result.summary.emplace_back("slope_residual", fit.residual);
  }
  // Closed-form growth over a wide range, where the N(N-1) term dominates.
  std::vector<double> wide_n;
  std::vector<double> wide_peak;
  for (int n = 4; n <= 512; n *= 2) {
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(magfield_qfim_full(opts.theta, opts.lambda, n), Eigen::EigenvaluesOnly);
    wide_n.push_back(n);
    wide_peak.push_back(eig.eigenvalues().maxCoeff());
  }
  result.summary.emplace_back("closed_form_slope_4_512", fit_log_log(wide_n, wide_peak).slope);
  for (const auto& p : result.points) {
    auto rows = rows_for(result.scenario_id, p);
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  for (const auto& [name, value] : result.summary) result.rows.push_back({result.scenario_id, 0, name, 0, value, "summary"});
  return result;
}

std::vector<CsvRow> rows_for(const std::string& scenario_id, const ScenarioPoint& point) {
  std::vector<CsvRow> rows;
  for (const auto& [name, tagged] : point.matrices) {
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(tagged.value, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
      rows.push_back({scenario_id, point.n, name + ".eigenvalue", static_cast<int>(i), eig.eigenvalues()(i), to_string(tagged.method)});
    const auto q = tagged.value.rows();
    for (Eigen::Index j = 0; j < q; ++j)
      for (Eigen::Index k = 0; k < q; ++k)
        rows.push_back({scenario_id, point.n, name + ".entry", static_cast<int>(j * q + k), tagged.value(j, k), to_string(tagged.method)});
  }
  for (const auto& [name, value] : point.scalars) rows.push_back({scenario_id, point.n, name, 0, value, "diagnostic"});
  return rows;
}

std::string to_csv(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  out << "scenario_id,n,quantity,index,value,method\n";
  for (const auto& r : rows)
    out << r.scenario_id << ',' << r.n << ',' << r.quantity << ',' << r.index << ',' << format_double(r.value) << ',' << r.method << '\n';
  return out.str();
}

std::string to_json(const ScenarioResult& result, std::uint64_t seed) {
  OrderedJson root;
  root["scenario_id"] = result.scenario_id;
  root["seed"] = seed;
  OrderedJson points = OrderedJson::array();
  for (const auto& p : result.points) {
    OrderedJson jp;
    jp["n"] = p.n;
    OrderedJson mats = OrderedJson::object();
    for (const auto& [name, tagged] : p.matrices) {
      OrderedJson m;
      m["method"] = to_string(tagged.method);
      OrderedJson value = OrderedJson::array();
      for (Eigen::Index r = 0; r < tagged.value.rows(); ++r) {
        OrderedJson row = OrderedJson::array();
        for (Eigen::Index c = 0; c < tagged.value.cols(); ++c) row.push_back(tagged.value(r, c));
        value.push_back(row);
      }
      m["value"] = value;
      Eigen::SelfAdjointEigenSolver<RMatrix> eig(tagged.value, Eigen::EigenvaluesOnly);
      OrderedJson ev = OrderedJson::array();
      for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) ev.push_back(eig.eigenvalues()(i));
      m["eigenvalues"] = ev;
      mats[name] = m;
    }
    jp["matrices"] = mats;
    OrderedJson scalars = OrderedJson::object();
    for (const auto& [name, value] : p.scalars) scalars[name] = value;
    jp["scalars"] = scalars;
    jp["notes"] = p.notes;
    points.push_back(jp);
  }
  root["points"] = points;
  OrderedJson summary = OrderedJson::object();
  for (const auto& [name, value] : result.summary) summary[name] = value;
  root["summary"] = summary;
  return root.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_outputs(const ScenarioResult& result, const std::filesystem::path& dir,
                                                 const std::string& format, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::string& name, const std::string& text) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    written.push_back(path);
  };
  if (format == "csv" || format == "both") write("report.csv", to_csv(result.rows));
  if (format == "json" || format == "both") write("report.json", to_json(result, seed));
  return written;
}

}  // namespace qbound
