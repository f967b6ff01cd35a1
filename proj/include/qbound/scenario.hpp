#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbound/bounds.hpp"
#include "qbound/channels.hpp"
#include "qbound/states.hpp"

namespace qbound {

// Malformed or inconsistent scenario configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProbeKind { Ghz, SuperposedGhz, Explicit, Marginals, Product };
enum class ChannelKind { Unitary, Dephasing, AmplitudeDamping, PauliSplit, ExplicitKraus };
enum class NoiseKind { None, Dephasing, AmplitudeDamping };
enum class PovmKind { Computational, Saturating };

struct ProbeSpec {
  ProbeKind kind = ProbeKind::Ghz;
  int direction = 3;
  std::array<double, 3> deltas{0.0, 0.0, 0.0};
  std::optional<DensityMatrix> explicit_state;
  std::optional<DensityMatrix> rho1;
  std::optional<DensityMatrix> rho2;
  NoiseKind noise = NoiseKind::None;
  double noise_strength = 0.0;
};

struct ChannelSpec {
  ChannelKind kind = ChannelKind::Unitary;
  // Per-particle Hamiltonian terms h_k; empty means sigma_1..sigma_q.
  std::vector<CMatrix> generators;
  double strength = 0.0;
  std::vector<CMatrix> kraus;
};

struct ScenarioConfig {
  std::string scenario_id = "scenario";
  ProbeSpec probe;
  ChannelSpec channel;
  RVector theta;
  std::vector<int> n_list{2};
  std::set<std::string> compute;
  PovmKind povm = PovmKind::Computational;
  std::optional<RMatrix> cost_matrix;
  double repetitions = 1.0;
  double fidelity_step = kDefaultFidelityStep;
  double fd_step = kDefaultFdStep;
  std::string scaling_quantity = "jq_rdm";
  std::string output_dir;
  std::string output_format = "csv";

  int q() const { return static_cast<int>(theta.size()); }
};

extern const std::vector<std::string> kComputeItems;

ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);

struct CsvRow {
  std::string scenario_id;
  int n;
  std::string quantity;
  int index;
  double value;
  std::string method;
};

struct ScenarioPoint {
  int n = 0;
  BoundReport report;
  std::vector<std::pair<std::string, TaggedMatrix>> matrices;  // every computed matrix, in order
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::string> notes;
};

struct ScenarioResult {
  std::string scenario_id;
  std::vector<ScenarioPoint> points;
  std::vector<CsvRow> rows;
  std::optional<double> slope;
  std::optional<double> slope_residual;
  // Scenario-wide scalars (fits, cross-checks), emitted with n = 0.
  std::vector<std::pair<std::string, double>> summary;
};

// Per-particle channel at theta built from the channel spec.
KrausChannel per_particle_channel(const ScenarioConfig& cfg);
// N-particle input state (before the channel), or nullopt for marginal-only probes.
std::optional<DensityMatrix> probe_state(const ScenarioConfig& cfg, int n);
Marginals probe_marginals(const ScenarioConfig& cfg, int n);

ScenarioResult run_scenario(const ScenarioConfig& cfg);

struct SlopeFit {
  double slope;
  double intercept;
  double residual;  // root-mean-square deviation in log space
};
SlopeFit fit_log_log(const std::vector<double>& n_values, const std::vector<double>& values);

// Largest-eigenvalue growth of the configured RDM quantity over n_list.
ScenarioResult scaling_sweep(const ScenarioConfig& cfg);

struct MagfieldOptions {
  double lambda = 0.3;
  RVector theta = (RVector(3) << 0.3, 0.2, 0.1).finished();
  int n_min = 2;
  int n_max = 8;
  int exact_cap = 5;
};
ScenarioResult magfield_experiment(const MagfieldOptions& opts);

std::vector<CsvRow> rows_for(const std::string& scenario_id, const ScenarioPoint& point);
std::string to_csv(const std::vector<CsvRow>& rows);
std::string to_json(const ScenarioResult& result, std::uint64_t seed);
// Writes report.csv or report.json (or both for "both") into dir.
std::vector<std::filesystem::path> write_outputs(const ScenarioResult& result, const std::filesystem::path& dir,
                                                 const std::string& format, std::uint64_t seed);

}  // namespace qbound
