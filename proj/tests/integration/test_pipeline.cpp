// Config files on disk through the runner and serializers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qbound/scenario.hpp"

using namespace qbound;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = QBOUND_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qbound_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("every shipped config runs") {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    const ScenarioConfig cfg = load_config(entry.path());
    const bool sweep = entry.path().filename().string().rfind("scaling", 0) == 0;
    const ScenarioResult result = sweep ? scaling_sweep(cfg) : run_scenario(cfg);
    CHECK_FALSE(result.rows.empty());
    for (const auto& row : result.rows) CHECK(std::isfinite(row.value));
    for (const auto& p : result.points) CHECK_NOTHROW(p.report.validate());
  }
}

TEST_CASE("reports written to disk are byte-identical across runs") {
  const ScenarioConfig cfg = load_config(kConfigs / "dephasing.json");
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  write_outputs(run_scenario(cfg), a, "both", 7);
  write_outputs(run_scenario(cfg), b, "both", 7);
  CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));

  const auto json = nlohmann::json::parse(slurp(a / "report.json"));
  CHECK(json["seed"] == 7);
  CHECK(json["points"].size() == cfg.n_list.size());
  CHECK(json["points"][0]["matrices"].contains("cq"));
}

TEST_CASE("scaling config reproduces the quadratic and linear regimes") {
  const ScenarioResult ghz = scaling_sweep(load_config(kConfigs / "scaling_ghz.json"));
  const ScenarioResult product = scaling_sweep(load_config(kConfigs / "scaling_product.json"));
  CHECK(std::abs(*ghz.slope - 2.0) < 0.05);
  CHECK(std::abs(*product.slope - 1.0) < 0.02);
}

TEST_CASE("magnetic-field report files") {
  const fs::path dir = scratch("magfield");
  const auto written = write_outputs(magfield_experiment(MagfieldOptions{}), dir, "both", 0);
  CHECK(written.size() == 2);
  const std::string csv = slurp(dir / "report.csv");
  CHECK(csv.find(",jq_exact.eigenvalue,") != std::string::npos);
  CHECK(csv.find(",saturation.rdm,") != std::string::npos);
  CHECK(csv.find(",0,closed_form_slope_4_512,0,") != std::string::npos);
}
