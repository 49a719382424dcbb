#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "krf/errors.hpp"
#include "krf/experiment.hpp"

using namespace krf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) return e.detail();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("krf_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig short_config(const std::string& family, double amplitude, const fs::path& out) {
  ExperimentConfig c;
  c.grid = Grid(20.0, 256);
  c.family = family;
  c.amplitude = amplitude;
  c.T = 2.0;
  c.snapshot_every = 0.25;
  c.nus = {1, 2};
  c.output = out.string();
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(R"({"version": 1, "grid": {"L": 18, "N": 512}, "bergman": {"nu": [1, 4]}})");
  CHECK(c.grid.L == 18.0);
  CHECK(c.grid.N == 512);
  CHECK(c.nus == std::vector<int>{1, 4});
  CHECK(c.family == "sech2");

  const ExperimentConfig back = parse_config(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));

  CHECK(config_error(R"({"version": 1, "grid": {"N": 16}})").find("grid.N") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "colour": "red"})").find("colour") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "initial": {"family": "wiggle"}})").find("initial.family") != std::string::npos);
  CHECK(config_error(R"({"version": 2})").find("version") != std::string::npos);
  CHECK(config_error(R"({"grid": {"N": 512}})").find("version") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "integrator": {"dt": -1}})").find("integrator.dt") != std::string::npos);
  CHECK(config_error(R"({"version": 1, "monitors": ["nope"]})").find("monitors") != std::string::npos);
  CHECK_FALSE(config_error("{not json").empty());
  CHECK_FALSE(config_error(R"({"version": 1, "model": "product", "integrator": {"form": "potential", "gauge": "raw"}})").empty());
}

TEST_CASE("conventions hash") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK_FALSE(convention_sheet().empty());
}

TEST_CASE("FS run is stationary") {
  const fs::path dir = scratch("fs");
  const ExperimentResult r = run_experiment(short_config("fs", 0.0, dir));
  CHECK(r.decay_rate == 0.0);
  CHECK(r.final_deviation == 0.0);
  CHECK(r.tamed);
  CHECK(r.defect_max <= 1e-10);
  for (const char* f : {"run.csv", "bergman_scan.csv", "summary.json", "MANIFEST"}) CHECK(fs::exists(dir / f));
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["schema_version"] == kSummarySchemaVersion);
  CHECK(summary["tamed"]["tamed"] == true);
  fs::remove_all(dir);
}

TEST_CASE("identical configs give identical outputs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  run_experiment(short_config("sech2", 0.3, a));
  const std::string first = slurp(a / "summary.json");
  run_experiment(short_config("sech2", 0.3, a));
  CHECK(slurp(a / "summary.json") == first);
  run_experiment(short_config("sech2", 0.3, b));
  for (const char* f : {"run.csv", "bergman_scan.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  const std::string manifest = slurp(a / "MANIFEST");
  CHECK(manifest.find("code_version") != std::string::npos);
  CHECK(manifest.find("convention_sheet_fnv1a64") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("table reproduction") {
  const Table2Report rep = reproduce_table2();
  CHECK(rep.all_match);
  CHECK(rep.lines.size() == table2_rows().size());
  for (const auto& line : rep.lines) {
    CHECK(line.match);
    CHECK(line.engines_agree);
    CHECK(line.computed.exact);
  }
  std::ostringstream os;
  print_table2(os, rep);
  CHECK(os.str().find("cusp") != std::string::npos);
}
