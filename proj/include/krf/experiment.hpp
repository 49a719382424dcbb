#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "krf/flow.hpp"
#include "krf/lct.hpp"

namespace krf {

inline constexpr int kConfigVersion = 1;
inline constexpr int kSummarySchemaVersion = 1;
inline constexpr const char* kCodeVersion = "1.0.0";

enum class Model { Sphere, Product };
enum class FlowForm { Density, Potential };

struct ExperimentConfig {
  Model model = Model::Sphere;
  Grid grid;
  std::string family = "sech2";
  double amplitude = 0.3;
  double potential_offset = 0.0;  // constant added to the initial potential (potential form)
  std::string family_b = "fs";    // second factor of the product
  double amplitude_b = 0.0;
  FlowForm form = FlowForm::Density;
  Scheme scheme = Scheme::SDIRK3;
  Gauge gauge = Gauge::DensityOnly;
  double dt = 0.01;
  double T = 20.0;
  double snapshot_every = 0.25;
  std::vector<int> nus{1, 2, 3};
  std::vector<std::string> monitors{"functionals", "inequalities", "equivalence", "bergman"};
  std::string output = "run";
  std::uint64_t seed = 0;

  bool monitor(std::string_view name) const;
};

// JSON with a "version" key; unknown keys and invalid values raise ConfigError naming the field path.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);
const std::vector<std::string>& known_monitors();

// Conventions every output is expressed in; hashed into the MANIFEST.
std::string_view convention_sheet();
std::uint64_t fnv1a64(std::string_view bytes);

struct ExperimentResult {
  std::filesystem::path dir;
  double decay_rate = 0.0;
  double final_deviation = 0.0;
  bool tamed = false;
  double defect_max = 0.0;
};

// Writes run.csv, bergman_scan.csv, summary.json and MANIFEST into cfg.output.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct Table2Row {
  std::string label;
  std::string equation;
  Rational expected;
};

const std::vector<Table2Row>& table2_rows();

struct Table2Line {
  Table2Row row;
  LctResult computed;
  bool engines_agree = true;  // Newton and resolution coincide when Newton is nondegenerate
  bool match = false;
};

struct Table2Report {
  std::vector<Table2Line> lines;
  bool all_match = false;
};

Table2Report reproduce_table2();
void print_table2(std::ostream& out, const Table2Report& rep);

}  // namespace krf
