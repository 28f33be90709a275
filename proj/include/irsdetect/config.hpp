#pragma once

#include <string>
#include <vector>

#include "irsdetect/montecarlo.hpp"

namespace irsdetect {

/// Full run configuration parsed from a single JSON document. Unknown
/// keys are rejected so typos cannot silently fall back to defaults.
struct RunConfig {
  ScenarioSpec scenario;
  long trials = 100000;
  double target_pfa = 0.01;
  std::vector<double> pfa_grid;      // roc / analytic
  std::string sweep_axis = "M";      // sweep
  std::vector<double> sweep_values;
  std::vector<double> snr_grid_db;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Canonical serialization; parse(serialize(c)) reproduces c.
std::string serialize_config(const RunConfig& config);

}  // namespace irsdetect
