#pragma once

#include <functional>
#include <string>

#include "cgo/config.hpp"
#include "cgo/estimates.hpp"
#include "cgo/inverse.hpp"

namespace cgo {

enum class Stage { Mesh, Forward, Synth, Invert, Validate, Run };
Stage stage_from_name(const std::string& name);  // mesh | forward | synth-data | invert | validate | run

struct RunOptions {
  Stage stage = Stage::Run;
  std::string data_path;  // invert: measured boundary data instead of synthesized
  std::function<void(const std::string&)> log;  // progress lines; may be empty
};

// Writes the artifacts of the requested stages into cfg.out_dir and returns the exit status:
// 0 when every stage ran and every enabled assertion passed, 1 otherwise. run_report.json
// records stage errors (tagged with the stage name) and assertion outcomes.
int run_scenario(const ScenarioConfig& cfg, const RunOptions& opts);

// Estimate checks on meshes derived from the scenario.
std::vector<EstimateReport> run_estimates(const ScenarioConfig& cfg, const std::function<void(const std::string&)>& log);

// One pipeline run per axis value; per-point failures are recorded in the status column.
// Writes sweep_summary.csv into cfg.out_dir and returns the table.
Table run_sweep(const ScenarioConfig& cfg, const std::string& axis, const std::vector<double>& values,
                const std::function<void(const std::string&)>& log);

}  // namespace cgo
