#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cgo/forward.hpp"

namespace cgo {

// Tables, dotted table headers, key = value with strings, numbers, booleans,
// (nested, multi-line) arrays and inline tables. Throws ConfigError with a line number.
nlohmann::json parse_toml(const std::string& text);

// TOML unless the path ends in .json.
nlohmann::json load_config_file(const std::string& path);

struct ScenarioConfig {
  CurveDef curve;
  std::vector<double> resolutions;  // ascending
  double collar = 0.0;              // 0: max(0.1, 3h) per mesh
  SigmaSpec sigma;
  std::vector<cplx> lambdas;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  bool quiet = false;

  struct Stages {
    bool mesh = true, forward = true, synth = true, invert = true, sigma = true, validate = false;
  } stages;

  struct Validate {
    std::size_t gamma_samples = 10000;
    std::vector<double> area_deltas{1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2};
    std::vector<double> lambda_magnitudes{5, 10, 20, 40};  // along (1+i)/sqrt2
    std::vector<double> zero_limit_etas{5e-4, 1e-3, 2e-3, 5e-3, 1e-2};
    double zero_limit_lambda = 5.0;
    int centers = 5;
  } validate;

  struct Assertions {
    std::optional<double> q_error_max;
    bool q_error_decreasing = false;
    bool estimates = false;
  } asserts;

  struct Sweep {
    std::string axis;  // lambda | resolution | noise
    std::vector<double> values;
  } sweep;

  double mesh_collar(double h) const { return collar > 0.0 ? collar : std::max(0.1, 3.0 * h); }
};

// Validates everything the pipeline relies on; throws ConfigError.
ScenarioConfig scenario_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
ScenarioConfig load_scenario(const std::string& path);

// "re,im" or "re"
cplx parse_lambda(const std::string& s);

}  // namespace cgo
