#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "cgo/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string data;
  std::string lambda;
  std::string axis;
  std::vector<double> values;
  std::uint64_t seed = 0;
  double resolution = 0.0;
  bool quiet = false;
};

cgo::ScenarioConfig load(const Flags& f, CLI::App& sub) {
  cgo::ScenarioConfig cfg = f.config.empty() ? cgo::scenario_from_json(nlohmann::json::object()) : cgo::load_scenario(f.config);
  if (sub.count("--out")) cfg.out_dir = f.out;
  if (sub.count("--seed")) cfg.seed = f.seed;
  if (sub.count("--resolution")) {
    if (!(f.resolution > 0.0)) throw cgo::ConfigError("--resolution must be positive");
    cfg.resolutions = {f.resolution};
  }
  if (sub.count("--lambda")) {
    cgo::cplx l = cgo::parse_lambda(f.lambda);
    if (std::abs(l) == 0.0) throw cgo::ConfigError("--lambda must be nonzero");
    cfg.lambdas = {l};
  }
  if (f.quiet) cfg.quiet = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CGO forward and inverse solver on bordered algebraic curves"};
  app.require_subcommand(1);
  Flags f;
  const char* names[] = {"mesh", "forward", "synth-data", "invert", "validate", "sweep", "run"};
  const char* help[] = {"build the area and boundary quadrature",
                        "solve for the CGO solutions",
                        "forward solve and emit boundary data",
                        "recover q (and sigma) from boundary data",
                        "run the estimate checks",
                        "run the pipeline along one axis",
                        "run every enabled stage"};
  std::vector<CLI::App*> subs;
  for (int k = 0; k < 7; ++k) {
    CLI::App* s = app.add_subcommand(names[k], help[k]);
    s->add_option("--config", f.config, "scenario file (TOML, or JSON by extension)");
    s->add_option("--out", f.out, "output directory");
    s->add_option("--seed", f.seed, "random seed");
    s->add_option("--resolution", f.resolution, "single mesh resolution h");
    s->add_option("--lambda", f.lambda, "single spectral parameter re,im");
    s->add_flag("--quiet", f.quiet, "no progress output");
    if (std::string(names[k]) == "invert") s->add_option("--data", f.data, "boundary data JSON from synth-data");
    if (std::string(names[k]) == "sweep") {
      s->add_option("--axis", f.axis, "lambda | resolution | noise");
      s->add_option("--values", f.values, "axis values")->delimiter(',');
    }
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = nullptr;
  std::string name;
  for (int k = 0; k < 7; ++k)
    if (subs[k]->parsed()) {
      sub = subs[k];
      name = names[k];
    }

  cgo::ScenarioConfig cfg;
  try {
    cfg = load(f, *sub);
    if (name == "sweep") {
      if (sub->count("--axis")) cfg.sweep.axis = f.axis;
      if (sub->count("--values")) cfg.sweep.values = f.values;
      if (cfg.sweep.axis.empty() && !cfg.sweep.values.empty()) throw cgo::ConfigError("sweep values need an axis");
      if (!cfg.sweep.axis.empty() && cfg.sweep.axis != "lambda" && cfg.sweep.axis != "resolution" &&
          cfg.sweep.axis != "noise")
        throw cgo::ConfigError("sweep axis must be lambda, resolution or noise");
    }
  } catch (const cgo::ConfigError& e) {
    std::fprintf(stderr, "[config] %s\n", e.what());
    return 2;
  }

  auto log = [&](const std::string& s) {
    if (!cfg.quiet) std::fprintf(stderr, "%s\n", s.c_str());
  };
  try {
    if (name == "sweep") {
      auto t = cgo::run_sweep(cfg, cfg.sweep.axis.empty() ? "lambda" : cfg.sweep.axis, cfg.sweep.values, log);
      int failed = 0;
      for (auto& r : t.rows) failed += r[1] != 0.0;
      log(fmt::format("sweep: {} points, {} failed", t.rows.size(), failed));
      return 0;
    }
    cgo::RunOptions o;
    o.stage = cgo::stage_from_name(name);
    o.data_path = f.data;
    o.log = log;
    return cgo::run_scenario(cfg, o);
  } catch (const cgo::ConfigError& e) {
    std::fprintf(stderr, "[config] %s\n", e.what());
    return 2;
  } catch (const cgo::Error& e) {
    std::fprintf(stderr, "[%s] %s\n", name.c_str(), e.what());
    return 1;
  }
}
