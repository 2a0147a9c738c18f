#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"

#include "cgo/pipeline.hpp"

using namespace cgo;
namespace fs = std::filesystem;

TEST_CASE("parse_toml") {
  auto j = parse_toml(R"(# comment
seed = 7
name = "a # b"
path = 'C:\raw'
flag = true
[mesh]
resolutions = [
  0.08, # first
  0.04,
]
[curve.chart]
radius = 0.5
[[sigma.bumps]]
center = [[-1.0, 0.0], [0.0, 0.0]]
amplitude = -0.2
[[sigma.bumps]]
amplitude = 0.3
point = { x = 1, y = 2.5e-1 }
)");
  CHECK(j["seed"] == 7);
  CHECK(j["name"] == "a # b");
  CHECK(j["path"] == "C:\\raw");
  CHECK(j["flag"] == true);
  CHECK(j["mesh"]["resolutions"].size() == 2);
  CHECK(j["mesh"]["resolutions"][1].get<double>() == 0.04);
  CHECK(j["curve"]["chart"]["radius"].get<double>() == 0.5);
  REQUIRE(j["sigma"]["bumps"].size() == 2);
  CHECK(j["sigma"]["bumps"][0]["amplitude"].get<double>() == -0.2);
  CHECK(j["sigma"]["bumps"][1]["point"]["y"].get<double>() == 0.25);
}

TEST_CASE("parse_toml reports the offending line") {
  try {
    parse_toml("a = 1\nb = [1, 2\n");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_toml("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("= 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("x = \"open\n"), ConfigError);
}

TEST_CASE("scenario defaults") {
  ScenarioConfig c = scenario_from_json(nlohmann::json::object());
  CHECK(c.curve.d() == 3);
  CHECK(c.curve.chart.radius == 0.5);
  REQUIRE(c.lambdas.size() == 1);
  CHECK(std::abs(c.lambdas[0] - 20.0 * cplx(1.0, 1.0) / std::sqrt(2.0)) < 1e-12);
  CHECK(c.mesh_collar(0.02) == 0.1);
  CHECK(c.mesh_collar(0.05) == doctest::Approx(0.15));
}

TEST_CASE("scenario validation") {
  using nlohmann::json;
  CHECK_THROWS_AS(scenario_from_json(json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(scenario_from_json(json{{"mesh", {{"resolutions", {-0.1}}}}}), ConfigError);
  CHECK_THROWS_AS(scenario_from_json(json{{"mesh", {{"resolution", 0.1}, {"typo", 1}}}}), ConfigError);
  CHECK_THROWS_AS(scenario_from_json(json{{"sigma", {{"preset", "nope"}}}}), ConfigError);
  CHECK_THROWS_AS(scenario_from_json(json{{"curve", {{"preset", "terms"}, {"terms", {{2, 0, 0, 1.0}}}}}}), ConfigError);
  ScenarioConfig c = scenario_from_json(json{{"mesh", {{"resolutions", {0.04, 0.08, 0.04}}}}});
  CHECK(c.resolutions == std::vector<double>{0.04, 0.08});
}

TEST_CASE("invalid curve file") {
  CHECK_THROWS_AS(load_scenario(std::string(CGO_TEST_DATA) + "/bad_curve_scenario.toml"), ConfigError);
  CHECK_THROWS_AS(load_scenario(std::string(CGO_TEST_DATA) + "/missing.toml"), ConfigError);
}

TEST_CASE("parse_lambda") {
  CHECK(parse_lambda("3,4") == cplx(3.0, 4.0));
  CHECK(parse_lambda("-2.5") == cplx(-2.5, 0.0));
  CHECK(parse_lambda("1e1,-1") == cplx(10.0, -1.0));
  CHECK_THROWS_AS(parse_lambda("x"), ConfigError);
  CHECK_THROWS_AS(parse_lambda("1,2,3"), ConfigError);
}

TEST_CASE("stage names") {
  CHECK(stage_from_name("synth-data") == Stage::Synth);
  CHECK(stage_from_name("run") == Stage::Run);
  CHECK_THROWS_AS(stage_from_name("plot"), ConfigError);
}

TEST_CASE("JSON numbers keep 17 significant digits") {
  nlohmann::json j{{"b", 0.1}, {"a", NAN}, {"c", {1, 2.5}}};
  std::string s = dump_json(j, -1);
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("null") != std::string::npos);
  CHECK(s.find("\"a\"") < s.find("\"b\""));
  CHECK(nlohmann::json::parse(s)["b"].get<double>() == 0.1);
  CHECK(dump_json(j) == dump_json(j));
}

TEST_CASE("CSV tables") {
  Table t{{"x", "y"}, {{1.0, 0.1}, {2.0, 1e-20}}};
  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str() == "x,y\n1,0.10000000000000001\n2,9.9999999999999995e-21\n");
}

TEST_CASE("sweep with no values writes a header-only table") {
  fs::path dir = fs::temp_directory_path() / ("cgo_sweep_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  ScenarioConfig c = scenario_from_json(nlohmann::json::object());
  c.out_dir = dir.string();
  c.quiet = true;
  Table t = run_sweep(c, "lambda", {}, nullptr);
  CHECK(t.rows.empty());
  CHECK(!t.columns.empty());
  std::ifstream in(dir / "sweep_summary.csv");
  std::string header, extra;
  std::getline(in, header);
  CHECK(header.rfind("value,status", 0) == 0);
  CHECK(!std::getline(in, extra));
  fs::remove_all(dir);
}

TEST_CASE("mesh stage of a small scenario") {
  fs::path dir = fs::temp_directory_path() / ("cgo_mesh_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  ScenarioConfig c = scenario_from_json(parse_toml("[mesh]\nresolutions = [0.1]\n"));
  c.out_dir = dir.string();
  RunOptions o;
  o.stage = Stage::Mesh;
  CHECK(run_scenario(c, o) == 0);
  CHECK(fs::exists(dir / "run_report.json"));
  bool mesh_csv = false;
  for (auto& e : fs::directory_iterator(dir)) mesh_csv |= e.path().filename().string().rfind("mesh_h", 0) == 0;
  CHECK(mesh_csv);
  fs::remove_all(dir);
}
