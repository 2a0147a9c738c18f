#include "cgo/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <fmt/format.h>

namespace cgo {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const cplx kDiagonal = cplx(1.0, 1.0) / std::sqrt(2.0);

std::string tag(double v) { return fmt::format("{:g}", v); }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(a), std::uint32_t(b)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

json lambda_json(cplx l) { return json::array({l.real(), l.imag()}); }

struct Ctx {
  const ScenarioConfig& cfg;
  const RunOptions& opts;
  fs::path out;
  json report = json::object();
  bool ok = true;

  void log(const std::string& s) const {
    if (opts.log) opts.log(s);
  }
  fs::path path(const std::string& name) const { return out / name; }

  // Runs f; a library error is recorded against the stage and reported as failure.
  template <class F>
  bool stage(const std::string& name, F&& f) {
    try {
      f();
      return true;
    } catch (const Error& e) {
      ok = false;
      report["errors"].push_back({{"stage", name}, {"kind", e.kind()}, {"message", e.what()}});
      log(fmt::format("[{}] {}", name, e.what()));
      return false;
    }
  }
  void assertion(const std::string& name, bool pass, json detail) {
    detail["pass"] = pass;
    report["assertions"][name] = std::move(detail);
    if (!pass) ok = false;
  }
};

CurveMesh make_mesh(const ScenarioConfig& cfg, double h, bool stencils = true) {
  MeshOptions o;
  o.h = h;
  o.collar = cfg.mesh_collar(h);
  o.stencils = stencils;
  return build_mesh(cfg.curve, o);
}

struct Row {
  double h;
  int lam;
  double norm_R = NAN, pde_residual = NAN, q_error = NAN, sigma_error = NAN, residual_g = NAN, residual_h = NAN;
};

void write_plot_files(const Ctx& c, const std::vector<Row>& rows, const std::vector<std::pair<double, double>>& lam_curve) {
  Table conv;
  conv.columns = {"h", "lambda_index", "q_error_rel", "sigma_error_rel", "pde_residual", "residual_g", "residual_h"};
  for (auto& r : rows)
    conv.rows.push_back({r.h, double(r.lam), r.q_error, r.sigma_error, r.pde_residual, r.residual_g, r.residual_h});
  write_csv_file(c.path("convergence.csv").string(), conv);
  Table lc;
  lc.columns = {"abs_lambda", "norm_R"};
  for (auto& p : lam_curve) lc.rows.push_back({p.first, p.second});
  write_csv_file(c.path("lambda_curve.csv").string(), lc);
  std::ofstream gp(c.path("plots.gp"), std::ios::binary);
  gp << "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set logscale xy\n"
        "set terminal pngcairo size 800,600\n"
        "set output 'convergence.png'\n"
        "set xlabel 'h'\n"
        "plot 'convergence.csv' using 1:3 with linespoints title 'q error', \\\n"
        "     'convergence.csv' using 1:5 with linespoints title 'pde residual'\n"
        "set output 'lambda_curve.png'\n"
        "set xlabel '|lambda|'\n"
        "set ylabel 'norm of R'\n"
        "plot 'lambda_curve.csv' using 1:2 with linespoints title 'norm R'\n";
}

}  // namespace

Stage stage_from_name(const std::string& n) {
  if (n == "mesh") return Stage::Mesh;
  if (n == "forward") return Stage::Forward;
  if (n == "synth-data") return Stage::Synth;
  if (n == "invert") return Stage::Invert;
  if (n == "validate") return Stage::Validate;
  if (n == "run") return Stage::Run;
  throw ConfigError("unknown subcommand '" + n + "'");
}

std::vector<EstimateReport> run_estimates(const ScenarioConfig& cfg, const std::function<void(const std::string&)>& log) {
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  std::vector<EstimateReport> out;
  const std::uint64_t seed = cfg.seed;
  out.push_back(check_gamma_neighborhoods(cfg.validate.gamma_samples, mix_seed(seed, 1, 0)));
  say("gamma neighborhoods done");

  // area scaling on a wide chart of the same curve
  {
    CurveDef wide = cfg.curve;
    wide.chart.center = {0.0, 0.0};
    wide.chart.radius = 2.0;
    MeshOptions o;
    o.h = std::min(0.05, cfg.resolutions.front());
    o.collar = 0.2;
    o.stencils = false;
    CurveMesh m = build_mesh(wide, o);
    // centers well inside, at moderate |u| where the chart metric is mild
    auto centers = pick_centers(m, cfg.validate.centers, 0.6, 1.4, mix_seed(seed, 2, 0));
    out.push_back(check_area_scaling(m, centers, cfg.validate.area_deltas));
    say("area scaling done");
  }

  const double h = cfg.resolutions.front();
  CurveMesh mesh = make_mesh(cfg, h);
  auto centers = pick_centers(mesh, 3, 0.3 * cfg.curve.chart.radius, INFINITY, mix_seed(seed, 3, 0));
  std::vector<cplx> lams;
  for (double m : cfg.validate.lambda_magnitudes) lams.push_back(m * kDiagonal);
  for (auto& r : check_kernel_decay(mesh, lams, centers, mix_seed(seed, 4, 0))) out.push_back(r);
  say("kernel envelopes done");
  out.push_back(check_zero_limit(mesh, cfg.validate.zero_limit_lambda * kDiagonal, centers, cfg.validate.zero_limit_etas));
  say("zero limit done");

  SigmaModel model(cfg.curve, cfg.sigma);
  ForwardCache cache = prepare_forward(mesh, q_from_model(mesh, model));
  out.push_back(check_contraction(mesh, cache, lams));
  say("contraction done");
  return out;
}

namespace {

int run_impl(const ScenarioConfig& cfg, const RunOptions& opts, std::vector<Row>& rows,
             std::vector<std::pair<double, double>>& lam_curve) {
  const Stage st = opts.stage;
  if (st == Stage::Invert && !opts.data_path.empty() && cfg.lambdas.size() != 1)
    throw ConfigError("--data takes a single lambda");
  if (st == Stage::Invert && !opts.data_path.empty() && cfg.resolutions.size() != 1)
    throw ConfigError("--data takes a single resolution");
  Ctx c{cfg, opts, fs::path(cfg.out_dir)};
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.out_dir + ": " + ec.message());

  auto wants = [&](Stage s) {
    if (st == Stage::Run) {
      switch (s) {
        case Stage::Mesh: return cfg.stages.mesh || cfg.stages.forward;
        case Stage::Forward: return cfg.stages.forward;
        case Stage::Synth: return cfg.stages.synth;
        case Stage::Invert: return cfg.stages.invert;
        case Stage::Validate: return cfg.stages.validate;
        default: return false;
      }
    }
    if (st == Stage::Validate) return s == Stage::Validate;
    return int(s) <= int(st);
  };

  c.report["seed"] = cfg.seed;
  c.report["resolutions"] = cfg.resolutions;
  c.report["sigma_preset"] = cfg.sigma.preset;
  c.report["noise"] = cfg.noise;
  json lams = json::array();
  for (cplx l : cfg.lambdas) lams.push_back(lambda_json(l));
  c.report["lambdas"] = lams;
  c.report["errors"] = json::array();
  c.report["assertions"] = json::object();

  const SigmaModel model(cfg.curve, cfg.sigma);

  for (std::size_t hi = 0; hi < cfg.resolutions.size() && wants(Stage::Mesh); ++hi) {
    const double h = cfg.resolutions[hi];
    const std::string ht = tag(h);
    CurveMesh mesh;
    if (!c.stage("mesh", [&] {
          mesh = make_mesh(cfg, h, wants(Stage::Forward));
          std::ofstream os(c.path("mesh_h" + ht + ".csv"), std::ios::binary);
          write_mesh_csv(mesh, os);
          c.log(fmt::format("mesh h={}: {} area nodes, {} boundary nodes", ht, mesh.nodes.size(), mesh.bnodes.size()));
        }))
      continue;
    if (!wants(Stage::Forward)) continue;

    VecC q_true;
    VecR sigma_true;
    ForwardCache cache;
    if (!c.stage("forward", [&] {
          q_true = q_from_model(mesh, model);
          sigma_true = sigma_nodes(mesh, model);
          write_field_csv_file(c.path("q_true_h" + ht + ".csv").string(), q_true);
          write_field_csv_file(c.path("sigma_true_h" + ht + ".csv").string(), sigma_true.cast<cplx>());
          cache = prepare_forward(mesh, q_true);
        }))
      continue;

    for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
      const cplx lam = cfg.lambdas[li];
      const std::string lt = fmt::format("h{}_l{}", ht, li);
      Row row{h, int(li)};
      ForwardResult fw;
      bool have_forward = c.stage("forward", [&] {
        fw = run_forward(mesh, cache, lam);
        write_json_file(c.path("solver_" + lt + ".json").string(), to_json(fw.report));
        write_field_csv_file(c.path("mu_" + lt + ".csv").string(), fw.sol.mu);
        if (!fw.report.resolved)
          c.log(fmt::format("warning: h = {} exceeds pi/(8|lambda|) = {:.4g}; the oscillation is under-resolved", ht,
                            PI / (8.0 * std::abs(lam))));
        row.norm_R = fw.report.norm_R;
        row.pde_residual = fw.report.pde_residual;
        if (hi + 1 == cfg.resolutions.size()) lam_curve.push_back({std::abs(lam), fw.report.norm_R});
        c.log(fmt::format("forward {}: |R| = {:.3g}, pde residual {:.3g}", lt, fw.report.norm_R, fw.report.pde_residual));
      });
      if (have_forward && wants(Stage::Synth)) {
        ChiData chi;
        bool have_data = c.stage("synth-data", [&] {
          if (st == Stage::Invert && !opts.data_path.empty()) {
            std::ifstream in(opts.data_path, std::ios::binary);
            if (!in) throw ConfigError("cannot read " + opts.data_path);
            json j;
            try {
              j = json::parse(in);
            } catch (const json::exception& e) {
              throw ConfigError(opts.data_path + ": " + e.what());
            }
            chi = chi_from_json(j);
            if (chi.df.size() != Eigen::Index(mesh.bnodes.size()))
              throw DataError("boundary data has " + std::to_string(chi.df.size()) + " nodes, the mesh has " +
                              std::to_string(mesh.bnodes.size()));
            return;
          }
          chi = synth_chi(mesh, fw.sol);
          if (cfg.noise > 0.0) add_noise(chi, cfg.noise, mix_seed(cfg.seed, hi, li));
          write_json_file(c.path("boundary_data_" + lt + ".json").string(), to_json(chi));
        });
        if (have_data && wants(Stage::Invert)) {
          c.stage("invert", [&] {
            Inversion inv = invert(mesh, chi, cfg.stages.sigma);
            auto eval = mesh.interior_margin(3.0 * h);
            inv.report.q_error_rel = relative_l2(mesh, inv.q, q_true, eval);
            if (cfg.stages.sigma) {
              auto all = mesh.interior();
              inv.report.sigma_error_rel = relative_l2(mesh, inv.sigma.cast<cplx>(), sigma_true.cast<cplx>(), all);
              write_field_csv_file(c.path("sigma_rec_" + lt + ".csv").string(), inv.sigma.cast<cplx>());
              row.sigma_error = inv.report.sigma_error_rel;
            }
            write_json_file(c.path("inversion_" + lt + ".json").string(), to_json(inv.report));
            write_field_csv_file(c.path("q_rec_" + lt + ".csv").string(), inv.q);
            row.q_error = inv.report.q_error_rel;
            row.residual_g = inv.report.residual_g;
            row.residual_h = inv.report.residual_h;
            c.log(fmt::format("invert {}: q error {:.3g}", lt, inv.report.q_error_rel));
          });
        }
      }
      rows.push_back(row);
    }
  }

  if (wants(Stage::Forward)) write_plot_files(c, rows, lam_curve);

  if (wants(Stage::Invert)) {
    if (cfg.asserts.q_error_max) {
      bool pass = !rows.empty();
      json errs = json::array();
      for (auto& r : rows) {
        pass = pass && std::isfinite(r.q_error) && r.q_error <= *cfg.asserts.q_error_max;
        errs.push_back(r.q_error);
      }
      c.assertion("q_error_max", pass, {{"limit", *cfg.asserts.q_error_max}, {"values", errs}});
    }
    if (cfg.asserts.q_error_decreasing) {
      bool pass = true;
      for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
        std::vector<double> seq;  // coarse to fine
        for (auto it = rows.rbegin(); it != rows.rend(); ++it)
          if (it->lam == int(li)) seq.push_back(it->q_error);
        for (std::size_t k = 1; k < seq.size(); ++k) pass = pass && seq[k] < seq[k - 1];
        for (double v : seq) pass = pass && std::isfinite(v);
      }
      c.assertion("q_error_decreasing", pass, json::object());
    }
  }

  if (wants(Stage::Validate)) {
    c.stage("validate", [&] {
      auto reps = run_estimates(cfg, opts.log);
      write_json_file(c.path("estimates_report.json").string(), to_json(reps));
      for (auto& r : reps) write_csv_file(c.path("estimate_" + r.id + ".csv").string(), r.raw);
      bool all = true;
      json ids = json::object();
      for (auto& r : reps) {
        all = all && r.pass;
        ids[r.id] = r.pass;
      }
      if (cfg.asserts.estimates) c.assertion("estimates", all, {{"checks", ids}});
    });
  }

  c.report["status"] = c.ok ? "ok" : "failed";
  write_json_file(c.path("run_report.json").string(), c.report);
  return c.ok ? 0 : 1;
}

}  // namespace

int run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  std::vector<Row> rows;
  std::vector<std::pair<double, double>> lam_curve;
  return run_impl(cfg, opts, rows, lam_curve);
}

Table run_sweep(const ScenarioConfig& cfg, const std::string& axis, const std::vector<double>& values,
                const std::function<void(const std::string&)>& log) {
  if (axis != "lambda" && axis != "resolution" && axis != "noise")
    throw ConfigError("sweep axis must be lambda, resolution or noise");
  fs::create_directories(cfg.out_dir);
  Table t;
  t.columns = {"value", "status", "norm_R", "pde_residual", "q_error_rel", "sigma_error_rel", "residual_g", "residual_h"};
  for (std::size_t k = 0; k < values.size(); ++k) {
    ScenarioConfig pc = cfg;
    const double v = values[k];
    if (axis == "lambda") pc.lambdas = {v * kDiagonal};
    if (axis == "resolution") pc.resolutions = {v};
    if (axis == "noise") pc.noise = v;
    if (axis != "resolution") pc.resolutions = {cfg.resolutions.front()};
    if (axis != "lambda") pc.lambdas = {cfg.lambdas.front()};
    pc.stages.validate = false;
    pc.out_dir = (fs::path(cfg.out_dir) / fmt::format("sweep_{}_{}", axis, k)).string();
    std::vector<double> row{v, 1.0, NAN, NAN, NAN, NAN, NAN, NAN};
    try {
      if (!(v > 0.0) && axis != "noise") throw ConfigError("sweep value must be positive");
      if (axis == "noise" && v < 0.0) throw ConfigError("noise must be non-negative");
      RunOptions o;
      o.log = log;
      std::vector<Row> rows;
      std::vector<std::pair<double, double>> lam_curve;
      row[1] = run_impl(pc, o, rows, lam_curve);
      if (!rows.empty()) {
        const Row& r = rows.front();
        row = {v, row[1], r.norm_R, r.pde_residual, r.q_error, r.sigma_error, r.residual_g, r.residual_h};
      }
    } catch (const Error& e) {
      if (log) log(fmt::format("[sweep] point {} = {}: {}", k, v, e.what()));
    }
    t.rows.push_back(row);
  }
  write_csv_file((fs::path(cfg.out_dir) / "sweep_summary.csv").string(), t);
  return t;
}

}  // namespace cgo
