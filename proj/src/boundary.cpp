#include "cgo/boundary.hpp"

#include <cmath>
#include <random>

namespace cgo {

cplx BoundaryTrace::integral(int comp) const {
  cplx s = 0.0;
  for (Eigen::Index b = 0; b < values.size(); ++b)
    if (component[b] == comp) s += values[b] * ds[b];
  return s;
}

BoundaryTrace boundary_trace(const CurveMesh& mesh, const VecC& field) {
  if (field.size() != Eigen::Index(mesh.nodes.size())) throw ConfigError("field size does not match the mesh");
  if (mesh.bstencils.size() != mesh.bnodes.size()) throw ConfigError("mesh built without boundary stencils");
  const std::size_t nb = mesh.bnodes.size();
  BoundaryTrace t;
  t.values.resize(nb);
  t.ds.resize(nb);
  t.s.resize(nb);
  t.component.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    cplx v;
    boundary_derivative(mesh, field, int(b), &v);
    t.values[b] = v;
    t.ds[b] = mesh.bnodes[b].ds;
    t.s[b] = mesh.bnodes[b].s;
    t.component[b] = mesh.bnodes[b].component;
  }
  return t;
}

cplx boundary_form_integral(const CurveMesh& mesh, const VecC& a, const VecC& b, int comp) {
  cplx s = 0.0;
  for (std::size_t k = 0; k < mesh.bnodes.size(); ++k) {
    const BoundaryNode& bn = mesh.bnodes[k];
    if (bn.component != comp) continue;
    s += (a[k] * bn.tb + b[k] * std::conj(bn.tb)) * bn.ds;
  }
  return s;
}

std::vector<int> choose_basepoints(const CurveMesh& mesh, cplx lambda) {
  std::vector<int> bp;
  for (int c = 0; c < mesh.components(); ++c) {
    int start = mesh.component_start[c];
    int end = c + 1 < mesh.components() ? mesh.component_start[c + 1] : int(mesh.bnodes.size());
    int best = start;
    double bv = 1e300;
    for (int b = start; b < end; ++b) {
      double r = phi_affine(lambda, mesh.bnodes[b].p.u).real();
      if (r < bv) {
        bv = r;
        best = b;
      }
    }
    bp.push_back(best);
  }
  return bp;
}

ChiData synth_chi(const CurveMesh& mesh, const CgoSolution& sol) {
  if (mesh.opts.collar < 3.0 * mesh.h()) throw MeshError("collar thinner than three mesh spacings");
  const std::size_t nb = mesh.bnodes.size();
  if (sol.mu_b.size() != Eigen::Index(nb)) throw ConfigError("forward solution does not match the mesh");
  ChiData chi;
  chi.lambda = sol.lambda;
  chi.df.resize(nb);
  chi.dbarf.resize(nb);
  chi.s.resize(nb);
  chi.ds.resize(nb);
  chi.component.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const CurvePoint& p = mesh.bnodes[b].p;
    cplx e = std::exp(phi_affine(sol.lambda, p.u));
    chi.df[b] = e * (dphi(sol.lambda, p) * sol.mu_b[b] + sol.dmu_b[b]);
    chi.dbarf[b] = e * sol.dbarmu_b[b];
    chi.s[b] = mesh.bnodes[b].s;
    chi.ds[b] = mesh.bnodes[b].ds;
    chi.component[b] = mesh.bnodes[b].component;
  }
  chi.basepoints = choose_basepoints(mesh, sol.lambda);
  return chi;
}

void add_noise(ChiData& chi, double relative, std::uint64_t seed) {
  chi.noise = relative;
  chi.noise_seed = seed;
  if (relative <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (VecC* v : {&chi.df, &chi.dbarf}) {
    if (v->size() == 0) continue;
    double rms = std::sqrt(v->squaredNorm() / double(v->size()));
    double amp = relative * rms / std::sqrt(2.0);
    for (Eigen::Index k = 0; k < v->size(); ++k) {
      double a = g(rng), b = g(rng);
      (*v)[k] += amp * cplx(a, b);
    }
  }
}

TMapResult t_map(const CurveMesh& mesh, const ChiData& chi, const VecC& g_b, double loop_tol) {
  const std::size_t nb = mesh.bnodes.size();
  if (chi.df.size() != Eigen::Index(nb) || g_b.size() != Eigen::Index(nb))
    throw ConfigError("boundary data does not match the mesh");
  const cplx lam = chi.lambda;
  // mu' = F - phi_s mu along bV, with F = e^{-phi} df/ds
  VecC F(nb), phis(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const BoundaryNode& bn = mesh.bnodes[b];
    cplx ph = phi_affine(lam, bn.p.u);
    cplx df = std::exp(std::conj(ph)) * g_b[b];
    F[b] = std::exp(-ph) * (df * bn.tb + chi.dbarf[b] * std::conj(bn.tb));
    phis[b] = dphi(lam, bn.p) * bn.tb;
  }
  std::vector<int> bp = chi.basepoints.empty() ? choose_basepoints(mesh, lam) : chi.basepoints;
  TMapResult r;
  r.h_b.resize(nb);
  for (int c = 0; c < mesh.components(); ++c) {
    const int start = mesh.component_start[c];
    const int end = c + 1 < mesh.components() ? mesh.component_start[c + 1] : int(nb);
    const int n = end - start;
    const int p = bp.at(c) - start;
    const double ds = mesh.bnodes[start].ds;
    auto at = [&](int j) { return start + ((p + j) % n + n) % n; };
    auto sweep = [&](int dir) {
      std::vector<cplx> mu(n + 1);
      mu[0] = 1.0;
      const double st = dir * ds;
      for (int j = 0; j < n; ++j) {
        int a = at(dir * j), b = at(dir * (j + 1));
        mu[j + 1] = (mu[j] * (1.0 - 0.5 * st * phis[a]) + 0.5 * st * (F[a] + F[b])) / (1.0 + 0.5 * st * phis[b]);
      }
      return mu;
    };
    auto fw = sweep(1), bw = sweep(-1);
    // each arc is integrated from the minimum of Re phi up to its maximum, so that |f| grows along the path
    int jm = 0;
    double pm = -1e300;
    for (int j = 0; j < n; ++j) {
      double v = phi_affine(lam, mesh.bnodes[at(j)].p.u).real();
      if (v > pm) {
        pm = v;
        jm = j;
      }
    }
    double res = std::abs(fw[jm] - bw[(n - jm) % n]) / std::max(1.0, std::abs(fw[jm]));
    r.loop_residual.push_back(res);
    if (!(res <= loop_tol))
      throw DataError("boundary data not closed on component " + std::to_string(c) + " (loop residual " +
                      std::to_string(res) + ")");
    for (int j = 0; j < n; ++j) {
      cplx mu = j <= jm ? fw[j] : bw[n - j];
      if (j == jm) mu = 0.5 * (fw[j] + bw[(n - j) % n]);
      int b = at(j);
      r.h_b[b] = exp_factor_affine(-lam, mesh.bnodes[b].p.u) * mu;
    }
  }
  return r;
}

nlohmann::json to_json(const ChiData& chi) {
  nlohmann::json j;
  j["lambda"] = {chi.lambda.real(), chi.lambda.imag()};
  j["basepoints"] = chi.basepoints;
  j["noise"] = chi.noise;
  j["noise_seed"] = chi.noise_seed;
  auto nodes = nlohmann::json::array();
  for (Eigen::Index b = 0; b < chi.df.size(); ++b)
    nodes.push_back({chi.s[b], chi.df[b].real(), chi.df[b].imag(), chi.dbarf[b].real(), chi.dbarf[b].imag(),
                     chi.component[b], chi.ds[b]});
  j["nodes"] = nodes;
  return j;
}

ChiData chi_from_json(const nlohmann::json& j) {
  ChiData chi;
  try {
    chi.lambda = cplx(j.at("lambda").at(0).get<double>(), j.at("lambda").at(1).get<double>());
    chi.basepoints = j.at("basepoints").get<std::vector<int>>();
    chi.noise = j.value("noise", 0.0);
    chi.noise_seed = j.value("noise_seed", std::uint64_t(0));
    const auto& nodes = j.at("nodes");
    const std::size_t n = nodes.size();
    chi.df.resize(n);
    chi.dbarf.resize(n);
    chi.s.resize(n);
    chi.ds.resize(n);
    chi.component.resize(n);
    for (std::size_t b = 0; b < n; ++b) {
      const auto& r = nodes[b];
      chi.s[b] = r.at(0).get<double>();
      chi.df[b] = cplx(r.at(1).get<double>(), r.at(2).get<double>());
      chi.dbarf[b] = cplx(r.at(3).get<double>(), r.at(4).get<double>());
      chi.component[b] = r.size() > 5 ? r.at(5).get<int>() : 0;
      chi.ds[b] = r.size() > 6 ? r.at(6).get<double>() : 0.0;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed boundary data: ") + e.what());
  }
  return chi;
}

}  // namespace cgo
