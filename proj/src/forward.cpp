#include "cgo/forward.hpp"

#include <cmath>

#include <Eigen/LU>

#include "cgo/parallel.hpp"

namespace cgo {

namespace {

// (1 - r^2/rb^2)^4: C3 across the edge, polynomial in r^2
double bump_profile(double s2) {
  if (s2 >= 1.0) return 0.0;
  double t = 1.0 - s2;
  return t * t * t * t;
}

}  // namespace

std::vector<BumpSpec> default_bumps(const CurveDef& curve, const std::string& preset) {
  const Vec2c& c = curve.chart.center;
  std::vector<BumpSpec> b;
  if (preset == "bump") {
    b.push_back({{c[0], c[1] + cplx(0.05, 0.03)}, 0.3, 0.25});
  } else if (preset == "two-bumps") {
    b.push_back({{c[0], c[1] + cplx(-0.12, 0.02)}, 0.3, 0.12});
    b.push_back({{c[0], c[1] + cplx(0.15, 0.05)}, 0.15, 0.12});
  }
  return b;
}

SigmaModel::SigmaModel(const CurveDef& curve, const SigmaSpec& spec) : curve_(curve), taper_(spec.taper) {
  if (spec.preset != "identity" && spec.preset != "bump" && spec.preset != "two-bumps")
    throw ConfigError("unknown conductivity preset '" + spec.preset + "'");
  if (spec.preset == "identity") return;
  bumps_ = spec.bumps.empty() ? default_bumps(curve, spec.preset) : spec.bumps;
  double amin = 0.0;
  for (auto& b : bumps_) {
    if (!(b.radius > 0.0)) throw ConfigError("bump radius must be positive");
    b.center = project_to_curve(curve, b.center);
    amin = std::min(amin, b.amplitude);
  }
  if (1.0 + amin < spec.floor) throw ConfigError("conductivity falls below the floor");
}

double SigmaModel::operator()(const Vec2c& u) const {
  if (bumps_.empty()) return 1.0;
  double s = 0.0;
  for (auto& b : bumps_) {
    double r2 = std::norm(u[0] - b.center[0]) + std::norm(u[1] - b.center[1]);
    s += b.amplitude * bump_profile(r2 / (b.radius * b.radius));
  }
  if (s == 0.0) return 1.0;
  const Chart& ch = curve_.chart;
  double d = ch.radius - std::sqrt(std::max(0.0, ch.rho(u) + ch.radius * ch.radius));
  double taper = cutoff({-2.0 * taper_, -taper_}, -d);
  return 1.0 + s * taper;
}

VecR sigma_nodes(const CurveMesh& mesh, const SigmaModel& model) {
  VecR s(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) s[i] = model(mesh.nodes[i].p.u);
  return s;
}

VecC sigma_to_q(const CurveMesh& mesh, const VecR& sigma, double floor) {
  if (sigma.size() != Eigen::Index(mesh.nodes.size())) throw ConfigError("sigma size does not match the mesh");
  if (sigma.minCoeff() < floor) throw ConfigError("conductivity below the floor");
  if (mesh.stencils.empty()) throw ConfigError("mesh built without derivative stencils");
  VecC s = sigma.cwiseSqrt().cast<cplx>();
  VecC q(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) q[i] = derivative(mesh, s, int(i)).ddbar / s[i];
  return q;
}

VecC q_from_model(const CurveMesh& mesh, const SigmaModel& model, double eps) {
  VecC q = VecC::Zero(mesh.nodes.size());
  if (model.is_identity()) return q;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const CurvePoint& p = mesh.nodes[i].p;
    double s0 = model(p.u);
    double sp[4] = {model(point_at_tau(mesh.curve, p, eps).u), model(point_at_tau(mesh.curve, p, -eps).u),
                    model(point_at_tau(mesh.curve, p, cplx(0, eps)).u),
                    model(point_at_tau(mesh.curve, p, cplx(0, -eps)).u)};
    if (s0 == 1.0 && sp[0] == 1.0 && sp[1] == 1.0 && sp[2] == 1.0 && sp[3] == 1.0) continue;
    double f0 = std::sqrt(s0);
    double lap = (std::sqrt(sp[0]) + std::sqrt(sp[1]) + std::sqrt(sp[2]) + std::sqrt(sp[3]) - 4.0 * f0) / (eps * eps);
    q[i] = 0.25 * lap / f0;
  }
  return q;
}

ForwardCache prepare_forward(const CurveMesh& mesh, const VecC& q) {
  ForwardCache c;
  c.q = q;
  c.theta = theta_nodes(mesh);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    if (q[i] != 0.0) {
      if (mesh.nodes[i].region != Region::Interior)
        throw ConfigError("potential is not compactly supported inside V");
      c.support.push_back(int(i));
    }
  if (c.support.empty()) return c;
  auto all = node_points(mesh);
  auto sp = node_points(mesh, c.support);
  c.Kc = conj_cauchy_matrix(mesh.curve, sp, all);
  c.Kk = kappa_matrix(mesh.curve, all, sp);
  return c;
}

namespace {

// Y(zeta) = a theta E(zeta,-lambda)/pi * sum_s kappa(s,zeta) a_s q_s x_s / pi
VecC inner_density(const CurveMesh& mesh, const ForwardCache& c, cplx lambda, const VecC& x) {
  const std::size_t ns = c.support.size();
  VecC src(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    int s = c.support[k];
    src[k] = mesh.nodes[s].weight * c.q[s] * x[k] / PI;
  }
  VecC y = c.Kk * src;
  for (std::size_t j = 0; j < mesh.nodes.size(); ++j)
    y[j] *= mesh.nodes[j].weight * c.theta[j] * exp_factor_affine(-lambda, mesh.nodes[j].p.u) / PI;
  return y;
}

}  // namespace

MatC assemble_R(const CurveMesh& mesh, const ForwardCache& c, cplx lambda) {
  const std::size_t ns = c.support.size();
  if (ns == 0) return MatC(0, 0);
  MatC M = c.Kk;
  for (std::size_t k = 0; k < ns; ++k) {
    int s = c.support[k];
    M.col(k) *= mesh.nodes[s].weight * c.q[s] / PI;
  }
  for (std::size_t j = 0; j < mesh.nodes.size(); ++j)
    M.row(j) *= mesh.nodes[j].weight * c.theta[j] * exp_factor_affine(-lambda, mesh.nodes[j].p.u) / PI;
  MatC R = c.Kc * M;
  for (std::size_t k = 0; k < ns; ++k) R.row(k) *= exp_factor_affine(lambda, mesh.nodes[c.support[k]].p.u);
  return R;
}

double norm_estimate(const MatC& R) {
  if (R.size() == 0) return 0.0;
  return R.cwiseAbs().rowwise().sum().maxCoeff();
}

MuSolve solve_mu_direct(const MatC& R) {
  MuSolve s;
  const Eigen::Index n = R.rows();
  if (n == 0) return s;
  MatC A = MatC::Identity(n, n) - R;
  Eigen::PartialPivLU<MatC> lu(A);
  double rc = lu.rcond();
  s.cond = rc > 0.0 ? 1.0 / rc : INFINITY;
  if (!(s.cond <= 1e12)) throw IllConditioned("forward system condition estimate exceeds 1e12");
  VecC one = VecC::Ones(n);
  s.mu = lu.solve(one);
  s.residual = (A * s.mu - one).cwiseAbs().maxCoeff();
  return s;
}

MuSolve solve_mu(const MatC& R, double neumann_threshold, double tol) {
  const Eigen::Index n = R.rows();
  if (n == 0) return {};
  if (norm_estimate(R) >= neumann_threshold) return solve_mu_direct(R);
  MuSolve s;
  s.neumann = true;
  VecC one = VecC::Ones(n);
  VecC mu = one;
  for (int k = 1; k <= 5000; ++k) {
    VecC next = one + R * mu;
    double d = (next - mu).cwiseAbs().maxCoeff();
    mu = next;
    s.terms = k;
    if (d <= tol * mu.cwiseAbs().maxCoeff()) break;
  }
  s.mu = mu;
  s.residual = (mu - R * mu - one).cwiseAbs().maxCoeff();
  double nr = norm_estimate(R);
  s.cond = (1.0 + nr) / (1.0 - nr);
  return s;
}

VecC evaluate_mu(const CurveMesh& mesh, const ForwardCache& c, cplx lambda, const VecC& mu_support,
                 const std::vector<CurvePoint>& targets) {
  VecC mu = VecC::Ones(targets.size());
  if (c.support.empty()) return mu;
  VecC y = inner_density(mesh, c, lambda, mu_support);
  parallel_for(long(targets.size()), [&](long i) {
    const CurvePoint& z = targets[i];
    cplx s = 0.0;
    for (std::size_t j = 0; j < mesh.nodes.size(); ++j) {
      if (y[j] == 0.0) continue;
      const CurvePoint& zeta = mesh.nodes[j].p;
      if (std::abs(B(zeta.z, z.z)) < 1e-13) continue;
      s += std::conj(cauchy_k(mesh.curve, zeta, z)) * y[j];
    }
    mu[i] = 1.0 + exp_factor_affine(lambda, z.u) * s;
  });
  return mu;
}

CgoSolution cgo_fields(const CurveMesh& mesh, const ForwardCache& c, cplx lambda, const VecC& mu_support) {
  CgoSolution s;
  s.lambda = lambda;
  const std::size_t n = mesh.nodes.size(), nb = mesh.bnodes.size();
  s.mu = evaluate_mu(mesh, c, lambda, mu_support, node_points(mesh));
  s.mu_b = evaluate_mu(mesh, c, lambda, mu_support, boundary_points(mesh));
  s.f.resize(n);
  s.h.resize(n);
  s.dh.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CurvePoint& p = mesh.nodes[i].p;
    cplx ph = phi_affine(lambda, p.u);
    s.f[i] = std::exp(ph) * s.mu[i];
    cplx em = exp_factor_affine(-lambda, p.u);
    s.h[i] = em * s.mu[i];
    cplx dmu = mesh.stencils.empty() ? cplx(0.0) : derivative(mesh, s.mu, int(i)).d;
    s.dh[i] = em * (dphi(lambda, p) * s.mu[i] + dmu);
  }
  s.f_b.resize(nb);
  s.h_b.resize(nb);
  s.dmu_b.resize(nb);
  s.dbarmu_b.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const CurvePoint& p = mesh.bnodes[b].p;
    s.f_b[b] = std::exp(phi_affine(lambda, p.u)) * s.mu_b[b];
    s.h_b[b] = exp_factor_affine(-lambda, p.u) * s.mu_b[b];
    if (!mesh.bstencils.empty()) {
      Deriv d = boundary_derivative(mesh, s.mu, int(b));
      s.dmu_b[b] = d.d;
      s.dbarmu_b[b] = d.dbar;
    } else {
      s.dmu_b[b] = s.dbarmu_b[b] = 0.0;
    }
  }
  return s;
}

double pde_residual(const CurveMesh& mesh, const VecC& f, const VecC& q, cplx lambda, double margin_cells) {
  const std::size_t n = mesh.nodes.size();
  VecC mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = std::exp(-phi_affine(lambda, mesh.nodes[i].p.u)) * f[i];
  double r = 0.0;
  for (int i : mesh.interior_margin(margin_cells * mesh.h())) {
    Deriv d = derivative(mesh, mu, i);
    r = std::max(r, std::abs(d.ddbar + dphi(lambda, mesh.nodes[i].p) * d.dbar - q[i] * mu[i]));
  }
  return r;
}

nlohmann::json to_json(const ForwardReport& r) {
  nlohmann::json j;
  j["lambda"] = {r.lambda.real(), r.lambda.imag()};
  j["norm_R_estimate"] = r.norm_R;
  if (r.neumann)
    j["neumann_terms"] = r.neumann_terms;
  else
    j["direct"] = true;
  j["residual_inf"] = r.residual_inf;
  j["pde_residual"] = r.pde_residual;
  j["cond"] = r.cond;
  j["support_nodes"] = r.support;
  j["oscillation_resolved"] = r.resolved;
  return j;
}

ForwardResult run_forward(const CurveMesh& mesh, const ForwardCache& cache, cplx lambda) {
  ForwardResult out;
  ForwardReport& rep = out.report;
  rep.lambda = lambda;
  rep.support = cache.support.size();
  rep.resolved = oscillation_resolved(mesh.h(), lambda);
  MatC R = assemble_R(mesh, cache, lambda);
  rep.norm_R = norm_estimate(R);
  MuSolve ms = solve_mu(R);
  rep.neumann = ms.neumann || cache.support.empty();
  rep.neumann_terms = ms.terms;
  rep.residual_inf = ms.residual;
  rep.cond = ms.cond;
  out.sol = cgo_fields(mesh, cache, lambda, ms.mu);
  rep.pde_residual = mesh.stencils.empty() ? 0.0 : pde_residual(mesh, out.sol.f, cache.q, lambda);
  return out;
}

}  // namespace cgo
