#include "cgo/inverse.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace cgo {

namespace {

double norm2_estimate(const MatC& A) {
  if (A.size() == 0) return 0.0;
  VecC x = VecC::Ones(A.cols()) / std::sqrt(double(A.cols()));
  double s = 0.0;
  for (int it = 0; it < 30; ++it) {
    VecC y = A.adjoint() * (A * x);
    double ny = y.norm();
    if (ny == 0.0) return 0.0;
    x = y / ny;
    if (std::abs(std::sqrt(ny) - s) <= 1e-6 * std::sqrt(ny)) {
      s = std::sqrt(ny);
      break;
    }
    s = std::sqrt(ny);
  }
  return s;
}

double rel_residual(const MatC& A, const VecC& x, const VecC& b) {
  double nb = b.norm();
  double r = (A * x - b).norm();
  return nb > 0.0 ? r / nb : r;
}

std::vector<CurvePoint> pts_of(const CurveMesh& mesh, const std::vector<int>& idx) { return node_points(mesh, idx); }

VecC restrict(const VecC& f, const std::vector<int>& idx) {
  VecC r(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r[k] = f[idx[k]];
  return r;
}

VecC g_free(const CurveMesh& mesh, cplx lambda, const std::vector<int>& idx) {
  VecC g(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const CurvePoint& p = mesh.nodes[idx[k]].p;
    g[k] = exp_factor_affine(-lambda, p.u) * dphi(lambda, p);
  }
  return g;
}

}  // namespace

VecC solve_regularized(const MatC& A, const VecC& b, SolveReport& rep, double cond_max) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw ConfigError("system is not square");
  const Eigen::Index n = A.rows();
  rep = {};
  if (n == 0) return VecC();
  if (b.norm() == 0.0) return VecC::Zero(n);
  Eigen::PartialPivLU<MatC> lu(A);
  double rc = lu.rcond();
  rep.cond = rc > 0.0 ? 1.0 / rc : INFINITY;
  if (rep.cond <= cond_max) {
    VecC x = lu.solve(b);
    rep.residual = rel_residual(A, x, b);
    return x;
  }
  const double na = norm2_estimate(A);
  MatC AhA = A.adjoint() * A;
  VecC Ahb = A.adjoint() * b;
  for (double t = 1e-10; t <= 1.0001e-4; t *= 10.0) {
    rep.escalations.push_back(t);
    MatC M = AhA;
    M.diagonal().array() += (t * na) * (t * na);
    Eigen::LLT<MatC> llt(M);
    if (llt.info() != Eigen::Success) continue;
    double c = 1.0 / llt.rcond();
    if (!(c <= cond_max)) continue;
    VecC x = llt.solve(Ahb);
    rep.cond = c;
    rep.regularization = t;
    rep.residual = rel_residual(A, x, b);
    return x;
  }
  throw IllConditioned("system remains ill-conditioned at the regularization floor 1e-4");
}

POperator assemble_P(const CurveMesh& mesh, cplx lambda) {
  POperator op;
  op.lambda = lambda;
  op.rows = mesh.interior();
  auto zp = pts_of(mesh, op.rows);
  auto bp = boundary_points(mesh);
  const std::size_t n = op.rows.size(), nb = bp.size();
  op.dom = dbar_kappa_matrix(mesh.curve, zp, zp);
  op.bnd = kappa_matrix(mesh.curve, zp, bp);
  for (std::size_t j = 0; j < n; ++j)
    op.dom.col(j) *= -mesh.nodes[op.rows[j]].weight * exp_factor_affine(lambda, zp[j].u) / PI;
  for (std::size_t b = 0; b < nb; ++b)
    op.bnd.col(b) *= exp_factor_affine(lambda, bp[b].u) * mesh.bnodes[b].tb * mesh.bnodes[b].ds / (2.0 * PI * I);
  op.rhs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx e = exp_factor_affine(-lambda, zp[i].u);
    op.dom.row(i) *= e;
    op.bnd.row(i) *= e;
    op.rhs[i] = e * dphi(lambda, zp[i]);
  }
  return op;
}

SOperator assemble_S(const CurveMesh& mesh) {
  SOperator op;
  op.rows = mesh.interior();
  auto zp = pts_of(mesh, op.rows);
  auto bp = boundary_points(mesh);
  op.Ig = conj_cauchy_matrix(mesh.curve, zp, zp);
  op.S = conj_dk_matrix(mesh.curve, zp, zp);
  for (std::size_t j = 0; j < op.rows.size(); ++j) {
    double a = mesh.nodes[op.rows[j]].weight / PI;
    op.Ig.col(j) *= a;
    op.S.col(j) *= -a;
  }
  op.Mb = conj_cauchy_matrix(mesh.curve, zp, bp);
  for (std::size_t b = 0; b < bp.size(); ++b)
    op.Mb.col(b) *= std::conj(mesh.bnodes[b].tb) * mesh.bnodes[b].ds / (2.0 * PI * I);
  return op;
}

VecC compute_v(const SOperator& op, const VecC& g, const VecC& h_b) { return op.Ig * g + op.Mb * h_b; }

GSolve solve_g(const CurveMesh& mesh, const POperator& op, const VecC& g_b) {
  VecC gb0 = g_b;
  for (std::size_t b = 0; b < mesh.bnodes.size(); ++b) {
    const CurvePoint& p = mesh.bnodes[b].p;
    gb0[b] -= exp_factor_affine(-op.lambda, p.u) * dphi(op.lambda, p);
  }
  GSolve s;
  VecC rhs = -(op.bnd * gb0);
  VecC gs = solve_regularized(op.dom, rhs, s.report);
  s.g = g_free(mesh, op.lambda, op.rows) + gs;
  return s;
}

HSolve solve_h(const CurveMesh& mesh, const SOperator& op, cplx lambda, const VecC& g, const VecC& h_b) {
  VecC hb0 = h_b;
  for (std::size_t b = 0; b < mesh.bnodes.size(); ++b) hb0[b] -= exp_factor_affine(-lambda, mesh.bnodes[b].p.u);
  VecC gs = g - g_free(mesh, lambda, op.rows);
  VecC v = compute_v(op, gs, hb0);
  MatC A = op.S;
  A.diagonal().array() += 1.0;
  HSolve s;
  VecC hs = solve_regularized(A, v, s.report);
  s.h.resize(op.rows.size());
  for (std::size_t k = 0; k < op.rows.size(); ++k)
    s.h[k] = exp_factor_affine(-lambda, mesh.nodes[op.rows[k]].p.u) + hs[k];
  return s;
}

EquationResiduals equation_residuals(const CurveMesh& mesh, const POperator& P, const SOperator& S,
                                     const VecC& g_nodes, const VecC& g_b, const VecC& h_nodes, const VecC& h_b,
                                     double margin) {
  VecC g = restrict(g_nodes, P.rows), h = restrict(h_nodes, S.rows);
  VecC rp = P.rhs - P.apply(g, g_b);
  VecC rh = h + S.S * h - compute_v(S, restrict(g_nodes, S.rows), h_b);
  EquationResiduals r;
  double sp = 0.0, sh = 0.0;
  for (std::size_t k = 0; k < P.rows.size(); ++k) {
    if (mesh.nodes[P.rows[k]].dist_b < margin) continue;
    r.p = std::max(r.p, std::abs(rp[k]));
    sp = std::max(sp, std::abs(P.rhs[k]));
    r.h = std::max(r.h, std::abs(rh[k]));
    sh = std::max(sh, std::abs(h[k]));
  }
  if (sp > 0.0) r.p /= sp;
  if (sh > 0.0) r.h /= sh;
  return r;
}

VecC reconstruct_q(const CurveMesh& mesh, const VecC& h_nodes, cplx lambda, double margin_cells) {
  const std::size_t n = mesh.nodes.size();
  VecC mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = exp_factor_affine(lambda, mesh.nodes[i].p.u) * h_nodes[i];
  auto eval = mesh.interior_margin(margin_cells * mesh.h());
  double hmax = 0.0;
  for (int i : eval) hmax = std::max(hmax, std::abs(h_nodes[i]));
  std::string bad;
  int nbad = 0;
  for (int i : eval)
    if (std::abs(h_nodes[i]) < 1e-3 * hmax) {
      if (nbad++ < 10) bad += " " + std::to_string(i);
    }
  if (nbad > 0) throw DataError("|h| below threshold at " + std::to_string(nbad) + " nodes:" + bad);
  VecC q = VecC::Zero(n);
  for (int i : eval) {
    Deriv d = derivative(mesh, mu, i);
    q[i] = (d.ddbar + dphi(lambda, mesh.nodes[i].p) * d.dbar) / mu[i];
  }
  return q;
}

SigmaSolve recover_sigma(const CurveMesh& mesh, const VecC& q) {
  using Sp = Eigen::SparseMatrix<cplx>;
  const std::size_t n = mesh.nodes.size(), nb = mesh.bnodes.size();
  const double wb = 1.0 / (mesh.h() * mesh.h());
  std::vector<Eigen::Triplet<cplx>> tr;
  for (std::size_t i = 0; i < n; ++i) {
    const Stencil& st = mesh.stencils.at(i);
    cplx diag = mesh.nodes[i].region == Region::Interior ? -q[i] : cplx(0.0);
    for (std::size_t k = 0; k < st.idx.size(); ++k) {
      tr.emplace_back(int(i), st.idx[k], st.ddbar[k]);
      diag -= st.ddbar[k];
    }
    tr.emplace_back(int(i), int(i), diag);
  }
  VecC rhs = VecC::Zero(n + nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const Stencil& st = mesh.bstencils.at(b);
    for (std::size_t k = 0; k < st.idx.size(); ++k) tr.emplace_back(int(n + b), st.idx[k], wb * st.value[k]);
    rhs[n + b] = wb;
  }
  Sp A(n + nb, n);
  A.setFromTriplets(tr.begin(), tr.end());
  Sp AhA = A.adjoint() * A;
  Eigen::SimplicialLDLT<Sp> ldlt(AhA);
  if (ldlt.info() != Eigen::Success) throw IllConditioned("Dirichlet problem is singular (0 is an eigenvalue)");
  VecR D = ldlt.vectorD().real();
  if (D.minCoeff() <= 1e-13 * D.maxCoeff())
    throw IllConditioned("Dirichlet problem is singular (0 is an eigenvalue)");
  SigmaSolve s;
  s.u = ldlt.solve(A.adjoint() * rhs);
  s.sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.sigma[i] = (s.u[i] * s.u[i]).real();
  return s;
}

double relative_l2(const CurveMesh& mesh, const VecC& a, const VecC& b, const std::vector<int>& idx) {
  double e = 0.0, r = 0.0;
  for (int i : idx) {
    double w = mesh.nodes[i].weight;
    e += w * std::norm(a[i] - b[i]);
    r += w * std::norm(b[i]);
  }
  if (r == 0.0) return std::sqrt(e);
  return std::sqrt(e / r);
}

nlohmann::json to_json(const InversionReport& r) {
  nlohmann::json j;
  j["lambda"] = {r.lambda.real(), r.lambda.imag()};
  j["cond_P"] = r.cond_P;
  j["cond_IS"] = r.cond_IS;
  j["residual_g"] = r.residual_g;
  j["residual_h"] = r.residual_h;
  j["regularization_used"] = {{"g", r.reg_g}, {"h", r.reg_h}};
  j["tmap_loop_residual"] = r.tmap_loop_residual;
  if (r.q_error_rel >= 0.0) j["q_error_rel"] = r.q_error_rel;
  if (r.sigma_error_rel >= 0.0) j["sigma_error_rel"] = r.sigma_error_rel;
  j["sigma_recovery"] = "extension: Dirichlet problem dd-bar u = q u, u = 1 on bV, sigma = u^2";
  return j;
}

Inversion invert(const CurveMesh& mesh, const ChiData& chi, bool with_sigma) {
  Inversion out;
  InversionReport& rep = out.report;
  const cplx lam = chi.lambda;
  rep.lambda = lam;
  const std::size_t nb = mesh.bnodes.size();
  out.g_b.resize(nb);
  for (std::size_t b = 0; b < nb; ++b)
    out.g_b[b] = std::exp(-std::conj(phi_affine(lam, mesh.bnodes[b].p.u))) * chi.df[b];

  POperator P = assemble_P(mesh, lam);
  GSolve gs = solve_g(mesh, P, out.g_b);
  rep.cond_P = gs.report.cond;
  rep.residual_g = gs.report.residual;
  rep.reg_g = gs.report.regularization;

  TMapResult tm = t_map(mesh, chi, out.g_b);
  out.h_b = tm.h_b;
  for (double r : tm.loop_residual) rep.tmap_loop_residual = std::max(rep.tmap_loop_residual, r);

  SOperator S = assemble_S(mesh);
  HSolve hs = solve_h(mesh, S, lam, gs.g, out.h_b);
  rep.cond_IS = hs.report.cond;
  rep.residual_h = hs.report.residual;
  rep.reg_h = hs.report.regularization;

  out.h = VecC::Zero(mesh.nodes.size());
  for (std::size_t k = 0; k < S.rows.size(); ++k) out.h[S.rows[k]] = hs.h[k];
  out.q = reconstruct_q(mesh, out.h, lam);
  if (with_sigma) out.sigma = recover_sigma(mesh, out.q).sigma;
  return out;
}

}  // namespace cgo
