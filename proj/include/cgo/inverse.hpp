#pragma once

#include "json.hpp"

#include "cgo/boundary.hpp"

namespace cgo {

// Dense linear system with its solve diagnostics.
struct SolveReport {
  double residual = 0.0;  // ||A x - b|| / ||b||
  double cond = 1.0;
  double regularization = 0.0;  // relative Tikhonov parameter, 0 when solved directly
  std::vector<double> escalations;
};

// Direct LU when the condition estimate allows it, else Tikhonov
// min |Ax - b|^2 + (t |A|)^2 |x|^2 with t = 1e-10, 1e-9, ... up to 1e-4.
VecC solve_regularized(const MatC& A, const VecC& b, SolveReport& rep, double cond_max = 1e12);

// Operators of the g-equation on the interior nodes:
//   E(z,-lambda) [ (1/2 pi i) sum_b kappa(b,z) E(b,lambda) g_b tb ds
//                  - (1/pi) sum_w a E(w,lambda) g(w) dbar_w kappa(w,z) ] = -E(z,-lambda) dphi(z)
struct POperator {
  cplx lambda;
  std::vector<int> rows;  // interior nodes (unknowns and collocation points)
  MatC dom;               // [z, w]
  MatC bnd;               // [z, b]
  VecC rhs;               // E(z,-lambda) dphi(z)
  // I + P as the operator on g (the identity cancels against the delta of dbar kappa)
  VecC apply(const VecC& g, const VecC& g_b) const { return -(dom * g + bnd * g_b); }
};
POperator assemble_P(const CurveMesh& mesh, cplx lambda);

// Operators of the h-equation: h + S[h] = v with v = I[g] + M_b[h_b].
struct SOperator {
  std::vector<int> rows;
  MatC S;   // -M_dom
  MatC Ig;  // (1/pi) a conj k(w,z)
  MatC Mb;  // (1/2 pi i) conj(k(b,z) tb) ds
};
SOperator assemble_S(const CurveMesh& mesh);
VecC compute_v(const SOperator& op, const VecC& g, const VecC& h_b);

struct GSolve {
  VecC g;  // on op.rows
  SolveReport report;
};
// Solves for the part of g beyond the q = 0 solution E(-lambda) dphi, with boundary values g_b.
GSolve solve_g(const CurveMesh& mesh, const POperator& op, const VecC& g_b);

struct HSolve {
  VecC h;
  SolveReport report;
};
HSolve solve_h(const CurveMesh& mesh, const SOperator& op, cplx lambda, const VecC& g, const VecC& h_b);

// Relative sup residuals of the forward solution in both equations, over nodes at distance >= margin from bV.
struct EquationResiduals {
  double p = 0.0, h = 0.0;
};
EquationResiduals equation_residuals(const CurveMesh& mesh, const POperator& P, const SOperator& S,
                                     const VecC& g_nodes, const VecC& g_b, const VecC& h_nodes, const VecC& h_b,
                                     double margin);

// q = (dd-bar mu + dphi dbar mu) / mu with mu = E(lambda) h, on interior nodes >= margin_cells*h from bV.
VecC reconstruct_q(const CurveMesh& mesh, const VecC& h_nodes, cplx lambda, double margin_cells = 3.0);

struct SigmaSolve {
  VecC u;
  VecR sigma;
};
// dd-bar u - q u = 0 in V, u = 1 on bV; sigma = u^2.
SigmaSolve recover_sigma(const CurveMesh& mesh, const VecC& q);

double relative_l2(const CurveMesh& mesh, const VecC& a, const VecC& b, const std::vector<int>& idx);

struct InversionReport {
  cplx lambda;
  double cond_P = 0.0, cond_IS = 0.0;
  double residual_g = 0.0, residual_h = 0.0;
  double reg_g = 0.0, reg_h = 0.0;
  double q_error_rel = -1.0, sigma_error_rel = -1.0;  // negative when the truth is unknown
  double tmap_loop_residual = 0.0;
};
nlohmann::json to_json(const InversionReport& r);

struct Inversion {
  InversionReport report;
  VecC g_b, h_b;    // boundary
  VecC h;           // all nodes; collar entries are zero
  VecC q;           // all nodes
  VecR sigma;       // all nodes
};
// Full pipeline from measured boundary data to q and sigma.
Inversion invert(const CurveMesh& mesh, const ChiData& chi, bool with_sigma = true);

}  // namespace cgo
