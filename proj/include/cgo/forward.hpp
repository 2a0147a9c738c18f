#pragma once

#include <functional>
#include <string>

#include "json.hpp"

#include "cgo/operators.hpp"

namespace cgo {

struct BumpSpec {
  Vec2c center{};  // projected onto the curve
  double amplitude = 0.3;
  double radius = 0.25;
};

struct SigmaSpec {
  std::string preset = "identity";  // identity | bump | two-bumps
  std::vector<BumpSpec> bumps;      // empty: preset defaults around the chart center
  double floor = 0.1;
  double taper = 0.1;  // sigma - 1 is ramped to zero between 2*taper and taper from bV
};

// Preset bumps around the chart center.
std::vector<BumpSpec> default_bumps(const CurveDef& curve, const std::string& preset);

// Closed-form conductivity 1 + sum a * bump(|u - c|^2 / r^2), tapered to 1 near bV.
class SigmaModel {
 public:
  SigmaModel(const CurveDef& curve, const SigmaSpec& spec);
  double operator()(const Vec2c& u) const;
  bool is_identity() const { return bumps_.empty(); }
  const std::vector<BumpSpec>& bumps() const { return bumps_; }

 private:
  CurveDef curve_;
  std::vector<BumpSpec> bumps_;
  double taper_;
};

VecR sigma_nodes(const CurveMesh& mesh, const SigmaModel& model);
// q = dd-bar sqrt(sigma) / sqrt(sigma) from nodal sigma with the mesh stencils.
VecC sigma_to_q(const CurveMesh& mesh, const VecR& sigma, double floor = 0.1);
// The same from the closed form, by five-point differences in the local coordinate.
VecC q_from_model(const CurveMesh& mesh, const SigmaModel& model, double eps = 1e-3);

// lambda-independent part of the forward operator
struct ForwardCache {
  std::vector<int> support;  // nodes with q != 0
  VecC q;                    // all nodes
  MatC Kc;                   // [s in S, zeta] conj k(zeta, s)
  MatC Kk;                   // [zeta, s in S] kappa(s, zeta)
  VecR theta;
};
ForwardCache prepare_forward(const CurveMesh& mesh, const VecC& q);

// R restricted to the support of q.
MatC assemble_R(const CurveMesh& mesh, const ForwardCache& cache, cplx lambda);
double norm_estimate(const MatC& R);

struct MuSolve {
  VecC mu;  // on the support
  bool neumann = false;
  int terms = 0;
  double residual = 0.0;
  double cond = 1.0;
};
MuSolve solve_mu(const MatC& R, double neumann_threshold = 0.9, double tol = 1e-14);
MuSolve solve_mu_direct(const MatC& R);

struct CgoSolution {
  cplx lambda;
  VecC mu, f, h, dh;           // area nodes; dh is the dtau coefficient
  VecC mu_b, f_b, h_b;         // boundary nodes
  VecC dmu_b, dbarmu_b;        // boundary derivatives of mu
};
CgoSolution cgo_fields(const CurveMesh& mesh, const ForwardCache& cache, cplx lambda, const VecC& mu_support);

// mu(z) = 1 + E(z,lambda) sum conj k(zeta,z) Y(zeta) at arbitrary targets
VecC evaluate_mu(const CurveMesh& mesh, const ForwardCache& cache, cplx lambda, const VecC& mu_support,
                 const std::vector<CurvePoint>& targets);

// sup over interior nodes >= margin from bV of |dd-bar mu + dphi dbar mu - q mu|,
// i.e. the residual of dd-bar f - q f in the gauge f = e^phi mu.
double pde_residual(const CurveMesh& mesh, const VecC& f, const VecC& q, cplx lambda, double margin_cells = 3.0);

struct ForwardReport {
  cplx lambda;
  double norm_R = 0.0;
  bool neumann = false;
  int neumann_terms = 0;
  double residual_inf = 0.0;
  double pde_residual = 0.0;
  double cond = 1.0;
  std::size_t support = 0;
  bool resolved = true;  // h <= pi / (8 |lambda|)
};
nlohmann::json to_json(const ForwardReport& r);

struct ForwardResult {
  ForwardReport report;
  CgoSolution sol;
};
// Oscillation resolution of exp(2i Im phi) on the mesh.
inline bool oscillation_resolved(double h, cplx lambda) { return h <= PI / (8.0 * std::abs(lambda)); }

ForwardResult run_forward(const CurveMesh& mesh, const ForwardCache& cache, cplx lambda);

}  // namespace cgo
