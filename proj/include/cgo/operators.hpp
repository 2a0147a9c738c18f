#pragma once

#include <iosfwd>

#include "cgo/kernels.hpp"
#include "cgo/mesh.hpp"

namespace cgo {

// Dense kernel matrices between point sets; rows are targets, columns sources.
// Coincident pairs are dropped (punctured sums).

std::vector<CurvePoint> node_points(const CurveMesh& mesh, const std::vector<int>& idx);
std::vector<CurvePoint> node_points(const CurveMesh& mesh);
std::vector<CurvePoint> boundary_points(const CurveMesh& mesh);
std::vector<int> all_indices(const CurveMesh& mesh);

// conj k(src, tgt): the conjugate Cauchy kernel, antiholomorphic in the target.
MatC conj_cauchy_matrix(const CurveDef& curve, const std::vector<CurvePoint>& tgt,
                        const std::vector<CurvePoint>& src);
// kappa(src, tgt)
MatC kappa_matrix(const CurveDef& curve, const std::vector<CurvePoint>& tgt, const std::vector<CurvePoint>& src);
// d/d(tau_src bar) kappa(src, tgt)
MatC dbar_kappa_matrix(const CurveDef& curve, const std::vector<CurvePoint>& tgt,
                       const std::vector<CurvePoint>& src, double eps = 1e-5);
// conj of the dbar_src derivative of the (1,0)-coefficient k(src, tgt)
MatC conj_dk_matrix(const CurveDef& curve, const std::vector<CurvePoint>& tgt, const std::vector<CurvePoint>& src,
                    double eps = 1e-5);

// Cutoff theta in rho: 1 on V and the inner half of the collar, 0 past the collar.
double theta(const CurveMesh& mesh, const CurvePoint& p);
VecR theta_nodes(const CurveMesh& mesh);

// d phi / d tau with phi = lambda (u1 + u2)
inline cplx dphi(cplx lambda, const CurvePoint& p) { return lambda * (p.T[0] + p.T[1]); }

// Components (g1, g2) of a (1,0)-form value * dtau_w on du1, du2 (minimum-norm split).
struct FormPair {
  cplx g1, g2;
  double norm() const { return std::sqrt(std::norm(g1) + std::norm(g2)); }
};
inline FormPair split_form(cplx value, const CurvePoint& w) {
  return {value * std::conj(w.T[0]), value * std::conj(w.T[1])};
}

struct GValue {
  FormPair g;
  cplx value;
  bool diverged = false;
  double error = 0.0;
};
// Inner zeta-sum over the area quadrature, with cells around zeta = z and zeta = w subdivided
// `levels` times. error = change against levels - 2; diverged when that exceeds 5% of the value.
GValue kernel_G(const CurveMesh& mesh, cplx lambda, const CurvePoint& z, const CurvePoint& w, int levels = 6);
// z-derivative of G: theta(z) E(z,-lambda) kappa(w,z) / pi
FormPair kernel_N(const CurveMesh& mesh, cplx lambda, const CurvePoint& z, const CurvePoint& w);
// w-derivative of N
FormPair kernel_L(const CurveMesh& mesh, cplx lambda, const CurvePoint& z, const CurvePoint& w, double eps = 1e-5);

void write_kernel_csv(const MatC& m, const std::string& kernel_id, std::ostream& os,
                      const std::vector<int>& target_ids = {}, const std::vector<int>& source_ids = {});

}  // namespace cgo
