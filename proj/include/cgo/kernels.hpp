#pragma once

#include <string>

#include "cgo/geometry.hpp"

namespace cgo {

enum class KernelId { K, R, G, N, L, P, S, I, M, Cauchy };
std::string kernel_name(KernelId id);

struct KernelValue {
  cplx value;
  KernelId id;
  bool singular = false;
};

cplx det3(const Vec3c& a, const Vec3c& b, const Vec3c& c);

// det[ z/B*(w,z) , w/B(w,z) , Q(w,z) ] with the conjugations of the determinantal form.
KernelValue kernel_K(const CurveDef& curve, const Vec3c& w, const Vec3c& z, double pv_threshold = 0.0);

double simplex_weight();

struct CutoffSpec {
  double inner = 0.5;
  double outer = 1.0;
};
// 1 below inner, 0 above outer, quintic smoothstep between.
double cutoff(const CutoffSpec& spec, double s);

// Residue of x^p K(x w, z) over the fiber |x| = 1, divided by 2 pi i.
cplx fiber_residue(const CurveDef& curve, const Vec3c& w, const Vec3c& z, int p);
// The same integral by trapezoidal quadrature in the fiber (test oracle).
cplx fiber_quadrature(const CurveDef& curve, const Vec3c& w, const Vec3c& z, int p, int samples);

// Curve kernels obtained from K after integration over the fiber and the normal direction.
// core(w,z) ~ |grad p(w)| / (tau_w(z)) near the diagonal; holomorphic in z.
cplx kernel_core(const CurveDef& curve, const CurvePoint& w, const CurvePoint& z);
// Cauchy kernel: coefficient of a (1,0)-form in w, meromorphic in z, residue one at z = w.
inline cplx cauchy_k(const CurveDef& curve, const CurvePoint& w, const CurvePoint& z) {
  return kernel_core(curve, w, z) / w.gnorm;
}
// Kernel mapping (1,1)-forms at w to (1,0)-forms at z.
inline cplx cauchy_kappa(const CurveDef& curve, const CurvePoint& w, const CurvePoint& z) {
  return kernel_core(curve, w, z) / z.gnorm;
}
// d/d(tau_w bar) of core(w, z), by centered differences along the curve.
cplx dbar_w_core(const CurveDef& curve, const CurvePoint& w, const CurvePoint& z, double eps = 1e-5);

// Determinant identities used to move between the kernel representations.
// a = d_z(z/B*(conj zeta, conj z)) in direction v, etc.
struct DetIdentityResidual {
  // residuals relative to 1 + sum of term magnitudes
  double one;  // det[a,c,e] - (det[a,b,e] - det[a,b,c])
  double two;  // four-by-four expansion of the w-side replacement
};
DetIdentityResidual determinant_identities(const CurveDef& curve, const Vec3c& z, const Vec3c& zeta,
                                           const Vec3c& w, const Vec3c& v, const Vec3c& vw);
cplx det_product_D(const CurveDef& curve, const Vec3c& z, const Vec3c& w, const Vec3c& zeta, const Vec3c& dz,
                   const Vec3c& dw);

}  // namespace cgo
