#pragma once

#include <optional>

#include "cgo/types.hpp"

namespace cgo {

struct Monomial {
  int e0 = 0, e1 = 0, e2 = 0;
  cplx coef;
};

// Homogeneous polynomial P(z0,z1,z2) and its affine restriction p(u1,u2)=P(1,u1,u2).
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Monomial> terms);

  static Polynomial fermat(int d);

  int degree() const { return degree_; }
  const std::vector<Monomial>& terms() const { return terms_; }

  cplx eval(const Vec3c& z) const;
  cplx eval_affine(const Vec2c& u) const;
  Vec2c grad_affine(const Vec2c& u) const;
  Vec3c grad(const Vec3c& z) const;

  // Coefficients (ascending powers) of p as a polynomial in u_{var+1} with the other coordinate fixed.
  std::vector<cplx> slice_coefficients(int var, cplx other) const;

  bool is_homogeneous(double tol = 1e-10) const;

 private:
  std::vector<Monomial> terms_;
  int degree_ = 0;
};

// Domain function rho(u) = |u - c|^2 - R^2 in the affine chart.
struct Chart {
  Vec2c center{0.0, 0.0};
  double radius = 2.0;
  double c0_floor = 0.25;

  double rho(const Vec2c& u) const {
    return std::norm(u[0] - center[0]) + std::norm(u[1] - center[1]) - radius * radius;
  }
};

struct CurveDef {
  Polynomial P;
  Chart chart;
  int ell = -1;  // homogeneity weight; -1 selects d-2
  double curve_tol = 1e-10;

  int d() const { return P.degree(); }
  int weight() const { return ell < 0 ? d() - 2 : ell; }
  void validate() const;
};

struct HomPoint {
  Vec3c z{};
};

HomPoint lift_to_sphere(const Vec2c& u);
cplx eval_P(const CurveDef& curve, const Vec3c& z);
Vec3c q_functions(const Polynomial& P, const Vec3c& zeta, const Vec3c& z);

struct BPair {
  cplx B, Bstar;
};
// B(zeta,z) = 1 - sum conj(zeta_j) z_j, B*(zeta,z) = -1 + sum conj(z_j) zeta_j
BPair b_pairing(const Vec3c& zeta, const Vec3c& z);
inline cplx B(const Vec3c& zeta, const Vec3c& z) { return 1.0 - hdot(zeta, z); }

// lambda (z1/z0 + z2/z0)
cplx pairing_lambda(cplx lambda, const Vec3c& z, double c0_floor = 0.25);
// E(w, lambda) = exp(conj<lambda,w> - <lambda,w>)
cplx exp_factor(cplx lambda, const Vec3c& w, double c0_floor = 0.25);
inline cplx phi_affine(cplx lambda, const Vec2c& u) { return lambda * (u[0] + u[1]); }
inline cplx exp_factor_affine(cplx lambda, const Vec2c& u) {
  cplx p = phi_affine(lambda, u);
  return std::exp(std::conj(p) - p);
}

// A point of the affine curve with its lift and holomorphic frame.
// T = (d2 p, -d1 p)/|grad p| is the unit tangent; tau = conj(T).(u - u_node) is the
// local coordinate. The holomorphic 1-form du2/d1p equals c0 * dtau.
struct CurvePoint {
  Vec2c u{};
  Vec3c z{};       // unit lift
  double n = 1.0;  // sqrt(1+|u|^2)
  Vec2c grad{};    // affine gradient of p
  double gnorm = 1.0;
  Vec2c T{};
  Vec2c N{};  // unit normal conj(grad)/|grad|

  double c0() const { return -1.0 / gnorm; }
  cplx tau_of(const Vec2c& v) const {
    return std::conj(T[0]) * (v[0] - u[0]) + std::conj(T[1]) * (v[1] - u[1]);
  }
};

CurvePoint make_point(const CurveDef& curve, const Vec2c& u);
// Newton projection along the normal direction.
Vec2c project_to_curve(const CurveDef& curve, const Vec2c& guess, int max_iter = 50);
// Curve point whose local coordinate relative to base is exactly t.
CurvePoint point_at_tau(const CurveDef& curve, const CurvePoint& base, cplx t);

struct LocalFrame {
  Vec2c tangent;
  Vec2c normal;
  double grad_norm;
};
LocalFrame local_frame(const CurveDef& curve, const Vec2c& u);
// F(z, zeta): the centered local coordinate of zeta relative to z
cplx local_coordinate(const CurvePoint& z, const Vec2c& zeta);

// Wirtinger derivative d/d(tau bar) at base of a scalar function of curve points.
template <class F>
cplx dbar_along(const CurveDef& curve, const CurvePoint& base, F&& f, double eps) {
  cplx fx = f(point_at_tau(curve, base, eps)) - f(point_at_tau(curve, base, -eps));
  cplx fy = f(point_at_tau(curve, base, cplx(0, eps))) - f(point_at_tau(curve, base, cplx(0, -eps)));
  return 0.5 * (fx + I * fy) / (2.0 * eps);
}
template <class F>
cplx d_along(const CurveDef& curve, const CurvePoint& base, F&& f, double eps) {
  cplx fx = f(point_at_tau(curve, base, eps)) - f(point_at_tau(curve, base, -eps));
  cplx fy = f(point_at_tau(curve, base, cplx(0, eps))) - f(point_at_tau(curve, base, cplx(0, -eps)));
  return 0.5 * (fx - I * fy) / (2.0 * eps);
}

}  // namespace cgo
