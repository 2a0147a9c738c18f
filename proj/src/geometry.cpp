#include "cgo/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cgo {

namespace {

cplx ipow(cplx x, int e) {
  cplx r = 1.0;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

// (a^e - b^e)/(a - b) = sum_{i<e} a^i b^{e-1-i}
cplx divided_power(cplx a, cplx b, int e) {
  cplx s = 0.0, bk = 1.0;
  for (int k = 0; k < e; ++k) {
    s += ipow(a, e - 1 - k) * bk;
    bk *= b;
  }
  return s;
}

}  // namespace

Polynomial::Polynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {
  degree_ = 0;
  for (auto& t : terms_) degree_ = std::max(degree_, t.e0 + t.e1 + t.e2);
}

Polynomial Polynomial::fermat(int d) {
  return Polynomial({{d, 0, 0, 1.0}, {0, d, 0, 1.0}, {0, 0, d, 1.0}});
}

bool Polynomial::is_homogeneous(double) const {
  for (auto& t : terms_)
    if (t.e0 + t.e1 + t.e2 != degree_) return false;
  return true;
}

cplx Polynomial::eval(const Vec3c& z) const {
  cplx s = 0.0;
  for (auto& t : terms_) s += t.coef * ipow(z[0], t.e0) * ipow(z[1], t.e1) * ipow(z[2], t.e2);
  return s;
}

cplx Polynomial::eval_affine(const Vec2c& u) const {
  cplx s = 0.0;
  for (auto& t : terms_) s += t.coef * ipow(u[0], t.e1) * ipow(u[1], t.e2);
  return s;
}

Vec2c Polynomial::grad_affine(const Vec2c& u) const {
  Vec2c g{0.0, 0.0};
  for (auto& t : terms_) {
    if (t.e1 > 0) g[0] += t.coef * double(t.e1) * ipow(u[0], t.e1 - 1) * ipow(u[1], t.e2);
    if (t.e2 > 0) g[1] += t.coef * double(t.e2) * ipow(u[0], t.e1) * ipow(u[1], t.e2 - 1);
  }
  return g;
}

Vec3c Polynomial::grad(const Vec3c& z) const {
  Vec3c g{0.0, 0.0, 0.0};
  for (auto& t : terms_) {
    if (t.e0 > 0) g[0] += t.coef * double(t.e0) * ipow(z[0], t.e0 - 1) * ipow(z[1], t.e1) * ipow(z[2], t.e2);
    if (t.e1 > 0) g[1] += t.coef * double(t.e1) * ipow(z[0], t.e0) * ipow(z[1], t.e1 - 1) * ipow(z[2], t.e2);
    if (t.e2 > 0) g[2] += t.coef * double(t.e2) * ipow(z[0], t.e0) * ipow(z[1], t.e1) * ipow(z[2], t.e2 - 1);
  }
  return g;
}

std::vector<cplx> Polynomial::slice_coefficients(int var, cplx other) const {
  std::vector<cplx> c(degree_ + 1, 0.0);
  for (auto& t : terms_) {
    int ex = var == 0 ? t.e1 : t.e2;
    int eo = var == 0 ? t.e2 : t.e1;
    c[ex] += t.coef * ipow(other, eo);
  }
  return c;
}

void CurveDef::validate() const {
  if (P.terms().empty()) throw ConfigError("curve has no monomials");
  if (d() <= 2) throw ConfigError("curve degree must exceed 2");
  if (!P.is_homogeneous()) throw ConfigError("polynomial is not homogeneous");
  if (weight() <= d() - 3) throw ConfigError("weight ell must exceed d-3");
  if (chart.radius <= 0) throw ConfigError("chart radius must be positive");
}

HomPoint lift_to_sphere(const Vec2c& u) {
  double n = std::sqrt(1.0 + norm2(u));
  return {{1.0 / n, u[0] / n, u[1] / n}};
}

cplx eval_P(const CurveDef& curve, const Vec3c& z) { return curve.P.eval(z); }

Vec3c q_functions(const Polynomial& P, const Vec3c& zeta, const Vec3c& z) {
  Vec3c q{0.0, 0.0, 0.0};
  for (auto& t : P.terms()) {
    q[0] += t.coef * divided_power(zeta[0], z[0], t.e0) * ipow(zeta[1], t.e1) * ipow(zeta[2], t.e2);
    q[1] += t.coef * ipow(z[0], t.e0) * divided_power(zeta[1], z[1], t.e1) * ipow(zeta[2], t.e2);
    q[2] += t.coef * ipow(z[0], t.e0) * ipow(z[1], t.e1) * divided_power(zeta[2], z[2], t.e2);
  }
  return q;
}

BPair b_pairing(const Vec3c& zeta, const Vec3c& z) {
  return {1.0 - hdot(zeta, z), -1.0 + hdot(z, zeta)};
}

cplx pairing_lambda(cplx lambda, const Vec3c& z, double c0_floor) {
  if (std::abs(z[0]) < c0_floor)
    throw ChartSingularity("|z0| = " + std::to_string(std::abs(z[0])) + " below floor");
  return lambda * (z[1] / z[0] + z[2] / z[0]);
}

cplx exp_factor(cplx lambda, const Vec3c& w, double c0_floor) {
  cplx p = pairing_lambda(lambda, w, c0_floor);
  return std::exp(std::conj(p) - p);
}

CurvePoint make_point(const CurveDef& curve, const Vec2c& u) {
  CurvePoint p;
  p.u = u;
  p.n = std::sqrt(1.0 + norm2(u));
  p.z = {1.0 / p.n, u[0] / p.n, u[1] / p.n};
  p.grad = curve.P.grad_affine(u);
  p.gnorm = std::sqrt(norm2(p.grad));
  if (p.gnorm < 1e-8) throw SingularPoint("gradient vanishes near the curve point");
  p.T = {p.grad[1] / p.gnorm, -p.grad[0] / p.gnorm};
  p.N = {std::conj(p.grad[0]) / p.gnorm, std::conj(p.grad[1]) / p.gnorm};
  return p;
}

Vec2c project_to_curve(const CurveDef& curve, const Vec2c& guess, int max_iter) {
  Vec2c u = guess;
  for (int it = 0; it < max_iter; ++it) {
    cplx f = curve.P.eval_affine(u);
    Vec2c g = curve.P.grad_affine(u);
    double g2 = norm2(g);
    if (g2 < 1e-24) throw SingularPoint("projection hit a critical point");
    // step along conj(grad): p(u - s conj g) ~ f - s |g|^2
    cplx s = f / g2;
    u[0] -= s * std::conj(g[0]);
    u[1] -= s * std::conj(g[1]);
    if (std::abs(s) * std::sqrt(g2) < 1e-15 * (1.0 + std::sqrt(norm2(u)))) break;
  }
  return u;
}

CurvePoint point_at_tau(const CurveDef& curve, const CurvePoint& base, cplx t) {
  // u = u0 + T t + N nu, with nu found by Newton; conj(T).N = 0 keeps tau exact.
  cplx nu = 0.0;
  Vec2c u;
  for (int it = 0; it < 60; ++it) {
    u = {base.u[0] + base.T[0] * t + base.N[0] * nu, base.u[1] + base.T[1] * t + base.N[1] * nu};
    cplx f = curve.P.eval_affine(u);
    Vec2c g = curve.P.grad_affine(u);
    cplx fp = g[0] * base.N[0] + g[1] * base.N[1];
    cplx step = f / fp;
    nu -= step;
    if (std::abs(step) < 1e-16 * (1.0 + std::abs(nu) + std::abs(t))) break;
  }
  u = {base.u[0] + base.T[0] * t + base.N[0] * nu, base.u[1] + base.T[1] * t + base.N[1] * nu};
  return make_point(curve, u);
}

LocalFrame local_frame(const CurveDef& curve, const Vec2c& u) {
  CurvePoint p = make_point(curve, u);
  return {p.T, p.N, p.gnorm};
}

cplx local_coordinate(const CurvePoint& z, const Vec2c& zeta) { return z.tau_of(zeta); }

}  // namespace cgo
