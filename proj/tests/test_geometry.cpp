#include <random>

#include "doctest.h"

#include "cgo/geometry.hpp"
#include "cgo/kernels.hpp"

using namespace cgo;

namespace {

CurveDef fermat() {
  CurveDef c;
  c.P = Polynomial::fermat(3);
  return c;
}

Vec3c random_vec(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return {cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng))};
}

Vec3c unit(Vec3c v) {
  double n = std::sqrt(norm2(v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("lift_to_sphere examples") {
  auto a = lift_to_sphere({0.0, 0.0}).z;
  CHECK(close(a[0], 1.0, 1e-15));
  CHECK(close(a[1], 0.0, 1e-15));
  auto b = lift_to_sphere({1.0, 0.0}).z;
  CHECK(close(b[0], 1.0 / std::sqrt(2.0), 1e-15));
  CHECK(close(b[1], 1.0 / std::sqrt(2.0), 1e-15));
  auto c = lift_to_sphere({3.0, 4.0}).z;
  double s = std::sqrt(26.0);
  CHECK(close(c[0], 1.0 / s, 1e-15));
  CHECK(close(c[1], 3.0 / s, 1e-15));
  CHECK(close(c[2], 4.0 / s, 1e-15));
  CHECK(std::abs(norm2(c) - 1.0) < 1e-12);
}

TEST_CASE("eval_P on the Fermat cubic") {
  auto c = fermat();
  CHECK(close(eval_P(c, {1.0, 0.0, 0.0}), 1.0, 1e-15));
  CHECK(close(eval_P(c, {1.0, -1.0, 0.0}), 0.0, 1e-15));
  CHECK(close(eval_P(c, {1.0, 1.0, 1.0}), 3.0, 1e-15));
}

TEST_CASE("q_functions examples and telescoping") {
  auto c = fermat();
  Vec3c z{0.3, cplx(0.1, 0.2), -0.7};
  auto q = q_functions(c.P, z, z);
  for (int i = 0; i < 3; ++i) CHECK(close(q[i], 3.0 * z[i] * z[i], 1e-14));
  auto q2 = q_functions(c.P, {1.0, 1.0, 0.0}, {0.0, 1.0, 0.0});
  CHECK(close(q2[0], 1.0, 1e-15));
  CHECK(close(q2[1], 3.0, 1e-15));
  CHECK(close(q2[2], 0.0, 1e-15));

  std::mt19937_64 rng(7);
  Polynomial gen({{4, 0, 0, cplx(1, 0.5)}, {1, 2, 1, cplx(-2, 1)}, {0, 3, 1, 0.7}, {2, 0, 2, cplx(0, 3)}});
  for (int k = 0; k < 200; ++k) {
    Vec3c a = random_vec(rng), b = random_vec(rng);
    for (const Polynomial* P : {&c.P, &gen}) {
      auto qq = q_functions(*P, a, b);
      cplx lhs = P->eval(a) - P->eval(b);
      cplx rhs = qq[0] * (a[0] - b[0]) + qq[1] * (a[1] - b[1]) + qq[2] * (a[2] - b[2]);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(P->eval(a)) + std::abs(P->eval(b))));
      cplx t = std::polar(0.5 + 1.5 * (k % 7) / 6.0, 0.3 * k);
      Vec3c ta{t * a[0], t * a[1], t * a[2]}, tb{t * b[0], t * b[1], t * b[2]};
      auto qt = q_functions(*P, ta, tb);
      cplx f = std::pow(t, P->degree() - 1);
      for (int i = 0; i < 3; ++i) CHECK(std::abs(qt[i] - f * qq[i]) <= 1e-10 * (1.0 + std::abs(f * qq[i])));
    }
  }
}

TEST_CASE("homogeneity of P") {
  CHECK(Polynomial::fermat(3).is_homogeneous());
  CHECK_FALSE(Polynomial({{3, 0, 0, 1.0}, {0, 1, 0, 1.0}}).is_homogeneous());
  CurveDef bad;
  bad.P = Polynomial({{2, 0, 0, 1.0}, {0, 2, 0, 1.0}, {0, 0, 2, 1.0}});
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CurveDef low = fermat();
  low.ell = 0;
  CHECK_THROWS_AS(low.validate(), ConfigError);
}

TEST_CASE("b_pairing examples and identities") {
  Vec3c e0{1.0, 0.0, 0.0}, e1{0.0, 1.0, 0.0};
  auto p = b_pairing(e0, e0);
  CHECK(std::abs(p.B) < 1e-15);
  CHECK(std::abs(p.Bstar) < 1e-15);
  auto q = b_pairing(e1, e0);
  CHECK(close(q.B, 1.0, 1e-15));
  CHECK(close(q.Bstar, -1.0, 1e-15));
  auto w = lift_to_sphere({1.0, 0.0}).z;
  CHECK(close(B(e0, w), (std::sqrt(2.0) - 1.0) / std::sqrt(2.0), 1e-14));

  std::mt19937_64 rng(11);
  for (int k = 0; k < 500; ++k) {
    Vec3c a = unit(random_vec(rng)), b = unit(random_vec(rng)), c = unit(random_vec(rng));
    auto bp = b_pairing(a, b);
    CHECK(std::abs(bp.Bstar + std::conj(bp.B)) <= 1e-14);
    CHECK(std::abs(bp.B.real() - 0.5 * (std::norm(a[0] - b[0]) + std::norm(a[1] - b[1]) + std::norm(a[2] - b[2]))) <=
          1e-13);
    // B(z2,w) - B(z1,w) = sum (conj z2 - conj z1)(z2 - w) - B(z1,z2), with z1=a, z2=b, w=c
    cplx lhs = B(b, c) - B(a, c);
    cplx rhs = -B(a, b);
    for (int j = 0; j < 3; ++j) rhs += (std::conj(b[j]) - std::conj(a[j])) * (b[j] - c[j]);
    CHECK(std::abs(lhs - rhs) <= 1e-13);
  }
}

TEST_CASE("pairing_lambda and exp factor") {
  CHECK(close(pairing_lambda(0.0, lift_to_sphere({0.3, 2.0}).z), 0.0, 1e-15));
  CHECK(close(pairing_lambda(1.0, lift_to_sphere({1.0, 0.0}).z), 1.0, 1e-14));
  CHECK(close(pairing_lambda(cplx(2, 1), lift_to_sphere({1.0, 1.0}).z), cplx(4, 2), 1e-14));
  CHECK_THROWS_AS(pairing_lambda(1.0, Vec3c{0.1, 0.9, 0.0}), ChartSingularity);
  CHECK(close(exp_factor(I, lift_to_sphere({1.0, 0.0}).z), std::exp(cplx(0, -2)), 1e-14));
  CHECK(std::abs(std::abs(exp_factor(cplx(3, -2), lift_to_sphere({0.4, cplx(0.2, 0.1)}).z)) - 1.0) < 1e-14);
}

TEST_CASE("local frame on the Fermat cubic") {
  auto c = fermat();
  auto fr = local_frame(c, {-1.0, 0.0});
  CHECK(std::abs(fr.tangent[0]) < 1e-15);
  CHECK(std::abs(std::abs(fr.tangent[1]) - 1.0) < 1e-15);
  CurvePoint p = make_point(c, project_to_curve(c, {cplx(-1.0, 0.1), cplx(0.3, -0.2)}));
  CHECK(std::abs(c.P.eval_affine(p.u)) < 1e-12);
  CHECK(std::abs(local_coordinate(p, p.u)) == 0.0);
  for (double e : {1e-2, 1e-3, 1e-4}) {
    CurvePoint q = point_at_tau(c, p, cplx(e, 0.5 * e));
    CHECK(std::abs(c.P.eval_affine(q.u)) < 1e-12);
    double ratio = std::abs(local_coordinate(p, q.u)) /
                   std::sqrt(std::norm(q.u[0] - p.u[0]) + std::norm(q.u[1] - p.u[1]));
    CHECK(std::abs(ratio - 1.0) < 20.0 * e);
  }
  // two homogeneous-gradient singular curve: the node of z1 z2 = 0 type
  CurveDef sing;
  sing.P = Polynomial({{1, 1, 1, 1.0}});
  CHECK_THROWS_AS(make_point(sing, {0.0, 0.0}), SingularPoint);
}

TEST_CASE("gamma neighborhoods on random sphere triples") {
  std::mt19937_64 rng(3);
  int checked = 0, bad = 0;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  while (checked < 10000) {
    Vec3c z = unit(random_vec(rng)), w = unit(random_vec(rng)), zeta;
    // draw w near z to make the condition |B(w,zeta)| <= gamma/9 reachable
    double r = std::pow(10.0, -3.0 * U(rng));
    Vec3c dz = random_vec(rng);
    w = unit({z[0] + r * dz[0], z[1] + r * dz[1], z[2] + r * dz[2]});
    double gamma = std::abs(B(w, z));
    double rr = std::sqrt(gamma) * 0.2 * U(rng);
    Vec3c dd = random_vec(rng);
    zeta = unit({w[0] + rr * dd[0], w[1] + rr * dd[1], w[2] + rr * dd[2]});
    if (std::abs(B(w, zeta)) > gamma / 9.0) continue;
    ++checked;
    double bz = std::abs(B(z, zeta));
    double dist = std::sqrt(norm2(Vec3c{zeta[0] - z[0], zeta[1] - z[1], zeta[2] - z[2]}));
    if (bz < 2.0 / 9.0 * gamma || bz > 16.0 / 9.0 * gamma || dist > 4.0 * std::sqrt(2.0) / 3.0 * std::sqrt(gamma))
      ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("determinant and simplex identities") {
  CHECK(close(det3({1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}), 1.0, 1e-15));
  CHECK(simplex_weight() == doctest::Approx(1.0 / 6.0));
  auto c = fermat();
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    // z on the curve (real coefficients keep conj z on it as well), zeta generic
    Vec3c z = make_point(c, project_to_curve(c, {cplx(-0.9, 0.1) + 0.3 * random_vec(rng)[0], 0.5 * random_vec(rng)[1]})).z;
    Vec3c zeta = unit(random_vec(rng));
    Vec3c v = random_vec(rng);
    cplx pr = hdot(z, v);  // remove component so that sum conj(z) v = 0
    for (int j = 0; j < 3; ++j) v[j] -= pr * z[j];
    // w-side: w and zeta on the curve
    CurvePoint pw = make_point(c, project_to_curve(c, {cplx(-1.0, 0.2) + 0.3 * random_vec(rng)[0], 0.4 * random_vec(rng)[1]}));
    CurvePoint pz = make_point(c, project_to_curve(c, {cplx(-1.0, -0.1) + 0.3 * random_vec(rng)[0], 0.4 * random_vec(rng)[1]}));
    Vec3c vw = random_vec(rng);
    cplx pw2 = hdot(pw.z, vw);
    for (int j = 0; j < 3; ++j) vw[j] -= pw2 * pw.z[j];
    auto r1 = determinant_identities(c, z, zeta, pw.z, v, vw);
    auto r2 = determinant_identities(c, z, pz.z, pw.z, v, vw);
    CHECK(r1.one <= 1e-10);
    CHECK(r2.two <= 1e-10);
  }
}
