#include <sstream>

#include "doctest.h"

#include "cgo/mesh.hpp"
#include "support.hpp"

using namespace cgo;
using cgo::test::scenario_mesh;

TEST_CASE("mesh nodes lie on the curve and carry positive weights") {
  const CurveMesh& m = scenario_mesh(0.08);
  REQUIRE(m.size() > 0);
  REQUIRE(!m.bnodes.empty());
  for (const Node& n : m.nodes) {
    CHECK(std::abs(m.curve.P.eval_affine(n.p.u)) <= 1e-10);
    CHECK(n.weight > 0.0);
  }
  for (const BoundaryNode& b : m.bnodes) {
    CHECK(std::abs(m.curve.P.eval_affine(b.p.u)) <= 1e-10);
    CHECK(std::abs(m.curve.chart.rho(b.p.u)) <= 1e-8);
    CHECK(b.ds > 0.0);
  }
}

TEST_CASE("area converges and node count scales like 1/h^2") {
  const CurveMesh& a = scenario_mesh(0.08);
  const CurveMesh& b = scenario_mesh(0.04);
  CHECK(std::abs(b.area() - a.area()) / b.area() < 0.01);
  double ratio = double(b.interior().size()) / double(a.interior().size());
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("integrate_11 of zero and of the constant 1") {
  const CurveMesh& m = scenario_mesh(0.08);
  CHECK(std::abs(integrate_11(m, VecC::Zero(m.size()))) == 0.0);
  CHECK(std::abs(integrate_11(m, VecC::Ones(m.size())) - m.area()) <= 1e-12 * m.area());
  CHECK_THROWS_AS(integrate_11(m, VecC::Ones(3)), ConfigError);
}

TEST_CASE("integrate_11 of a smooth field converges at second order") {
  auto field = [](const CurveMesh& m) {
    VecC f(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const Vec2c& u = m.nodes[i].p.u;
      f[i] = std::exp(-4.0 * std::norm(u[0] + 1.0)) * (1.0 + 0.5 * u[1]);
    }
    return f;
  };
  std::vector<cplx> v;
  for (double h : {0.08, 0.04, 0.02}) v.push_back(integrate_11(scenario_mesh(h), field(scenario_mesh(h))));
  double e1 = std::abs(v[1] - v[0]), e2 = std::abs(v[2] - v[1]);
  CHECK(e2 < e1);
  CHECK(e2 < 1e-2 * std::abs(v[2]));
}

TEST_CASE("build_mesh rejects bad input") {
  CurveDef c = cgo::test::scenario_curve();
  MeshOptions o;
  o.h = 0.0;
  CHECK_THROWS_AS(build_mesh(c, o), ConfigError);
  c.chart.center = {cplx(5.0, 5.0), cplx(5.0, 5.0)};
  c.chart.radius = 0.1;
  o.h = 0.05;
  CHECK_THROWS_AS(build_mesh(c, o), Error);
}

TEST_CASE("residue_reduce") {
  CurveDef c = cgo::test::scenario_curve();
  const CurveMesh& m = scenario_mesh(0.08);
  std::vector<CurvePoint> pts;
  std::vector<double> w;
  for (int i : m.interior()) {
    pts.push_back(m.nodes[i].p);
    w.push_back(m.nodes[i].weight);
  }
  SUBCASE("zero integrand") {
    TubeIntegrand f{[](const Vec2c&) { return cplx(0.0); }, 1};
    CHECK(std::abs(curve_integral(pts, w, residue_reduce(c, f))) == 0.0);
  }
  SUBCASE("higher order pole is unsupported") {
    TubeIntegrand f{[](const Vec2c&) { return cplx(1.0); }, 2};
    CHECK_THROWS_AS(residue_reduce(c, f), UnsupportedPole);
  }
  SUBCASE("tube limit agrees with the reduced integral") {
    TubeIntegrand f{[](const Vec2c& u) { return std::exp(0.3 * u[0]) * (1.0 + u[1] * u[1]); }, 1};
    cplx reduced = curve_integral(pts, w, residue_reduce(c, f));
    std::vector<cplx> t;
    for (double eps : {1e-2, 1e-3, 1e-4}) t.push_back(tube_integral(c, pts, w, f, eps));
    // linear extrapolation in eps from the two smallest tubes
    cplx limit = t[2] - (t[1] - t[2]) * (1e-4 / (1e-3 - 1e-4));
    CHECK(std::abs(limit - reduced) <= 1e-6 * std::max(1.0, std::abs(reduced)));
  }
}

TEST_CASE("pv_integrate") {
  const CurveMesh& m = scenario_mesh(0.04);
  std::vector<CurvePoint> pts;
  std::vector<double> w;
  for (int i : m.interior()) {
    pts.push_back(m.nodes[i].p);
    w.push_back(m.nodes[i].weight);
  }
  const CurvePoint z = pts[pts.size() / 2];
  auto etas = pv_schedule(m.h());
  REQUIRE(etas.size() >= 2);
  for (std::size_t k = 1; k < etas.size(); ++k) CHECK(etas[k] < etas[k - 1]);
  CHECK(etas.back() >= 4.0 * m.h() * m.h() * (1.0 - 1e-12));

  SUBCASE("bounded kernel does not depend on eta") {
    auto K = [](const CurvePoint& a, const CurvePoint& b) { return a.u[0] * std::conj(b.u[1]) + 1.0; };
    VecC dens = VecC::Ones(Eigen::Index(pts.size()));
    std::vector<double> tiny{1e-12, 1e-13, 1e-14};
    PvResult r = pv_integrate(pts, w, z, K, dens, tiny);
    CHECK(!r.diverged);
    for (cplx p : r.partial) CHECK(std::abs(p - r.partial[0]) <= 1e-10 * std::abs(r.partial[0]));
  }
  SUBCASE("linear in the density") {
    auto K = [](const CurvePoint& a, const CurvePoint& b) {
      cplx d = b.u[0] - a.u[0];
      return 1.0 / (d + 1e-3);
    };
    const Eigen::Index n = Eigen::Index(pts.size());
    VecC f(n), g(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      f[k] = pts[k].u[1];
      g[k] = std::conj(pts[k].u[0]);
    }
    cplx a = pv_integrate(pts, w, z, K, f, etas).value, b = pv_integrate(pts, w, z, K, g, etas).value;
    cplx s = pv_integrate(pts, w, z, K, 2.0 * f + cplx(0, 3) * g, etas).value;
    CHECK(std::abs(s - (2.0 * a + cplx(0, 3) * b)) <= 1e-12 * std::max(1.0, std::abs(s)));
  }
}

TEST_CASE("region_area") {
  const CurveMesh& m = scenario_mesh(0.04);
  const CurvePoint z = point_at_tau(m.curve, m.nodes[m.interior_margin(0.2).front()].p, cplx(0.3, 0.2) * m.h());
  CHECK(region_area(m, z, 1e-14, 0) == 0.0);
  double a1 = region_area(m, z, 1e-3), a2 = region_area(m, z, 2e-3);
  CHECK(a1 > 0.0);
  CHECK(a2 / a1 == doctest::Approx(std::pow(2.0, 1.5)).epsilon(0.15));
}

TEST_CASE("mesh CSV is deterministic with the documented columns") {
  const CurveMesh& m = scenario_mesh(0.08);
  std::ostringstream a, b;
  write_mesh_csv(m, a);
  write_mesh_csv(m, b);
  CHECK(a.str() == b.str());
  std::string header = a.str().substr(0, a.str().find('\n'));
  CHECK(header.rfind("node_id,patch_id", 0) == 0);
  CHECK(header.find("is_boundary") != std::string::npos);
}
