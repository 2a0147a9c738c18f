#include "doctest.h"

#include "cgo/estimates.hpp"
#include "support.hpp"

using namespace cgo;
using cgo::test::scenario_mesh;

TEST_CASE("line fits") {
  LineFit f = fit_line({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  LineFit g = fit_loglog({1e-3, 1e-2, 1e-1}, {2e-6, 2e-4, 2e-2});
  CHECK(g.slope == doctest::Approx(2.0));
  CHECK(std::isnan(fit_line({1.0}, {2.0}).slope));
}

TEST_CASE("gamma neighborhoods hold on random triples and is reproducible") {
  auto a = check_gamma_neighborhoods(2000, 11);
  auto b = check_gamma_neighborhoods(2000, 11);
  CHECK(a.pass);
  CHECK(a.samples == 2000);
  CHECK(a.details["violations"].get<std::size_t>() == 0);
  CHECK(a.details["min_ratio"].get<double>() >= 2.0 / 9.0);
  CHECK(a.details["max_ratio"].get<double>() <= 16.0 / 9.0);
  CHECK(a.details == b.details);
}

TEST_CASE("area scaling") {
  CurveDef c;
  c.P = Polynomial::fermat(3);
  c.chart.radius = 2.0;
  MeshOptions o;
  o.h = 0.05;
  o.collar = 0.2;
  o.stencils = false;
  CurveMesh m = build_mesh(c, o);
  auto centers = pick_centers(m, 5, 0.6, 1.4, 3);
  REQUIRE(centers.size() == 5);

  SUBCASE("below the floor the check is inconclusive") {
    auto r = check_area_scaling(m, {centers[0]}, {1e-12, 2e-12, 4e-12});
    CHECK(r.inconclusive);
    CHECK(!r.pass);
  }
  SUBCASE("exponent near 3/2 in the asymptotic range") {
    auto r = check_area_scaling(m, {centers[0], centers[1]}, {1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2});
    CHECK(r.pass);
    for (auto& s : r.details["slopes"]) CHECK(std::abs(s.get<double>() - 1.5) < 0.15);
  }
  SUBCASE("doubling delta multiplies the area by about 2^1.5") {
    for (auto& z : centers) {
      double a1 = region_area(m, z, 1e-3), a2 = region_area(m, z, 2e-3);
      CHECK(a2 / a1 == doctest::Approx(std::pow(2.0, 1.5)).epsilon(0.15));
    }
  }
}

// The coarse range reaches delta = 0.1, where the region has radius about 0.45 and is no
// longer small against the curvature of V; some centers fit below 1.35 there.
TEST_CASE("area exponent over delta in [1e-3, 1e-1]" * doctest::may_fail()) {
  CurveDef c;
  c.P = Polynomial::fermat(3);
  c.chart.radius = 2.0;
  MeshOptions o;
  o.h = 0.05;
  o.collar = 0.2;
  o.stencils = false;
  CurveMesh m = build_mesh(c, o);
  auto r = check_area_scaling(m, pick_centers(m, 5, 0.6, 1.4, 3), {1e-3, 2e-3, 4e-3, 1e-2, 2e-2, 4e-2, 1e-1});
  CHECK(r.pass);
}

TEST_CASE("pick_centers respects margin and is seeded") {
  const CurveMesh& m = scenario_mesh(0.08);
  auto a = pick_centers(m, 4, 0.15, INFINITY, 5), b = pick_centers(m, 4, 0.15, INFINITY, 5);
  REQUIRE(a.size() == 4);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].u[0] == b[k].u[0]);
    CHECK(a[k].u[1] == b[k].u[1]);
    CHECK(m.curve.chart.rho(a[k].u) < 0.0);
  }
  CHECK(pick_centers(m, 3, 10.0, INFINITY, 5).empty());
}

TEST_CASE("zero limit of a vanishing density is zero") {
  const CurveMesh& m = scenario_mesh(0.04);
  auto centers = pick_centers(m, 1, 0.15, INFINITY, 2);
  auto r = check_zero_limit(m, 5.0, centers, {2e-3, 5e-3, 1e-2}, [](const CurvePoint&) { return cplx(0.0); });
  for (auto& row : r.raw.rows)
    for (std::size_t k = 0; k < row.size(); ++k)
      if (r.raw.columns[k] == "shell_integral") CHECK(row[k] == 0.0);
}

TEST_CASE("contraction check") {
  const CurveMesh& m = scenario_mesh(0.08);
  const cplx d = cgo::test::kDiag;
  std::vector<cplx> lams{5.0 * d, 10.0 * d, 20.0 * d, 40.0 * d};
  SUBCASE("q = 0 has norm 0 everywhere") {
    auto r = check_contraction(m, prepare_forward(m, VecC::Zero(m.size())), lams);
    CHECK(r.pass);
    for (auto& v : r.details["norms"]) CHECK(v.get<double>() == 0.0);
  }
  SUBCASE("doubling q doubles the norms") {
    VecC q = cgo::test::bump_q(m);
    auto a = check_contraction(m, prepare_forward(m, q), lams);
    auto b = check_contraction(m, prepare_forward(m, 2.0 * q), lams);
    for (std::size_t k = 0; k < lams.size(); ++k)
      CHECK(b.details["norms"][k].get<double>() == doctest::Approx(2.0 * a.details["norms"][k].get<double>()));
  }
}

TEST_CASE("estimate reports serialize sorted by id") {
  EstimateReport a, b;
  a.id = "zeta";
  b.id = "alpha";
  auto j = to_json(std::vector<EstimateReport>{a, b});
  REQUIRE(j.is_array());
  CHECK(j[0]["estimate_id"] == "alpha");
  CHECK(j[1]["estimate_id"] == "zeta");
}
