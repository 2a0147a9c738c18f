#include "doctest.h"

#include "cgo/boundary.hpp"
#include "support.hpp"

using namespace cgo;
using cgo::test::bump_q;
using cgo::test::kDiag;
using cgo::test::scenario_mesh;

namespace {

double sup(const VecC& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("boundary_trace of constant and interior-supported fields") {
  const CurveMesh& m = scenario_mesh(0.08);
  BoundaryTrace t = boundary_trace(m, VecC::Constant(m.size(), cplx(2.0, -1.0)));
  REQUIRE(t.values.size() == Eigen::Index(m.bnodes.size()));
  CHECK(sup(t.values.array() - cplx(2.0, -1.0)) <= 1e-10);
  double len = 0.0;
  for (Eigen::Index b = 0; b < t.ds.size(); ++b)
    if (t.component[b] == 0) len += t.ds[b];
  CHECK(std::abs(t.integral(0) - cplx(2.0, -1.0) * len) <= 1e-10 * len);

  VecC bump = VecC::Zero(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.nodes[i].dist_b > 0.2) bump[i] = 1.0;
  CHECK(sup(boundary_trace(m, bump).values) == 0.0);
}

TEST_CASE("exact differentials integrate to zero around bV") {
  std::vector<double> err;
  for (double h : {0.08, 0.04}) {
    const CurveMesh& m = scenario_mesh(h);
    VecC a(m.bnodes.size()), b(m.bnodes.size());
    for (std::size_t i = 0; i < m.bnodes.size(); ++i) {
      // phi = u1 conj(u2) + u1^2: d phi = (conj u2 + 2 u1) du1, dbar phi = u1 conj(du2)
      const CurvePoint& p = m.bnodes[i].p;
      a[i] = (std::conj(p.u[1]) + 2.0 * p.u[0]) * p.T[0];
      b[i] = p.u[0] * std::conj(p.T[1]);
    }
    double e = 0.0;
    for (int c = 0; c < m.components(); ++c) e = std::max(e, std::abs(boundary_form_integral(m, a, b, c)));
    err.push_back(e);
  }
  CHECK(err[1] < err[0]);
  CHECK(err[1] < 1e-2);
}

TEST_CASE("synth_chi") {
  const CurveMesh& m = scenario_mesh(0.08);
  SUBCASE("q = 0 gives vanishing dbar f") {
    ForwardCache c = prepare_forward(m, VecC::Zero(m.size()));
    ChiData chi = synth_chi(m, run_forward(m, c, 20.0 * kDiag).sol);
    CHECK(sup(chi.dbarf) <= 1e-10);
    CHECK(sup(chi.df) > 0.0);
  }
  SUBCASE("small q gives dbar f of order q") {
    double prev = 0.0;
    for (double amp : {0.01, 0.02}) {
      VecC q = bump_q(m, amp);
      ForwardCache c = prepare_forward(m, q);
      ChiData chi = synth_chi(m, run_forward(m, c, 10.0 * kDiag).sol);
      double d = sup(chi.dbarf);
      if (prev > 0.0) CHECK(d / prev == doctest::Approx(2.0).epsilon(0.1));
      prev = d;
    }
  }
}

TEST_CASE("noise is seeded and relative") {
  const CurveMesh& m = scenario_mesh(0.08);
  ForwardCache c = prepare_forward(m, bump_q(m));
  ChiData base = synth_chi(m, run_forward(m, c, 20.0 * kDiag).sol);
  ChiData a = base, b = base, d = base;
  add_noise(a, 1e-3, 7);
  add_noise(b, 1e-3, 7);
  add_noise(d, 1e-3, 8);
  CHECK(sup(a.df - b.df) == 0.0);
  CHECK(sup(a.df - d.df) > 0.0);
  double rms = std::sqrt(base.df.squaredNorm() / double(base.df.size()));
  double nrm = std::sqrt((a.df - base.df).squaredNorm() / double(base.df.size()));
  CHECK(nrm == doctest::Approx(1e-3 * rms).epsilon(0.3));
}

TEST_CASE("chi JSON round trip") {
  const CurveMesh& m = scenario_mesh(0.08);
  ForwardCache c = prepare_forward(m, bump_q(m));
  ChiData chi = synth_chi(m, run_forward(m, c, 20.0 * kDiag).sol);
  ChiData back = chi_from_json(to_json(chi));
  CHECK(back.lambda == chi.lambda);
  CHECK(sup(back.df - chi.df) == 0.0);
  CHECK(sup(back.dbarf - chi.dbarf) == 0.0);
  CHECK(back.basepoints == chi.basepoints);
  CHECK_THROWS_AS(chi_from_json(nlohmann::json::object()), Error);
}

TEST_CASE("t_map") {
  const CurveMesh& m = scenario_mesh(0.04);
  const cplx lam = 20.0 * kDiag;
  ForwardCache c = prepare_forward(m, VecC::Zero(m.size()));
  CgoSolution sol = run_forward(m, c, lam).sol;
  ChiData chi = synth_chi(m, sol);
  VecC gb(m.bnodes.size());
  for (Eigen::Index b = 0; b < gb.size(); ++b) gb[b] = std::exp(-std::conj(phi_affine(lam, m.bnodes[b].p.u))) * chi.df[b];

  SUBCASE("q = 0 reproduces the forward boundary values") {
    TMapResult t = t_map(m, chi, gb);
    CHECK(sup(t.h_b - sol.h_b) < 0.05);
  }
  SUBCASE("scaling the datum scales the integrals") {
    ChiData z = chi;
    z.df.setZero();
    z.dbarf.setZero();
    TMapResult t0 = t_map(m, z, VecC::Zero(gb.size()));
    TMapResult t1 = t_map(m, chi, gb), t2 = t_map(m, chi, 2.0 * gb);
    // affine: h = h0 + integral of g, with h0 fixed by the basepoint normalization
    CHECK(sup((t2.h_b - t0.h_b) - 2.0 * (t1.h_b - t0.h_b)) <= 1e-10 * (1.0 + sup(t1.h_b)));
  }
}
