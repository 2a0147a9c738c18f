#include "doctest.h"

#include "cgo/inverse.hpp"
#include "support.hpp"

using namespace cgo;
using cgo::test::kDiag;
using cgo::test::scenario_mesh;

namespace {

double sup(const VecC& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct IdentityCase {
  const CurveMesh& m;
  cplx lam;
  CgoSolution sol;
  ChiData chi;
  VecC gb;
};

IdentityCase identity_case(double h, cplx lam) {
  const CurveMesh& m = scenario_mesh(h);
  ForwardCache c = prepare_forward(m, VecC::Zero(m.size()));
  CgoSolution sol = run_forward(m, c, lam).sol;
  ChiData chi = synth_chi(m, sol);
  VecC gb(m.bnodes.size());
  for (Eigen::Index b = 0; b < gb.size(); ++b) gb[b] = std::exp(-std::conj(phi_affine(lam, m.bnodes[b].p.u))) * chi.df[b];
  return {m, lam, sol, chi, gb};
}

VecC restrict(const VecC& f, const std::vector<int>& rows) {
  VecC r(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) r[k] = f[rows[k]];
  return r;
}

}  // namespace

TEST_CASE("solve_regularized") {
  MatC A(3, 3);
  A << 4.0, 1.0, 0.0, 1.0, 3.0, cplx(0, 1), 0.0, cplx(0, -1), 2.0;
  VecC x(3);
  x << 1.0, cplx(0, 2), -1.0;
  SolveReport rep;
  VecC y = solve_regularized(A, A * x, rep);
  CHECK(sup(y - x) <= 1e-12);
  CHECK(rep.regularization == 0.0);
  CHECK(rep.residual <= 1e-8);

  MatC S = MatC::Identity(3, 3);
  S(2, 2) = 1e-16;
  SolveReport r2;
  VecC b = VecC::Ones(3);
  VecC z = solve_regularized(S, b, r2);
  CHECK(r2.regularization > 0.0);
  CHECK(!r2.escalations.empty());
  CHECK(std::isfinite(sup(z)));
}

TEST_CASE("P operator: zero input, linearity, and the q = 0 solution") {
  auto ic = identity_case(0.08, 20.0 * kDiag);
  POperator P = assemble_P(ic.m, ic.lam);
  const Eigen::Index n = Eigen::Index(P.rows.size());
  const Eigen::Index nb = ic.gb.size();
  CHECK(sup(P.apply(VecC::Zero(n), VecC::Zero(nb))) == 0.0);
  VecC g = VecC::LinSpaced(n, 0.0, 1.0), gb = VecC::LinSpaced(nb, 1.0, 0.0);
  VecC once = P.apply(g, gb), twice = P.apply(2.0 * g, 2.0 * gb);
  CHECK(sup(twice - 2.0 * once) <= 1e-12 * (1.0 + sup(once)));
  // with q = 0 data the recovered g is the forward dh
  GSolve s = solve_g(ic.m, P, ic.gb);
  double e = 0.0, ref = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    if (ic.m.nodes[P.rows[k]].dist_b >= 3.0 * ic.m.h()) {
      e = std::max(e, std::abs(s.g[k] - ic.sol.dh[P.rows[k]]));
      ref = std::max(ref, std::abs(ic.sol.dh[P.rows[k]]));
    }
  CHECK(e <= 0.05 * ref);
}

TEST_CASE("q = 0: the forward solution satisfies both equations") {
  std::vector<double> rh;
  for (double h : {0.08, 0.04}) {
    auto ic = identity_case(h, 20.0 * kDiag);
    POperator P = assemble_P(ic.m, ic.lam);
    SOperator S = assemble_S(ic.m);
    auto r = equation_residuals(ic.m, P, S, ic.sol.dh, ic.gb, ic.sol.h, ic.sol.h_b, 3.0 * ic.m.h());
    CHECK(r.p < 0.05);
    rh.push_back(r.h);
  }
  CHECK(rh[1] < 0.6 * rh[0]);
}

TEST_CASE("S operator") {
  const CurveMesh& m = scenario_mesh(0.08);
  SOperator S = assemble_S(m);
  const Eigen::Index n = Eigen::Index(S.rows.size());
  REQUIRE(n > 0);
  SUBCASE("linear in h") {
    VecC a = VecC::LinSpaced(n, 0.0, 1.0), b = VecC::Ones(n);
    CHECK(sup(S.S * (a + cplx(0, 2) * b) - (S.S * a + cplx(0, 2) * (S.S * b))) <= 1e-12 * (1.0 + sup(S.S * b)));
  }
  SUBCASE("v of zero data is zero") {
    CHECK(sup(compute_v(S, VecC::Zero(n), VecC::Zero(m.bnodes.size()))) == 0.0);
  }
  SUBCASE("v = (I + S) h recovers h") {
    VecC h(n);
    for (Eigen::Index k = 0; k < n; ++k) h[k] = std::exp(0.3 * m.nodes[S.rows[k]].p.u[0]);
    VecC v = h + S.S * h;
    MatC A = MatC::Identity(n, n) + S.S;
    SolveReport rep;
    VecC x = solve_regularized(A, v, rep);
    CHECK(sup(x - h) <= 1e-8);
    CHECK(rep.residual <= 1e-8);
  }
  SUBCASE("singular values decay") {
    Eigen::BDCSVD<MatC> svd(S.S);
    auto sv = svd.singularValues();
    CHECK(sv[sv.size() / 2] / sv[0] < 0.1);
  }
}

TEST_CASE("q = 0: recovered h and q") {
  auto ic = identity_case(0.08, 20.0 * kDiag);
  SOperator S = assemble_S(ic.m);
  VecC g = restrict(ic.sol.dh, S.rows);
  HSolve hs = solve_h(ic.m, S, ic.lam, g, ic.sol.h_b);
  VecC ht = restrict(ic.sol.h, S.rows);
  double e = 0.0;
  for (std::size_t k = 0; k < S.rows.size(); ++k)
    if (ic.m.nodes[S.rows[k]].dist_b >= 3.0 * ic.m.h()) e = std::max(e, std::abs(hs.h[k] - ht[k]));
  CHECK(e < 0.05);

  VecC q = reconstruct_q(ic.m, ic.sol.h, ic.lam);
  CHECK(sup(q) <= 1e-8);
}

TEST_CASE("reconstruct_q is invariant under scaling h") {
  const CurveMesh& m = scenario_mesh(0.08);
  const cplx lam = 10.0 * kDiag;
  ForwardCache c = prepare_forward(m, cgo::test::bump_q(m));
  CgoSolution sol = run_forward(m, c, lam).sol;
  VecC q1 = reconstruct_q(m, sol.h, lam), q2 = reconstruct_q(m, cplx(-2.0, 3.0) * sol.h, lam);
  CHECK(sup(q2 - q1) <= 1e-9 * (1.0 + sup(q1)));
}

TEST_CASE("recover_sigma") {
  const CurveMesh& m = scenario_mesh(0.08);
  SigmaSolve s0 = recover_sigma(m, VecC::Zero(m.size()));
  CHECK((s0.sigma.array() - 1.0).abs().maxCoeff() <= 1e-10);

  SigmaSpec spec;
  spec.preset = "bump";
  spec.bumps = default_bumps(m.curve, "bump");
  spec.bumps[0].amplitude = 0.1;
  SigmaModel model(m.curve, spec);
  SigmaSolve s = recover_sigma(m, q_from_model(m, model));
  for (int i : m.interior()) {
    CHECK(s.u[i].real() > 0.0);
    CHECK(std::abs(s.u[i].imag()) <= 1e-8);
  }
  VecR truth = sigma_nodes(m, model);
  CHECK(relative_l2(m, s.sigma.cast<cplx>(), truth.cast<cplx>(), m.interior()) < 0.05);
}

TEST_CASE("identity round trip through invert") {
  auto ic = identity_case(0.08, 20.0 * kDiag);
  Inversion inv = invert(ic.m, ic.chi, true);
  CHECK(relative_l2(ic.m, inv.q, VecC::Zero(ic.m.size()), ic.m.interior_margin(3.0 * ic.m.h())) <= 1e-6);
  CHECK((inv.sigma.array() - 1.0).abs().maxCoeff() <= 1e-6);
  auto j = to_json(inv.report);
  CHECK(j.contains("residual_g"));
}

TEST_CASE("S[1] is antiholomorphic in z") {
  const CurveMesh& m = scenario_mesh(0.04);
  SOperator S = assemble_S(m);
  VecC s1 = S.S * VecC::Ones(Eigen::Index(S.rows.size()));
  VecC full = VecC::Zero(m.size());
  for (std::size_t k = 0; k < S.rows.size(); ++k) full[S.rows[k]] = s1[k];
  double d = 0.0, dbar = 0.0;
  for (int i : m.interior_margin(0.1)) {
    Deriv r = derivative(m, full, i);
    d = std::max(d, std::abs(r.d));
    dbar = std::max(dbar, std::abs(r.dbar));
  }
  CHECK(10.0 * d <= dbar);
}
