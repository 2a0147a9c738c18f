#include "cgo/operators.hpp"

#include <ostream>

#include <fmt/format.h>

#include "cgo/parallel.hpp"

namespace cgo {

namespace {

bool coincide(const CurvePoint& a, const CurvePoint& b) { return std::abs(B(a.z, b.z)) < 1e-13; }

// Four shifted copies of each source for centered differences in tau.
std::vector<std::array<CurvePoint, 4>> shifted(const CurveDef& curve, const std::vector<CurvePoint>& src,
                                               double eps) {
  std::vector<std::array<CurvePoint, 4>> s(src.size());
  for (std::size_t j = 0; j < src.size(); ++j) {
    s[j][0] = point_at_tau(curve, src[j], eps);
    s[j][1] = point_at_tau(curve, src[j], -eps);
    s[j][2] = point_at_tau(curve, src[j], cplx(0, eps));
    s[j][3] = point_at_tau(curve, src[j], cplx(0, -eps));
  }
  return s;
}

cplx dbar_core(const CurveDef& curve, const std::array<CurvePoint, 4>& ws, const CurvePoint& z, double eps) {
  cplx fx = kernel_core(curve, ws[0], z) - kernel_core(curve, ws[1], z);
  cplx fy = kernel_core(curve, ws[2], z) - kernel_core(curve, ws[3], z);
  return 0.5 * (fx + I * fy) / (2.0 * eps);
}

}  // namespace

std::vector<CurvePoint> node_points(const CurveMesh& mesh, const std::vector<int>& idx) {
  std::vector<CurvePoint> p;
  p.reserve(idx.size());
  for (int i : idx) p.push_back(mesh.nodes[i].p);
  return p;
}

std::vector<CurvePoint> node_points(const CurveMesh& mesh) {
  std::vector<CurvePoint> p;
  p.reserve(mesh.nodes.size());
  for (auto& n : mesh.nodes) p.push_back(n.p);
  return p;
}

std::vector<CurvePoint> boundary_points(const CurveMesh& mesh) {
  std::vector<CurvePoint> p;
  p.reserve(mesh.bnodes.size());
  for (auto& b : mesh.bnodes) p.push_back(b.p);
  return p;
}

std::vector<int> all_indices(const CurveMesh& mesh) {
  std::vector<int> r(mesh.nodes.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = int(i);
  return r;
}

MatC conj_cauchy_matrix(const CurveDef& curve, const std::vector<CurvePoint>& tgt,
                        const std::vector<CurvePoint>& src) {
  MatC M(tgt.size(), src.size());
  parallel_for(long(tgt.size()), [&](long i) {
    for (std::size_t j = 0; j < src.size(); ++j)
      M(i, j) = coincide(tgt[i], src[j]) ? cplx(0.0) : std::conj(cauchy_k(curve, src[j], tgt[i]));
  });
  return M;
}

MatC kappa_matrix(const CurveDef& curve, const std::vector<CurvePoint>& tgt, const std::vector<CurvePoint>& src) {
  MatC M(tgt.size(), src.size());
  parallel_for(long(tgt.size()), [&](long i) {
    for (std::size_t j = 0; j < src.size(); ++j)
      M(i, j) = coincide(tgt[i], src[j]) ? cplx(0.0) : cauchy_kappa(curve, src[j], tgt[i]);
  });
  return M;
}

MatC dbar_kappa_matrix(const CurveDef& curve, const std::vector<CurvePoint>& tgt,
                       const std::vector<CurvePoint>& src, double eps) {
  auto sh = shifted(curve, src, eps);
  MatC M(tgt.size(), src.size());
  parallel_for(long(tgt.size()), [&](long i) {
    for (std::size_t j = 0; j < src.size(); ++j)
      M(i, j) = coincide(tgt[i], src[j]) ? cplx(0.0) : dbar_core(curve, sh[j], tgt[i], eps) / tgt[i].gnorm;
  });
  return M;
}

MatC conj_dk_matrix(const CurveDef& curve, const std::vector<CurvePoint>& tgt, const std::vector<CurvePoint>& src,
                    double eps) {
  auto sh = shifted(curve, src, eps);
  MatC M(tgt.size(), src.size());
  parallel_for(long(tgt.size()), [&](long i) {
    for (std::size_t j = 0; j < src.size(); ++j)
      M(i, j) = coincide(tgt[i], src[j]) ? cplx(0.0) : std::conj(dbar_core(curve, sh[j], tgt[i], eps) / src[j].gnorm);
  });
  return M;
}

double theta(const CurveMesh& mesh, const CurvePoint& p) {
  return cutoff({0.5 * mesh.eps0, mesh.eps0}, mesh.curve.chart.rho(p.u));
}

VecR theta_nodes(const CurveMesh& mesh) {
  VecR t(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) t[i] = theta(mesh, mesh.nodes[i].p);
  return t;
}

GValue kernel_G(const CurveMesh& mesh, cplx lambda, const CurvePoint& z, const CurvePoint& w, int levels) {
  if (coincide(z, w)) throw SingularPair("kernel G at coincident points");
  const CurveDef& c = mesh.curve;
  auto sum = [&](int lv) {
    Quadrature q = refined_quadrature(mesh, {z.u, w.u}, lv);
    cplx s = 0.0;
    for (std::size_t j = 0; j < q.pts.size(); ++j) {
      const CurvePoint& zeta = q.pts[j];
      if (std::min(std::abs(B(zeta.z, z.z)), std::abs(B(zeta.z, w.z))) < 1e-13) continue;
      double th = theta(mesh, zeta);
      if (th == 0.0) continue;
      s += q.w[j] * std::conj(cauchy_k(c, zeta, z)) * th * exp_factor_affine(-lambda, zeta.u) *
           cauchy_kappa(c, w, zeta);
    }
    return s / (PI * PI);
  };
  GValue g;
  g.value = sum(levels);
  g.error = std::abs(g.value - sum(std::max(0, levels - 2)));
  g.diverged = g.error > 0.05 * std::abs(g.value);
  g.g = split_form(g.value, w);
  return g;
}

FormPair kernel_N(const CurveMesh& mesh, cplx lambda, const CurvePoint& z, const CurvePoint& w) {
  if (coincide(z, w)) throw SingularPair("kernel N at coincident points");
  cplx v = theta(mesh, z) * exp_factor_affine(-lambda, z.u) * cauchy_kappa(mesh.curve, w, z) / PI;
  return split_form(v, w);
}

FormPair kernel_L(const CurveMesh& mesh, cplx lambda, const CurvePoint& z, const CurvePoint& w, double eps) {
  if (coincide(z, w)) throw SingularPair("kernel L at coincident points");
  cplx v = theta(mesh, z) * exp_factor_affine(-lambda, z.u) * dbar_w_core(mesh.curve, w, z, eps) / (z.gnorm * PI);
  return split_form(v, w);
}

void write_kernel_csv(const MatC& m, const std::string& kernel_id, std::ostream& os,
                      const std::vector<int>& target_ids, const std::vector<int>& source_ids) {
  os << "target_id,source_id,re,im,kernel_id\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      int ti = target_ids.empty() ? int(i) : target_ids[i];
      int sj = source_ids.empty() ? int(j) : source_ids[j];
      os << fmt::format("{},{},{:.17g},{:.17g},{}\n", ti, sj, m(i, j).real(), m(i, j).imag(), kernel_id);
    }
}

}  // namespace cgo
