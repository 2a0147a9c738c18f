#include "cgo/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include <Eigen/Eigenvalues>

#include "cgo/kernels.hpp"

namespace cgo {

Vec2c patch_point(int patch, cplx t, cplx x) { return patch == 0 ? Vec2c{x, t} : Vec2c{t, x}; }

bool patch_owns(int patch, const Vec2c& g) {
  return patch == 0 ? std::abs(g[0]) >= std::abs(g[1]) : std::abs(g[1]) > std::abs(g[0]);
}

namespace {

int xvar(int patch) { return patch == 0 ? 0 : 1; }

cplx dxdt(const Vec2c& g, int patch) {
  return patch == 0 ? -g[1] / g[0] : -g[0] / g[1];
}

std::vector<cplx> slice_roots(const CurveDef& curve, int patch, cplx t) {
  std::vector<cplx> c = curve.P.slice_coefficients(xvar(patch), t);
  double mx = 0.0;
  for (auto& v : c) mx = std::max(mx, std::abs(v));
  int deg = int(c.size()) - 1;
  while (deg > 0 && std::abs(c[deg]) <= 1e-13 * mx) --deg;
  if (deg <= 0) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  return r;
}

struct Sample {
  bool ok = false;
  cplx x;
  Vec2c u;
  Vec2c g;
  double rho = 0.0;
  double metric = 1.0;
  bool own = false;
};

Sample sample_at(const CurveDef& curve, int patch, cplx t, cplx x0) {
  Sample s;
  s.x = x0;
  if (!newton_sheet(curve, patch, t, s.x)) return s;
  s.u = patch_point(patch, t, s.x);
  s.g = curve.P.grad_affine(s.u);
  cplx gx = patch == 0 ? s.g[0] : s.g[1];
  if (std::abs(gx) < 1e-14) return s;
  s.metric = 1.0 + std::norm(dxdt(s.g, patch));
  s.rho = curve.chart.rho(s.u);
  s.own = patch_owns(patch, s.g);
  s.ok = true;
  return s;
}

// -1: not part of this piece, 0: V, 1: collar
int classify(const Sample& s, double eps0) {
  if (!s.ok || !s.own) return -1;
  if (s.rho < 0.0) return 0;
  if (s.rho < eps0) return 1;
  return -1;
}

double dist(const Vec2c& a, const Vec2c& b) { return std::sqrt(std::norm(a[0] - b[0]) + std::norm(a[1] - b[1])); }

struct Part {
  double w = 0.0, wm = 0.0;
  cplx tsum = 0.0;
};

struct Small {
  Vec2c u;
  double weight;
  Region region;
};

// rho-gradient step on the curve: move along tau so rho -> 0
CurvePoint rho_correct(const CurveDef& curve, CurvePoint p, int iters = 4) {
  const Vec2c& c = curve.chart.center;
  for (int it = 0; it < iters; ++it) {
    double r = curve.chart.rho(p.u);
    cplx a = std::conj(p.u[0] - c[0]) * p.T[0] + std::conj(p.u[1] - c[1]) * p.T[1];
    double a2 = std::norm(a);
    if (a2 < 1e-30) throw MeshError("boundary tangent degenerates");
    if (std::abs(r) < 1e-15) break;
    p = point_at_tau(curve, p, -r * std::conj(a) / (2.0 * a2));
  }
  return p;
}

cplx boundary_tangent(const CurveDef& curve, const CurvePoint& p) {
  const Vec2c& c = curve.chart.center;
  cplx a = std::conj(p.u[0] - c[0]) * p.T[0] + std::conj(p.u[1] - c[1]) * p.T[1];
  return I * std::conj(a) / std::abs(a);
}

struct Loop {
  std::vector<Vec2c> pts;
  double length = 0.0;
};

Loop trace_loop(const CurveDef& curve, CurvePoint start, double step) {
  Loop loop;
  start = rho_correct(curve, start, 8);
  CurvePoint cur = start;
  loop.pts.push_back(cur.u);
  const int max_steps = int(200.0 * (curve.chart.radius + 1.0) * 2.0 * PI * curve.d() / step) + 1000;
  for (int k = 0; k < max_steps; ++k) {
    cplx tb = boundary_tangent(curve, cur);
    CurvePoint nxt = point_at_tau(curve, cur, tb * step);
    nxt = rho_correct(curve, nxt, 3);
    if (std::abs(nxt.z[0]) < curve.chart.c0_floor)
      throw MeshError(fmt::format("boundary trace left the chart near u=({:.6g},{:.6g})", std::abs(nxt.u[0]),
                                  std::abs(nxt.u[1])));
    double dstart = dist(nxt.u, start.u);
    if (k > 8 && dstart < 1.01 * step) {
      loop.length += dist(nxt.u, cur.u) + dstart;
      loop.pts.push_back(nxt.u);
      return loop;
    }
    loop.length += dist(nxt.u, cur.u);
    loop.pts.push_back(nxt.u);
    cur = nxt;
  }
  throw MeshError("boundary trace did not close");
}

Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& A) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(A);
  cod.setThreshold(1e-10);
  return cod.pseudoInverse();
}

std::vector<int> nearest(const CurveMesh& mesh, const Vec2c& u, int k, int exclude) {
  std::vector<std::pair<double, int>> d;
  d.reserve(mesh.nodes.size());
  for (std::size_t j = 0; j < mesh.nodes.size(); ++j) {
    if (int(j) == exclude) continue;
    d.push_back({std::norm(mesh.nodes[j].p.u[0] - u[0]) + std::norm(mesh.nodes[j].p.u[1] - u[1]), int(j)});
  }
  k = std::min<int>(k, int(d.size()));
  std::partial_sort(d.begin(), d.begin() + k, d.end());
  std::vector<int> r(k);
  for (int i = 0; i < k; ++i) r[i] = d[i].second;
  return r;
}

}  // namespace

bool newton_sheet(const CurveDef& curve, int patch, cplx t, cplx& x) {
  for (int it = 0; it < 50; ++it) {
    Vec2c u = patch_point(patch, t, x);
    cplx f = curve.P.eval_affine(u);
    Vec2c g = curve.P.grad_affine(u);
    cplx gx = patch == 0 ? g[0] : g[1];
    if (std::abs(gx) < 1e-14) return false;
    cplx step = f / gx;
    x -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) return std::isfinite(x.real());
  }
  return std::abs(curve.P.eval_affine(patch_point(patch, t, x))) < 1e-10;
}

std::vector<int> CurveMesh::interior() const {
  std::vector<int> r;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].region == Region::Interior) r.push_back(int(i));
  return r;
}

std::vector<int> CurveMesh::interior_margin(double margin) const {
  std::vector<int> r;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].region == Region::Interior && nodes[i].dist_b >= margin) r.push_back(int(i));
  return r;
}

double CurveMesh::area() const {
  double a = 0.0;
  for (auto& n : nodes)
    if (n.region == Region::Interior) a += n.weight;
  return a;
}

CurveMesh build_mesh(const CurveDef& curve, const MeshOptions& opts) {
  if (!(opts.h > 0.0)) throw ConfigError("mesh resolution h must be positive");
  curve.validate();
  CurveMesh mesh;
  mesh.curve = curve;
  mesh.opts = opts;
  const double R = curve.chart.radius;
  const double Rout = R + opts.collar;
  mesh.eps0 = Rout * Rout - R * R;
  const double h = opts.h;
  const int m = std::max(2, opts.subsample);

  std::vector<Small> small;
  struct Seed {
    Vec2c in, out;
    int patch;
    cplx tin, tout, x;
  };
  std::vector<Seed> seeds;

  for (int patch = 0; patch < 2; ++patch) {
    cplx ct = patch == 0 ? curve.chart.center[1] : curve.chart.center[0];
    int n = int(std::ceil(2.0 * Rout / h)) + 2;
    double off = 0.5 * (n - 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cplx t = ct + h * cplx(i - off, j - off);
        for (cplx x0 : slice_roots(curve, patch, t)) {
          Sample c = sample_at(curve, patch, t, x0);
          if (!c.ok) continue;
          double slope2 = c.metric - 1.0;
          if (slope2 > 16.0) continue;
          double margin = 2.0 * (Rout + h) * std::sqrt(c.metric) * h + h * h;
          if (c.rho > mesh.eps0 + margin) continue;
          // corners
          int cls[5];
          bool owned_margin = false;
          cls[0] = classify(c, mesh.eps0);
          const cplx corner[4] = {cplx(-0.5, -0.5), cplx(0.5, -0.5), cplx(0.5, 0.5), cplx(-0.5, 0.5)};
          Sample cs[4];
          for (int k = 0; k < 4; ++k) {
            cs[k] = sample_at(curve, patch, t + h * corner[k], c.x);
            cls[k + 1] = classify(cs[k], mesh.eps0);
          }
          for (int k = 0; k < 5; ++k) {
            const Sample& s = k == 0 ? c : cs[k - 1];
            if (!s.ok) continue;
            double gx = std::abs(patch == 0 ? s.g[0] : s.g[1]), gt = std::abs(patch == 0 ? s.g[1] : s.g[0]);
            if (gx > 0.7 * gt) owned_margin = true;
          }
          bool uniform = std::all_of(cls, cls + 5, [&](int v) { return v == cls[0]; });
          if (uniform && cls[0] == -1 && (!owned_margin || c.rho > mesh.eps0)) continue;
          int cell_id = int(mesh.cells.size());
          if (uniform && cls[0] >= 0) {
            mesh.cells.push_back({patch, t, c.x, h});
            Node nd;
            nd.p = make_point(curve, c.u);
            nd.weight = h * h * c.metric;
            nd.patch = patch;
            nd.region = cls[0] == 0 ? Region::Interior : Region::Collar;
            nd.cell = cell_id;
            nd.t = t;
            nd.rho = c.rho;
            mesh.nodes.push_back(nd);
            continue;
          }
          // cut cell
          Part parts[2];
          double total = 0.0;
          for (int a = 0; a < m; ++a) {
            cplx xrow = c.x;
            for (int b = 0; b < m; ++b) {
              cplx ts = t + h * cplx((a + 0.5) / m - 0.5, (b + 0.5) / m - 0.5);
              Sample s = sample_at(curve, patch, ts, xrow);
              double wm = s.ok ? s.metric : c.metric;
              total += wm;
              int k = classify(s, mesh.eps0);
              if (k < 0) continue;
              parts[k].w += wm;
              parts[k].tsum += wm * ts;
            }
          }
          if (parts[0].w == 0.0 && parts[1].w == 0.0) continue;
          mesh.cells.push_back({patch, t, c.x, h});
          Vec2c centroid[2];
          for (int k = 0; k < 2; ++k) {
            if (parts[k].w == 0.0) continue;
            cplx tc = parts[k].tsum / parts[k].w;
            cplx x = c.x;
            if (!newton_sheet(curve, patch, tc, x)) throw MeshError("Newton failed at a cut-cell centroid");
            Vec2c u = patch_point(patch, tc, x);
            centroid[k] = u;
            double w = parts[k].w / (m * m) * h * h;
            double frac = parts[k].w / total;
            Region reg = k == 0 ? Region::Interior : Region::Collar;
            if (frac < opts.merge_fraction) {
              small.push_back({u, w, reg});
              continue;
            }
            Node nd;
            nd.p = make_point(curve, u);
            nd.weight = w;
            nd.patch = patch;
            nd.region = reg;
            nd.cell = cell_id;
            nd.cut = true;
            nd.t = tc;
            nd.rho = curve.chart.rho(u);
            mesh.nodes.push_back(nd);
          }
          if (parts[0].w > 0.0 && parts[1].w > 0.0)
            seeds.push_back({centroid[0], centroid[1], patch, parts[0].tsum / parts[0].w,
                             parts[1].tsum / parts[1].w, c.x});
        }
      }
    }
  }
  if (mesh.nodes.empty()) throw MeshError("no curve points inside the chart disc");

  // merge small parts into the nearest node of the same region
  for (auto& s : small) {
    int best = -1;
    double bd = 1e300;
    for (std::size_t j = 0; j < mesh.nodes.size(); ++j) {
      if (mesh.nodes[j].region != s.region) continue;
      double dd = dist(mesh.nodes[j].p.u, s.u);
      if (dd < bd) bd = dd, best = int(j);
    }
    if (best < 0) throw MeshError("isolated sliver without a host node");
    mesh.nodes[best].weight += s.weight;
  }

  // merge near-coincident nodes (cut parts meeting across the patch interface)
  {
    const double dmin = 0.3 * h;
    std::vector<bool> dead(mesh.nodes.size(), false);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
      if (dead[i]) continue;
      for (std::size_t j = i + 1; j < mesh.nodes.size(); ++j) {
        if (dead[j] || mesh.nodes[j].region != mesh.nodes[i].region) continue;
        if (dist(mesh.nodes[i].p.u, mesh.nodes[j].p.u) >= dmin) continue;
        std::size_t keep = mesh.nodes[i].weight >= mesh.nodes[j].weight ? i : j, drop = keep == i ? j : i;
        mesh.nodes[keep].weight += mesh.nodes[drop].weight;
        dead[drop] = true;
        if (drop == i) break;
      }
    }
    std::vector<Node> kept;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
      if (!dead[i]) kept.push_back(mesh.nodes[i]);
    mesh.nodes.swap(kept);
  }

  std::stable_sort(mesh.nodes.begin(), mesh.nodes.end(), [](const Node& a, const Node& b) {
    if (a.patch != b.patch) return a.patch < b.patch;
    if (a.t.real() != b.t.real()) return a.t.real() < b.t.real();
    if (a.t.imag() != b.t.imag()) return a.t.imag() < b.t.imag();
    return a.p.u[0].real() + a.p.u[1].real() < b.p.u[0].real() + b.p.u[1].real();
  });

  // boundary components
  const double step = h / 8.0;
  std::vector<bool> used(seeds.size(), false);
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    if (used[si]) continue;
    const Seed& sd = seeds[si];
    // bisection on rho along the parameter segment between the two parts
    double lo = 0.0, hi = 1.0;
    cplx x = sd.x;
    Vec2c u;
    for (int it = 0; it < 50; ++it) {
      double mid = 0.5 * (lo + hi);
      cplx tm = sd.tin + mid * (sd.tout - sd.tin);
      if (!newton_sheet(curve, sd.patch, tm, x)) throw MeshError("Newton failed while seeding the boundary");
      u = patch_point(sd.patch, tm, x);
      if (curve.chart.rho(u) < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    Loop loop = trace_loop(curve, make_point(curve, u), step);
    for (std::size_t sj = si; sj < seeds.size(); ++sj) {
      if (used[sj]) continue;
      for (auto& q : loop.pts)
        if (dist(q, seeds[sj].in) < 1.5 * h) {
          used[sj] = true;
          break;
        }
    }
    used[si] = true;
    // resample at equal arclength
    int comp = int(mesh.component_start.size());
    mesh.component_start.push_back(int(mesh.bnodes.size()));
    int nb = std::max(12, int(std::ceil(loop.length / h)));
    double ds = loop.length / nb;
    std::vector<double> cum(loop.pts.size(), 0.0);
    for (std::size_t k = 1; k < loop.pts.size(); ++k) cum[k] = cum[k - 1] + dist(loop.pts[k], loop.pts[k - 1]);
    std::size_t seg = 0;
    for (int j = 0; j < nb; ++j) {
      double s = j * ds;
      while (seg + 1 < loop.pts.size() && cum[seg + 1] < s) ++seg;
      Vec2c a = loop.pts[seg];
      Vec2c b = seg + 1 < loop.pts.size() ? loop.pts[seg + 1] : loop.pts[0];
      double l0 = cum[seg], l1 = seg + 1 < loop.pts.size() ? cum[seg + 1] : loop.length;
      double f = l1 > l0 ? (s - l0) / (l1 - l0) : 0.0;
      Vec2c g{a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])};
      CurvePoint p = rho_correct(curve, make_point(curve, project_to_curve(curve, g)), 6);
      BoundaryNode bn;
      bn.p = p;
      bn.ds = ds;
      bn.tb = boundary_tangent(curve, p);
      bn.component = comp;
      bn.s = s;
      mesh.bnodes.push_back(bn);
    }
  }
  if (mesh.bnodes.empty()) throw MeshError("no boundary component found");

  for (auto& nd : mesh.nodes) {
    double best = 1e300;
    for (auto& b : mesh.bnodes) best = std::min(best, dist(nd.p.u, b.p.u));
    nd.dist_b = best;
  }
  if (opts.stencils) build_stencils(mesh);
  return mesh;
}

Stencil point_stencil(const CurveMesh& mesh, const CurvePoint& at, int k) {
  Stencil st;
  st.idx = nearest(mesh, at.u, k, -1);
  const int n = int(st.idx.size());
  const double sc = mesh.h();
  Eigen::MatrixXcd A(n, 6);
  for (int r = 0; r < n; ++r) {
    cplx tau = at.tau_of(mesh.nodes[st.idx[r]].p.u) / sc;
    cplx tb = std::conj(tau);
    A(r, 0) = 1.0;
    A(r, 1) = tau;
    A(r, 2) = tb;
    A(r, 3) = tau * tau;
    A(r, 4) = tau * tb;
    A(r, 5) = tb * tb;
  }
  Eigen::MatrixXcd Pi = pinv(A);
  st.value.resize(n);
  st.d.resize(n);
  st.dbar.resize(n);
  st.ddbar.resize(n);
  for (int r = 0; r < n; ++r) {
    st.value[r] = Pi(0, r);
    st.d[r] = Pi(1, r) / sc;
    st.dbar[r] = Pi(2, r) / sc;
    st.ddbar[r] = Pi(4, r) / (sc * sc);
  }
  return st;
}

void build_stencils(CurveMesh& mesh) {
  const double sc = mesh.h();
  mesh.stencils.assign(mesh.nodes.size(), {});
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    Stencil& st = mesh.stencils[i];
    const CurvePoint& p = mesh.nodes[i].p;
    st.idx = nearest(mesh, p.u, mesh.opts.knn, int(i));
    const int n = int(st.idx.size());
    Eigen::MatrixXcd A(n, 5);
    for (int r = 0; r < n; ++r) {
      cplx tau = p.tau_of(mesh.nodes[st.idx[r]].p.u) / sc;
      cplx tb = std::conj(tau);
      A(r, 0) = tau;
      A(r, 1) = tb;
      A(r, 2) = tau * tau;
      A(r, 3) = tau * tb;
      A(r, 4) = tb * tb;
    }
    Eigen::MatrixXcd Pi = pinv(A);
    st.d.resize(n);
    st.dbar.resize(n);
    st.ddbar.resize(n);
    for (int r = 0; r < n; ++r) {
      st.d[r] = Pi(0, r) / sc;
      st.dbar[r] = Pi(1, r) / sc;
      st.ddbar[r] = Pi(3, r) / (sc * sc);
    }
  }
  mesh.bstencils.clear();
  for (auto& b : mesh.bnodes) mesh.bstencils.push_back(point_stencil(mesh, b.p, 9));
}

Deriv derivative(const CurveMesh& mesh, const VecC& f, int i) {
  const Stencil& st = mesh.stencils.at(i);
  Deriv r{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < st.idx.size(); ++k) {
    cplx df = f[st.idx[k]] - f[i];
    r.d += st.d[k] * df;
    r.dbar += st.dbar[k] * df;
    r.ddbar += st.ddbar[k] * df;
  }
  return r;
}

Deriv boundary_derivative(const CurveMesh& mesh, const VecC& f, int b, cplx* value) {
  const Stencil& st = mesh.bstencils.at(b);
  Deriv r{0.0, 0.0, 0.0};
  cplx v = 0.0;
  for (std::size_t k = 0; k < st.idx.size(); ++k) {
    cplx fk = f[st.idx[k]];
    v += st.value[k] * fk;
    r.d += st.d[k] * fk;
    r.dbar += st.dbar[k] * fk;
    r.ddbar += st.ddbar[k] * fk;
  }
  if (value) *value = v;
  return r;
}

cplx integrate_11(const CurveMesh& mesh, const VecC& field) {
  if (field.size() != Eigen::Index(mesh.nodes.size())) throw ConfigError("field size does not match the mesh");
  cplx s = 0.0;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    if (mesh.nodes[i].region == Region::Interior) s += mesh.nodes[i].weight * field[i];
  return s;
}

CurveIntegrand residue_reduce(const CurveDef& curve, const TubeIntegrand& f) {
  if (f.pole_order != 1)
    throw UnsupportedPole(fmt::format("pole of order {} along the curve", f.pole_order));
  (void)curve;
  auto num = f.numerator;
  return {[num](const CurvePoint& p) { return num ? num(p.u) * 2.0 * PI * I / p.gnorm : cplx(0.0); }};
}

cplx tube_integral(const CurveDef& curve, const std::vector<CurvePoint>& pts, const std::vector<double>& w,
                   const TubeIntegrand& f, double eps, int ntheta) {
  if (f.pole_order != 1)
    throw UnsupportedPole(fmt::format("pole of order {} along the curve", f.pole_order));
  if (!f.numerator) return 0.0;
  cplx total = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const CurvePoint& p = pts[k];
    cplx loop = 0.0;
    cplx nu = eps / p.gnorm;
    for (int j = 0; j < ntheta; ++j) {
      cplx target = std::polar(eps, 2.0 * PI * j / ntheta);
      nu = target / p.gnorm;
      cplx pn = 1.0;
      Vec2c u;
      for (int it = 0; it < 30; ++it) {
        u = {p.u[0] + p.N[0] * nu, p.u[1] + p.N[1] * nu};
        Vec2c g = curve.P.grad_affine(u);
        pn = g[0] * p.N[0] + g[1] * p.N[1];
        cplx st = (curve.P.eval_affine(u) - target) / pn;
        nu -= st;
        if (std::abs(st) < 1e-16 * std::abs(nu)) break;
      }
      u = {p.u[0] + p.N[0] * nu, p.u[1] + p.N[1] * nu};
      Vec2c g = curve.P.grad_affine(u);
      pn = g[0] * p.N[0] + g[1] * p.N[1];
      // num/p dnu with p = eps e^{i theta}, dnu = i eps e^{i theta} dtheta / p_nu
      loop += f.numerator(u) * I / pn;
    }
    total += w[k] * loop * (2.0 * PI / ntheta);
  }
  return total;
}

cplx curve_integral(const std::vector<CurvePoint>& pts, const std::vector<double>& w, const CurveIntegrand& f) {
  cplx s = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) s += w[k] * f.value(pts[k]);
  return s;
}

std::vector<double> pv_schedule(double h, double eta0, int max_levels) {
  std::vector<double> e;
  const double floor = 4.0 * h * h;
  for (int k = 0; k < max_levels; ++k) {
    double v = eta0 * std::pow(2.0, -k);
    if (v < floor) break;
    e.push_back(v);
  }
  if (e.size() < 3) throw ConfigError("exclusion schedule has fewer than three levels above the mesh floor");
  return e;
}

PvResult pv_integrate(const std::vector<CurvePoint>& pts, const std::vector<double>& w, const CurvePoint& z,
                      const std::function<cplx(const CurvePoint&, const CurvePoint&)>& kernel, const VecC& density,
                      const std::vector<double>& etas) {
  for (std::size_t k = 1; k < etas.size(); ++k)
    if (!(etas[k] < etas[k - 1])) throw ConfigError("exclusion radii must be strictly decreasing");
  PvResult r;
  r.etas = etas;
  std::vector<double> absb(pts.size());
  std::vector<cplx> term(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    absb[j] = std::abs(B(z.z, pts[j].z));
    term[j] = absb[j] > 0.0 && density[j] != 0.0 ? w[j] * kernel(z, pts[j]) * density[j] : 0.0;
  }
  for (double eta : etas) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (absb[j] > eta) s += term[j];
    r.partial.push_back(s);
  }
  const std::size_t n = r.partial.size();
  r.value = r.partial.back();
  if (n < 3) return r;
  cplx d1 = r.partial[n - 2] - r.partial[n - 3];
  cplx d2 = r.partial[n - 1] - r.partial[n - 2];
  double scale = std::abs(r.partial.back()) + 1e-300;
  if (std::abs(d1) <= 1e-14 * scale) {
    r.error = std::abs(d2);
    r.ratio = 0.0;
    return r;
  }
  cplx rho = d2 / d1;
  r.ratio = std::abs(rho);
  if (r.ratio > 0.9) {
    r.diverged = true;
    r.error = std::abs(d2);
    return r;
  }
  cplx tail = d2 * rho / (1.0 - rho);
  r.value = r.partial.back() + tail;
  r.error = std::abs(tail);
  return r;
}

namespace {

struct AreaCtx {
  const CurveMesh* mesh;
  Vec3c z;
  double delta;
  double smin;
};

double area_box(const AreaCtx& c, int patch, cplx t, double s, cplx& x) {
  const CurveDef& curve = c.mesh->curve;
  Sample sm = sample_at(curve, patch, t, x);
  if (!sm.ok) return 0.0;
  x = sm.x;
  HomPoint hp = lift_to_sphere(sm.u);
  double b = std::abs(B(c.z, hp.z));
  double n = std::sqrt(1.0 + norm2(sm.u));
  double lipu = 2.0 * std::sqrt(sm.metric) * s / std::sqrt(2.0);  // bound on |du| over the box
  double rb = lipu / n;
  double rr = lipu * 2.0 * (std::sqrt(norm2(Vec2c{sm.u[0] - curve.chart.center[0], sm.u[1] - curve.chart.center[1]})) + lipu);
  if (b - rb > c.delta || sm.rho - rr > 0.0) return 0.0;
  double gx = std::abs(patch == 0 ? sm.g[0] : sm.g[1]), gt = std::abs(patch == 0 ? sm.g[1] : sm.g[0]);
  bool own_sure = patch == 0 ? gx > 1.3 * gt : gx > 1.3 * gt;
  bool own_none = gx < 0.75 * gt;
  if (own_none && s < 0.5 * c.mesh->h()) return 0.0;
  if (b + rb < c.delta && sm.rho + rr < 0.0 && own_sure) return s * s * sm.metric;
  if (s <= c.smin) return (b <= c.delta && sm.rho < 0.0 && sm.own) ? s * s * sm.metric : 0.0;
  double a = 0.0;
  const cplx off[4] = {cplx(-0.25, -0.25), cplx(0.25, -0.25), cplx(0.25, 0.25), cplx(-0.25, 0.25)};
  for (auto o : off) {
    cplx xs = x;
    a += area_box(c, patch, t + s * o, 0.5 * s, xs);
  }
  return a;
}

}  // namespace

double region_area(const CurveMesh& mesh, const CurvePoint& z, double delta, int levels) {
  if (levels <= 0) {
    double a = 0.0;
    for (auto& n : mesh.nodes)
      if (n.region == Region::Interior && std::abs(B(z.z, n.p.z)) <= delta) a += n.weight;
    return a;
  }
  AreaCtx c{&mesh, z.z, delta, std::max(mesh.h() * std::pow(0.5, levels), delta / 50.0)};
  double a = 0.0;
  for (auto& cell : mesh.cells) {
    cplx x = cell.x;
    a += area_box(c, cell.patch, cell.t, cell.size, x);
  }
  return a;
}

namespace {

double near_distance(const Vec2c& u, const std::vector<Vec2c>& near) {
  double d = INFINITY;
  for (auto& v : near) d = std::min(d, dist(u, v));
  return d;
}

void refine_box(const CurveMesh& mesh, const std::vector<Vec2c>& near, int patch, cplx t, double s, cplx x,
                const Sample& sm, int level, int node, Quadrature& q) {
  double span = s * std::sqrt(sm.metric);
  if (level > 0 && near_distance(sm.u, near) < 3.0 * span) {
    const cplx off[4] = {cplx(-0.25, -0.25), cplx(0.25, -0.25), cplx(0.25, 0.25), cplx(-0.25, 0.25)};
    for (auto o : off) {
      Sample c = sample_at(mesh.curve, patch, t + s * o, x);
      if (!c.ok) continue;
      refine_box(mesh, near, patch, t + s * o, 0.5 * s, c.x, c, level - 1, node, q);
    }
    return;
  }
  q.pts.push_back(make_point(mesh.curve, sm.u));
  q.w.push_back(s * s * sm.metric);
  q.node.push_back(node);
}

}  // namespace

Quadrature refined_quadrature(const CurveMesh& mesh, const std::vector<Vec2c>& near, int levels) {
  Quadrature q;
  const double h = mesh.h();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const Node& n = mesh.nodes[i];
    bool refine = !n.cut && n.cell >= 0 && levels > 0 && near_distance(n.p.u, near) < 3.0 * std::sqrt(n.weight);
    if (refine) {
      const Cell& c = mesh.cells[n.cell];
      Sample sm = sample_at(mesh.curve, c.patch, c.t, c.x);
      // nodes that absorbed merged cut-cell fragments keep their own weight
      if (sm.ok && std::abs(n.weight - h * h * sm.metric) <= 1e-12 * n.weight) {
        refine_box(mesh, near, c.patch, c.t, c.size, sm.x, sm, levels, int(i), q);
        continue;
      }
    }
    q.pts.push_back(n.p);
    q.w.push_back(n.weight);
    q.node.push_back(int(i));
  }
  return q;
}

void write_mesh_csv(const CurveMesh& mesh, std::ostream& os) {
  os << "node_id,patch_id,re_z0,im_z0,re_z1,im_z1,re_z2,im_z2,re_u1,im_u1,re_u2,im_u2,weight,is_boundary\n";
  auto row = [&](std::size_t id, int patch, const CurvePoint& p, double w, int b) {
    os << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n",
                      id, patch, p.z[0].real(), p.z[0].imag(), p.z[1].real(), p.z[1].imag(), p.z[2].real(),
                      p.z[2].imag(), p.u[0].real(), p.u[0].imag(), p.u[1].real(), p.u[1].imag(), w, b);
  };
  std::size_t id = 0;
  for (auto& n : mesh.nodes) row(id++, n.patch, n.p, n.weight, 0);
  for (auto& b : mesh.bnodes) {
    int patch = patch_owns(0, b.p.grad) ? 0 : 1;
    row(id++, patch, b.p, b.ds, 1);
  }
}

}  // namespace cgo
