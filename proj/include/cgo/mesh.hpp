#pragma once

#include <functional>
#include <iosfwd>

#include "cgo/geometry.hpp"

namespace cgo {

enum class Region { Interior = 0, Collar = 1 };

// Parameter-space cell of a graph patch: patch 0 is parametrized by u2 (unknown u1),
// patch 1 by u1 (unknown u2).
struct Cell {
  int patch = 0;
  cplx t;         // center parameter
  cplx x;         // other coordinate at the center (sheet selector)
  double size = 0.0;
};

struct Node {
  CurvePoint p;
  double weight = 0.0;
  int patch = 0;
  Region region = Region::Interior;
  int cell = -1;
  bool cut = false;
  cplx t;
  double rho = 0.0;
  double dist_b = 0.0;  // distance to the nearest boundary node
};

struct BoundaryNode {
  CurvePoint p;
  double ds = 0.0;
  cplx tb;  // unit tangent expressed in the local coordinate at the node
  int component = 0;
  double s = 0.0;  // arclength from the component start
};

struct MeshOptions {
  double h = 0.1;
  double collar = 0.1;  // radial width of the collar beyond bV
  int subsample = 8;
  double merge_fraction = 0.15;
  int knn = 8;
  bool stencils = true;
};

// Least-squares derivative weights at a point from nearby nodes.
struct Stencil {
  std::vector<int> idx;
  std::vector<cplx> d, dbar, ddbar;  // weights for d/dtau, d/dtaubar, d^2/dtau dtaubar
  std::vector<cplx> value;           // only for off-node stencils
};

struct CurveMesh {
  CurveDef curve;
  MeshOptions opts;
  double eps0 = 0.0;  // rho at the outer collar edge
  std::vector<Cell> cells;
  std::vector<Node> nodes;
  std::vector<BoundaryNode> bnodes;
  std::vector<int> component_start;
  std::vector<Stencil> stencils;   // per area node
  std::vector<Stencil> bstencils;  // per boundary node

  double h() const { return opts.h; }
  std::size_t size() const { return nodes.size(); }
  std::vector<int> interior() const;
  std::vector<int> interior_margin(double margin) const;
  double area() const;
  int components() const { return int(component_start.size()); }
};

CurveMesh build_mesh(const CurveDef& curve, const MeshOptions& opts);

// Stencil at an arbitrary curve point from the k nearest area nodes.
Stencil point_stencil(const CurveMesh& mesh, const CurvePoint& at, int k = 9);
void build_stencils(CurveMesh& mesh);

// Derivatives of a scalar nodal field at node i.
struct Deriv {
  cplx d, dbar, ddbar;
};
Deriv derivative(const CurveMesh& mesh, const VecC& f, int i);
Deriv boundary_derivative(const CurveMesh& mesh, const VecC& f, int b, cplx* value = nullptr);

// Sum of weight * coefficient over interior nodes (area-form coefficients).
cplx integrate_11(const CurveMesh& mesh, const VecC& field);

// Residue reduction of simple-pole tube integrals.
struct TubeIntegrand {
  std::function<cplx(const Vec2c&)> numerator;
  int pole_order = 1;
};
struct CurveIntegrand {
  std::function<cplx(const CurvePoint&)> value;
};
CurveIntegrand residue_reduce(const CurveDef& curve, const TubeIntegrand& f);
// sum_nodes w * loop integral over {|p(u + N nu)| = eps} of numerator/p d nu
cplx tube_integral(const CurveDef& curve, const std::vector<CurvePoint>& pts, const std::vector<double>& w,
                   const TubeIntegrand& f, double eps, int ntheta = 64);
cplx curve_integral(const std::vector<CurvePoint>& pts, const std::vector<double>& w, const CurveIntegrand& f);

// Principal-value integral with exclusion {|B(z,w)| <= eta} and Richardson extrapolation.
struct PvResult {
  cplx value;
  double error = 0.0;
  bool diverged = false;
  double ratio = 0.0;
  std::vector<cplx> partial;
  std::vector<double> etas;
};
std::vector<double> pv_schedule(double h, double eta0 = 0.1, int max_levels = 12);
PvResult pv_integrate(const std::vector<CurvePoint>& pts, const std::vector<double>& w, const CurvePoint& z,
                      const std::function<cplx(const CurvePoint&, const CurvePoint&)>& kernel, const VecC& density,
                      const std::vector<double>& etas);

// Area of {|B(z, .)| <= delta} on V, refined inside cells by adaptive subdivision
// (levels = 0 gives the plain node sum).
double region_area(const CurveMesh& mesh, const CurvePoint& z, double delta, int levels = 12);

// Node quadrature with uniform cells near any of the given points replaced by adaptively
// subdivided sub-cells (midpoint rule, `levels` halvings at most).
struct Quadrature {
  std::vector<CurvePoint> pts;
  std::vector<double> w;
  std::vector<int> node;  // owning mesh node
};
Quadrature refined_quadrature(const CurveMesh& mesh, const std::vector<Vec2c>& near, int levels = 6);

void write_mesh_csv(const CurveMesh& mesh, std::ostream& os);

// helpers shared with other modules
Vec2c patch_point(int patch, cplx t, cplx x);
bool patch_owns(int patch, const Vec2c& grad);
bool newton_sheet(const CurveDef& curve, int patch, cplx t, cplx& x);

}  // namespace cgo
