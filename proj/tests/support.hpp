#pragma once

#include <map>

#include "cgo/forward.hpp"

namespace cgo::test {

inline CurveDef scenario_curve() {
  CurveDef c;
  c.P = Polynomial::fermat(3);
  c.chart.center = {-1.0, 0.0};
  c.chart.radius = 0.5;
  return c;
}

// Meshes are cached per h; tests must not modify them.
inline const CurveMesh& scenario_mesh(double h) {
  static std::map<double, CurveMesh> cache;
  auto it = cache.find(h);
  if (it != cache.end()) return it->second;
  MeshOptions o;
  o.h = h;
  o.collar = std::max(0.1, 3.0 * h);
  return cache.emplace(h, build_mesh(scenario_curve(), o)).first->second;
}

inline const cplx kDiag = cplx(1.0, 1.0) / std::sqrt(2.0);

inline VecC bump_q(const CurveMesh& m, double amplitude = 0.3) {
  SigmaSpec spec;
  spec.preset = "bump";
  spec.bumps = default_bumps(m.curve, "bump");
  for (auto& b : spec.bumps) b.amplitude = amplitude;
  return q_from_model(m, SigmaModel(m.curve, spec));
}

}  // namespace cgo::test
