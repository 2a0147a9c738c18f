#pragma once

#include <cstdint>

#include "json.hpp"

#include "cgo/forward.hpp"

namespace cgo {

// Values on the boundary nodes of a mesh, with arclength data.
struct BoundaryTrace {
  VecC values;
  VecR ds, s;
  std::vector<int> component;

  // sum over one component of value * ds
  cplx integral(int comp) const;
};

// Restriction of a nodal field to bV by the boundary stencils.
BoundaryTrace boundary_trace(const CurveMesh& mesh, const VecC& field);
// Integral of the tangential part of a (1,0)+(0,1) pair (a dtau + b dtaubar) over one component.
cplx boundary_form_integral(const CurveMesh& mesh, const VecC& a, const VecC& b, int comp);

// One measured pair (df, dbar f) on bV for a fixed lambda, as coefficients of dtau, dtaubar.
struct ChiData {
  cplx lambda;
  VecC df, dbarf;
  VecR s, ds;
  std::vector<int> component;
  std::vector<int> basepoints;  // one boundary node per component
  double noise = 0.0;
  std::uint64_t noise_seed = 0;
};

ChiData synth_chi(const CurveMesh& mesh, const CgoSolution& sol);
// Additive complex gaussian noise, relative to the rms of each trace.
void add_noise(ChiData& chi, double relative, std::uint64_t seed);

// Per component, the boundary node minimizing Re phi.
std::vector<int> choose_basepoints(const CurveMesh& mesh, cplx lambda);

struct TMapResult {
  VecC h_b;
  std::vector<double> loop_residual;  // per component: mismatch of the two arcs where Re phi peaks
};
// h on bV from g = dh on bV and the measured dbar f, integrating along each component
// from its basepoint where mu = 1, along both arcs up to the maximum of Re phi.
TMapResult t_map(const CurveMesh& mesh, const ChiData& chi, const VecC& g_b, double loop_tol = 0.05);

nlohmann::json to_json(const ChiData& chi);
ChiData chi_from_json(const nlohmann::json& j);

}  // namespace cgo
