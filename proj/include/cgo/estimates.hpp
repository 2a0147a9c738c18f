#pragma once

#include <cstdint>
#include <functional>

#include "json.hpp"

#include "cgo/forward.hpp"
#include "cgo/report.hpp"

namespace cgo {

struct EstimateReport {
  std::string id;
  std::size_t samples = 0;
  double exponent = NAN;  // fitted; NaN when the check has no fit
  double lo = NAN, hi = NAN;
  double envelope = NAN;
  double outlier_fraction = 0.0;
  double max_outlier_fraction = 0.01;
  bool pass = false;
  bool inconclusive = false;
  nlohmann::json details = nlohmann::json::object();
  Table raw;
};
nlohmann::json to_json(const EstimateReport& r);
// sorted by id
nlohmann::json to_json(std::vector<EstimateReport> reports);

struct LineFit {
  double slope = NAN, intercept = NAN;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// |B(w,zeta)| <= gamma/9  =>  (2/9) gamma <= |B(z,zeta)| <= (16/9) gamma, |zeta - z| <= (4 sqrt2/3) sqrt gamma
EstimateReport check_gamma_neighborhoods(std::size_t samples, std::uint64_t seed);

// Up to `count` random interior nodes at distance >= margin from bV with |u| <= max_abs_u.
std::vector<CurvePoint> pick_centers(const CurveMesh& mesh, int count, double margin, double max_abs_u,
                                     std::uint64_t seed);

// Log-log slope of Area{|B(z,.)| <= delta} per center, bracket [1.35, 1.65].
EstimateReport check_area_scaling(const CurveMesh& mesh, const std::vector<CurvePoint>& centers,
                                  const std::vector<double>& deltas);

// Envelopes of N and L, difference quotients in z and w, and monotonicity in lambda.
std::vector<EstimateReport> check_kernel_decay(const CurveMesh& mesh, const std::vector<cplx>& lambdas,
                                               const std::vector<CurvePoint>& centers, std::uint64_t seed);

// Magnitude of the loop integral of f(w) G(z,w) over the shell {|B(z,w)| = eta}, median fitted
// exponent in eta per center; bracket [0.35, 0.65].
cplx smooth_density(const CurvePoint& w);
EstimateReport check_zero_limit(const CurveMesh& mesh, cplx lambda, const std::vector<CurvePoint>& centers,
                                const std::vector<double>& etas,
                                const std::function<cplx(const CurvePoint&)>& density = smooth_density);

// Some lambda0 in the list with |R| <= 1/2 for all later entries, non-increasing within 10% beyond it.
EstimateReport check_contraction(const CurveMesh& mesh, const ForwardCache& cache, const std::vector<cplx>& lambdas);

}  // namespace cgo
