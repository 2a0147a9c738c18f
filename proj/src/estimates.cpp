#include "cgo/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace cgo {

namespace {

Vec3c random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3c v{cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng))};
  double n = std::sqrt(norm2(v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3c perturb(const Vec3c& a, double r, std::mt19937_64& rng) {
  Vec3c d = random_unit(rng);
  Vec3c v{a[0] + r * d[0], a[1] + r * d[1], a[2] + r * d[2]};
  double n = std::sqrt(norm2(v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

double dist3(const Vec3c& a, const Vec3c& b) {
  return std::sqrt(std::norm(a[0] - b[0]) + std::norm(a[1] - b[1]) + std::norm(a[2] - b[2]));
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = a * std::pow(b / a, double(k) / (n - 1));
  return v;
}

// Envelope check of |K| against |B|^-p: slope of log|K| vs log|B| must be >= -p - 0.1, and
// in the lower half of |B| no sample may exceed twice the upper-half envelope of |B|^p |K|.
EstimateReport envelope_report(const std::string& id, double p, const std::vector<double>& b,
                               const std::vector<double>& k) {
  EstimateReport r;
  r.id = id;
  r.samples = b.size();
  r.raw.columns = {"abs_B", "abs_kernel", "scaled"};
  std::vector<double> scaled(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    scaled[i] = std::pow(b[i], p) * k[i];
    r.raw.rows.push_back({b[i], k[i], scaled[i]});
  }
  LineFit f = fit_loglog(b, k);
  r.exponent = -f.slope;  // K ~ |B|^-exponent
  r.lo = -INFINITY;
  r.hi = p + 0.1;
  std::vector<double> sb = b;
  std::sort(sb.begin(), sb.end());
  double med = sb.empty() ? 0.0 : sb[sb.size() / 2];
  double env = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] >= med) env = std::max(env, scaled[i]);
  std::size_t out = 0, low = 0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] < med) {
      ++low;
      if (scaled[i] > 2.0 * env) ++out;
    }
  r.envelope = *std::max_element(scaled.begin(), scaled.end());
  r.outlier_fraction = low ? double(out) / low : 0.0;
  r.details["upper_half_envelope"] = env;
  if (!b.empty()) r.details["abs_B_range"] = {sb.front(), sb.back()};
  r.pass = std::isfinite(r.envelope) && r.exponent <= r.hi && r.outlier_fraction <= r.max_outlier_fraction;
  return r;
}

struct Pair {
  CurvePoint z, w;
};

}  // namespace

std::vector<CurvePoint> pick_centers(const CurveMesh& mesh, int count, double margin, double max_abs_u,
                                     std::uint64_t seed) {
  std::vector<int> pool;
  for (int i : mesh.interior_margin(margin))
    if (std::sqrt(norm2(mesh.nodes[i].p.u)) <= max_abs_u) pool.push_back(i);
  std::vector<CurvePoint> out;
  if (pool.empty()) return out;
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  for (int k = 0; k < count && k < int(pool.size()); ++k) out.push_back(mesh.nodes[pool[k]].p);
  return out;
}

cplx smooth_density(const CurvePoint& w) { return 1.0 + 0.5 * w.u[0] + 0.25 * std::conj(w.u[1]); }

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json j;
  j["estimate_id"] = r.id;
  j["samples"] = r.samples;
  j["exponent"] = r.exponent;
  j["bracket"] = {r.lo, r.hi};
  j["envelope"] = r.envelope;
  j["outlier_fraction"] = r.outlier_fraction;
  j["pass"] = r.pass;
  j["inconclusive"] = r.inconclusive;
  j["details"] = r.details;
  return j;
}

nlohmann::json to_json(std::vector<EstimateReport> reports) {
  std::stable_sort(reports.begin(), reports.end(), [](auto& a, auto& b) { return a.id < b.id; });
  auto a = nlohmann::json::array();
  for (auto& r : reports) a.push_back(to_json(r));
  return a;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  LineFit f;
  if (n < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double d = n * sxx - sx * sx;
  if (d == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / d;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  return fit_line(lx, ly);
}

EstimateReport check_gamma_neighborhoods(std::size_t samples, std::uint64_t seed) {
  EstimateReport r;
  r.id = "gamma_neighborhoods";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::size_t viol = 0, drawn = 0;
  double lo_ratio = INFINITY, hi_ratio = 0.0, dist_ratio = 0.0;
  r.raw.columns = {"gamma", "abs_B_z_zeta_over_gamma", "dist_over_sqrt_gamma"};
  while (r.samples < samples) {
    ++drawn;
    Vec3c z = random_unit(rng);
    Vec3c w = perturb(z, std::pow(10.0, -3.0 * U(rng)), rng);
    double gamma = std::abs(B(w, z));
    if (gamma == 0.0) continue;
    Vec3c zeta = perturb(w, 0.2 * std::sqrt(gamma) * U(rng), rng);
    if (std::abs(B(w, zeta)) > gamma / 9.0) continue;
    ++r.samples;
    double bz = std::abs(B(z, zeta)) / gamma;
    double dz = dist3(zeta, z) / std::sqrt(gamma);
    lo_ratio = std::min(lo_ratio, bz);
    hi_ratio = std::max(hi_ratio, bz);
    dist_ratio = std::max(dist_ratio, dz);
    if (bz < 2.0 / 9.0 || bz > 16.0 / 9.0 || dz > 4.0 * std::sqrt(2.0) / 3.0) ++viol;
    if (r.samples <= 2000) r.raw.rows.push_back({gamma, bz, dz});
  }
  // degenerate zeta = w, and the near-extremal zeta on the shell |B(w,zeta)| = gamma/9 along the
  // real geodesic from w toward z
  Vec3c z = random_unit(rng), v = random_unit(rng);
  cplx zv = v[0] * std::conj(z[0]) + v[1] * std::conj(z[1]) + v[2] * std::conj(z[2]);
  for (int k = 0; k < 3; ++k) v[k] -= zv * z[k];
  double vn = std::sqrt(norm2(v));
  for (int k = 0; k < 3; ++k) v[k] /= vn;
  auto geo = [&](double t) {
    return Vec3c{std::cos(t) * z[0] + std::sin(t) * v[0], std::cos(t) * z[1] + std::sin(t) * v[1],
                 std::cos(t) * z[2] + std::sin(t) * v[2]};
  };
  const double theta = 0.02;
  Vec3c w = geo(theta);
  double gamma = std::abs(B(w, z));
  double deg = std::abs(B(z, w)) / gamma;
  double lo = 0.0, hi = theta;  // parameter t of zeta = geo(t); |B(w, geo(t))| decreases in t
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    (std::abs(B(w, geo(mid))) > gamma / 9.0 ? lo : hi) = mid;
  }
  double best = std::abs(B(z, geo(hi))) / gamma;
  r.outlier_fraction = double(viol) / double(std::max<std::size_t>(1, r.samples));
  r.max_outlier_fraction = 0.0;
  r.envelope = dist_ratio;
  r.details = {{"violations", viol},
               {"drawn", drawn},
               {"min_ratio", lo_ratio},
               {"max_ratio", hi_ratio},
               {"max_dist_ratio", dist_ratio},
               {"degenerate_ratio", deg},
               {"shell_min_ratio", best}};
  r.pass = viol == 0 && deg >= 2.0 / 9.0 && deg <= 16.0 / 9.0;
  return r;
}

EstimateReport check_area_scaling(const CurveMesh& mesh, const std::vector<CurvePoint>& centers,
                                  const std::vector<double>& deltas) {
  EstimateReport r;
  r.id = "area_scaling";
  r.lo = 1.35;
  r.hi = 1.65;
  r.raw.columns = {"center", "delta", "area"};
  // the region has diameter ~ sqrt(delta); it must span several cells of the finest subdivision
  const int levels = 12;
  const double floor = std::pow(8.0 * mesh.h() * std::pow(0.5, levels), 2);
  std::vector<double> ds;
  for (double d : deltas)
    if (d >= floor) ds.push_back(d);
  if (ds.size() < 3 || ds.back() / ds.front() < 10.0) {
    r.inconclusive = true;
    r.details["reason"] = "delta range below the mesh floor";
    return r;
  }
  auto slopes = nlohmann::json::array();
  bool ok = !centers.empty();
  double worst = NAN, dev = -1.0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    std::vector<double> as;
    for (double d : ds) {
      as.push_back(region_area(mesh, centers[c], d, levels));
      r.raw.rows.push_back({double(c), d, as.back()});
      ++r.samples;
    }
    double s = fit_loglog(ds, as).slope;
    slopes.push_back(s);
    if (!(s >= r.lo && s <= r.hi)) ok = false;
    if (!(std::abs(s - 1.5) <= dev)) {
      dev = std::abs(s - 1.5);
      worst = s;
    }
  }
  r.exponent = worst;
  r.details["slopes"] = slopes;
  r.details["deltas"] = ds;
  r.details["delta_floor"] = floor;
  r.pass = ok;
  return r;
}

std::vector<EstimateReport> check_kernel_decay(const CurveMesh& mesh, const std::vector<cplx>& lambdas,
                                               const std::vector<CurvePoint>& centers, std::uint64_t seed) {
  const CurveDef& c = mesh.curve;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 2.0 * PI);
  // pairs with |B| spread over [1e-3, 1]
  std::vector<Pair> pairs;
  for (const auto& z : centers)
    for (double rad : logspace(0.03, 1.5, 24))
      for (int k = 0; k < 4; ++k) {
        try {
          CurvePoint w = point_at_tau(c, z, std::polar(rad, U(rng)));
          double b = std::abs(B(z.z, w.z));
          if (b >= 1e-3 && b <= 1.0) pairs.push_back({z, w});
        } catch (const Error&) {
        }
      }
  std::vector<EstimateReport> out;
  std::vector<double> envN, envL;
  for (cplx lam : lambdas) {
    std::vector<double> bs, kn, kl;
    for (auto& p : pairs) {
      bs.push_back(std::abs(B(p.z.z, p.w.z)));
      kn.push_back(kernel_N(mesh, lam, p.z, p.w).norm());
      kl.push_back(kernel_L(mesh, lam, p.z, p.w).norm());
    }
    auto rn = envelope_report("kernel_N_envelope", 1.5, bs, kn);
    auto rl = envelope_report("kernel_L_envelope", 2.0, bs, kl);
    envN.push_back(rn.envelope);
    envL.push_back(rl.envelope);
    if (lam == lambdas.front()) {
      rn.details["lambda"] = {lam.real(), lam.imag()};
      rl.details["lambda"] = {lam.real(), lam.imag()};
      out.push_back(rn);
      out.push_back(rl);
    }
  }
  // difference quotients at gamma > 9 delta^2
  const cplx lam = lambdas.empty() ? cplx(20.0) : lambdas.front();
  auto deltas = logspace(1e-4, 1e-2, 7);
  struct Diff {
    std::string id;
    bool in_w;
    bool is_L;
    double lo;
  };
  for (const Diff& d : {Diff{"kernel_N_dz", false, false, 0.8}, Diff{"kernel_L_dz", false, true, 0.8},
                        Diff{"kernel_N_dw", true, false, 0.7}, Diff{"kernel_L_dw", true, true, 0.8}}) {
    EstimateReport r;
    r.id = d.id;
    r.lo = d.lo;
    r.hi = INFINITY;
    r.raw.columns = {"pair", "delta", "difference"};
    std::vector<double> fits;
    std::size_t used = 0;
    for (std::size_t pi = 0; pi < pairs.size() && used < 12; pi += std::max<std::size_t>(1, pairs.size() / 24)) {
      const Pair& p = pairs[pi];
      double gamma = std::abs(B(p.z.z, p.w.z));
      if (gamma < 0.02) continue;
      double ang = U(rng);
      auto Kc = [&](const CurvePoint& z, const CurvePoint& w) {
        return d.is_L ? kernel_L(mesh, lam, z, w) : kernel_N(mesh, lam, z, w);
      };
      std::vector<double> xs, ys;
      for (double del : deltas) {
        if (!(gamma > 9.0 * del * del)) continue;
        FormPair a, b;
        if (d.in_w) {
          CurvePoint w2 = point_at_tau(c, p.w, std::polar(del, ang));
          a = Kc(p.z, p.w);
          b = Kc(p.z, w2);
        } else {
          CurvePoint z2 = point_at_tau(c, p.z, std::polar(del, ang));
          a = Kc(p.z, p.w);
          b = Kc(z2, p.w);
        }
        double diff = std::sqrt(std::norm(a.g1 - b.g1) + std::norm(a.g2 - b.g2));
        xs.push_back(del);
        ys.push_back(diff);
        r.raw.rows.push_back({double(used), del, diff});
        ++r.samples;
      }
      if (xs.size() >= 3) {
        fits.push_back(fit_loglog(xs, ys).slope);
        ++used;
      }
    }
    if (fits.empty()) {
      r.inconclusive = true;
    } else {
      r.exponent = *std::min_element(fits.begin(), fits.end());
      r.details["exponents"] = fits;
      r.pass = r.exponent >= r.lo;
    }
    out.push_back(r);
  }
  // envelopes against lambda
  EstimateReport m;
  m.id = "kernel_lambda_monotone";
  m.samples = lambdas.size();
  m.raw.columns = {"abs_lambda", "envelope_N", "envelope_L"};
  bool mono = true;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    m.raw.rows.push_back({std::abs(lambdas[k]), envN[k], envL[k]});
    if (k > 0 && (envN[k] > 1.1 * envN[k - 1] || envL[k] > 1.1 * envL[k - 1])) mono = false;
  }
  m.details["envelope_N"] = envN;
  m.details["envelope_L"] = envL;
  m.pass = mono && !lambdas.empty();
  out.push_back(m);
  return out;
}

EstimateReport check_zero_limit(const CurveMesh& mesh, cplx lambda, const std::vector<CurvePoint>& centers,
                                const std::vector<double>& etas,
                                const std::function<cplx(const CurvePoint&)>& density) {
  EstimateReport r;
  r.id = "zero_limit";
  r.lo = 0.35;
  r.hi = 0.65;
  r.raw.columns = {"center", "eta", "shell_integral"};
  const CurveDef& c = mesh.curve;
  const int nth = 48;
  std::vector<double> fits, ratios;
  double largest = 0.0;
  for (std::size_t ci = 0; ci < centers.size(); ++ci) {
    const CurvePoint& z = centers[ci];
    std::vector<double> xs, ys;
    for (double eta : etas) {
      std::vector<CurvePoint> shell;
      try {
        for (int k = 0; k < nth; ++k) {
          cplx dir = std::polar(1.0, 2.0 * PI * k / nth);
          double lo = 0.0, hi = 3.0 * std::sqrt(eta);
          if (std::abs(B(z.z, point_at_tau(c, z, hi * dir).z)) < eta) break;
          for (int it = 0; it < 50; ++it) {
            double mid = 0.5 * (lo + hi);
            (std::abs(B(z.z, point_at_tau(c, z, mid * dir).z)) < eta ? lo : hi) = mid;
          }
          shell.push_back(point_at_tau(c, z, hi * dir));
        }
      } catch (const Error&) {
        shell.clear();
      }
      if (shell.size() != std::size_t(nth)) continue;
      // closed-loop integral of the (1,0)-form f g1 dw1 + f g2 dw2
      cplx acc = 0.0;
      for (int k = 0; k < nth; ++k) {
        const CurvePoint& w = shell[k];
        const CurvePoint& w2 = shell[(k + 1) % nth];
        const CurvePoint& w0 = shell[(k + nth - 1) % nth];
        GValue g = kernel_G(mesh, lambda, z, w);
        cplx f = density(w);
        acc += f * 0.5 * (g.g.g1 * (w2.u[0] - w0.u[0]) + g.g.g2 * (w2.u[1] - w0.u[1]));
      }
      xs.push_back(eta);
      ys.push_back(std::abs(acc));
      largest = std::max(largest, std::abs(acc));
      r.raw.rows.push_back({double(ci), eta, std::abs(acc)});
      ++r.samples;
    }
    if (xs.size() >= 3) fits.push_back(fit_loglog(xs, ys).slope);
    if (xs.size() >= 2) ratios.push_back(ys.back() / ys.front());
  }
  r.envelope = largest;
  if (largest == 0.0 && r.samples > 0) {
    r.details["note"] = "integral vanishes identically";
    r.exponent = INFINITY;
    r.pass = true;
    return r;
  }
  if (fits.empty()) {
    r.inconclusive = true;
    return r;
  }
  std::vector<double> sorted = fits;
  std::sort(sorted.begin(), sorted.end());
  r.exponent = sorted[sorted.size() / 2];
  r.details["exponents"] = fits;
  r.details["end_ratio"] = ratios;
  r.details["decays_at_least_as_fast_as_bound"] = r.exponent >= r.lo;
  r.pass = r.exponent >= r.lo && r.exponent <= r.hi;
  return r;
}

EstimateReport check_contraction(const CurveMesh& mesh, const ForwardCache& cache, const std::vector<cplx>& lambdas) {
  EstimateReport r;
  r.id = "contraction";
  r.raw.columns = {"abs_lambda", "norm_R"};
  std::vector<double> al, nr;
  for (cplx lam : lambdas) {
    double n = norm_estimate(assemble_R(mesh, cache, lam));
    al.push_back(std::abs(lam));
    nr.push_back(n);
    r.raw.rows.push_back({std::abs(lam), n});
  }
  r.samples = lambdas.size();
  // the smallest lambda0 such that every later norm is <= 1/2 and the sequence beyond is non-increasing within 10%
  int l0 = -1;
  for (int k = int(nr.size()) - 1; k >= 0; --k) {
    bool ok = nr[k] <= 0.5;
    if (ok && k + 1 < int(nr.size())) ok = l0 == k + 1 && nr[k + 1] <= 1.1 * nr[k];
    if (ok) l0 = k;
    else break;
  }
  r.exponent = fit_loglog(al, nr).slope;
  r.envelope = nr.empty() ? NAN : *std::max_element(nr.begin(), nr.end());
  r.details["norms"] = nr;
  r.details["abs_lambda"] = al;
  if (l0 >= 0) r.details["lambda0"] = al[l0];
  r.pass = l0 >= 0;
  return r;
}

}  // namespace cgo
