#include "cgo/kernels.hpp"

#include <cmath>

namespace cgo {

std::string kernel_name(KernelId id) {
  switch (id) {
    case KernelId::K: return "K";
    case KernelId::R: return "R";
    case KernelId::G: return "G";
    case KernelId::N: return "N";
    case KernelId::L: return "L";
    case KernelId::P: return "P";
    case KernelId::S: return "S";
    case KernelId::I: return "I";
    case KernelId::M: return "M";
    case KernelId::Cauchy: return "cauchy";
  }
  return "?";
}

cplx det3(const Vec3c& a, const Vec3c& b, const Vec3c& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) +
         c[0] * (a[1] * b[2] - a[2] * b[1]);
}

KernelValue kernel_K(const CurveDef& curve, const Vec3c& w, const Vec3c& z, double pv_threshold) {
  BPair bp = b_pairing(w, z);
  if (std::abs(bp.B) < 1e-14) throw SingularPair("B vanishes at the pair");
  Vec3c zc = conj(z), wc = conj(w);
  Vec3c c1{zc[0] / bp.Bstar, zc[1] / bp.Bstar, zc[2] / bp.Bstar};
  Vec3c c2{wc[0] / bp.B, wc[1] / bp.B, wc[2] / bp.B};
  Vec3c q = q_functions(curve.P, w, z);
  KernelValue kv{det3(c1, c2, q), KernelId::K, std::abs(bp.B) < pv_threshold};
  return kv;
}

double simplex_weight() { return 1.0 / 6.0; }

double cutoff(const CutoffSpec& spec, double s) {
  if (s <= spec.inner) return 1.0;
  if (s >= spec.outer) return 0.0;
  double x = (s - spec.inner) / (spec.outer - spec.inner);
  double sm = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
  return 1.0 - sm;
}

namespace {

Vec3c scaled(const Vec3c& v, cplx s) { return {v[0] * s, v[1] * s, v[2] * s}; }

// Phi(x) = det[conj z, conj w, Q(x w, z)], a polynomial of degree d-1 in x.
cplx fiber_numerator(const CurveDef& curve, const Vec3c& w, const Vec3c& z, cplx x) {
  return det3(conj(z), conj(w), q_functions(curve.P, scaled(w, x), z));
}

}  // namespace

cplx fiber_residue(const CurveDef& curve, const Vec3c& w, const Vec3c& z, int p) {
  cplx s = hdot(w, z);
  double s2 = std::norm(s);
  if (std::abs(1.0 - s2) < 1e-300) throw SingularPair("coincident projective points");
  cplx res = std::pow(s, p) * fiber_numerator(curve, w, z, s) / (s2 - 1.0);
  if (p < 0) {
    // residue at x = 0: coefficient of x^{-p-1} in Phi(x)/((x conj s - 1)(x - s))
    int k = -p;
    int d = curve.d();
    std::vector<cplx> phi(d, 0.0);
    // Taylor coefficients of Phi by sampling on a circle (exact for degree d-1)
    const int M = d;
    for (int j = 0; j < M; ++j) {
      cplx x = std::polar(1.0, 2.0 * PI * j / M);
      cplx v = fiber_numerator(curve, w, z, x);
      for (int c = 0; c < d; ++c) phi[c] += v * std::polar(1.0, -2.0 * PI * j * c / M) / double(M);
    }
    // 1/((x sbar - 1)(x - s)) = (1/s) sum_{i,j} sbar^i s^{-j} x^{i+j}
    cplx sb = std::conj(s);
    cplx acc = 0.0;
    for (int c = 0; c < d && c <= k - 1; ++c) {
      int r = k - 1 - c;
      cplx g = 0.0;
      for (int i = 0; i <= r; ++i) g += std::pow(sb, i) * std::pow(s, -(r - i));
      acc += phi[c] * g / s;
    }
    res += acc;
  }
  return res;
}

cplx fiber_quadrature(const CurveDef& curve, const Vec3c& w, const Vec3c& z, int p, int samples) {
  cplx acc = 0.0;
  for (int j = 0; j < samples; ++j) {
    cplx x = std::polar(1.0, 2.0 * PI * j / samples);
    KernelValue kv = kernel_K(curve, scaled(w, x), z);
    // (1/2 pi i) * x^p K * dx, dx = i x dtheta
    acc += std::pow(x, p) * kv.value * x;
  }
  return acc / double(samples);
}

cplx kernel_core(const CurveDef& curve, const CurvePoint& w, const CurvePoint& z) {
  const int d = curve.d();
  const int ell = curve.weight();
  const int m = ell + 3 - d;
  cplx s = hdot(w.z, z.z);
  double s2 = std::norm(s);
  double gap = 1.0 - s2;
  if (gap <= 0.0) throw SingularPair("coincident curve points");
  cplx num = det3(conj(z.z), conj(w.z), q_functions(curve.P, scaled(w.z, s), z.z));
  cplx r = std::pow(s, m - 1) * num / (s2 - 1.0);
  return std::pow(w.n, d - ell - 3) * std::pow(z.n, ell) * r;
}

cplx dbar_w_core(const CurveDef& curve, const CurvePoint& w, const CurvePoint& z, double eps) {
  return dbar_along(curve, w, [&](const CurvePoint& x) { return kernel_core(curve, x, z); }, eps);
}

DetIdentityResidual determinant_identities(const CurveDef& curve, const Vec3c& z, const Vec3c& zeta,
                                           const Vec3c& w, const Vec3c& v, const Vec3c& vw) {
  // z-side: columns built at (conj zeta, conj z)
  Vec3c zc = conj(z), zetac = conj(zeta);
  cplx Bs = -1.0 + hdot(zc, zetac);  // B*(conj zeta, conj z) = -1 + sum z_j conj(zeta_j)
  cplx Bb = 1.0 - hdot(zetac, zc);   // B(conj zeta, conj z) = 1 - sum zeta_j conj(z_j)
  cplx dBs = v[0] * zetac[0] + v[1] * zetac[1] + v[2] * zetac[2];
  Vec3c a, b, c, e;
  cplx Pz = curve.P.eval(zetac);
  Vec3c q = q_functions(curve.P, zetac, zc);
  for (int j = 0; j < 3; ++j) {
    a[j] = v[j] / Bs - z[j] * dBs / (Bs * Bs);
    b[j] = z[j] / Bs;
    c[j] = zeta[j] / Bb;
    e[j] = q[j] / Pz;
  }
  cplx t1 = det3(a, c, e), t2 = det3(a, b, e), t3 = det3(a, b, c);
  double one = std::abs(t1 - (t2 - t3)) / (1.0 + std::abs(t1) + std::abs(t2) + std::abs(t3));

  // w-side: columns at (w, zeta) with zeta on the curve
  BPair bp = b_pairing(w, zeta);
  Vec3c wc = conj(w), vwc = conj(vw);
  cplx dB = -(vwc[0] * zeta[0] + vwc[1] * zeta[1] + vwc[2] * zeta[2]);
  Vec3c A, Bc, C, Qw;
  Vec3c qw = q_functions(curve.P, w, zeta);
  for (int j = 0; j < 3; ++j) {
    A[j] = zetac[j] / bp.Bstar;
    Bc[j] = vwc[j] / bp.B - wc[j] * dB / (bp.B * bp.B);
    C[j] = wc[j] / bp.B;
    Qw[j] = qw[j];
  }
  cplx Pw = curve.P.eval(w);
  cplx s1 = det3(Bc, C, Qw), s2 = det3(A, Bc, Qw), s3 = Pw * det3(A, Bc, C);
  double two = std::abs(s1 + s2 - s3) / (1.0 + std::abs(s1) + std::abs(s2) + std::abs(s3));
  return {one, two};
}

cplx det_product_D(const CurveDef& curve, const Vec3c& z, const Vec3c& w, const Vec3c& zeta, const Vec3c& dz,
                   const Vec3c& dw) {
  cplx Bw = 1.0 - hdot(w, zeta);
  Vec3c wc = conj(w), dwc = conj(dw);
  Vec3c qw = q_functions(curve.P, w, zeta);
  Vec3c c1{wc[0] / Bw, wc[1] / Bw, wc[2] / Bw}, c2{dwc[0] / Bw, dwc[1] / Bw, dwc[2] / Bw};
  cplx first = det3(c1, c2, qw);
  Vec3c zetac = conj(zeta), zc = conj(z);
  cplx Bs = -1.0 + hdot(zc, zetac);
  Vec3c qz = q_functions(curve.P, zetac, zc);
  Vec3c d1{dz[0] / Bs, dz[1] / Bs, dz[2] / Bs}, d2{z[0] / Bs, z[1] / Bs, z[2] / Bs};
  return first * det3(d1, d2, qz);
}

}  // namespace cgo
