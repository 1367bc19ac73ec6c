#include "wallcross/localmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wallcross/bessel.hpp"
#include "wallcross/twistor.hpp"

namespace wallcross::localmodel {

namespace {
constexpr double kPi = M_PI;
const cplx kI{0, 1};
using hpc = hp::complex;

hpc to_hpc(cplx z) { return {z.real(), z.imag()}; }
cplx to_cplx(const hpc& z) { return {hp::to_double(z.re), hp::to_double(z.im)}; }

using Poly = std::vector<hpc>; // coefficients, lowest first

int pdeg(const Poly& p) {
  for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k)
    if (!(p[k] == hpc(0))) return k;
  return -1;
}

Poly ptrim(Poly p) {
  p.resize(pdeg(p) + 1);
  return p;
}

hpc peval(const Poly& p, const hpc& x) {
  hpc v(0);
  for (int k = static_cast<int>(p.size()) - 1; k >= 0; --k) v = v * x + p[k];
  return v;
}

// remainder of f by g over the field
Poly pmod(Poly f, const Poly& g) {
  const int dg = pdeg(g);
  for (int df = pdeg(f); df >= dg && df >= 0; df = pdeg(f)) {
    const hpc c = f[df] / g[dg];
    for (int k = 0; k <= dg; ++k) f[df - dg + k] -= c * g[k];
    f[df] = hpc(0);
  }
  return ptrim(f);
}

// resultant over a field by the Euclidean remainder sequence:
// res(f, g) = (-1)^{df dg} lc(g)^{df - dr} res(g, r) with r = f mod g
hpc resultant(Poly f, Poly g) {
  hpc acc(1);
  while (true) {
    const int df = pdeg(f), dg = pdeg(g);
    if (df < 0 || dg < 0) return hpc(0);
    if (dg == 0) {
      hpc p(1);
      for (int k = 0; k < df; ++k) p = p * g[0];
      return acc * p;
    }
    Poly r = pmod(f, g);
    const int dr = pdeg(r);
    if ((df * dg) % 2 == 1) acc = hpc(0) - acc;
    const hpc lc = g[dg];
    for (int k = 0; k < df - std::max(dr, 0); ++k) acc = acc * lc;
    f = std::move(g);
    g = std::move(r);
  }
}

} // namespace

void EllipticSurface::validate() const {
  if (std::abs(sigma0) == 0) fail(errc::config_error, "sigma0 must be nonzero");
  const cplx disc = -4.0 * a * a * a - 27.0 * b * b;
  const double scale = std::pow(std::abs(a), 3) + std::abs(b) * std::abs(b) + 1.0;
  if (std::abs(disc) < 1e-14 * scale) fail(errc::domain_error, "f is not squarefree");
}

std::array<hpc, 5> pw_coeffs(const EllipticSurface& s, const hpc& w) {
  const hpc a = to_hpc(s.a), b = to_hpc(s.b);
  // P_w(u) = 1/4 u^4 - w u^3 - (a/2) u^2 - (2b + a w) u + (a^2/4 - w b)
  return {a * a / hpc(4) - w * b, hpc(0) - (hpc(2) * b + a * w), hpc(0) - a / hpc(2),
          hpc(0) - w, hpc(0.25)};
}

hpc pw_eval(const EllipticSurface& s, const hpc& w, const hpc& u) {
  const auto c = pw_coeffs(s, w);
  hpc v(0);
  for (int k = 4; k >= 0; --k) v = v * u + c[k];
  return v;
}

SingularFiberSet singular_fibers(const EllipticSurface& s) {
  s.validate();
  // R(w) = Res_u(P_w, dP_w/du); evaluate at 7 samples and interpolate
  const int deg = 6;
  std::vector<hpc> xs, ys;
  for (int k = 0; k <= deg; ++k) {
    const hpc w(k);
    const auto c = pw_coeffs(s, w);
    Poly f(c.begin(), c.end());
    Poly df{c[1], hpc(2) * c[2], hpc(3) * c[3], hpc(4) * c[4]};
    xs.push_back(w);
    ys.push_back(resultant(f, df));
  }
  // Lagrange interpolation to coefficients
  Poly R(deg + 1, hpc(0));
  for (int k = 0; k <= deg; ++k) {
    Poly basis{hpc(1)};
    hpc denom(1);
    for (int j = 0; j <= deg; ++j) {
      if (j == k) continue;
      Poly nb(basis.size() + 1, hpc(0));
      for (size_t t = 0; t < basis.size(); ++t) {
        nb[t + 1] += basis[t];
        nb[t] -= xs[j] * basis[t];
      }
      basis = std::move(nb);
      denom = denom * (xs[k] - xs[j]);
    }
    for (size_t t = 0; t < basis.size(); ++t) R[t] += ys[k] * basis[t] / denom;
  }
  SingularFiberSet out;
  out.resultant_degree = pdeg(R);
  if (out.resultant_degree < 0) fail(errc::domain_error, "resultant identically zero");
  if (out.resultant_degree != 6)
    fail(errc::domain_error, "degenerate surface: unexpected resultant degree");
  // R = lead * S(w)^2 with S monic cubic: match coefficients downward
  const hpc lead = R[6];
  std::array<hpc, 4> S{}; // s0..s3, monic
  S[3] = hpc(1);
  S[2] = R[5] / lead / hpc(2);
  S[1] = (R[4] / lead - S[2] * S[2]) / hpc(2);
  S[0] = (R[3] / lead - hpc(2) * S[2] * S[1]) / hpc(2);
  // consistency of the remaining coefficients
  const hpc c2 = S[1] * S[1] + hpc(2) * S[2] * S[0];
  const hpc c1 = hpc(2) * S[1] * S[0];
  const hpc c0 = S[0] * S[0];
  hp::real scale = hp::abs(R[6]);
  for (auto& rc : R) scale = std::max(scale, hp::abs(rc));
  if (hp::abs(R[2] / lead - c2) + hp::abs(R[1] / lead - c1) + hp::abs(R[0] / lead - c0) >
      hp::real(1e-30) * (scale / hp::abs(lead) + 1))
    fail(errc::domain_error, "resultant is not a perfect square");
  // cubic roots: double-precision seed, then Newton polish in 50 digits
  std::array<cplx, 3> seeds;
  {
    const cplx s2 = to_cplx(S[2]), s1 = to_cplx(S[1]), s0 = to_cplx(S[0]);
    // depressed cubic w = y - s2/3
    const cplx p = s1 - s2 * s2 / 3.0;
    const cplx q = 2.0 * s2 * s2 * s2 / 27.0 - s2 * s1 / 3.0 + s0;
    const cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    cplx u3 = -q / 2.0 + disc;
    if (std::abs(u3) < 1e-30) u3 = -q / 2.0 - disc;
    const cplx u1 = std::pow(u3, 1.0 / 3.0);
    const cplx wcube = std::exp(cplx(0, 2 * kPi / 3));
    for (int k = 0; k < 3; ++k) {
      const cplx uk = u1 * std::pow(wcube, k);
      const cplx yk = std::abs(uk) > 0 ? uk - p / (3.0 * uk) : cplx(0);
      seeds[k] = yk - s2 / 3.0;
    }
  }
  for (auto& sd : seeds) {
    hpc w = to_hpc(sd);
    for (int it = 0; it < 8; ++it) {
      const hpc val = ((S[3] * w + S[2]) * w + S[1]) * w + S[0];
      const hpc der = hpc(3) * S[3] * w * w + hpc(2) * S[2] * w + S[1];
      w = w - val / der;
    }
    out.e.push_back(w);
  }
  // distinctness
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (hp::abs(out.e[i] - out.e[j]) < hp::real(1e-20))
        fail(errc::domain_error, "degenerate surface: coincident singular fibers");
  const cplx s0sq = s.sigma0 * s.sigma0;
  for (auto& e : out.e) {
    out.e_d.push_back(to_cplx(e));
    out.w0.push_back(-to_cplx(e) * s0sq / 2.0);
  }
  return out;
}

SurfacePoint q_action(const EllipticSurface& s, const SingularFiberSet& fib, int k,
                      const SurfacePoint& pt) {
  if (k < 1 || k > 3) fail(errc::config_error, "Q action index is 1..3");
  // T_k uses (e_k; e_{k+1}, e_{k+2}) cyclically
  const hpc e1 = fib.e[k - 1], e2 = fib.e[k % 3], e3 = fib.e[(k + 1) % 3];
  const hpc den = pt.u - e1;
  if (hp::abs(den) == 0) fail(errc::domain_error, "u = e_k is a pole of T_k");
  SurfacePoint out;
  out.u = (e1 * pt.u + e2 * e3 - e1 * e3 - e1 * e2) / den;
  out.w = pt.w;
  out.rho = hpc(0) - (e1 - e2) * (e1 - e3) / (den * den) * pt.rho;
  return out;
}

QActionReport q_action_verify(const EllipticSurface& s, int samples, unsigned seed) {
  const auto fib = singular_fibers(s);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  QActionReport rep;
  rep.samples = samples;
  auto rel = [](const hpc& x, const hp::real& scale) {
    return hp::to_double(hp::abs(x) / (scale + hp::real(1)));
  };
  for (int n = 0; n < samples; ++n) {
    SurfacePoint pt;
    pt.u = to_hpc(cplx(unif(rng), unif(rng)));
    pt.w = to_hpc(cplx(unif(rng), unif(rng)));
    pt.rho = hp::sqrt(pw_eval(s, pt.w, pt.u));
    for (int k = 1; k <= 3; ++k) {
      const auto im = q_action(s, fib, k, pt);
      const hpc resid = im.rho * im.rho - pw_eval(s, im.w, im.u);
      rep.max_surface_residual = std::max(
          rep.max_surface_residual, rel(resid, hp::abs(im.rho * im.rho)));
      const auto back = q_action(s, fib, k, im);
      rep.max_involution_residual =
          std::max({rep.max_involution_residual, rel(back.u - pt.u, hp::abs(pt.u)),
                    rel(back.rho - pt.rho, hp::abs(pt.rho))});
    }
    // T1 T2 = T3 up to the sign of rho (components of Q act projectively on rho)
    const auto t12 = q_action(s, fib, 1, q_action(s, fib, 2, pt));
    const auto t3 = q_action(s, fib, 3, pt);
    const double du = rel(t12.u - t3.u, hp::abs(t3.u));
    const double dr = std::min(rel(t12.rho - t3.rho, hp::abs(t3.rho)),
                               rel(t12.rho + t3.rho, hp::abs(t3.rho)));
    rep.max_composition_residual = std::max({rep.max_composition_residual, du, dr});
  }
  // double points of F_{e_1}: u = e_1 +- sqrt(f'(e_1)), rho = 0
  const hpc e1 = fib.e[0];
  const hpc fp = hpc(3) * e1 * e1 + to_hpc(s.a);
  for (int sgn : {+1, -1}) {
    SurfacePoint dp;
    dp.u = e1 + hpc(sgn) * hp::sqrt(fp);
    dp.w = e1;
    dp.rho = hpc(0);
    const auto im = q_action(s, fib, 1, dp);
    rep.max_fixed_point_residual = std::max(
        {rep.max_fixed_point_residual, rel(im.u - dp.u, hp::abs(dp.u)),
         rel(im.rho, hp::real(1))});
  }
  return rep;
}

InstantonSample omega_inst_eval(int q, std::int64_t Omega, const FiberPoint& pt,
                                cplx xi, const OVParams& host, int max_n) {
  if (q == 0) fail(errc::config_error, "q must be nonzero");
  const cplx a = pt.a();
  if (std::abs(a) == 0) fail(errc::singular_base, "a = 0");
  const double R = host.R;
  InstantonSample out;
  out.point = pt;
  out.xi = xi;
  out.form = CMat4{};
  if (Omega == 0) return out;
  cplx S0 = 0, S1 = 0;
  const double aq = std::abs(q) * std::abs(a);
  for (int n = 1; n <= max_n; ++n) {
    const double k0 = num::bessel_k0(2 * kPi * R * n * aq);
    const double k1 = num::bessel_k1(2 * kPi * R * n * aq);
    const cplx ph = std::exp(kI * static_cast<double>(n * q) * pt.theta_e);
    S0 += ph * k0;
    S1 += ph * k1;
    if (k0 < 1e-18 && k1 < 1e-18) break;
  }
  const double sgn = q > 0 ? 1.0 : -1.0;
  const cplx u = kPi * R / xi, v = kPi * R * xi;
  // D = dlog X_e^sf (unit charge) on (x1, x2, x3, theta_m)
  const std::array<cplx, 4> D{u + v, kI * (u - v), kI * 2.0 * kPi * R, 0.0};
  const cplx cda = -S0 / xi + sgn * (std::conj(a) / std::abs(a)) * S1;
  const cplx cdab = xi * S0 - sgn * (a / std::abs(a)) * S1;
  const std::array<cplx, 4> B{cda + cdab, kI * (cda - cdab), 0.0, 0.0};
  const cplx pref = -kI * static_cast<double>(q) * static_cast<double>(q) *
                    static_cast<double>(Omega) / (16 * kPi * kPi);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.form[i][j] = pref * (D[i] * B[j] - D[j] * B[i]);
  return out;
}

CompareReport local_compare(int q, std::int64_t Omega, const OVParams& base,
                            const std::vector<FiberPoint>& grid,
                            const std::vector<cplx>& xis,
                            const std::vector<double>& r_values, bool drop_negative) {
  CompareReport rep;
  for (double R : r_values) {
    OVParams p = base;
    p.R = R;
    p.spectrum = {{q, Omega}};
    double worst = 0;
    for (auto& pt : grid) {
      const auto triple = ov::kahler_triple(pt, p);
      for (cplx xi : xis) {
        const auto rhs = ov::omega_xi(triple, xi);
        auto lhs = twistor::omega_sf_closed(pt, p, xi);
        const auto ip = omega_inst_eval(q, Omega, pt, xi, p);
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) lhs[i][j] += ip.form[i][j];
        if (!drop_negative) {
          const auto im = omega_inst_eval(-q, Omega, pt, xi, p);
          for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) lhs[i][j] += im.form[i][j];
        }
        double scale = 0, diff = 0;
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) {
            scale = std::max(scale, std::abs(rhs[i][j]));
            diff = std::max(diff, std::abs(lhs[i][j] - rhs[i][j]));
          }
        worst = std::max(worst, diff / scale);
      }
    }
    rep.rows.push_back({R, worst});
    rep.overall = std::max(rep.overall, worst);
  }
  return rep;
}

OVParams mirror_preset(const OVParams& base) {
  OVParams p = base;
  p.spectrum = {{1, 2}}; // Delta = 2
  return p;
}

} // namespace wallcross::localmodel
