#include "wallcross/ov.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "wallcross/bessel.hpp"
#include "wallcross/quadrature.hpp"

namespace wallcross::ov {

namespace {
constexpr double kPi = M_PI;
constexpr double kTailEps = 1e-16;

cplx log_ratio(cplx z, cplx lambda) { return z - std::log(lambda); }

void check_disk(const FiberPoint& pt, const OVParams& p) {
  const double r = std::exp(pt.z.real());
  if (!(r > 0)) fail(errc::singular_base, "a = 0 is singular");
  if (r >= std::abs(p.lambda)) fail(errc::domain_error, "|a| >= |lambda|");
}

// active (q, Omega_q) with q > 0
std::vector<std::pair<int, std::int64_t>> active(const OVParams& p) {
  std::vector<std::pair<int, std::int64_t>> qs;
  for (auto& [q, om] : p.spectrum)
    if (om != 0) qs.emplace_back(q, om);
  return qs;
}

void wedge_into(Mat4& out, const std::array<double, 4>& u, const std::array<double, 4>& v) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] += u[i] * v[j] - u[j] * v[i];
}

Mat4 zero4() {
  Mat4 m{};
  return m;
}
} // namespace

std::int64_t OVParams::Delta() const {
  std::int64_t d = 0;
  for (auto& [q, om] : spectrum) {
    if (q <= 0) fail(errc::config_error, "spectrum is stored on q > 0");
    d += static_cast<std::int64_t>(q) * q * om;
  }
  return d;
}

void OVParams::validate() const {
  if (std::abs(lambda) == 0) fail(errc::config_error, "lambda must be nonzero");
  if (!(R > 0)) fail(errc::config_error, "R must be positive");
  (void)Delta();
  if (Delta() == 0 && !tau0)
    fail(errc::config_error, "Delta = 0 requires tau0");
  if (tau0 && tau0->imag() <= 0) fail(errc::config_error, "tau0 needs Im > 0");
}

FiberPoint t_hat(const FiberPoint& pt, std::int64_t Delta, int power) {
  FiberPoint r = pt;
  r.z += cplx(0, 2 * kPi * power);
  r.theta_m += power * (Delta * pt.theta_e + kPi * Delta);
  return r;
}

CentralCharges central_charges_z(cplx z, const OVParams& p) {
  FiberPoint pt;
  pt.z = z;
  return central_charges(pt, p);
}

CentralCharges central_charges(const FiberPoint& pt, const OVParams& p) {
  check_disk(pt, p);
  const cplx a = pt.a();
  const cplx lr = log_ratio(pt.z, p.lambda);
  CentralCharges c;
  c.Ze = a;
  const auto D = static_cast<double>(p.Delta());
  if (p.Delta() != 0) {
    c.Zm = D / (2.0 * kPi * cplx(0, 1)) * (a * lr - a);
    c.tau = D / (2.0 * kPi * cplx(0, 1)) * lr;
  } else {
    c.Zm = *p.tau0 * a;
    c.tau = *p.tau0;
  }
  return c;
}

namespace {

// corrected Poisson coefficient: U_q^inst = (R/pi) sum_{n>=1} cos(n q th_e) K0(2 pi R n q |a|)
double uq_inst(const OVParams& p, int q, double absa, double theta_e) {
  const double R = p.R;
  double s = 0;
  for (int n = 1; n < 100000; ++n) {
    const double k0 = num::bessel_k0(2 * kPi * R * n * q * absa);
    s += std::cos(n * q * theta_e) * k0;
    if (k0 < kTailEps) break;
  }
  return R / kPi * s;
}

// lattice sum with kappa_n = R/|n| in +-n pairs plus the analytic tail
double uq_lattice(const OVParams& p, int q, double absa, double theta_e, long N,
                  double kappa0) {
  const double R = p.R;
  const double beta = q * theta_e / (2 * kPi);
  const double M = R * q * absa;
  double s = 1.0 / std::sqrt(M * M + beta * beta) - kappa0 / R;
  for (long n = 1; n <= N; ++n) {
    s += 1.0 / std::sqrt(M * M + (beta + n) * (beta + n)) +
         1.0 / std::sqrt(M * M + (beta - n) * (beta - n)) - 2.0 / n;
  }
  const double Nd = static_cast<double>(N);
  s += (2 * beta * beta - M * M) * (0.5 / (Nd * Nd) - 0.5 / (Nd * Nd * Nd));
  return R / (4 * kPi) * s;
}

void check_off_singular(const FiberPoint& pt, const OVParams& p) {
  const double absa = std::abs(pt.a());
  if (absa > 1e-12 * std::abs(p.lambda)) return;
  for (auto& [q, om] : active(p))
    for (int n = 0; n < q; ++n) {
      double d = std::remainder(pt.theta_e - 2 * kPi * n / q, 2 * kPi);
      if (std::abs(d) < 1e-9) fail(errc::singular_point, "point lies on S_Omega");
    }
}

} // namespace

double potential_u(const FiberPoint& pt, const OVParams& p, PotentialMode mode,
                   const LatticeCutoffs& cut) {
  if (p.Delta() <= 0 && mode != PotentialMode::sf)
    fail(errc::config_error, "positive Delta required");
  if (mode == PotentialMode::sf) {
    check_disk(pt, p);
    return p.R * central_charges(pt, p).tau.imag();
  }
  check_off_singular(pt, p);
  const double absa = std::abs(pt.a());
  if (mode == PotentialMode::poisson) {
    check_disk(pt, p);
    double u = p.R * central_charges(pt, p).tau.imag();
    for (auto& [q, om] : active(p)) u += q * q * om * uq_inst(p, q, absa, pt.theta_e);
    return u;
  }
  // lattice
  check_disk(pt, p);
  double u = 0;
  for (auto& [q, om] : active(p)) {
    double k0 = 0;
    if (auto it = cut.kappa0.find(q); it != cut.kappa0.end()) k0 = it->second;
    u += q * q * om * uq_lattice(p, q, absa, pt.theta_e, cut.N, k0);
  }
  return u;
}

std::map<int, double> lattice_calibrate(const OVParams& p, long N, const FiberPoint& ref) {
  std::map<int, double> kap;
  const double absa = std::abs(ref.a());
  const double usf = p.R * central_charges(ref, p).tau.imag();
  const auto D = static_cast<double>(p.Delta());
  for (auto& [q, om] : active(p)) {
    // per-q split of U^sf: U_q^sf = (R/2pi) log|lambda/a| = usf / Delta
    const double target = usf / D + uq_inst(p, q, absa, ref.theta_e);
    const double unc = uq_lattice(p, q, absa, ref.theta_e, N, 0.0);
    // unc - (R/4pi)(kappa0/R) == target
    kap[q] = (unc - target) * 4 * kPi;
  }
  return kap;
}

GHConnection connection_a_gh(const FiberPoint& pt, const OVParams& p) {
  check_disk(pt, p);
  check_off_singular(pt, p);
  if (p.Delta() <= 0) fail(errc::config_error, "positive Delta required");
  const cplx a = pt.a();
  const double absa = std::abs(a);
  const double R = p.R;
  GHConnection A;
  A.A_thetae = -central_charges(pt, p).tau.real() / (2 * kPi);
  cplx s1 = 0; // A^inst = s1 (da/a - dabar/abar), Eq. 98 coefficient
  for (auto& [q, om] : active(p)) {
    double sum = 0;
    for (int n = 1; n < 100000; ++n) {
      const double k1 = num::bessel_k1(2 * kPi * R * n * q * absa);
      sum += std::sin(n * q * pt.theta_e) * k1;
      if (k1 < kTailEps) break;
    }
    s1 += cplx(0, 1) * (-(R / (2 * kPi))) * absa * sum * static_cast<double>(q * q * om);
  }
  A.A_a = s1 / a;
  A.A_abar = -s1 / std::conj(a);
  return A;
}

std::array<double, 3> GHConnection::x_components(double R) const {
  // da = dx1 + i dx2, dtheta_e = 2 pi R dx3; components come out real
  const cplx A1 = A_a + A_abar;
  const cplx A2 = cplx(0, 1) * (A_a - A_abar);
  return {A1.real(), A2.real(), 2 * kPi * R * A_thetae};
}

Mat4 metric_assemble(const FiberPoint& pt, const OVParams& p, MetricMode mode) {
  const double R = p.R;
  Mat4 g{};
  if (mode == MetricMode::semiflat || mode == MetricMode::dual_semiflat) {
    const cplx tau = central_charges(pt, p).tau;
    const double it = tau.imag(), rt = tau.real();
    if (!(it > 0)) fail(errc::not_positive_definite, "Im tau <= 0");
    if (mode == MetricMode::semiflat) {
      // R Im tau |da|^2 + (1/4pi^2 R Im tau)|dtheta_m - tau dtheta_e|^2,
      // coordinates (x1, x2, x3 = theta_e/2piR, theta_m)
      g[0][0] = g[1][1] = R * it;
      const double c = 1.0 / (4 * kPi * kPi * R * it);
      // dtheta_m - tau dtheta_e with dtheta_e = 2piR dx3:
      // |...|^2 = (dtheta_m - rt*2piR dx3)^2 + (it*2piR dx3)^2
      const double w = 2 * kPi * R;
      g[3][3] = c;
      g[2][2] = c * w * w * (rt * rt + it * it);
      g[2][3] = g[3][2] = -c * w * rt;
      return g;
    }
    // dual semiflat, coordinates (x1, x2, th_e_check, th_m_check):
    // R Im tau |da|^2 + (1/4pi^2 R Im tau)(dth_e + tau dth_m)(dth_e + taubar dth_m)
    g[0][0] = g[1][1] = R * it;
    const double c = 1.0 / (4 * kPi * kPi * R * it);
    g[2][2] = c;
    g[3][3] = c * (rt * rt + it * it);
    g[2][3] = g[3][2] = c * rt;
    return g;
  }
  // Gibbons-Hawking
  if (p.Delta() <= 0) fail(errc::not_positive_definite, "Delta <= 0");
  const double U = potential_u(pt, p, PotentialMode::poisson);
  if (!(U > 0)) fail(errc::not_positive_definite, "U <= 0 at this point");
  const auto A = connection_a_gh(pt, p).x_components(R);
  const std::array<double, 4> beta{A[0], A[1], A[2], 1.0 / (2 * kPi)};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g[i][j] = beta[i] * beta[j] / U;
  for (int k = 0; k < 3; ++k) g[k][k] += U;
  return g;
}

double metric_min_eigenvalue(const Mat4& g) {
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = g[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
  return es.eigenvalues().minCoeff();
}

KahlerTriple gh_triple_from(double U, const std::array<double, 3>& A) {
  const std::array<double, 4> beta{A[0], A[1], A[2], 1.0 / (2 * kPi)};
  const std::array<double, 4> e1{1, 0, 0, 0}, e2{0, 1, 0, 0}, e3{0, 0, 1, 0};
  KahlerTriple t;
  t.w1 = zero4();
  t.w2 = zero4();
  t.w3 = zero4();
  wedge_into(t.w1, e1, beta);
  wedge_into(t.w2, e2, beta);
  wedge_into(t.w3, e3, beta);
  Mat4 m{};
  wedge_into(m, e2, e3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t.w1[i][j] += U * m[i][j];
  m = zero4();
  wedge_into(m, e3, e1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t.w2[i][j] += U * m[i][j];
  m = zero4();
  wedge_into(m, e1, e2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t.w3[i][j] += U * m[i][j];
  // Omega_3 = da ^ (dtheta_m/2pi + A - iU/(2piR) dtheta_e); dtheta_e = 2piR dx3
  const std::array<cplx, 4> da{1.0, cplx(0, 1), 0.0, 0.0};
  std::array<cplx, 4> dz{beta[0], beta[1], beta[2] - cplx(0, 1) * U, beta[3]};
  t.omega3 = CMat4{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t.omega3[i][j] = da[i] * dz[j] - da[j] * dz[i];
  return t;
}

KahlerTriple kahler_triple(const FiberPoint& pt, const OVParams& p) {
  const double U = potential_u(pt, p, PotentialMode::poisson);
  const auto A = connection_a_gh(pt, p).x_components(p.R);
  return gh_triple_from(U, A);
}

KahlerTriple kahler_triple_semiflat(const FiberPoint& pt, const OVParams& p) {
  const auto cc = central_charges(pt, p);
  const double U = p.R * cc.tau.imag();
  const std::array<double, 3> A{0, 0, -p.R * cc.tau.real()}; // -R Re tau dx3
  return gh_triple_from(U, A);
}

CMat4 omega_xi(const KahlerTriple& t, cplx xi) {
  CMat4 out{};
  const cplx ip = -cplx(0, 0.5) / xi;  // -(i/2 xi) on w+
  const cplx im = -cplx(0, 0.5) * xi;  // -(i/2) xi on w-
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const cplx wp = t.w1[i][j] + cplx(0, 1) * t.w2[i][j];
      const cplx wm = t.w1[i][j] - cplx(0, 1) * t.w2[i][j];
      out[i][j] = kOmegaXiNorm * (ip * wp + t.w3[i][j] + im * wm);
    }
  return out;
}

double wedge4(const Mat4& a, const Mat4& b) {
  return a[0][1] * b[2][3] - a[0][2] * b[1][3] + a[0][3] * b[1][2] +
         a[2][3] * b[0][1] - a[1][3] * b[0][2] + a[1][2] * b[0][3];
}

cplx wedge4(const CMat4& a, const CMat4& b) {
  return a[0][1] * b[2][3] - a[0][2] * b[1][3] + a[0][3] * b[1][2] +
         a[2][3] * b[0][1] - a[1][3] * b[0][2] + a[1][2] * b[0][3];
}

std::vector<double> singular_set(const OVParams& p) {
  std::vector<double> out;
  for (auto& [q, om] : active(p))
    for (int n = 0; n < q; ++n) out.push_back(2 * kPi * n / q);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            out.end());
  return out;
}

MirrorResult mirror_build(const OVParams& p, MirrorMode mode,
                          const std::optional<std::map<int, std::int64_t>>& spectrum_mod) {
  MirrorResult r;
  r.params = p;
  r.swap_rule = "(theta_e, theta_m) -> (theta_m_check, -theta_e_check)";
  if (mode == MirrorMode::self) {
    r.self = true;
    return r;
  }
  if (!spectrum_mod) fail(errc::config_error, "modified mirror needs a spectrum");
  OVParams mod = p;
  mod.spectrum = *spectrum_mod;
  if (mod.Delta() != p.Delta())
    fail(errc::constraint_violation, "modified mirror must preserve Delta");
  r.params = mod;
  r.self = false;
  return r;
}

Periods periods_check(const OVParams& p, const FiberPoint& at) {
  check_disk(at, p);
  num::QuadratureConfig cfg;
  cfg.abs_tol = 1e-12;
  cfg.rel_tol = 1e-11;
  Periods out;
  // dz restricted to the fiber: (1/2pi) dtheta_m + (A_thetae - iU/2piR) dtheta_e
  out.period_m = num::integrate_adaptive(
      [&](double) -> double { return 1.0 / (2 * kPi); }, 0.0, 2 * kPi, cfg);
  auto fe = [&](double te) -> cplx {
    FiberPoint q = at;
    q.theta_e = te;
    const double U = potential_u(q, p, PotentialMode::poisson);
    const double Ath = connection_a_gh(q, p).A_thetae;
    return Ath - cplx(0, 1) * U / (2 * kPi * p.R);
  };
  // oriented so the semiflat closed form gives +tau
  out.period_e = -num::integrate_adaptive<decltype(fe), cplx>(fe, 0.0, 2 * kPi, cfg);
  return out;
}

} // namespace wallcross::ov
