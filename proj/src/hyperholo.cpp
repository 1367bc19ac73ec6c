#include "wallcross/hyperholo.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "wallcross/twistor.hpp"

namespace wallcross::hyperholo {

namespace {
constexpr double kPi = M_PI;
const cplx kI{0, 1};

double to_double(const Rational& r) {
  return static_cast<double>(boost::multiprecision::numerator(r)) /
         static_cast<double>(boost::multiprecision::denominator(r));
}
} // namespace

Rational ConnectionParams::n_omega() const {
  Rational n = 0;
  for (auto& [q, w] : omega) n += w;
  return n;
}

void ConnectionParams::validate() const {
  host.validate();
  Rational s = 0;
  for (auto& [q, w] : omega) {
    if (q <= 0) fail(errc::config_error, "omega is stored on q > 0");
    s += q * w;
  }
  if (s != delta)
    fail(errc::constraint_violation, "delta != sum_{q>0} q omega_q");
  const Rational twodelta = 2 * delta;
  if (boost::multiprecision::denominator(twodelta) != 1)
    fail(errc::config_error, "delta must be an integer or half-integer");
  if (std::abs(lambda1) == 0) fail(errc::config_error, "lambda1 must be nonzero");
}

double ConnectionParams::omega_q(int q) const {
  if (q == 0) return 0;
  auto it = omega.find(std::abs(q));
  if (it == omega.end()) return 0;
  const double v = to_double(it->second);
  return q > 0 ? v : -v; // odd completion
}

cplx w_eval(const FiberPoint& pt, const ConnectionParams& c) {
  const cplx a = pt.a();
  if (std::abs(a) == 0) fail(errc::singular_base, "a = 0");
  const cplx lr = pt.z - std::log(c.lambda1);
  cplx w = to_double(c.delta) / (2 * kPi * kI) * (a * lr - a);
  cplx ak = a;
  for (auto& wk : c.tail) {
    ak *= a;
    w += wk * ak;
  }
  return w;
}

cplx w0_eval(const FiberPoint& pt, const ConnectionParams& c) {
  const cplx a = pt.a();
  const cplx lr = pt.z - std::log(c.host.lambda);
  return to_double(c.delta) / (2 * kPi * kI) * (a * lr - a);
}

cplx w_analytic_eval(const FiberPoint& pt, const ConnectionParams& c) {
  return w_eval(pt, c) - w0_eval(pt, c);
}

cplx t_eval(const FiberPoint& pt, const ConnectionParams& c) {
  const cplx a = pt.a();
  const cplx lr = pt.z - std::log(c.lambda1);
  cplx t = to_double(c.delta) / (2 * kPi * kI) * lr;
  cplx ak = 1.0;
  int k = 2;
  for (auto& wk : c.tail) {
    ak *= a;
    t += static_cast<double>(k) * wk * ak;
    ++k;
  }
  return t;
}

SplitData eta_alpha_split(cplx t, cplx tau) {
  if (!(tau.imag() > 0)) fail(errc::domain_error, "Im tau must be positive");
  SplitData s;
  s.t = t;
  s.tau = tau;
  s.alpha = t.imag() / tau.imag();
  s.eta = t.real() - tau.real() * s.alpha;
  return s;
}

SplitData eta_alpha_split(const FiberPoint& pt, const ConnectionParams& c) {
  const auto cc = ov::central_charges(pt, c.host);
  return eta_alpha_split(t_eval(pt, c), cc.tau);
}

SemiflatConnection semiflat_connection(const FiberPoint& pt, const ConnectionParams& c) {
  const auto s = eta_alpha_split(pt, c);
  return {s.eta, s.alpha};
}

Mat4 semiflat_curvature(const FiberPoint& pt, const ConnectionParams& c, double h) {
  // F = i(d eta ^ dtheta_e + d alpha ^ dtheta_m) on (x1, x2, theta_e, theta_m)
  const cplx a0 = pt.a();
  const double step = h * std::max(1.0, std::abs(a0));
  auto split_at = [&](cplx da) {
    FiberPoint q = pt;
    q.z = pt.z + std::log((a0 + da) / a0);
    return eta_alpha_split(q, c);
  };
  const auto px = split_at(step), mx = split_at(-step);
  const auto py = split_at(cplx(0, step)), my = split_at(cplx(0, -step));
  const double deta_x1 = (px.eta - mx.eta) / (2 * step);
  const double deta_x2 = (py.eta - my.eta) / (2 * step);
  const double dalpha_x1 = (px.alpha - mx.alpha) / (2 * step);
  const double dalpha_x2 = (py.alpha - my.alpha) / (2 * step);
  Mat4 F{};
  F[0][2] = deta_x1;
  F[1][2] = deta_x2;
  F[0][3] = dalpha_x1;
  F[1][3] = dalpha_x2;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) F[i][j] = -F[j][i];
  return F;
}

namespace {

// sum_{q>0} omega_q (log F_q - log F_{-q}), continued across sheets
cplx log_f_product(const FiberPoint& pt, const ConnectionParams& c, cplx xi,
                   const num::QuadratureConfig& cfg) {
  cplx lg = 0;
  for (auto& [q, w] : c.omega) {
    if (w == 0) continue;
    const double wq = to_double(w);
    lg += wq * (twistor::log_fq_eval(q, pt, c.host, xi, cfg) -
                twistor::log_fq_eval(-q, pt, c.host, xi, cfg));
  }
  return lg;
}

} // namespace

cplx xw_eval(const FiberPoint& pt, double psi, cplx xi, const ConnectionParams& c,
             const num::QuadratureConfig& cfg) {
  const cplx W = w_eval(pt, c);
  const cplx lg = kPi * c.host.R * W / xi - kI * psi + kPi * c.host.R * xi * std::conj(W) +
                  log_f_product(pt, c, xi, cfg);
  return std::exp(lg);
}

cplx xw_omega_part(const FiberPoint& pt, double psi, cplx xi, const ConnectionParams& c,
                   const num::QuadratureConfig& cfg) {
  const cplx W0 = w0_eval(pt, c);
  const cplx lg = kPi * c.host.R * W0 / xi - kI * psi + kPi * c.host.R * xi * std::conj(W0) +
                  log_f_product(pt, c, xi, cfg);
  return std::exp(lg);
}

cplx xw_analytic_part(const FiberPoint& pt, cplx xi, const ConnectionParams& c) {
  const cplx Wa = w_analytic_eval(pt, c);
  return std::exp(kPi * c.host.R * Wa / xi + kPi * c.host.R * xi * std::conj(Wa));
}

namespace {

using Vec4c = std::array<cplx, 4>;

Vec4c apply_form_to_J(const Vec4c& form, const Eigen::Matrix4d& J) {
  Vec4c out{};
  for (int j = 0; j < 4; ++j) {
    cplx s = 0;
    for (int k = 0; k < 4; ++k) s += form[k] * J(k, j);
    out[j] = s;
  }
  return out;
}

// (0,1)_J part of a complex 1-form: (beta + i beta o J)/2
Vec4c proj01(const Vec4c& beta, const Eigen::Matrix4d& J) {
  const Vec4c bj = apply_form_to_J(beta, J);
  Vec4c out{};
  for (int k = 0; k < 4; ++k) out[k] = 0.5 * (beta[k] + kI * bj[k]);
  return out;
}

struct PointGeometry {
  Eigen::Matrix4d J1, J2, J3;
};

PointGeometry geometry_at(const FiberPoint& pt, const OVParams& p, bool semiflat) {
  double U;
  std::array<double, 3> Ax;
  if (semiflat) {
    const auto cc = ov::central_charges(pt, p);
    U = p.R * cc.tau.imag();
    Ax = {0, 0, -p.R * cc.tau.real()};
  } else {
    U = ov::potential_u(pt, p, ov::PotentialMode::poisson);
    Ax = ov::connection_a_gh(pt, p).x_components(p.R);
  }
  const auto triple = ov::gh_triple_from(U, Ax);
  Eigen::Matrix4d g;
  const std::array<double, 4> beta{Ax[0], Ax[1], Ax[2], 1.0 / (2 * kPi)};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      g(i, j) = beta[i] * beta[j] / U + (i == j && i < 3 ? U : 0.0);
  const Eigen::Matrix4d ginv = g.inverse();
  auto J_of = [&](const ov::Mat4& w) {
    Eigen::Matrix4d wm;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) wm(i, j) = w[i][j];
    // omega(v, w) = g(J v, w)  =>  J = ginv * omega with index care:
    // omega_{ij} = J^k_i g_{kj}  =>  J^k_i = omega_{ij} (g^{-1})^{jk}
    Eigen::Matrix4d J;
    for (int k = 0; k < 4; ++k)
      for (int i = 0; i < 4; ++i) {
        double s = 0;
        for (int j = 0; j < 4; ++j) s += wm(i, j) * ginv(j, k);
        J(k, i) = s;
      }
    return J;
  };
  PointGeometry geo;
  geo.J1 = J_of(triple.w1);
  geo.J2 = J_of(triple.w2);
  geo.J3 = J_of(triple.w3);
  return geo;
}

// d log of the F-product at fixed xi, as a 1-form on (x1, x2, x3, theta_m)
Vec4c dlog_fproduct(const FiberPoint& pt, const ConnectionParams& c, cplx xi, bool at_zero,
                    const num::QuadratureConfig& cfg) {
  cplx da = 0, dab = 0, dte = 0;
  for (auto& [q, w] : c.omega) {
    if (w == 0) continue;
    const double wq = to_double(w);
    const auto dp = at_zero ? twistor::dlog_fq_zero(q, pt, c.host, cfg)
                            : twistor::dlog_fq(q, pt, c.host, xi, cfg);
    const auto dm = at_zero ? twistor::dlog_fq_zero(-q, pt, c.host, cfg)
                            : twistor::dlog_fq(-q, pt, c.host, xi, cfg);
    da += wq * (dp[0] - dm[0]);
    dab += wq * (dp[1] - dm[1]);
    dte += wq * (dp[2] - dm[2]);
  }
  const double R = c.host.R;
  return {da + dab, kI * (da - dab), 2 * kPi * R * dte, 0.0};
}

} // namespace

GMNConnection gmn_connection_solve(const FiberPoint& pt, const ConnectionParams& c,
                                   const GMNSolveOptions& opt) {
  const OVParams& p = c.host;
  if (std::abs(pt.a()) < opt.rho_min_factor * std::abs(p.lambda))
    fail(errc::singular_point, "point inside the exclusion radius of a singularity");
  const double R = p.R;
  const auto geo = geometry_at(pt, p, opt.semiflat_truncation);
  const cplx t = t_eval(pt, c);

  // beta(xi) = d log (section in the psi = 0 trivialization)
  auto beta_at = [&](cplx xi) -> Vec4c {
    const cplx u = kPi * R * t / xi, v = kPi * R * xi * std::conj(t);
    Vec4c b{u + v, kI * (u - v), 0.0, 0.0};
    if (!opt.semiflat_truncation) {
      const auto f = dlog_fproduct(pt, c, xi, false, opt.quad);
      for (int k = 0; k < 4; ++k) b[k] += f[k];
    }
    return b;
  };

  // rows of the least-squares system: P^{0,1}(beta) + i P^{0,1}(dx_k) c_k = 0
  Eigen::MatrixXd M(24, 4);
  Eigen::VectorXd rhs(24);
  int row = 0;
  auto add_condition = [&](const Vec4c& beta, const Eigen::Matrix4d& J, const Vec4c& extra) {
    Vec4c pb = proj01(beta, J);
    for (int k = 0; k < 4; ++k) pb[k] += extra[k];
    for (int k = 0; k < 4; ++k) {
      // unknown contribution: i * P^{0,1}(e_k) * c_k
      for (int u = 0; u < 4; ++u) {
        Vec4c ek{};
        ek[u] = 1.0;
        const Vec4c pk = proj01(ek, J);
        M(row, u) = (kI * pk[k]).real();
        M(row + 1, u) = (kI * pk[k]).imag();
      }
      rhs(row) = -pb[k].real();
      rhs(row + 1) = -pb[k].imag();
      row += 2;
    }
  };
  const Vec4c no_extra{};
  add_condition(beta_at(cplx(0, 1)), geo.J1, no_extra);   // xi = i
  add_condition(beta_at(cplx(-1, 0)), geo.J2, no_extra);  // xi = -1
  {
    // xi -> 0 limit: (pi R t / 2) da o (J1 - i J2) + P^{0,1}_{J3}(beta_0 + A)
    Vec4c beta0{};
    if (!opt.semiflat_truncation) beta0 = dlog_fproduct(pt, c, {}, true, opt.quad);
    const Vec4c da{1.0, kI, 0.0, 0.0};
    Eigen::Matrix4d J1mJ2r = geo.J1;
    // form o (J1 - i J2): do it componentwise on the complex combination
    Vec4c limit{};
    const Vec4c daJ1 = apply_form_to_J(da, geo.J1);
    const Vec4c daJ2 = apply_form_to_J(da, geo.J2);
    for (int k = 0; k < 4; ++k)
      limit[k] = 0.5 * kPi * R * t * (daJ1[k] - kI * daJ2[k]);
    (void)J1mJ2r;
    add_condition(beta0, geo.J3, limit);
  }
  GMNConnection out;
  Eigen::Vector4d sol = M.colPivHouseholderQr().solve(rhs);
  for (int k = 0; k < 4; ++k) out.c[k] = sol(k);
  out.residual = (M * sol - rhs).cwiseAbs().maxCoeff();
  const auto s = eta_alpha_split(pt, c);
  out.c_sf = {0, 0, 2 * kPi * R * s.eta, s.alpha};
  return out;
}

std::array<double, 3> gmn_curvature_type_check(const FiberPoint& pt,
                                               const ConnectionParams& c,
                                               const GMNSolveOptions& opt, double h) {
  // F = dA by central differences over (x1, x2, x3); A has no theta_m dependence
  const cplx a0 = pt.a();
  const double R = c.host.R;
  auto solve_at = [&](int coord, double step) {
    FiberPoint q = pt;
    if (coord == 0)
      q.z = pt.z + std::log((a0 + step) / a0);
    else if (coord == 1)
      q.z = pt.z + std::log((a0 + cplx(0, step)) / a0);
    else
      q.theta_e = pt.theta_e + 2 * kPi * R * step; // x3 step
    return gmn_connection_solve(q, c, opt).c;
  };
  Mat4 F{};
  for (int i = 0; i < 3; ++i) {
    const auto ap = solve_at(i, h);
    const auto am = solve_at(i, -h);
    for (int j = 0; j < 4; ++j) {
      const double d = (ap[j] - am[j]) / (2 * h);
      F[i][j] += d;
      F[j][i] -= d;
    }
  }
  const auto geo = geometry_at(pt, c.host, opt.semiflat_truncation);
  Eigen::Matrix4d Fm;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) Fm(i, j) = F[i][j];
  const double fnorm = std::max(Fm.cwiseAbs().maxCoeff(), 1e-12);
  auto violation = [&](const Eigen::Matrix4d& J) {
    const Eigen::Matrix4d N = Fm - J.transpose() * Fm * J;
    return N.cwiseAbs().maxCoeff() / fnorm;
  };
  return {violation(geo.J1), violation(geo.J2), violation(geo.J3)};
}

double lagrangian_residual(const OVParams& host, const std::function<cplx(cplx)>& W,
                           const std::vector<cplx>& z_grid, double h) {
  double worst = 0;
  for (cplx z : z_grid) {
    const cplx a0 = std::exp(z);
    const double ht = 1e-4 * std::max(1.0, std::abs(a0));
    auto t_at = [&](cplx da) -> cplx {
      // derivative of W along the real-a direction (equals W' when W is
      // holomorphic); evaluated at a0 + da
      const cplx zp = z + std::log((a0 + da + ht) / a0);
      const cplx zm = z + std::log((a0 + da - ht) / a0);
      return (W(zp) - W(zm)) / (2 * ht);
    };
    auto split_at = [&](cplx da) {
      const cplx zz = z + std::log((a0 + da) / a0);
      const auto tau = ov::central_charges_z(zz, host).tau;
      return eta_alpha_split(t_at(da), tau);
    };
    const double hs = h * std::max(1.0, std::abs(a0));
    // dbar = (d/dx1 + i d/dx2)/2 by five-point central differences
    auto d5 = [&](auto field, bool ydir) {
      auto at = [&](double s) {
        return field(split_at(ydir ? cplx(0, s) : cplx(s, 0)));
      };
      return (-at(2 * hs) + 8 * at(hs) - 8 * at(-hs) + at(-2 * hs)) / (12 * hs);
    };
    auto eta_f = [](const SplitData& s) { return s.eta; };
    auto alpha_f = [](const SplitData& s) { return s.alpha; };
    const cplx dbar_eta = 0.5 * (d5(eta_f, false) + kI * d5(eta_f, true));
    const cplx dbar_alpha = 0.5 * (d5(alpha_f, false) + kI * d5(alpha_f, true));
    const cplx tau = ov::central_charges_z(z, host).tau;
    worst = std::max(worst, std::abs((dbar_eta + tau * dbar_alpha) / (2 * kPi)));
  }
  return worst;
}

double lagrangian_residual(const ConnectionParams& c, const std::vector<cplx>& z_grid,
                           double h) {
  auto W = [&](cplx z) {
    FiberPoint pt;
    pt.z = z;
    return w_eval(pt, c);
  };
  return lagrangian_residual(c.host, W, z_grid, h);
}

} // namespace wallcross::hyperholo
