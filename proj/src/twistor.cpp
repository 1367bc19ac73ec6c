#include "wallcross/twistor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "wallcross/ray_integral.hpp"

namespace wallcross::twistor {

namespace {
constexpr double kPi = M_PI;
const cplx kI{0, 1};

// log(1 - w) stable for small |w|
cplx log1m(cplx w) {
  if (std::abs(w) < 1e-4) {
    const cplx w2 = w * w;
    return -w - 0.5 * w2 - w2 * w / 3.0 - w2 * w2 / 4.0;
  }
  return std::log(1.0 - w);
}

cplx pow_int(cplx b, std::int64_t e) {
  if (e < 0) return 1.0 / pow_int(b, -e);
  cplx r = 1;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

} // namespace

cplx y_sf(double R, cplx Z, double theta, cplx xi) {
  return std::exp(kPi * R * Z / xi + kI * theta + kPi * R * std::conj(Z) * xi);
}

cplx ysf_torsor(double R, cplx Z_i0, cplx xi) {
  return std::exp(kPi * R * Z_i0 / xi + kPi * R * std::conj(Z_i0) * xi);
}

cplx xsf_eval(const IntVec& gamma, const FiberPoint& pt, const OVParams& p, cplx xi) {
  if (gamma.size() != 2) fail(errc::context_mismatch, "OV charge must be rank 2");
  const auto cc = ov::central_charges(pt, p);
  const cplx Z = static_cast<double>(gamma[0]) * cc.Ze + static_cast<double>(gamma[1]) * cc.Zm;
  const double theta = gamma[0] * pt.theta_e + gamma[1] * pt.theta_m;
  return y_sf(p.R, Z, theta, xi);
}

CMat4 omega_sf_closed(const FiberPoint& pt, const OVParams& p, cplx xi) {
  const auto cc = ov::central_charges(pt, p);
  const double R = p.R;
  const cplx tau = cc.tau;
  // dlogX_e^sf and dlogX_m^sf on (x1, x2, x3, theta_m); dtheta_e = 2 pi R dx3
  const cplx u = kPi * R / xi, v = kPi * R * xi;
  const std::array<cplx, 4> ge{u + v, kI * (u - v), kI * 2.0 * kPi * R, 0.0};
  const std::array<cplx, 4> gm{u * tau + v * std::conj(tau),
                               kI * (u * tau - v * std::conj(tau)), 0.0, kI};
  CMat4 m{};
  const double norm = 1.0 / (8 * kPi * kPi * R);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m[i][j] = (ge[i] * gm[j] - ge[j] * gm[i]) * norm;
  return m;
}

namespace {

// exponent of X_e(xi')^q at the OV point
cplx xe_pow_exponent(int q, const FiberPoint& pt, const OVParams& p, cplx xip) {
  const cplx a = pt.a();
  return static_cast<double>(q) *
         (kPi * p.R * a / xip + kI * pt.theta_e + kPi * p.R * std::conj(a) * xip);
}

double fq_ray_phase(int q, const FiberPoint& pt) {
  // direction of -q a; principal value is all the raw integral needs
  return std::arg(-static_cast<double>(q) * pt.a());
}

} // namespace

cplx log_fq_raw(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
                const num::QuadratureConfig& cfg) {
  if (q == 0) fail(errc::config_error, "F_q needs q != 0");
  const double phi = fq_ray_phase(q, pt);
  auto f = [&](cplx xip) -> cplx { return log1m(std::exp(xe_pow_exponent(q, pt, p, xip))); };
  return -num::ray_kernel_integral(f, phi, xi, cfg) / (4 * kPi * kI);
}

cplx fq_raw(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
            const num::QuadratureConfig& cfg) {
  return std::exp(log_fq_raw(q, pt, p, xi, cfg));
}

std::int64_t fq_sheet_crossings(int q, const FiberPoint& pt, const OVParams& p, cplx xi) {
  // The ray angle phi(z) = Im z + (q>0 ? pi : 0) rotates counterclockwise
  // with Im z. Crossings of arg xi are counted along the continuous sweep
  // from the global anchor at the top of the fundamental domain
  // (Im z = arg lambda), which keeps the continued F_q free of spurious
  // jumps at the sheet boundaries.
  const double off = q > 0 ? kPi : 0.0;
  const double phi_ref = std::arg(p.lambda) + off;
  const double phi_c = pt.z.imag() + off;
  const double psi = std::arg(xi);
  return static_cast<std::int64_t>(std::floor((phi_c - psi) / (2 * kPi)) -
                                   std::floor((phi_ref - psi) / (2 * kPi)));
}

cplx log_fq_eval(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
                 const num::QuadratureConfig& cfg) {
  cplx lg = log_fq_raw(q, pt, p, xi, cfg);
  const std::int64_t crossings = fq_sheet_crossings(q, pt, p, xi);
  if (crossings != 0)
    lg -= static_cast<double>(crossings) *
          log1m(std::exp(xe_pow_exponent(q, pt, p, xi)));
  return lg;
}

cplx fq_eval(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
             const num::QuadratureConfig& cfg) {
  const cplx raw = fq_raw(q, pt, p, xi, cfg);
  const std::int64_t crossings = fq_sheet_crossings(q, pt, p, xi);
  if (crossings == 0) return raw;
  const cplx jump = 1.0 - std::exp(xe_pow_exponent(q, pt, p, xi));
  return raw * pow_int(jump, -crossings);
}

cplx log_fq_boundary(int q, const FiberPoint& pt, const OVParams& p, cplx xi_on_ray,
                     int side, const num::QuadratureConfig& cfg) {
  if (q == 0) fail(errc::config_error, "F_q needs q != 0");
  if (side != 1 && side != -1) fail(errc::config_error, "side is +1 or -1");
  // rotate the contour away from the approach side; the integrand is
  // analytic in the swept wedge, so this equals the one-sided limit exactly
  const double phi = fq_ray_phase(q, pt) - side * 0.35;
  auto f = [&](cplx xip) -> cplx { return log1m(std::exp(xe_pow_exponent(q, pt, p, xip))); };
  return -num::ray_kernel_integral(f, phi, xi_on_ray, cfg) / (4 * kPi * kI);
}

cplx log_fq_zero(int q, const FiberPoint& pt, const OVParams& p,
                 const num::QuadratureConfig& cfg) {
  if (q == 0) fail(errc::config_error, "F_q needs q != 0");
  const double phi = fq_ray_phase(q, pt);
  auto f = [&](cplx xip) -> cplx { return log1m(std::exp(xe_pow_exponent(q, pt, p, xip))); };
  return -num::ray_plain_integral(f, phi, cfg) / (4 * kPi * kI);
}

cplx xm_eval(const FiberPoint& pt, const OVParams& p, cplx xi,
             const num::QuadratureConfig& cfg) {
  // the Riemann-Hilbert branch: raw F_q, discontinuities on the BPS rays
  const auto cc = ov::central_charges(pt, p);
  cplx x = y_sf(p.R, cc.Zm, pt.theta_m, xi);
  for (auto& [q, om] : p.spectrum) {
    if (om == 0) continue;
    x *= pow_int(fq_raw(q, pt, p, xi, cfg), q * om);
    x *= pow_int(fq_raw(-q, pt, p, xi, cfg), -q * om);
  }
  return x;
}

std::array<cplx, 3> dlog_fq(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
                            const num::QuadratureConfig& cfg) {
  const double phi = fq_ray_phase(q, pt);
  const double R = p.R;
  auto kernel_with = [&](auto weight) -> cplx {
    auto f = [&](cplx xip) -> cplx {
      const cplx w = std::exp(xe_pow_exponent(q, pt, p, xip));
      return -static_cast<double>(q) * w / (1.0 - w) * weight(xip);
    };
    return -num::ray_kernel_integral(f, phi, xi, cfg) / (4 * kPi * kI);
  };
  std::array<cplx, 3> d;
  d[0] = kernel_with([&](cplx xip) { return kPi * R / xip; }); // d/da
  d[1] = kernel_with([&](cplx xip) { return kPi * R * xip; }); // d/dabar
  d[2] = kernel_with([&](cplx) { return kI; });                // d/dtheta_e
  return d;
}

std::array<cplx, 3> dlog_fq_zero(int q, const FiberPoint& pt, const OVParams& p,
                                 const num::QuadratureConfig& cfg) {
  const double phi = fq_ray_phase(q, pt);
  const double R = p.R;
  auto plain_with = [&](auto weight) -> cplx {
    auto f = [&](cplx xip) -> cplx {
      const cplx w = std::exp(xe_pow_exponent(q, pt, p, xip));
      return -static_cast<double>(q) * w / (1.0 - w) * weight(xip);
    };
    return -num::ray_plain_integral(f, phi, cfg) / (4 * kPi * kI);
  };
  std::array<cplx, 3> d;
  d[0] = plain_with([&](cplx xip) { return kPi * R / xip; });
  d[1] = plain_with([&](cplx xip) { return kPi * R * xip; });
  d[2] = plain_with([&](cplx) { return kI; });
  return d;
}

// ---- TBA -------------------------------------------------------------------

double TBAProblem::theta_of(const IntVec& v) const {
  double t = 0;
  for (size_t k = 0; k < v.size(); ++k) t += v[k] * theta_basis[k];
  return t;
}

cplx TBAProblem::z_of(const IntVec& v) const {
  cplx z = 0;
  for (size_t k = 0; k < v.size(); ++k) z += static_cast<double>(v[k]) * z_basis[k];
  return z;
}

namespace {

double contraction_estimate(const TBAProblem& pr) {
  double worst = 0;
  std::vector<IntVec> probes = pr.targets;
  for (auto& c : pr.spectrum) probes.push_back(c.v);
  for (auto& g : probes) {
    double k = 0;
    for (auto& c : pr.spectrum) {
      const double m = std::exp(-2 * kPi * pr.R * std::abs(c.Z));
      k += std::abs(static_cast<double>(c.Omega) * pr.ctx->pair(g, c.v)) * m / (1 - m);
    }
    worst = std::max(worst, k);
  }
  return worst;
}

// trapezoid weights on the uniform node grid; integrand decays like
// exp(-c cosh s), so this converges geometrically.
cplx ray_integral_nodes(const TBASolution::Ray& ray, const std::vector<cplx>& log1my,
                        cplx xi) {
  const double h = ray.s[1] - ray.s[0];
  const cplx eiphi = std::polar(1.0, ray.phase);
  cplx sum = 0;
  for (size_t k = 0; k < ray.s.size(); ++k) {
    const cplx xip = eiphi * std::exp(ray.s[k]);
    const double w = (k == 0 || k + 1 == ray.s.size()) ? 0.5 : 1.0;
    sum += w * (xip + xi) / (xip - xi) * log1my[k];
  }
  return sum * h;
}

} // namespace

cplx TBASolution::corr_at(size_t ray_index, cplx xi) const {
  // the correction integral of the ray's own charge, evaluated off-ray;
  // only rays with nonzero pairing contribute, all far from ray_index
  const auto& self = rays[ray_index];
  cplx corr = 0;
  for (size_t r = 0; r < rays.size(); ++r) {
    const auto& ray = rays[r];
    const std::int64_t pr = ctx->pair(self.gamma, ray.gamma);
    if (pr == 0) continue;
    std::vector<cplx> l1(ray.s.size());
    for (size_t k = 0; k < ray.s.size(); ++k) {
      const cplx xip = std::polar(1.0, ray.phase) * std::exp(ray.s[k]);
      const cplx ysf = std::exp(kPi * R * ray.Z / xip + kI * ray.theta +
                                kPi * R * std::conj(ray.Z) * xip);
      l1[k] = log1m(ysf * std::exp(ray.corr[k]));
    }
    corr += -static_cast<double>(ray.Omega * pr) / (4 * kPi * kI) *
            ray_integral_nodes(ray, l1, xi);
  }
  return corr;
}

cplx TBASolution::log_y_impl(const IntVec& gamma, cplx xi, int boundary_side) const {
  cplx z = 0;
  double theta = 0;
  for (size_t k = 0; k < gamma.size(); ++k) {
    z += static_cast<double>(gamma[k]) * z_basis[k];
    theta += gamma[k] * theta_basis[k];
  }
  cplx lg = kPi * R * z / xi + kI * theta + kPi * R * std::conj(z) * xi;
  for (size_t r = 0; r < rays.size(); ++r) {
    const auto& ray = rays[r];
    const std::int64_t pr = ctx->pair(gamma, ray.gamma);
    if (pr == 0) continue;
    const double dist = num::angle_to_ray(ray.phase, xi);
    const cplx w = -static_cast<double>(ray.Omega * pr) / (4 * kPi * kI);
    // node spacing limits how close to the contour the node rule can see;
    // nearer than that, rotate the contour and evaluate the density fresh
    const double near = 8.0 * (ray.s[1] - ray.s[0]);
    if (std::abs(dist) > near) {
      std::vector<cplx> l1(ray.s.size());
      for (size_t k = 0; k < ray.s.size(); ++k) {
        const cplx xip = std::polar(1.0, ray.phase) * std::exp(ray.s[k]);
        const cplx ysf = std::exp(kPi * R * ray.Z / xip + kI * ray.theta +
                                  kPi * R * std::conj(ray.Z) * xip);
        l1[k] = log1m(ysf * std::exp(ray.corr[k]));
      }
      lg += w * ray_integral_nodes(ray, l1, xi);
      continue;
    }
    int side = boundary_side;
    if (side == 0) {
      if (std::abs(dist) < num::kEpsXi)
        fail(errc::xi_near_ray, "xi on an active ray; use log_y_boundary");
      side = dist > 0 ? 1 : -1;
    }
    const double phi = ray.phase - side * 0.35;
    auto f = [&](cplx xip) -> cplx {
      const cplx ysf = std::exp(kPi * R * ray.Z / xip + kI * ray.theta +
                                kPi * R * std::conj(ray.Z) * xip);
      return log1m(ysf * std::exp(corr_at(r, xip)));
    };
    lg += w * num::ray_kernel_integral(f, phi, xi);
  }
  return lg;
}

cplx TBASolution::log_y(const IntVec& gamma, cplx xi) const {
  return log_y_impl(gamma, xi, 0);
}

cplx TBASolution::log_y_boundary(const IntVec& gamma, cplx xi_on_ray, int side) const {
  return log_y_impl(gamma, xi_on_ray, side);
}

TBASolution tba_solve(const TBAProblem& problem, const TBAConfig& cfg) {
  if (problem.spectrum.empty() && problem.targets.empty())
    fail(errc::config_error, "empty problem");
  const double khat = contraction_estimate(problem);
  if (khat >= 1.0)
    fail(errc::no_convergence,
         "contraction estimate >= 1 (R too small for this spectrum)");
  TBASolution sol;
  sol.ctx = problem.ctx;
  sol.R = problem.R;
  sol.z_basis = problem.z_basis;
  sol.theta_basis = problem.theta_basis;
  for (auto& c : problem.spectrum) {
    if (c.Omega == 0) continue;
    TBASolution::Ray r;
    r.gamma = c.v;
    r.Z = c.Z;
    r.Omega = c.Omega;
    if (std::abs(c.Z) == 0) fail(errc::degenerate_charge, "active charge with Z = 0");
    r.phase = std::arg(-c.Z);
    r.theta = problem.theta_of(c.v);
    const double scale = 2 * kPi * problem.R * std::abs(c.Z);
    r.s_max = std::acosh(std::max(45.0 / scale, 1.0 + 1e-9)) + cfg.pad;
    r.s.resize(cfg.nodes_per_ray);
    r.corr.assign(cfg.nodes_per_ray, 0.0);
    for (int k = 0; k < cfg.nodes_per_ray; ++k)
      r.s[k] = -r.s_max + 2 * r.s_max * k / (cfg.nodes_per_ray - 1);
    sol.rays.push_back(std::move(r));
  }
  // stability-wall check: non-local pairs may not share a ray
  for (auto& a : sol.rays)
    for (auto& b : sol.rays) {
      if (&a == &b || problem.ctx->pair(a.gamma, b.gamma) == 0) continue;
      if (std::abs(num::angle_to_ray(a.phase, std::polar(1.0, b.phase))) < wcf::kEpsRay)
        fail(errc::wall_error, "non-commuting charges on a common ray");
    }
  int rises = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    // tabulate log(1 - Y) on all rays from the current iterate
    std::vector<std::vector<cplx>> l1(sol.rays.size());
    for (size_t r = 0; r < sol.rays.size(); ++r) {
      auto& ray = sol.rays[r];
      l1[r].resize(ray.s.size());
      for (size_t k = 0; k < ray.s.size(); ++k) {
        const cplx xip = std::polar(1.0, ray.phase) * std::exp(ray.s[k]);
        const cplx ysf = std::exp(kPi * sol.R * ray.Z / xip + kI * ray.theta +
                                  kPi * sol.R * std::conj(ray.Z) * xip);
        const cplx y = ysf * std::exp(ray.corr[k]);
        if (std::abs(y) >= 1.0)
          fail(errc::no_convergence, "|Y| >= 1 on a ray; principal branch lost");
        l1[r][k] = log1m(y);
      }
    }
    double resid = 0;
    std::vector<std::vector<cplx>> next(sol.rays.size());
    for (size_t r = 0; r < sol.rays.size(); ++r) {
      auto& ray = sol.rays[r];
      next[r].assign(ray.s.size(), 0.0);
      for (size_t rp = 0; rp < sol.rays.size(); ++rp) {
        auto& src = sol.rays[rp];
        const std::int64_t pr = problem.ctx->pair(ray.gamma, src.gamma);
        if (pr == 0) continue;
        const cplx w = -static_cast<double>(src.Omega * pr) / (4 * kPi * kI);
        for (size_t k = 0; k < ray.s.size(); ++k) {
          const cplx xi0 = std::polar(1.0, ray.phase) * std::exp(ray.s[k]);
          next[r][k] += w * ray_integral_nodes(src, l1[rp], xi0);
        }
      }
      for (size_t k = 0; k < ray.s.size(); ++k)
        resid = std::max(resid, std::abs(next[r][k] - ray.corr[k]));
    }
    for (size_t r = 0; r < sol.rays.size(); ++r) sol.rays[r].corr = std::move(next[r]);
    sol.iterations = it;
    if (!sol.residual_history.empty() && resid > sol.residual_history.back()) {
      if (++rises >= 3) fail(errc::no_convergence, "residual grew for 3 iterations");
    } else {
      rises = 0;
    }
    sol.residual_history.push_back(resid);
    if (resid < cfg.tol) return sol;
  }
  fail(errc::no_convergence, "iteration limit reached");
}

// ---- RH sectors ------------------------------------------------------------

std::vector<RHSector> rh_sectors(const std::vector<TBACharge>& spectrum) {
  struct RayGroup {
    double phase;
    std::vector<std::pair<IntVec, std::int64_t>> jumps;
  };
  std::vector<RayGroup> groups;
  for (auto& c : spectrum) {
    if (c.Omega == 0) continue;
    if (std::abs(c.Z) == 0) fail(errc::degenerate_charge, "active charge with Z = 0");
    const double phase = std::arg(-c.Z);
    bool merged = false;
    for (auto& g : groups)
      if (std::abs(num::angle_to_ray(g.phase, std::polar(1.0, phase))) < wcf::kEpsRay) {
        // same ray: allowed only for mutually-local (parallel) charges
        for (auto& [v, om] : g.jumps) {
          std::int64_t cross = v[0] * c.v[1] - v[1] * c.v[0];
          if (v.size() != 2) cross = 1; // conservative for higher rank
          if (cross != 0) fail(errc::wall_error, "coincident rays of non-parallel charges");
        }
        g.jumps.emplace_back(c.v, c.Omega);
        merged = true;
        break;
      }
    if (!merged) groups.push_back({phase, {{c.v, c.Omega}}});
  }
  std::sort(groups.begin(), groups.end(),
            [](const RayGroup& a, const RayGroup& b) { return a.phase < b.phase; });
  std::vector<RHSector> sectors;
  if (groups.empty()) {
    sectors.push_back({-kPi, kPi, {}});
    return sectors;
  }
  for (size_t k = 0; k < groups.size(); ++k) {
    RHSector s;
    s.phase_lo = groups[k].phase;
    s.phase_hi = k + 1 < groups.size() ? groups[k + 1].phase : groups[0].phase + 2 * kPi;
    s.jumps = groups[(k + 1) % groups.size()].jumps;
    sectors.push_back(std::move(s));
  }
  return sectors;
}

algebra::TruncatedSeries rh_monodromy(const std::vector<RHSector>& sectors,
                                      const wcf::BPSData& data,
                                      const algebra::TruncatedSeries& s) {
  // boundaries counterclockwise; first-encountered jump applied last
  algebra::TruncatedSeries acc = s;
  for (auto it = sectors.rbegin(); it != sectors.rend(); ++it)
    for (auto jt = it->jumps.rbegin(); jt != it->jumps.rend(); ++jt)
      acc = wcf::k_factor_apply(algebra::Charge(s.ctx(), jt->first), data, acc);
  return acc;
}

// ---- 2d-4d sections ---------------------------------------------------------

namespace {

cplx sp_z_of(const SectionProblem& pr, const IntVec& v) {
  cplx z = 0;
  for (size_t k = 0; k < v.size(); ++k) z += static_cast<double>(v[k]) * pr.z_basis[k];
  return z;
}

double sp_theta_of(const SectionProblem& pr, const IntVec& v) {
  double t = 0;
  for (size_t k = 0; k < v.size(); ++k) t += v[k] * pr.theta_basis[k];
  return t;
}

cplx default_log_y4d(const SectionProblem& pr, const TBACharge& c, cplx xi) {
  return kPi * pr.R * c.Z / xi + kI * sp_theta_of(pr, c.v) +
         kPi * pr.R * std::conj(c.Z) * xi;
}

} // namespace

cplx section_x(const SectionProblem& pr, int vacuum, const IntVec& off, cplx xi,
               const num::QuadratureConfig& cfg) {
  auto zi = pr.z_vacuum.find(vacuum);
  if (zi == pr.z_vacuum.end()) fail(errc::config_error, "unknown vacuum");
  const cplx Zi = zi->second + sp_z_of(pr, off);
  cplx lg = kPi * pr.R * Zi / xi + kI * sp_theta_of(pr, off) +
            kPi * pr.R * std::conj(Zi) * xi;
  for (auto& c : pr.spectrum) {
    // omega(gamma', gamma_i^0 + off) = omega(gamma', gamma_i^0) + Omega <gamma', off>
    double w = static_cast<double>(c.Omega * pr.ctx->pair(c.v, off));
    if (auto ti = pr.omega_torsor.find(vacuum); ti != pr.omega_torsor.end())
      if (auto gi = ti->second.find(c.v); gi != ti->second.end()) w += gi->second;
    if (w == 0) continue;
    auto f = [&](cplx xip) -> cplx {
      const cplx ly = pr.log_y4d ? pr.log_y4d(c, xip) : default_log_y4d(pr, c, xip);
      return log1m(std::exp(ly));
    };
    const double phase = std::arg(-c.Z);
    lg += -w / (4 * kPi * kI) * num::ray_kernel_integral(f, phase, xi, cfg);
  }
  return std::exp(lg);
}

cplx section_x_rel(const SectionProblem& pr, int i, int j, const IntVec& off, cplx xi,
                   const num::QuadratureConfig& cfg) {
  using algebra::FormalLabel;
  const IntVec zero(pr.ctx->rank(), 0);
  const int sg = algebra::sigma(*pr.ctx, FormalLabel::of_relative(i, j, off),
                                FormalLabel::of_torsor(j, zero));
  return static_cast<double>(sg) * section_x(pr, i, off, xi, cfg) /
         section_x(pr, j, zero, xi, cfg);
}

SectionSamples sections_solve(const SectionProblem& pr,
                              const std::vector<std::pair<int, IntVec>>& requests,
                              const std::vector<cplx>& xi_samples,
                              const TBAConfig& cfg) {
  SectionSamples out;
  // mu-rays with their node grids; unknowns are the components of g on them
  struct MuRay {
    SectionProblem::MuEntry entry;
    cplx Z;
    double phase;
    std::vector<double> s;
    std::vector<cplx> xvals; // x_{gamma_li} on nodes
  };
  std::vector<MuRay> mrays;
  for (auto& m : pr.mu) {
    if (m.mu == 0) continue;
    MuRay r;
    r.entry = m;
    r.Z = pr.z_vacuum.at(m.i) - pr.z_vacuum.at(m.j) + sp_z_of(pr, m.off);
    if (std::abs(r.Z) == 0) fail(errc::degenerate_charge, "S-ray with Z = 0");
    r.phase = std::arg(-r.Z);
    const double scale = 2 * kPi * pr.R * std::abs(r.Z);
    const double smax = std::acosh(std::max(45.0 / scale, 1.0 + 1e-9)) + cfg.pad;
    r.s.resize(cfg.nodes_per_ray);
    for (int k = 0; k < cfg.nodes_per_ray; ++k)
      r.s[k] = -smax + 2 * smax * k / (cfg.nodes_per_ray - 1);
    r.xvals.resize(r.s.size());
    for (size_t k = 0; k < r.s.size(); ++k) {
      const cplx xip = std::polar(1.0, r.phase) * std::exp(r.s[k]);
      r.xvals[k] = section_x_rel(pr, m.i, m.j, m.off, xip);
    }
    mrays.push_back(std::move(r));
  }
  // g values on every mu-ray's nodes, per vacuum
  // g[from vacuum i][ray][node][component vacuum m]
  std::map<int, std::vector<std::vector<std::map<int, cplx>>>> g;
  auto g_init = [&](int i) {
    auto& gi = g[i];
    gi.resize(mrays.size());
    for (size_t r = 0; r < mrays.size(); ++r) {
      gi[r].resize(mrays[r].s.size());
      for (auto& comp : gi[r]) comp[i] = 1.0; // inclusion
    }
  };
  for (int i : pr.vacua) g_init(i);
  std::function<std::map<int, cplx>(int, cplx, int)> g_next_at =
      [&](int i, cplx xi0, int depth) -> std::map<int, cplx> {
    std::map<int, cplx> acc;
    acc[i] = 1.0;
    for (size_t r = 0; r < mrays.size(); ++r) {
      auto& mr = mrays[r];
      if (mr.entry.j != i) continue; // Eq.-54 sum: gamma_li with target vacuum i
      const double dist = num::angle_to_ray(mr.phase, xi0);
      const double near = 8.0 * (mr.s[1] - mr.s[0]);
      const cplx w = -mr.entry.mu / (4 * kPi * kI);
      if (std::abs(dist) > near) {
        const double h = mr.s[1] - mr.s[0];
        const cplx eiphi = std::polar(1.0, mr.phase);
        std::map<int, cplx> integ;
        for (size_t k = 0; k < mr.s.size(); ++k) {
          const cplx xip = eiphi * std::exp(mr.s[k]);
          const double wk = (k == 0 || k + 1 == mr.s.size()) ? 0.5 : 1.0;
          const cplx ker = wk * (xip + xi0) / (xip - xi0) * mr.xvals[k];
          for (auto& [m, val] : g[mr.entry.i][r][k]) integ[m] += ker * val;
        }
        for (auto& [m, val] : integ) acc[m] += w * val * h;
        continue;
      }
      if (depth >= 2 || std::abs(dist) < 1e-13) continue; // self node on the ray
      // rotate the contour away from xi0 and evaluate the density fresh
      const double phi = mr.phase - (dist > 0 ? 1.0 : -1.0) * 0.35;
      for (int m : pr.vacua) {
        auto f = [&](cplx xip) -> cplx {
          const auto gl = g_next_at(mr.entry.i, xip, depth + 1);
          const auto it = gl.find(m);
          if (it == gl.end()) return 0.0;
          return it->second * section_x_rel(pr, mr.entry.i, mr.entry.j, mr.entry.off, xip);
        };
        const cplx v = num::ray_kernel_integral(f, phi, xi0);
        if (std::abs(v) > 0) acc[m] += w * v;
      }
    }
    return acc;
  };
  // Picard iteration on the ray grids
  int rises = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    double resid = 0;
    std::map<int, std::vector<std::vector<std::map<int, cplx>>>> next;
    for (int i : pr.vacua) {
      auto& ni = next[i];
      ni.resize(mrays.size());
      for (size_t r = 0; r < mrays.size(); ++r) {
        ni[r].resize(mrays[r].s.size());
        for (size_t k = 0; k < mrays[r].s.size(); ++k) {
          const cplx xi0 = std::polar(1.0, mrays[r].phase) * std::exp(mrays[r].s[k]);
          ni[r][k] = g_next_at(i, xi0, 2);
          for (auto& [m, val] : ni[r][k]) {
            auto old = g[i][r][k].count(m) ? g[i][r][k][m] : cplx(0);
            resid = std::max(resid, std::abs(val - old));
          }
        }
      }
    }
    g = std::move(next);
    out.iterations = it;
    if (!out.residual_history.empty() && resid > out.residual_history.back()) {
      if (++rises >= 3) fail(errc::no_convergence, "sections residual grew");
    } else {
      rises = 0;
    }
    out.residual_history.push_back(resid);
    if (resid < cfg.tol || mrays.empty()) break;
  }
  // assemble requested samples
  for (auto& [vac, off] : requests) {
    for (cplx xi : xi_samples) {
      SectionSamples::Entry e;
      e.vacuum = vac;
      e.off = off;
      e.xi = xi;
      e.x = section_x(pr, vac, off, xi);
      e.g = g_next_at(vac, xi, 0);
      for (auto& [m, val] : e.g) e.y[m] = val * e.x;
      out.entries.push_back(std::move(e));
    }
  }
  return out;
}

} // namespace wallcross::twistor
