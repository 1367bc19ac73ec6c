#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "wallcross/charges.hpp"
#include "wallcross/ov.hpp"
#include "wallcross/quadrature.hpp"
#include "wallcross/wallcrossing.hpp"

namespace wallcross::twistor {

using algebra::ContextPtr;
using algebra::FormalLabel;
using algebra::IntVec;
using cplx = std::complex<double>;
using ov::CMat4;
using ov::FiberPoint;
using ov::OVParams;

// ---- semiflat twistor coordinates ----------------------------------------

// exp(pi R Z/xi + i theta + pi R Zbar xi)
cplx y_sf(double R, cplx Z, double theta, cplx xi);

// X^sf for gamma = (q, p) over an Ooguri-Vafa base point.
cplx xsf_eval(const IntVec& gamma, const FiberPoint& pt, const OVParams& p, cplx xi);

// torsor variant (no angular term): exp(pi R Z_i0/xi + pi R conj(Z_i0) xi)
cplx ysf_torsor(double R, cplx Z_i0, cplx xi);

// closed-form semiflat Omega(xi) = (1/8 pi^2 R) dlogX_e^sf ^ dlogX_m^sf on
// (x1, x2, x3, theta_m).
CMat4 omega_sf_closed(const FiberPoint& pt, const OVParams& p, cplx xi);

// ---- contour-integral factors F_q ----------------------------------------

// Raw contour integral of Eq-type F_q at the ray of -q a; no continuation.
cplx fq_raw(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
            const num::QuadratureConfig& cfg = {});

// log F_q without exponentiation (well defined from the integral itself;
// needed for rational powers F_q^{omega_q}).
cplx log_fq_raw(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
                const num::QuadratureConfig& cfg = {});
cplx log_fq_eval(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
                 const num::QuadratureConfig& cfg = {});

// log F_q at xi = 0 (kernel = 1).
cplx log_fq_zero(int q, const FiberPoint& pt, const OVParams& p,
                 const num::QuadratureConfig& cfg = {});

// signed counterclockwise crossings of arg xi by the rotating ray, counted
// from the anchor at the top of the fundamental domain (Im z = arg lambda)
std::int64_t fq_sheet_crossings(int q, const FiberPoint& pt, const OVParams& p, cplx xi);

// boundary values of log F_q on its own ray, via contour rotation
// (side = +1: counterclockwise limit, -1: clockwise limit)
cplx log_fq_boundary(int q, const FiberPoint& pt, const OVParams& p, cplx xi_on_ray,
                     int side, const num::QuadratureConfig& cfg = {});

// Continued across z-sheets: fundamental domain Im z in [Im log lambda - 2pi,
// Im log lambda); each counterclockwise crossing of xi by the rotating ray
// contributes a (1 - X_e^q)^{-1}.
cplx fq_eval(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
             const num::QuadratureConfig& cfg = {});

// X_m = X_m^sf prod_q F_q^{q Omega_q} (q runs over both signs).
cplx xm_eval(const FiberPoint& pt, const OVParams& p, cplx xi,
             const num::QuadratureConfig& cfg = {});

// d log F_q at fixed xi: components (d/da, d/dabar, d/dtheta_e), computed by
// differentiating under the contour integral.
std::array<cplx, 3> dlog_fq(int q, const FiberPoint& pt, const OVParams& p, cplx xi,
                            const num::QuadratureConfig& cfg = {});

// same at xi = 0 (kernel = 1)
std::array<cplx, 3> dlog_fq_zero(int q, const FiberPoint& pt, const OVParams& p,
                                 const num::QuadratureConfig& cfg = {});

// ---- integral-equation (TBA) solver ---------------------------------------

struct TBACharge {
  IntVec v;
  cplx Z;
  std::int64_t Omega;
};

struct TBAProblem {
  ContextPtr ctx;
  double R = 1;
  std::vector<cplx> z_basis;         // Z on the lattice basis
  std::vector<TBACharge> spectrum;   // active charges
  std::vector<double> theta_basis;   // fiber angles of the basis
  std::vector<IntVec> targets;       // charges to evaluate after solving

  double theta_of(const IntVec& v) const;
  cplx z_of(const IntVec& v) const;
};

struct TBAConfig {
  double tol = 1e-10;
  int max_iter = 50;
  int nodes_per_ray = 257;
  double pad = 1.5; // extra log-t range beyond the decay cutoff
};

class TBASolution {
public:
  struct Ray {
    IntVec gamma;
    cplx Z;
    std::int64_t Omega;
    double phase;
    double theta;
    double s_max;
    std::vector<double> s;     // nodes in log t
    std::vector<cplx> corr;    // log(Y/Y^sf) on nodes
  };

  std::vector<Ray> rays;
  std::vector<double> residual_history;
  int iterations = 0;
  double R = 1;
  ContextPtr ctx;
  std::vector<cplx> z_basis;
  std::vector<double> theta_basis;

  // log Y_gamma at xi; near-ray evaluation rotates the contour and
  // re-evaluates the density, so values stay accurate up to the rays
  cplx log_y(const IntVec& gamma, cplx xi) const;
  cplx y(const IntVec& gamma, cplx xi) const { return std::exp(log_y(gamma, xi)); }
  // one-sided boundary value on a ray (side +1: counterclockwise limit)
  cplx log_y_boundary(const IntVec& gamma, cplx xi_on_ray, int side) const;
  // correction integral of an active ray's charge at arbitrary xi
  cplx corr_at(size_t ray_index, cplx xi) const;

 private:
  cplx log_y_impl(const IntVec& gamma, cplx xi, int boundary_side) const;
};

TBASolution tba_solve(const TBAProblem& problem, const TBAConfig& cfg = {});

// ---- Riemann-Hilbert sector bookkeeping -----------------------------------

struct RHSector {
  double phase_lo, phase_hi; // counterclockwise sector (lo, hi)
  // transitions across the ray at phase_hi: K-factors of these charges
  std::vector<std::pair<IntVec, std::int64_t>> jumps;
};

std::vector<RHSector> rh_sectors(const std::vector<TBACharge>& spectrum);

// Compose all sector transitions counterclockwise around xi = 0 in the
// formal algebra; equals the full-circle ordered product.
algebra::TruncatedSeries rh_monodromy(const std::vector<RHSector>& sectors,
                                      const wcf::BPSData& data,
                                      const algebra::TruncatedSeries& s);

// ---- 2d-4d sections --------------------------------------------------------

struct SectionProblem {
  ContextPtr ctx;
  double R = 1;
  std::vector<int> vacua;
  std::map<int, cplx> z_vacuum;                       // Z_{gamma_i^0}
  std::vector<cplx> z_basis;                          // Z on the lattice basis
  std::vector<TBACharge> spectrum;                    // 4d charges (K-rays)
  std::vector<double> theta_basis;
  std::map<int, std::map<IntVec, double>> omega_torsor; // omega(gamma', gamma_i^0)
  struct MuEntry {
    int i, j;
    IntVec off;
    double mu;
  };
  std::vector<MuEntry> mu;
  // log Y_{gamma'} for the 4d charges entering x_{gamma_i}; defaults to sf
  std::function<cplx(const TBACharge&, cplx)> log_y4d;
};

struct SectionSamples {
  // per requested (vacuum, offset) and xi: x_{gamma_i}, g_i components, Y
  struct Entry {
    int vacuum;
    IntVec off;
    cplx xi;
    cplx x;
    std::map<int, cplx> g;   // components of g_i on the vacua
    std::map<int, cplx> y;   // Y = g * x
  };
  std::vector<Entry> entries;
  int iterations = 0;
  std::vector<double> residual_history;
};

// x_{gamma_i}(xi) alone (ray integrals over the 4d spectrum)
cplx section_x(const SectionProblem& pr, int vacuum, const IntVec& off, cplx xi,
               const num::QuadratureConfig& cfg = {});

// x_{gamma_ij} := sigma(gamma_ij, gamma_j)^{-1} x_{gamma_i} x_{gamma_j}^{-1}
cplx section_x_rel(const SectionProblem& pr, int i, int j, const IntVec& off, cplx xi,
                   const num::QuadratureConfig& cfg = {});

SectionSamples sections_solve(const SectionProblem& pr,
                              const std::vector<std::pair<int, IntVec>>& requests,
                              const std::vector<cplx>& xi_samples,
                              const TBAConfig& cfg = {});

} // namespace wallcross::twistor
