#pragma once

#include <array>
#include <complex>
#include <functional>
#include <map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wallcross/ov.hpp"
#include "wallcross/quadrature.hpp"

namespace wallcross::hyperholo {

using cplx = std::complex<double>;
using Rational = boost::multiprecision::cpp_rational;
using ov::CMat4;
using ov::FiberPoint;
using ov::Mat4;
using ov::OVParams;

struct ConnectionParams {
  Rational delta;                    // integer or half-integer
  std::map<int, Rational> omega;     // q > 0 -> omega_q (odd completion: omega_{-q} = -omega_q)
  cplx lambda1;
  std::vector<cplx> tail;            // (w_2, w_3, ...) of W^analytic
  OVParams host;

  Rational n_omega() const;          // sum_{q>0} omega_q (half-integer twist bookkeeping)
  void validate() const;             // delta = sum_{q>0} q omega_q, exact
  double omega_q(int q) const;       // signed lookup, odd in q
};

// W and its pieces; branch of log(a/lambda1) from the cover coordinate.
cplx w_eval(const FiberPoint& pt, const ConnectionParams& c);
cplx w0_eval(const FiberPoint& pt, const ConnectionParams& c); // (delta/2pi i)(a log(a/Lambda) - a), host Lambda
cplx w_analytic_eval(const FiberPoint& pt, const ConnectionParams& c); // W - W_0
cplx t_eval(const FiberPoint& pt, const ConnectionParams& c);  // dW/da

struct SplitData {
  double eta, alpha;
  cplx t, tau;
};

SplitData eta_alpha_split(cplx t, cplx tau);
SplitData eta_alpha_split(const FiberPoint& pt, const ConnectionParams& c);

// A^sf = i(eta dtheta_e + alpha dtheta_m); returned as the real coefficient
// pair (the form is i times it).
struct SemiflatConnection {
  double eta, alpha;
};
SemiflatConnection semiflat_connection(const FiberPoint& pt, const ConnectionParams& c);

// curvature F = i(d eta ^ dtheta_e + d alpha ^ dtheta_m) by central
// differences in a; components on (x1, x2, theta_e, theta_m), F = i * (real matrix)
Mat4 semiflat_curvature(const FiberPoint& pt, const ConnectionParams& c, double h = 1e-5);

// X_W at (point, psi); the sheet continuation follows the F_q bookkeeping.
cplx xw_eval(const FiberPoint& pt, double psi, cplx xi, const ConnectionParams& c,
             const num::QuadratureConfig& cfg = {});

// split of Eqs. X_W = X_W^omega * X^analytic
cplx xw_omega_part(const FiberPoint& pt, double psi, cplx xi, const ConnectionParams& c,
                   const num::QuadratureConfig& cfg = {});
cplx xw_analytic_part(const FiberPoint& pt, cplx xi, const ConnectionParams& c);

// ---- GMN connection solve ---------------------------------------------------

struct GMNSolveOptions {
  bool semiflat_truncation = false; // drop all F_q and use the semiflat metric
  num::QuadratureConfig quad;
  double rho_min_factor = 0.05;     // exclusion radius around connection singularities
};

struct GMNConnection {
  // A = i (c0 dx1 + c1 dx2 + c2 dx3 + c3 dtheta_m), x3 = theta_e/(2 pi R)
  std::array<double, 4> c;
  double residual; // least-squares residual of the (0,1) conditions
  // semiflat reference in the same basis
  std::array<double, 4> c_sf;
};

GMNConnection gmn_connection_solve(const FiberPoint& pt, const ConnectionParams& c,
                                   const GMNSolveOptions& opt = {});

// ||F - J^T F J|| / ||F|| for J in {J1, J2, J3}, with F = dA of the solved
// connection by central differences (extra solves on a stencil).
std::array<double, 3> gmn_curvature_type_check(const FiberPoint& pt,
                                               const ConnectionParams& c,
                                               const GMNSolveOptions& opt = {},
                                               double h = 1e-4);

// ---- mirror Lagrangian section ----------------------------------------------

// max over the grid of |coefficient of da^dabar| in the pullback of
// (1/2pi) da ^ (dtheta_e_check + tau dtheta_m_check) to the graph
// (eta(a), alpha(a)); W is supplied as a functor so tests can perturb it.
double lagrangian_residual(const OVParams& host, const std::function<cplx(cplx)>& W,
                           const std::vector<cplx>& z_grid, double h = 1e-4);

double lagrangian_residual(const ConnectionParams& c, const std::vector<cplx>& z_grid,
                           double h = 1e-4);

} // namespace wallcross::hyperholo
