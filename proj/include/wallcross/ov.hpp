#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wallcross/error.hpp"

namespace wallcross::ov {

using cplx = std::complex<double>;
using Mat4 = std::array<std::array<double, 4>, 4>;
using CMat4 = std::array<std::array<cplx, 4>, 4>;

// Twistor-form normalization: Omega(xi) = kappa * [ -(i/2 xi) w+ + w3 - (i/2) xi w- ],
// fixed so that Omega(xi) = (1/8 pi^2 R) dlogX_e ^ dlogX_m.
inline constexpr double kOmegaXiNorm = -0.5;

struct OVParams {
  cplx lambda;                      // disk scale, nonzero
  double R = 1.0;                   // positive
  std::map<int, std::int64_t> spectrum; // q > 0 -> Omega_q (symmetric partner implied)
  std::optional<cplx> tau0;         // used only when Delta = 0

  std::int64_t Delta() const;       // sum_{q>0} q^2 Omega_q
  void validate() const;
};

// Point of the fiber space, kept on the cover: a = e^z, Re z < log|lambda|.
struct FiberPoint {
  cplx z;
  double theta_e = 0;
  double theta_m = 0;

  cplx a() const { return std::exp(z); }
};

// T-hat: (z, th_e, th_m) -> (z + 2 pi i, th_e, th_m + Delta th_e + pi Delta)
FiberPoint t_hat(const FiberPoint& pt, std::int64_t Delta, int power = 1);

struct CentralCharges {
  cplx Ze, Zm, tau;
};

// Eqs. for Z_e = a, Z_m, tau; branch of log(a/lambda) comes from z.
CentralCharges central_charges(const FiberPoint& pt, const OVParams& p);
CentralCharges central_charges_z(cplx z, const OVParams& p);

enum class PotentialMode { sf, poisson, lattice };

struct LatticeCutoffs {
  long N = 10000;                     // lattice terms per side
  std::map<int, double> kappa0;       // per-q n=0 subtraction, from calibrate
  double tail_eps = 1e-16;
};

// Harmonic potential U at (a, theta_e).
double potential_u(const FiberPoint& pt, const OVParams& p, PotentialMode mode,
                   const LatticeCutoffs& cut = {});

// kappa_0 per active q such that lattice mode matches poisson mode at ref.
std::map<int, double> lattice_calibrate(const OVParams& p, long N, const FiberPoint& ref);

// Gibbons-Hawking one-form A = A_a da + A_abar dabar + A_thetae dtheta_e
// (no theta_m component).
struct GHConnection {
  cplx A_a, A_abar;
  double A_thetae;
  // real components on (dx1, dx2, dx3) with x3 = theta_e / (2 pi R)
  std::array<double, 3> x_components(double R) const;
};

GHConnection connection_a_gh(const FiberPoint& pt, const OVParams& p);

enum class MetricMode { gh, semiflat, dual_semiflat };

// 4x4 metric in coordinates (x1, x2, x3, theta_m); dual_semiflat is in
// (x1, x2, theta_e_check, theta_m_check).
Mat4 metric_assemble(const FiberPoint& pt, const OVParams& p, MetricMode mode);

// Smallest eigenvalue (Eigen selfadjoint solver), for positivity tests.
double metric_min_eigenvalue(const Mat4& g);

struct KahlerTriple {
  Mat4 w1, w2, w3; // real two-forms on (x1, x2, x3, theta_m)
  CMat4 omega3;    // da ^ (dtheta_m/2pi + A - iU/(2piR) dtheta_e)
};

KahlerTriple kahler_triple(const FiberPoint& pt, const OVParams& p);

// triple assembled from given (U, A) data; A in x-components, R only enters
// through the caller's x3 convention
KahlerTriple gh_triple_from(double U, const std::array<double, 3>& Ax);

// semiflat-truncated triple (U = R Im tau, A = A^sf)
KahlerTriple kahler_triple_semiflat(const FiberPoint& pt, const OVParams& p);

// kappa-normalized holomorphic symplectic form in J_xi.
CMat4 omega_xi(const KahlerTriple& t, cplx xi);

// wedge pairing of two 2-forms into the coefficient of dx1^dx2^dx3^dtheta_m
double wedge4(const Mat4& a, const Mat4& b);
cplx wedge4(const CMat4& a, const CMat4& b);

// theta_e values of the singular set at a = 0 (sorted, in [0, 2pi)).
std::vector<double> singular_set(const OVParams& p);

struct MirrorResult {
  OVParams params;
  bool self = true;
  std::string swap_rule; // recorded fiber-coordinate identification
};

enum class MirrorMode { self, modified };

MirrorResult mirror_build(const OVParams& p, MirrorMode mode,
                          const std::optional<std::map<int, std::int64_t>>& spectrum_mod = {});

struct Periods {
  cplx period_m; // theta_m cycle, expect 1
  cplx period_e; // theta_e cycle (oriented so the semiflat value is +tau)
};

Periods periods_check(const OVParams& p, const FiberPoint& at);

} // namespace wallcross::ov
