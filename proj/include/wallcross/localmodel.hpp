#pragma once

#include <complex>
#include <vector>

#include "wallcross/highprec.hpp"
#include "wallcross/ov.hpp"

namespace wallcross::localmodel {

using cplx = std::complex<double>;
using ov::CMat4;
using ov::FiberPoint;
using ov::OVParams;

// rho^2 = -(2u + w) f(u) + f'(u)^2 / 4 with f(x) = x^3 + a x + b
struct EllipticSurface {
  cplx a, b;
  cplx sigma0; // residue eigenvalue, nonzero

  void validate() const; // f squarefree, sigma0 != 0
};

// quartic coefficients of P_w(u), lowest degree first
std::array<hp::complex, 5> pw_coeffs(const EllipticSurface& s, const hp::complex& w);

hp::complex pw_eval(const EllipticSurface& s, const hp::complex& w, const hp::complex& u);

struct SingularFiberSet {
  std::vector<hp::complex> e;    // 3 distinct singular w-values (50-digit)
  std::vector<cplx> e_d;         // double copies
  std::vector<cplx> w0;          // images -w sigma0^2 / 2
  int resultant_degree = 0;      // degree in w of Res_u(P_w, dP_w/du)
};

// roots of the w-resultant (each a double root; distinct values returned),
// computed by evaluation/interpolation of the Euclidean resultant and a
// perfect-square factorization, with 50-digit Newton polish.
SingularFiberSet singular_fibers(const EllipticSurface& s);

struct SurfacePoint {
  hp::complex rho, u, w;
};

// T_k for k = 1, 2, 3 (e-indices cyclically permuted)
SurfacePoint q_action(const EllipticSurface& s, const SingularFiberSet& fib, int k,
                      const SurfacePoint& pt);

struct QActionReport {
  double max_surface_residual = 0;   // relative |rho'^2 - P_w(u')|
  double max_involution_residual = 0; // T_k^2 = id
  double max_composition_residual = 0; // T1 T2 = T3 up to component sign
  double max_fixed_point_residual = 0; // T1 fixes the double points of F_{e_1}
  int samples = 0;
};

QActionReport q_action_verify(const EllipticSurface& s, int samples, unsigned seed);

// Bessel-sum instanton correction of the holomorphic symplectic form for a
// single charge gamma' = q gamma_e with Omega(gamma') given; components on
// (x1, x2, x3, theta_m).
struct InstantonSample {
  FiberPoint point;
  cplx xi;
  CMat4 form;
};

InstantonSample omega_inst_eval(int q, std::int64_t Omega, const FiberPoint& pt,
                                cplx xi, const OVParams& host, int max_n = 100000);

struct CompareReport {
  struct Row {
    double R;
    double max_rel_discrepancy;
  };
  std::vector<Row> rows;
  double overall = 0;
};

// Omega^sf + Omega^inst_{+gamma} + Omega^inst_{-gamma} against the
// Kahler-triple route, spectrum Omega_{+-q} = Omega; drop_negative ablates
// the -gamma term.
CompareReport local_compare(int q, std::int64_t Omega, const OVParams& base,
                            const std::vector<FiberPoint>& grid,
                            const std::vector<cplx>& xis,
                            const std::vector<double>& r_values,
                            bool drop_negative = false);

// SO(3)-side preset of the degeneration conjecture: Omega_{+-1} = 2, Delta = 2.
OVParams mirror_preset(const OVParams& base);

} // namespace wallcross::localmodel
