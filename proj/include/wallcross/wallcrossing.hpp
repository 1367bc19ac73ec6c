#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wallcross/charges.hpp"

namespace wallcross::wcf {

using algebra::Charge;
using algebra::ConePtr;
using algebra::ContextPtr;
using algebra::FormalLabel;
using algebra::IntVec;
using algebra::Rational;
using algebra::TruncatedSeries;
using cplx = std::complex<double>;

inline constexpr double kEpsRay = 1e-9; // phase comparison tolerance

// Z: Gamma -> C on the basis, plus torsor values Z_{gamma_i^0} per vacuum.
struct CentralCharge {
  ContextPtr ctx;
  std::vector<cplx> z_basis;     // Z(e_k)
  std::map<int, cplx> z_vacuum;  // Z_{gamma_i^0}

  cplx eval_charge(const IntVec& v) const;
  cplx eval(const FormalLabel& a) const; // torsor: Z_i0 + Z(off); relative: Z_i0 - Z_j0 + Z(off)
};

// phase of the ray l_a = Z_a R_-, i.e. arg(-Z_a) in (-pi, pi]
double ray_of(const FormalLabel& a, const CentralCharge& Z);

struct BPSData {
  ContextPtr ctx;
  std::map<IntVec, std::int64_t> omega;                      // Omega(gamma)
  std::map<int, std::map<IntVec, Rational>> omega_torsor;    // omega(gamma, gamma_i^0)
  struct RelKey {
    int i, j;
    IntVec off;
    bool operator<(const RelKey& o) const {
      if (i != o.i) return i < o.i;
      if (j != o.j) return j < o.j;
      return off < o.off;
    }
  };
  std::map<RelKey, std::int64_t> mu;

  std::int64_t Omega(const IntVec& gamma) const;
  // omega(gamma, a) per Eqs. 1-3; integrality of omega(gamma, gamma_ij)
  // is checked by validate().
  Rational omega_of(const IntVec& gamma, const FormalLabel& a) const;
  void validate() const;
};

// K-factor: X_a -> (1 - X_gamma)^{-omega(gamma,a)} X_a, truncated.
TruncatedSeries k_factor_apply(const Charge& gamma, const BPSData& data,
                               const TruncatedSeries& s);

// S-factor: X_a -> (1 - mu X_{gamma_ij}) X_a (1 + mu X_{gamma_ij}).
TruncatedSeries s_factor_apply(const FormalLabel& gamma_ij, std::int64_t mu,
                               const TruncatedSeries& s);

struct Sector {
  double start = -M_PI; // phases taken in (start, start + length]
  double length = 2 * M_PI;
};

struct RayFactor {
  double phase;
  bool is_k; // else S
  IntVec gamma;          // K
  FormalLabel gamma_ij;  // S
  std::int64_t mu = 0;
};

// Active factors of (Z, data) whose rays lie in the sector, sorted
// counterclockwise from the sector start.
std::vector<RayFactor> active_factors(const Sector& sector, const CentralCharge& Z,
                                      const BPSData& data);

// Ordered product A(sector) applied to s: factors act in counterclockwise
// ray order with the first-encountered ray applied last.
TruncatedSeries ordered_product(const Sector& sector, const CentralCharge& Z,
                                const BPSData& data, const TruncatedSeries& s);

struct WcfReport {
  bool equal = true;
  std::string basis_label;   // where the first discrepancy occurred
  std::string term_label;
  int degree = -1;
  std::string lhs_coeff, rhs_coeff;
};

// Compare ordered products of two (Z, data) chambers on all basis variables
// (and torsor base labels present in either data set).
WcfReport verify_wcf(const CentralCharge& z1, const BPSData& d1,
                     const CentralCharge& z2, const BPSData& d2,
                     const Sector& sector, ConePtr cone, int max_degree);

// Degree-by-degree recovery of Omega from a target action on the basis
// variables, in the ray order fixed by Z. The target is any callable
// FormalLabel -> TruncatedSeries (typically another chamber's product).
using SeriesAction = std::function<TruncatedSeries(const FormalLabel&)>;
BPSData factorize_spectrum(const SeriesAction& target, const CentralCharge& Z,
                           const Sector& sector, ConePtr cone, int max_degree);

} // namespace wallcross::wcf
