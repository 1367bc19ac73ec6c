#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>

// Shared oracle helpers. These stay independent of the library's own
// quadrature and Bessel paths.

namespace testutil {

// Trapezoid with step halving on [a, b]; geometric convergence for analytic
// integrands whose odd derivatives vanish at both ends (or decay to zero).
template <class F>
double trapezoid_refine(const F& f, double a, double b, int max_level = 22,
                        double tol = 1e-15) {
  double h = b - a;
  double t = 0.5 * h * (f(a) + f(b));
  for (int lvl = 1; lvl <= max_level; ++lvl) {
    double sum = 0;
    const long n = 1L << (lvl - 1);
    for (long k = 0; k < n; ++k) sum += f(a + h * (k + 0.5));
    const double t_new = 0.5 * t + 0.5 * h * sum;
    if (lvl > 4 && std::abs(t_new - t) <= tol * (std::abs(t_new) + 1e-300)) return t_new;
    t = t_new;
    h *= 0.5;
  }
  return t;
}

// integral-representation oracle for e^x K_nu(x):
// int_0^T e^{-x(cosh t - 1)} cosh(nu t) dt
inline double bessel_k_scaled_oracle(int nu, double x) {
  const double T = std::acosh(1.0 + 46.0 / x);
  auto f = [&](double t) {
    const double u = 2.0 * std::sinh(0.5 * t);
    const double w = std::exp(-0.5 * x * u * u);
    return nu == 0 ? w : w * std::cosh(t);
  };
  return trapezoid_refine(f, 0.0, T);
}

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

} // namespace testutil
