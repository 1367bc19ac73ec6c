#pragma once

namespace wallcross::num {

// Modified Bessel function of the second kind, order 0 or 1.
// Relative error <= 1e-12 for x in [1e-6, 700]; underflows to 0 past
// the e^{-x} floor. x <= 0 raises a domain error.
double bessel_k(int order, double x);

inline double bessel_k0(double x) { return bessel_k(0, x); }
inline double bessel_k1(double x) { return bessel_k(1, x); }

} // namespace wallcross::num
