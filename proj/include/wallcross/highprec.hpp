#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace wallcross::hp {

using real = boost::multiprecision::cpp_bin_float_50;

// minimal complex on the 50-digit float (std::complex is only specified for
// the builtin floating types)
struct complex {
  real re{0}, im{0};

  complex() = default;
  complex(real r) : re(std::move(r)) {}
  complex(real r, real i) : re(std::move(r)), im(std::move(i)) {}
  complex(double r) : re(r) {}
  complex(double r, double i) : re(r), im(i) {}

  friend complex operator+(const complex& a, const complex& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend complex operator-(const complex& a, const complex& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend complex operator-(const complex& a) { return {-a.re, -a.im}; }
  friend complex operator*(const complex& a, const complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend complex operator/(const complex& a, const complex& b) {
    const real d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
  }
  complex& operator+=(const complex& o) { return *this = *this + o; }
  complex& operator-=(const complex& o) { return *this = *this - o; }
  complex& operator*=(const complex& o) { return *this = *this * o; }
  complex& operator/=(const complex& o) { return *this = *this / o; }
  friend bool operator==(const complex& a, const complex& b) {
    return a.re == b.re && a.im == b.im;
  }
};

inline real abs(const complex& z) {
  using boost::multiprecision::sqrt;
  return sqrt(z.re * z.re + z.im * z.im);
}

inline complex conj(const complex& z) { return {z.re, -z.im}; }

inline complex sqrt(const complex& z) {
  using boost::multiprecision::sqrt;
  const real r = abs(z);
  if (r == 0) return {real(0), real(0)};
  // principal branch via half-angle formulas
  real u = sqrt((r + z.re) / 2);
  real v = sqrt((r - z.re) / 2);
  if (z.im < 0) v = -v;
  return {u, v};
}

inline double to_double(const real& x) { return static_cast<double>(x); }

} // namespace wallcross::hp
