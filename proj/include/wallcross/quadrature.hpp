#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "wallcross/error.hpp"

namespace wallcross::num {

struct QuadratureConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
  double tail_eps = 1e-16; // drop integrand tail below this
};

namespace detail {
// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
inline constexpr double gk_node[8] = {
    0.000000000000000, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813};
inline constexpr double gk_wk[8] = {
    0.209482141084728, 0.204432940075298, 0.190350578064785,
    0.169004726639267, 0.140653259715525, 0.104790010322250,
    0.063092092629979, 0.022935322010529};
inline constexpr double gk_wg[4] = {
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};
} // namespace detail

// One G7/K15 panel; err is the |G7-K15| estimate.
template <class F, class T>
T gk15_panel(const F& f, double a, double b, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T fc = f(c);
  T k15 = detail::gk_wk[0] * fc;
  T g7 = detail::gk_wg[0] * fc;
  for (int i = 1; i < 8; ++i) {
    T s = f(c + h * detail::gk_node[i]) + f(c - h * detail::gk_node[i]);
    k15 += detail::gk_wk[i] * s;
    if (i % 2 == 0) g7 += detail::gk_wg[i / 2] * s;
  }
  k15 *= h;
  g7 *= h;
  err = std::abs(k15 - g7);
  return k15;
}

// Adaptive bisection on [a, b].
template <class F, class T = double>
T integrate_adaptive(const F& f, double a, double b, const QuadratureConfig& cfg) {
  struct Seg { double a, b; };
  std::vector<Seg> stack{{a, b}};
  T sum{};
  double errsum = 0;
  int used = 0;
  // first pass to get a scale
  double err0;
  T whole = gk15_panel<F, T>(f, a, b, err0);
  double scale = std::abs(whole) + cfg.abs_tol;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    double err;
    T v = gk15_panel<F, T>(f, s.a, s.b, err);
    if (err <= cfg.abs_tol + cfg.rel_tol * scale || (s.b - s.a) < 1e-14 * (b - a)) {
      sum += v;
      errsum += err;
      continue;
    }
    if (++used > cfg.max_subdivisions)
      fail(errc::quadrature_error, "adaptive quadrature did not converge");
    double m = 0.5 * (s.a + s.b);
    stack.push_back({s.a, m});
    stack.push_back({m, s.b});
    scale = std::max(scale, std::abs(v));
  }
  (void)errsum;
  return sum;
}

// Integral over the whole real line of a decaying integrand, built from
// unit panels expanding outward until a panel falls below tail_eps.
template <class F, class T = double>
T integrate_real_line(const F& f, const QuadratureConfig& cfg, double panel = 1.0) {
  T sum = integrate_adaptive<F, T>(f, -panel, panel, cfg);
  double scale = std::abs(sum) + cfg.abs_tol;
  for (int dir : {+1, -1}) {
    bool done = false;
    for (int k = 1; k <= 400; ++k) {
      double aa = dir > 0 ? panel * k : -panel * (k + 1);
      double bb = dir > 0 ? panel * (k + 1) : -panel * k;
      T v = integrate_adaptive<F, T>(f, aa, bb, cfg);
      sum += v;
      scale = std::max(scale, std::abs(sum));
      if (std::abs(v) < cfg.tail_eps * scale && k > 2) {
        done = true;
        break;
      }
    }
    if (!done) fail(errc::quadrature_error, "tail did not decay");
  }
  return sum;
}

} // namespace wallcross::num
