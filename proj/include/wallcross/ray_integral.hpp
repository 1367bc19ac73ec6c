#pragma once

#include <complex>
#include <functional>

#include "wallcross/quadrature.hpp"

namespace wallcross::num {

using cplx = std::complex<double>;

inline constexpr double kEpsXi = 1e-3; // min angular separation of xi from the ray

// Angular distance of xi from the ray of phase phi, in (-pi, pi].
double angle_to_ray(double phi, cplx xi);

// integral over the ray {xi' = e^{i phi} t, t in (0, inf)} of
//   (dxi'/xi') (xi'+xi)/(xi'-xi) f(xi')
// via t = e^s and expanding panels; f must decay at both ends of the ray.
// Throws xi_near_ray if xi sits within kEpsXi radians of the ray.
cplx ray_kernel_integral(const std::function<cplx(cplx)>& f, double phi, cplx xi,
                         const QuadratureConfig& cfg = {});

// Same contour without the Cauchy kernel: integral of (dxi'/xi') f(xi').
// This is the xi -> 0 limit of the kernel integral.
cplx ray_plain_integral(const std::function<cplx(cplx)>& f, double phi,
                        const QuadratureConfig& cfg = {});

} // namespace wallcross::num
