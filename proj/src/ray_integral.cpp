#include "wallcross/ray_integral.hpp"

#include <cmath>

#include "wallcross/error.hpp"

namespace wallcross::num {

double angle_to_ray(double phi, cplx xi) {
  double d = std::arg(xi) - phi;
  while (d > M_PI) d -= 2 * M_PI;
  while (d <= -M_PI) d += 2 * M_PI;
  return d;
}

cplx ray_kernel_integral(const std::function<cplx(cplx)>& f, double phi, cplx xi,
                         const QuadratureConfig& cfg) {
  if (std::abs(angle_to_ray(phi, xi)) < kEpsXi)
    fail(errc::xi_near_ray, "xi too close to the integration ray");
  const cplx eiphi = std::polar(1.0, phi);
  auto g = [&](double s) -> cplx {
    const cplx xp = eiphi * std::exp(s);
    return (xp + xi) / (xp - xi) * f(xp);
  };
  return integrate_real_line<decltype(g), cplx>(g, cfg);
}

cplx ray_plain_integral(const std::function<cplx(cplx)>& f, double phi,
                        const QuadratureConfig& cfg) {
  const cplx eiphi = std::polar(1.0, phi);
  auto g = [&](double s) -> cplx { return f(eiphi * std::exp(s)); };
  return integrate_real_line<decltype(g), cplx>(g, cfg);
}

} // namespace wallcross::num
