#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wallcross/error.hpp"
#include "wallcross/ov.hpp"

using namespace wallcross;
using namespace wallcross::ov;

namespace {

OVParams ov22() {
  OVParams p;
  p.lambda = 1.0;
  p.R = 2.0;
  p.spectrum = {{2, 1}}; // Omega_{+-2} = 1, Delta = 4
  return p;
}

FiberPoint at(cplx a, double te = 0.4, double tm = 1.1) {
  FiberPoint pt;
  pt.z = std::log(a);
  pt.theta_e = te;
  pt.theta_m = tm;
  return pt;
}

std::vector<FiberPoint> random_points(int n, unsigned seed, double rmin = 0.15,
                                      double rmax = 0.7) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> rad(rmin, rmax), ang(-M_PI, M_PI),
      th(0.0, 2 * M_PI);
  std::vector<FiberPoint> pts;
  for (int k = 0; k < n; ++k)
    pts.push_back(at(std::polar(rad(g), ang(g)), th(g), th(g)));
  return pts;
}

} // namespace

TEST_CASE("central charges and tau") {
  auto p = ov22();
  // a = lambda e^{-2pi}: tau = (4/2pi i) log(e^{-2pi}) = 4i
  FiberPoint pt;
  pt.z = std::log(p.lambda) - 2 * M_PI;
  const auto cc = central_charges(pt, p);
  CHECK(std::abs(cc.tau - cplx(0, 4)) < 1e-13);
  CHECK(std::abs(cc.Ze - std::exp(pt.z)) < 1e-15);

  // monodromy z -> z + 2 pi i shifts tau by Delta
  FiberPoint up = pt;
  up.z += cplx(0, 2 * M_PI);
  CHECK(std::abs(central_charges(up, p).tau - (cc.tau + 4.0)) < 1e-12);

  // dZ_m/da equals tau
  for (auto& q : random_points(10, 3)) {
    const double h = 1e-6 * std::abs(q.a());
    auto shifted = [&](double s) {
      FiberPoint w = q;
      w.z = q.z + std::log((q.a() + s) / q.a());
      return central_charges(w, p).Zm;
    };
    const cplx fd = (shifted(h) - shifted(-h)) / (2 * h);
    CHECK(std::abs(fd - central_charges(q, p).tau) < 1e-8);
  }
}

TEST_CASE("central charges domain errors") {
  auto p = ov22();
  CHECK_THROWS_AS(central_charges(at(cplx(1.5, 0)), p), Error);
  // Delta = 0 needs tau0
  OVParams empty;
  empty.lambda = 1.0;
  empty.R = 2.0;
  CHECK_THROWS_AS(empty.validate(), Error);
  empty.tau0 = cplx(0.3, 1.2);
  CHECK_NOTHROW(empty.validate());
  CHECK(std::abs(central_charges(at(cplx(0.4, 0.1)), empty).tau - *empty.tau0) < 1e-15);
}

TEST_CASE("semiflat potential is theta_e independent") {
  auto p = ov22();
  const auto a = cplx(0.3, 0.2);
  const double u0 = potential_u(at(a, 0.0), p, PotentialMode::sf);
  for (double te : {0.7, 2.1, 5.5})
    CHECK(potential_u(at(a, te), p, PotentialMode::sf) == doctest::Approx(u0).epsilon(1e-15));
}

TEST_CASE("exponential suppression of U - U^sf (envelope and slope)") {
  auto p = ov22();
  const cplx a(0.19, 0.05); // min q|a| = 2|a| ~ 0.39
  const double absa = std::abs(a);
  // |U_q - U_q^sf| <= C R exp(-2 pi R q |a|) with a fitted C over R in {2,4,8}
  double fitted_c = 0;
  for (double R : {2.0, 4.0, 8.0}) {
    OVParams q = p;
    q.R = R;
    const double diff = std::abs(potential_u(at(a, 0.3), q, PotentialMode::poisson) -
                                 potential_u(at(a, 0.3), q, PotentialMode::sf));
    fitted_c = std::max(fitted_c, diff / (R * std::exp(-2 * M_PI * R * 2 * absa)));
  }
  for (double R : {2.0, 4.0, 8.0}) {
    OVParams q = p;
    q.R = R;
    const double diff = std::abs(potential_u(at(a, 0.3), q, PotentialMode::poisson) -
                                 potential_u(at(a, 0.3), q, PotentialMode::sf));
    CHECK(diff <= 1.0001 * fitted_c * R * std::exp(-2 * M_PI * R * 2 * absa));
  }
  // least-squares slope of log|U - U^sf| against R
  std::vector<double> rs{2, 4, 8}, ls;
  for (double R : rs) {
    OVParams q = p;
    q.R = R;
    ls.push_back(std::log(std::abs(potential_u(at(a, 0.3), q, PotentialMode::poisson) -
                                   potential_u(at(a, 0.3), q, PotentialMode::sf))));
  }
  const double rbar = (rs[0] + rs[1] + rs[2]) / 3, lbar = (ls[0] + ls[1] + ls[2]) / 3;
  double num = 0, den = 0;
  for (int k = 0; k < 3; ++k) {
    num += (rs[k] - rbar) * (ls[k] - lbar);
    den += (rs[k] - rbar) * (rs[k] - rbar);
  }
  const double slope = num / den, want = -2 * M_PI * 2 * absa;
  CHECK(std::abs(slope - want) / std::abs(want) < 0.05);
}

TEST_CASE("poisson and lattice gradients agree") {
  auto p = ov22();
  LatticeCutoffs cut;
  cut.N = 10000;
  cut.kappa0 = lattice_calibrate(p, cut.N, at(cplx(0.3, 0.1), 0.8));
  auto grad = [&](const FiberPoint& pt, PotentialMode mode) {
    std::array<double, 3> g{};
    const double ha = 1e-5 * std::abs(pt.a()), ht = 1e-5;
    auto U = [&](cplx da, double dte) {
      FiberPoint q = pt;
      q.z = pt.z + std::log((pt.a() + da) / pt.a());
      q.theta_e = pt.theta_e + dte;
      return potential_u(q, p, mode, cut);
    };
    g[0] = (U(ha, 0) - U(-ha, 0)) / (2 * ha);
    g[1] = (U(cplx(0, ha), 0) - U(cplx(0, -ha), 0)) / (2 * ha);
    g[2] = (U(0, ht) - U(0, -ht)) / (2 * ht);
    return g;
  };
  for (auto& pt : random_points(12, 21, 0.12, 0.6)) {
    const auto gp = grad(pt, PotentialMode::poisson);
    const auto gl = grad(pt, PotentialMode::lattice);
    const double scale = std::max({std::abs(gp[0]), std::abs(gp[1]), std::abs(gp[2]), 1.0});
    for (int k = 0; k < 3; ++k) CHECK(std::abs(gp[k] - gl[k]) / scale < 1e-8);
  }
  // and the calibrated values agree outright (Poisson summation)
  for (auto& pt : random_points(6, 22, 0.12, 0.6)) {
    CHECK(std::abs(potential_u(pt, p, PotentialMode::poisson, cut) -
                   potential_u(pt, p, PotentialMode::lattice, cut)) < 1e-9);
  }
}

TEST_CASE("potential rejects singular points and bad Delta") {
  auto p = ov22();
  FiberPoint s;
  s.z = cplx(-40.0, 0.0); // |a| ~ 4e-18, effectively on a = 0
  s.theta_e = 0.0;        // theta_e = 0 is in S_Omega for q = 2
  CHECK_THROWS_AS(potential_u(s, p, PotentialMode::poisson), Error);
  OVParams bad;
  bad.lambda = 1.0;
  bad.R = 2.0;
  bad.tau0 = cplx(0, 1);
  CHECK_THROWS_AS(potential_u(at(cplx(0.3, 0)), bad, PotentialMode::poisson), Error);
}

TEST_CASE("U diverges like 1/(4 pi distance) near singular points") {
  OVParams p;
  p.lambda = 1.0;
  p.R = 1.0;
  p.spectrum = {{1, 1}}; // q = 1: singular point at (a = 0, theta_e = 0)
  const double dist = 1e-3;
  const double u = potential_u(at(cplx(dist, 0), 0.0), p, PotentialMode::poisson);
  CHECK(std::abs(u - 1.0 / (4 * M_PI * dist)) * (4 * M_PI * dist) < 0.02);
}

TEST_CASE("Gibbons-Hawking connection components") {
  auto p = ov22();
  for (auto& pt : random_points(6, 31)) {
    const auto cc = central_charges(pt, p);
    const auto A = connection_a_gh(pt, p);
    // Eq. 95/96 semiflat part: sum q^2 Omega_q (i/8pi^2)(log - conj) = -Re tau/2pi
    CHECK(A.A_thetae == doctest::Approx(-cc.tau.real() / (2 * M_PI)).epsilon(1e-12));
  }
  // real positive a: A_a = -A_abar
  const auto A = connection_a_gh(at(cplx(0.35, 0), 1.3), p);
  CHECK(std::abs(A.A_a + A.A_abar) < 1e-15);
}

TEST_CASE("dA = star dU by finite differences") {
  auto p = ov22();
  const double R = p.R;
  auto x_of = [&](const FiberPoint& pt) {
    return std::array<double, 3>{pt.a().real(), pt.a().imag(), pt.theta_e / (2 * M_PI * R)};
  };
  auto at_x = [&](std::array<double, 3> x) {
    FiberPoint pt;
    pt.z = std::log(cplx(x[0], x[1]));
    pt.theta_e = 2 * M_PI * R * x[2];
    return pt;
  };
  for (auto& pt : random_points(20, 41, 0.2, 0.6)) {
    auto x0 = x_of(pt);
    const double h = 1e-5;
    std::array<std::array<double, 3>, 3> dA{}; // dA[i][j] = d A_j / d x_i
    std::array<double, 3> dU{};
    for (int i = 0; i < 3; ++i) {
      auto xp = x0, xm = x0;
      xp[i] += h;
      xm[i] -= h;
      const auto Ap = connection_a_gh(at_x(xp), p).x_components(R);
      const auto Am = connection_a_gh(at_x(xm), p).x_components(R);
      for (int j = 0; j < 3; ++j) dA[i][j] = (Ap[j] - Am[j]) / (2 * h);
      dU[i] = (potential_u(at_x(xp), p, PotentialMode::poisson) -
               potential_u(at_x(xm), p, PotentialMode::poisson)) /
              (2 * h);
    }
    const double scale =
        std::max({std::abs(dU[0]), std::abs(dU[1]), std::abs(dU[2]), 1.0});
    CHECK(std::abs((dA[0][1] - dA[1][0]) - dU[2]) / scale < 1e-6);
    CHECK(std::abs((dA[1][2] - dA[2][1]) - dU[0]) / scale < 1e-6);
    CHECK(std::abs((dA[2][0] - dA[0][2]) - dU[1]) / scale < 1e-6);
  }
}

TEST_CASE("GH metric with semiflat data reproduces the semiflat metric") {
  auto p = ov22();
  for (auto& pt : random_points(10, 51)) {
    const auto cc = central_charges(pt, p);
    const double U = p.R * cc.tau.imag();
    const std::array<double, 4> beta{0, 0, -p.R * cc.tau.real(), 1.0 / (2 * M_PI)};
    Mat4 gh{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) gh[i][j] = beta[i] * beta[j] / U + (i == j && i < 3 ? U : 0);
    const auto sf = metric_assemble(pt, p, MetricMode::semiflat);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(gh[i][j] - sf[i][j]) < 1e-12);
  }
}

TEST_CASE("metric positive definite off the singular set") {
  auto p = ov22();
  for (auto& pt : random_points(100, 61)) {
    const auto g = metric_assemble(pt, p, MetricMode::gh);
    CHECK(metric_min_eigenvalue(g) > 0.0);
  }
}

TEST_CASE("metric errors") {
  OVParams bad;
  bad.lambda = 1.0;
  bad.R = 2.0;
  bad.tau0 = cplx(0, 1); // Delta = 0
  CHECK_THROWS_AS(metric_assemble(at(cplx(0.3, 0.1)), bad, MetricMode::gh), Error);
}

TEST_CASE("dual semiflat metric pulls back to the semiflat metric") {
  auto p = ov22();
  for (auto& pt : random_points(10, 71)) {
    const auto sf = metric_assemble(pt, p, MetricMode::semiflat);
    const auto dual = metric_assemble(pt, p, MetricMode::dual_semiflat);
    // theta_m_check -> theta_e = 2 pi R x3, theta_e_check -> -theta_m
    double J[4][4] = {}; // J[dual index][x index] = d y^k / d x^i
    J[0][0] = J[1][1] = 1;
    J[3][2] = 2 * M_PI * p.R; // dtheta_m_check = 2 pi R dx3
    J[2][3] = -1;             // dtheta_e_check = -dtheta_m
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l) s += J[k][i] * dual[k][l] * J[l][j];
        CHECK(std::abs(s - sf[i][j]) < 1e-12);
      }
  }
}

TEST_CASE("metric monodromy invariance under T-hat") {
  auto p = ov22();
  const auto D = p.Delta();
  for (auto& pt : random_points(8, 81)) {
    const auto g0 = metric_assemble(pt, p, MetricMode::gh);
    const auto g1 = metric_assemble(t_hat(pt, D), p, MetricMode::gh);
    // pull back through dtheta_m' = dtheta_m + 2 pi R Delta dx3
    double J[4][4] = {};
    J[0][0] = J[1][1] = J[2][2] = J[3][3] = 1;
    J[3][2] = 2 * M_PI * p.R * static_cast<double>(D);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l) s += J[k][i] * g1[k][l] * J[l][j];
        CHECK(std::abs(s - g0[i][j]) < 1e-12);
      }
  }
}

TEST_CASE("hyperkahler wedge relations of the triple") {
  auto p = ov22();
  for (auto& pt : random_points(50, 91)) {
    const auto t = kahler_triple(pt, p);
    const double v11 = wedge4(t.w1, t.w1);
    const double v22 = wedge4(t.w2, t.w2);
    const double v33 = wedge4(t.w3, t.w3);
    const double scale = std::abs(v11) + 1e-300;
    CHECK(std::abs(wedge4(t.w1, t.w2)) / scale < 1e-9);
    CHECK(std::abs(wedge4(t.w2, t.w3)) / scale < 1e-9);
    CHECK(std::abs(wedge4(t.w1, t.w3)) / scale < 1e-9);
    CHECK(std::abs(v11 - v22) / scale < 1e-9);
    CHECK(std::abs(v11 - v33) / scale < 1e-9);
  }
}

TEST_CASE("Omega_3 equals w1 + i w2") {
  auto p = ov22();
  for (auto& pt : random_points(10, 101)) {
    const auto t = kahler_triple(pt, p);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(std::abs(t.omega3[i][j] - (t.w1[i][j] + cplx(0, 1) * t.w2[i][j])) < 1e-12);
  }
}

TEST_CASE("Omega_3 is closed (finite differences)") {
  auto p = ov22();
  const double R = p.R;
  auto form_at = [&](std::array<double, 3> x) {
    FiberPoint pt;
    pt.z = std::log(cplx(x[0], x[1]));
    pt.theta_e = 2 * M_PI * R * x[2];
    return kahler_triple(pt, p).omega3;
  };
  const std::array<double, 3> x0{0.31, 0.14, 0.05};
  const double h = 1e-5;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k) {
        auto d_of = [&](int dir, int a, int b) -> cplx {
          if (dir == 3) return 0.0; // no theta_m dependence
          auto xp = x0, xm = x0;
          xp[dir] += h;
          xm[dir] -= h;
          return (form_at(xp)[a][b] - form_at(xm)[a][b]) / (2 * h);
        };
        const cplx total = d_of(i, j, k) - d_of(j, i, k) + d_of(k, i, j);
        CHECK(std::abs(total) < 1e-6);
      }
}

TEST_CASE("singular set") {
  auto p = ov22();
  const auto s22 = singular_set(p);
  REQUIRE(s22.size() == 2);
  CHECK(s22[0] == doctest::Approx(0.0));
  CHECK(s22[1] == doctest::Approx(M_PI));
  OVParams p1 = p;
  p1.spectrum = {{1, 2}};
  const auto s1 = singular_set(p1);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0] == doctest::Approx(0.0));
  OVParams p0 = p;
  p0.spectrum = {};
  p0.tau0 = cplx(0, 1);
  CHECK(singular_set(p0).empty());
}

TEST_CASE("mirror constructions") {
  auto p = ov22();
  const auto self = mirror_build(p, MirrorMode::self);
  CHECK(self.self);
  CHECK(self.params.Delta() == 4);
  CHECK(self.swap_rule == "(theta_e, theta_m) -> (theta_m_check, -theta_e_check)");
  // modified with Omega'_{+-1} = 4 keeps Delta = 4
  const auto mod = mirror_build(p, MirrorMode::modified, {{{1, 4}}});
  CHECK(mod.params.Delta() == 4);
  CHECK(mod.params.spectrum.at(1) == 4);
  // Omega'_{+-1} = 2 would give Delta = 2: rejected
  CHECK_THROWS_AS(mirror_build(p, MirrorMode::modified, {{{1, 2}}}), Error);
}

TEST_CASE("fiber periods are 1 and tau") {
  auto p = ov22();
  for (auto& pt : {at(cplx(0.4, 0.1)), at(cplx(-0.2, 0.35), 2.0)}) {
    const auto per = periods_check(p, pt);
    CHECK(std::abs(per.period_m - 1.0) < 1e-8);
    CHECK(std::abs(per.period_e - central_charges(pt, p).tau) < 1e-6);
  }
  // semiflat truncation: the theta_e-cycle integrand is constant, so the
  // closed form gives tau exactly
  const auto pt = at(cplx(0.4, 0.1));
  const auto cc = central_charges(pt, p);
  const cplx integrand =
      -cc.tau.real() / (2 * M_PI) - cplx(0, 1) * (p.R * cc.tau.imag()) / (2 * M_PI * p.R);
  CHECK(std::abs(-(2 * M_PI) * integrand - cc.tau) < 1e-15);
}
