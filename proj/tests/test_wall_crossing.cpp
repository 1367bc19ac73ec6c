#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wallcross/error.hpp"
#include "wallcross/wallcrossing.hpp"

using namespace wallcross;
using namespace wallcross::algebra;
using namespace wallcross::wcf;

namespace {

const IntVec kG1{1, 0};
const IntVec kG2{0, 1};
const IntVec kG12{1, 1};

ContextPtr ctx2() { return PairingContext::rank2(); }

ConePtr simp_cone() {
  return std::make_shared<Cone>(Cone::Mode::simplicial, std::vector<IntVec>{{1, 0}, {0, 1}});
}

ConePtr norm_cone() {
  return std::make_shared<Cone>(Cone::Mode::norm, std::vector<IntVec>{{1, 0}, {0, 1}});
}

// Z with prescribed values on the basis
CentralCharge make_z(ContextPtr c, cplx z1, cplx z2) {
  CentralCharge Z;
  Z.ctx = std::move(c);
  Z.z_basis = {z1, z2};
  return Z;
}

BPSData pentagon_a(ContextPtr c) {
  BPSData d;
  d.ctx = std::move(c);
  d.omega[kG1] = 1;
  d.omega[kG2] = 1;
  return d;
}

BPSData pentagon_b(ContextPtr c, bool with_middle = true) {
  BPSData d;
  d.ctx = std::move(c);
  d.omega[kG1] = 1;
  d.omega[kG2] = 1;
  if (with_middle) d.omega[kG12] = 1;
  return d;
}

} // namespace

TEST_CASE("ray_of") {
  auto c = ctx2();
  auto Z = make_z(c, cplx(1, 0), cplx(0, 1));
  CHECK(ray_of(FormalLabel::of_charge(kG1), Z) == doctest::Approx(M_PI));
  CHECK(ray_of(FormalLabel::of_charge(kG2), Z) == doctest::Approx(-M_PI / 2));
  auto Zneg = make_z(c, cplx(-1, 0), cplx(0, 1));
  CHECK(ray_of(FormalLabel::of_charge(kG1), Zneg) == doctest::Approx(0.0));
  auto Z0 = make_z(c, cplx(0, 0), cplx(0, 1));
  CHECK_THROWS_AS(ray_of(FormalLabel::of_charge(kG1), Z0), Error);
}

TEST_CASE("K-factor expansion against a series_mul oracle") {
  auto c = ctx2();
  auto cone = simp_cone();
  const int D = 6;
  BPSData d = pentagon_a(c);
  const auto x2 = TruncatedSeries::variable(c, cone, D, FormalLabel::of_charge(kG2));
  const auto got = k_factor_apply(Charge(c, kG1), d, x2);
  // oracle: sum_k X_{g1}^k X_{g2} via series multiplication (omega(g1,g2)=1)
  TruncatedSeries expect(c, cone, D);
  {
    auto xg1 = TruncatedSeries::variable(c, cone, D, FormalLabel::of_charge(kG1));
    auto pow = TruncatedSeries::one(c, cone, D);
    for (int k = 0; k <= D; ++k) {
      expect = expect + pow * x2;
      pow = pow * xg1;
    }
  }
  CHECK(got == expect);
  // alternating signs from sigma
  CHECK(got.coeff(FormalLabel::of_charge({0, 1})) == Rational(1));
  CHECK(got.coeff(FormalLabel::of_charge({1, 1})) == Rational(-1));
  CHECK(got.coeff(FormalLabel::of_charge({2, 1})) == Rational(1));
}

TEST_CASE("K-factor fixes its own variable") {
  auto c = ctx2();
  auto cone = simp_cone();
  BPSData d = pentagon_a(c);
  const auto xg = TruncatedSeries::variable(c, cone, 6, FormalLabel::of_charge(kG1));
  CHECK(k_factor_apply(Charge(c, kG1), d, xg) == xg);
}

TEST_CASE("K-factor with rational torsor weight uses the binomial series") {
  auto c = ctx2();
  auto cone = simp_cone();
  BPSData d;
  d.ctx = c;
  d.omega[kG1] = 1;
  d.omega_torsor[1][kG1] = Rational(1, 2); // omega(gamma, gamma_1) = 1/2
  const auto t1 = FormalLabel::of_torsor(1, {0, 0});
  const auto got = k_factor_apply(Charge(c, kG1), d, TruncatedSeries::variable(c, cone, 6, t1));
  const int sg = sigma(*c, FormalLabel::of_charge(kG1), t1);
  CHECK(got.coeff(t1) == Rational(1));
  CHECK(got.coeff(FormalLabel::of_torsor(1, {1, 0})) == Rational(sg, 2));
  // next binomial coefficient: C(1/2 + 1, 2) = 3/8
  CHECK(got.coeff(FormalLabel::of_torsor(1, {2, 0})) == Rational(3, 8));
}

TEST_CASE("K-factor outside the cone is rejected") {
  auto c = ctx2();
  auto cone = simp_cone();
  BPSData d;
  d.ctx = c;
  d.omega[IntVec{-1, 0}] = 1;
  const auto x = TruncatedSeries::variable(c, cone, 6, FormalLabel::of_charge(kG2));
  CHECK_THROWS_AS(k_factor_apply(Charge(c, IntVec{-1, 0}), d, x), Error);
}

TEST_CASE("S-factor") {
  auto c = ctx2();
  auto cone = norm_cone();
  const int D = 6;
  const auto rel12 = FormalLabel::of_relative(1, 2, {0, 0});
  // fixes plain charges
  const auto xg = TruncatedSeries::variable(c, cone, D, FormalLabel::of_charge(kG1));
  CHECK(s_factor_apply(rel12, 1, xg) == xg);
  // acts on composable relative labels: S_{12}(X_{23}) = X_{23} - mu sigma X_{13}
  const auto x23 = TruncatedSeries::variable(c, cone, D, FormalLabel::of_relative(2, 3, {0, 0}));
  const auto got = s_factor_apply(rel12, 1, x23);
  const int sg = sigma(*c, rel12, FormalLabel::of_relative(2, 3, {0, 0}));
  CHECK(got.coeff(FormalLabel::of_relative(2, 3, {0, 0})) == Rational(1));
  CHECK(got.coeff(FormalLabel::of_relative(1, 3, {0, 0})) == Rational(-sg));
  // mu = 0 is the identity
  CHECK(s_factor_apply(rel12, 0, x23) == x23);
}

TEST_CASE("S-factor conjugation inverts") {
  auto c = ctx2();
  auto cone = norm_cone();
  const auto rel12 = FormalLabel::of_relative(1, 2, {1, 0});
  TruncatedSeries s(c, cone, 6);
  s.add_term(FormalLabel::of_charge(kG1), Rational(2, 3));
  s.add_term(FormalLabel::of_torsor(2, {0, 1}), Rational(-1, 2));
  s.add_term(FormalLabel::of_relative(2, 1, {0, 0}), Rational(5));
  const auto round = s_factor_apply(rel12, -3, s_factor_apply(rel12, 3, s));
  CHECK(round == s);
}

TEST_CASE("ordered product: empty spectrum") {
  auto c = ctx2();
  auto cone = norm_cone();
  BPSData d;
  d.ctx = c;
  auto Z = make_z(c, cplx(1, 0.3), cplx(-0.2, 1));
  const auto x = TruncatedSeries::variable(c, cone, 6, FormalLabel::of_charge(kG2));
  CHECK(ordered_product(Sector{}, Z, d, x) == x);
}

TEST_CASE("OV spectrum: full-circle product independent of arg(a)") {
  auto c = ctx2();
  auto cone = norm_cone();
  const int D = 9;
  BPSData d;
  d.ctx = c;
  d.omega[IntVec{2, 0}] = 1;
  d.omega[IntVec{-2, 0}] = 1;
  std::vector<TruncatedSeries> results;
  for (int k = 0; k < 8; ++k) {
    const double arga = -M_PI + 0.13 + 2 * M_PI * k / 8.0;
    const cplx a = std::polar(0.7, arga);
    // Z(gamma_m) irrelevant for the rays here; keep it generic
    auto Z = make_z(c, a, cplx(0.1, 0.9));
    Sector sec{arga + 0.4, 2 * M_PI};
    for (auto b : {FormalLabel::of_charge(kG1), FormalLabel::of_charge(kG2)}) {
      results.push_back(
          ordered_product(sec, Z, d, TruncatedSeries::variable(c, cone, D, b)));
    }
  }
  for (size_t k = 2; k < results.size(); k += 2) {
    CHECK(results[k] == results[0]);
    CHECK(results[k + 1] == results[1]);
  }
}

TEST_CASE("pentagon wall-crossing formula at degree 10") {
  auto c = ctx2();
  auto cone = simp_cone();
  // chamber A: ray(g1) after ray(g2); chamber B: reversed, with g1+g2
  // boundary at phase 0: no ray crosses it between the two chambers
  const Sector sec{0.0, 2 * M_PI};
  auto Za = make_z(c, std::polar(1.0, 0.4), std::polar(1.0, -0.3));
  auto Zb = make_z(c, std::polar(1.0, -0.3), std::polar(1.0, 0.4));
  const auto rep = verify_wcf(Za, pentagon_a(c), Zb, pentagon_b(c), sec, cone, 10);
  CHECK(rep.equal);
}

TEST_CASE("identical chambers trivially agree") {
  auto c = ctx2();
  auto cone = simp_cone();
  auto Z = make_z(c, std::polar(1.0, -0.3), std::polar(1.0, 0.4));
  const auto rep =
      verify_wcf(Z, pentagon_a(c), Z, pentagon_a(c), Sector{0.0, 2 * M_PI}, cone, 8);
  CHECK(rep.equal);
}

TEST_CASE("broken pentagon reports the first discrepancy") {
  auto c = ctx2();
  auto cone = simp_cone();
  const Sector sec{0.0, 2 * M_PI};
  auto Za = make_z(c, std::polar(1.0, 0.4), std::polar(1.0, -0.3));
  auto Zb = make_z(c, std::polar(1.0, -0.3), std::polar(1.0, 0.4));
  const auto rep =
      verify_wcf(Za, pentagon_a(c), Zb, pentagon_b(c, false), sec, cone, 10);
  CHECK(!rep.equal);
  // brute-force oracle: the lowest discrepant label is 2g1+g2 (cone degree 3);
  // the missing factor itself sits at degree 2
  CHECK(rep.degree == 3);
  CHECK(rep.term_label == "G[2,1]");
}

TEST_CASE("K-factors of mutually local charges commute") {
  auto c = ctx2();
  auto cone = norm_cone();
  BPSData d;
  d.ctx = c;
  d.omega[IntVec{1, 0}] = 1;
  d.omega[IntVec{2, 0}] = 1;
  const auto x = TruncatedSeries::variable(c, cone, 8, FormalLabel::of_charge(kG2));
  auto ab = k_factor_apply(Charge(c, IntVec{1, 0}), d,
                           k_factor_apply(Charge(c, IntVec{2, 0}), d, x));
  auto ba = k_factor_apply(Charge(c, IntVec{2, 0}), d,
                           k_factor_apply(Charge(c, IntVec{1, 0}), d, x));
  CHECK(ab == ba);
}

TEST_CASE("full-circle product invariant under wall-free perturbations of Z") {
  auto c = ctx2();
  auto cone = simp_cone();
  const auto d = pentagon_a(c);
  auto Z = make_z(c, std::polar(1.0, -0.3), std::polar(1.0, 0.4));
  const auto x = TruncatedSeries::variable(c, cone, 8, FormalLabel::of_charge(kG1));
  const auto ref = ordered_product(Sector{}, Z, d, x);
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> eps(-0.05, 0.05);
  for (int k = 0; k < 6; ++k) {
    auto Zp = make_z(c, Z.z_basis[0] * std::polar(1.0 + eps(g), eps(g)),
                     Z.z_basis[1] * std::polar(1.0 + eps(g), eps(g)));
    CHECK(ordered_product(Sector{}, Zp, d, x) == ref);
  }
}

TEST_CASE("coincident non-commuting rays raise ambiguous order") {
  auto c = ctx2();
  auto cone = simp_cone();
  const auto d = pentagon_a(c);
  auto Z = make_z(c, std::polar(1.0, 0.2), std::polar(1.0, 0.2)); // same ray, <g1,g2> = 1
  const auto x = TruncatedSeries::variable(c, cone, 6, FormalLabel::of_charge(kG1));
  CHECK_THROWS_AS(ordered_product(Sector{}, Z, d, x), Error);
}

TEST_CASE("ray on the sector boundary is an error") {
  auto c = ctx2();
  auto cone = simp_cone();
  const auto d = pentagon_a(c);
  auto Z = make_z(c, std::polar(1.0, 0.2), std::polar(1.0, 0.9));
  const double boundary = ray_of(FormalLabel::of_charge(kG1), Z);
  const auto x = TruncatedSeries::variable(c, cone, 6, FormalLabel::of_charge(kG2));
  CHECK_THROWS_AS(ordered_product(Sector{boundary, 2 * M_PI}, Z, d, x), Error);
}

TEST_CASE("omega torsor integrality is validated") {
  auto c = ctx2();
  BPSData d;
  d.ctx = c;
  d.omega[kG1] = 1;
  d.omega_torsor[1][kG1] = Rational(1, 2);
  d.omega_torsor[2][kG1] = Rational(0);
  // omega(g1, gamma_12) = 1/2 - 0 not an integer
  CHECK_THROWS_AS(d.validate(), Error);
  d.omega_torsor[2][kG1] = Rational(-1, 2);
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("factorize_spectrum recovers the pentagon middle charge") {
  auto c = ctx2();
  auto cone = simp_cone();
  const int D = 8;
  const Sector sec{0.0, 2 * M_PI};
  auto Za = make_z(c, std::polar(1.0, 0.4), std::polar(1.0, -0.3));
  auto Zb = make_z(c, std::polar(1.0, -0.3), std::polar(1.0, 0.4));
  const auto da = pentagon_a(c);
  SeriesAction target = [&](const FormalLabel& b) {
    return ordered_product(sec, Za, da, TruncatedSeries::variable(c, cone, D, b));
  };
  const auto got = factorize_spectrum(target, Zb, sec, cone, D);
  CHECK(got.Omega(kG1) == 1);
  CHECK(got.Omega(kG2) == 1);
  CHECK(got.Omega(kG12) == 1);
  CHECK(got.omega.size() == 3);
}

TEST_CASE("factorize_spectrum: identity target") {
  auto c = ctx2();
  auto cone = simp_cone();
  auto Z = make_z(c, std::polar(1.0, 0.4), std::polar(1.0, -0.3));
  SeriesAction target = [&](const FormalLabel& b) {
    return TruncatedSeries::variable(c, cone, 8, b);
  };
  CHECK(factorize_spectrum(target, Z, Sector{0.0, 2 * M_PI}, cone, 8).omega.empty());
}

TEST_CASE("factorize_spectrum: K^2 target gives Omega = 2") {
  auto c = ctx2();
  auto cone = simp_cone();
  const int D = 8;
  auto Z = make_z(c, std::polar(1.0, 0.4), std::polar(1.0, -0.3));
  BPSData d2;
  d2.ctx = c;
  d2.omega[kG1] = 2;
  SeriesAction target = [&](const FormalLabel& b) {
    return ordered_product(Sector{0.0, 2 * M_PI}, Z, d2,
                           TruncatedSeries::variable(c, cone, D, b));
  };
  const auto got = factorize_spectrum(target, Z, Sector{0.0, 2 * M_PI}, cone, D);
  CHECK(got.Omega(kG1) == 2);
  CHECK(got.omega.size() == 1);
}

TEST_CASE("factorize + ordered product round trip on random small spectra") {
  auto c = ctx2();
  auto cone = simp_cone();
  const int D = 8;
  std::mt19937_64 g(17);
  std::uniform_int_distribution<int> om(-2, 2), pick(0, 3);
  const std::vector<IntVec> pool{{1, 0}, {0, 1}, {1, 1}, {2, 1}};
  for (int trial = 0; trial < 10; ++trial) {
    BPSData d;
    d.ctx = c;
    int support = 0;
    for (auto& v : pool) {
      const int o = om(g);
      if (o != 0 && support < 4) {
        d.omega[v] = o;
        ++support;
      }
    }
    auto Z = make_z(c, std::polar(1.0, 0.4), std::polar(1.0, -0.3));
    const Sector sec{0.0, 2 * M_PI};
    SeriesAction target = [&](const FormalLabel& b) {
      return ordered_product(sec, Z, d, TruncatedSeries::variable(c, cone, D, b));
    };
    const auto got = factorize_spectrum(target, Z, sec, cone, D);
    for (auto& v : pool) CHECK(got.Omega(v) == d.Omega(v));
  }
}
