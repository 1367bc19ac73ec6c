#include "wallcross/wallcrossing.hpp"

#include <algorithm>
#include <cmath>

namespace wallcross::wcf {

using algebra::compose;
using algebra::sigma;

cplx CentralCharge::eval_charge(const IntVec& v) const {
  if (v.size() != z_basis.size()) fail(errc::context_mismatch, "Z basis size mismatch");
  cplx z = 0;
  for (size_t k = 0; k < v.size(); ++k) z += static_cast<double>(v[k]) * z_basis[k];
  return z;
}

cplx CentralCharge::eval(const FormalLabel& a) const {
  using K = FormalLabel::Kind;
  const cplx zoff = eval_charge(a.off);
  if (a.kind == K::charge) return zoff;
  auto zi = z_vacuum.find(a.i);
  if (zi == z_vacuum.end()) fail(errc::config_error, "missing Z for vacuum");
  if (a.kind == K::torsor) return zi->second + zoff;
  auto zj = z_vacuum.find(a.j);
  if (zj == z_vacuum.end()) fail(errc::config_error, "missing Z for vacuum");
  return zi->second - zj->second + zoff;
}

double ray_of(const FormalLabel& a, const CentralCharge& Z) {
  const cplx z = Z.eval(a);
  if (std::abs(z) == 0.0) fail(errc::degenerate_charge, "Z_a = 0 has no ray");
  double r = std::arg(-z);
  if (r <= -M_PI) r = M_PI; // phase convention (-pi, pi]; kills the -0.0 branch
  return r;
}

std::int64_t BPSData::Omega(const IntVec& gamma) const {
  auto it = omega.find(gamma);
  return it == omega.end() ? 0 : it->second;
}

Rational BPSData::omega_of(const IntVec& gamma, const FormalLabel& a) const {
  using K = FormalLabel::Kind;
  const Rational om = Omega(gamma);
  const Rational paired = om * ctx->pair(gamma, a.off);
  if (a.kind == K::charge) return paired;
  auto base = [&](int i) -> Rational {
    auto ti = omega_torsor.find(i);
    if (ti == omega_torsor.end()) return 0;
    auto gi = ti->second.find(gamma);
    return gi == ti->second.end() ? Rational(0) : gi->second;
  };
  if (a.kind == K::torsor) return base(a.i) + paired;
  return base(a.i) - base(a.j) + paired;
}

void BPSData::validate() const {
  // Eq. 3: omega(gamma, gamma_ij) must be an integer for every stored pair.
  std::vector<int> vacua;
  for (auto& [i, m] : omega_torsor) vacua.push_back(i);
  std::vector<IntVec> charges;
  for (auto& [g, o] : omega) charges.push_back(g);
  for (auto& [i, m] : omega_torsor)
    for (auto& [g, o] : m)
      if (std::find(charges.begin(), charges.end(), g) == charges.end())
        charges.push_back(g);
  for (auto& g : charges)
    for (size_t a = 0; a < vacua.size(); ++a)
      for (size_t b = 0; b < vacua.size(); ++b) {
        if (a == b) continue;
        const FormalLabel rel = FormalLabel::of_relative(vacua[a], vacua[b], IntVec(ctx->rank(), 0));
        const Rational w = omega_of(g, rel);
        if (boost::multiprecision::denominator(w) != 1)
          fail(errc::constraint_violation, "omega(gamma, gamma_ij) is not an integer");
      }
}

TruncatedSeries k_factor_apply(const Charge& gamma, const BPSData& data,
                               const TruncatedSeries& s) {
  if (algebra::is_zero(gamma.v)) fail(errc::degenerate_charge, "K-factor needs gamma != 0");
  const auto cone = s.cone();
  const int dg = cone->degree_charge(gamma.v);
  if (dg < 0) fail(errc::cone_error, "K-factor charge outside the truncation cone");
  TruncatedSeries out(s.ctx(), cone, s.max_degree());
  const auto& ctx = *s.ctx();
  for (auto& [a, ca] : s.terms()) {
    const Rational e = data.omega_of(gamma.v, a);
    // (1 - X_gamma)^{-e} X_a  =  sum_k b_k X_{k gamma} X_a,
    // b_0 = 1, b_k = b_{k-1} (e + k - 1)/k  (exact rationals)
    Rational bk = 1;
    const int da = std::max(cone->degree(a), 0);
    const int kmax = dg > 0 ? (s.max_degree() + da) / dg : 0;
    for (int k = 0; k <= kmax; ++k) {
      if (k > 0) {
        bk *= (e + k - 1);
        bk /= k;
      }
      if (bk == 0) break; // finite polynomial for negative-integer -e
      const FormalLabel xk = FormalLabel::of_charge(algebra::scale(k, gamma.v));
      auto lab = compose(xk, a);
      if (!lab) continue;
      out.add_term(*lab, ca * bk * sigma(ctx, xk, a));
    }
  }
  return out;
}

TruncatedSeries s_factor_apply(const FormalLabel& gamma_ij, std::int64_t mu,
                               const TruncatedSeries& s) {
  if (gamma_ij.kind != FormalLabel::Kind::relative)
    fail(errc::config_error, "S-factor needs a relative charge");
  if (mu == 0) return s;
  TruncatedSeries x = TruncatedSeries::variable(s.ctx(), s.cone(), s.max_degree(), gamma_ij);
  TruncatedSeries one = TruncatedSeries::one(s.ctx(), s.cone(), s.max_degree());
  TruncatedSeries left = one - x.scaled(mu);
  TruncatedSeries right = one + x.scaled(mu);
  return left * s * right;
}

namespace {

double phase_from(double start, double phi) {
  double d = phi - start;
  while (d <= 0) d += 2 * M_PI;
  while (d > 2 * M_PI) d -= 2 * M_PI;
  return d; // in (0, 2 pi]
}

TruncatedSeries apply_factor(const RayFactor& f, const BPSData& data,
                             const TruncatedSeries& s) {
  if (f.is_k) return k_factor_apply(Charge(s.ctx(), f.gamma), data, s);
  return s_factor_apply(f.gamma_ij, f.mu, s);
}

bool factors_commute(const RayFactor& f, const RayFactor& g, const BPSData& data,
                     const TruncatedSeries& probe) {
  auto fg = apply_factor(f, data, apply_factor(g, data, probe));
  auto gf = apply_factor(g, data, apply_factor(f, data, probe));
  return fg == gf;
}

} // namespace

std::vector<RayFactor> active_factors(const Sector& sector, const CentralCharge& Z,
                                      const BPSData& data) {
  std::vector<RayFactor> out;
  // K-rays: charges with Omega != 0 or a nonzero torsor omega
  std::vector<IntVec> kcharges;
  for (auto& [g, om] : data.omega)
    if (om != 0) kcharges.push_back(g);
  for (auto& [i, m] : data.omega_torsor)
    for (auto& [g, w] : m)
      if (w != 0 && std::find(kcharges.begin(), kcharges.end(), g) == kcharges.end())
        kcharges.push_back(g);
  for (auto& g : kcharges) {
    RayFactor f;
    f.is_k = true;
    f.gamma = g;
    f.phase = ray_of(FormalLabel::of_charge(g), Z);
    out.push_back(std::move(f));
  }
  for (auto& [k, mu] : data.mu) {
    if (mu == 0) continue;
    RayFactor f;
    f.is_k = false;
    f.gamma_ij = FormalLabel::of_relative(k.i, k.j, k.off);
    f.mu = mu;
    f.phase = ray_of(f.gamma_ij, Z);
    out.push_back(std::move(f));
  }
  // keep factors inside the sector; reject rays on its boundary
  std::vector<RayFactor> in;
  for (auto& f : out) {
    const double d = phase_from(sector.start, f.phase);
    if (std::abs(d - 2 * M_PI) < kEpsRay || d < kEpsRay ||
        std::abs(d - sector.length) < kEpsRay)
      fail(errc::ray_on_boundary, "active ray on the sector boundary");
    if (d < sector.length) in.push_back(f);
  }
  std::sort(in.begin(), in.end(), [&](const RayFactor& a, const RayFactor& b) {
    return phase_from(sector.start, a.phase) < phase_from(sector.start, b.phase);
  });
  return in;
}

TruncatedSeries ordered_product(const Sector& sector, const CentralCharge& Z,
                                const BPSData& data, const TruncatedSeries& s) {
  auto factors = active_factors(sector, Z, data);
  // coincident phases: allowed only when the factors commute at this degree
  for (size_t k = 0; k + 1 < factors.size(); ++k) {
    if (std::abs(phase_from(sector.start, factors[k].phase) -
                 phase_from(sector.start, factors[k + 1].phase)) < kEpsRay) {
      if (!factors_commute(factors[k], factors[k + 1], data, s))
        fail(errc::ambiguous_order, "non-commuting factors share a ray");
    }
  }
  // counterclockwise order, first-encountered factor applied last
  TruncatedSeries acc = s;
  for (auto it = factors.rbegin(); it != factors.rend(); ++it)
    acc = apply_factor(*it, data, acc);
  return acc;
}

namespace {

std::vector<FormalLabel> probe_labels(const ContextPtr& ctx, const BPSData& d1,
                                      const BPSData& d2) {
  std::vector<FormalLabel> labels;
  const int n = ctx->rank();
  for (int k = 0; k < n; ++k) {
    IntVec e(n, 0);
    e[k] = 1;
    labels.push_back(FormalLabel::of_charge(e));
  }
  auto add_vacua = [&](const BPSData& d) {
    for (auto& [i, m] : d.omega_torsor) {
      FormalLabel t = FormalLabel::of_torsor(i, IntVec(n, 0));
      if (std::find(labels.begin(), labels.end(), t) == labels.end())
        labels.push_back(t);
    }
  };
  add_vacua(d1);
  add_vacua(d2);
  return labels;
}

} // namespace

WcfReport verify_wcf(const CentralCharge& z1, const BPSData& d1,
                     const CentralCharge& z2, const BPSData& d2,
                     const Sector& sector, ConePtr cone, int max_degree) {
  WcfReport rep;
  auto labels = probe_labels(d1.ctx, d1, d2);
  for (auto& b : labels) {
    TruncatedSeries x = TruncatedSeries::variable(d1.ctx, cone, max_degree, b);
    TruncatedSeries lhs = ordered_product(sector, z1, d1, x);
    TruncatedSeries rhs = ordered_product(sector, z2, d2, x);
    if (lhs == rhs) continue;
    // locate the lowest-degree discrepancy
    const FormalLabel* worst = nullptr;
    int worst_deg = max_degree + 1;
    auto scan = [&](const TruncatedSeries& s1, const TruncatedSeries& s2) {
      for (auto& [lab, c] : s1.terms()) {
        if (s2.coeff(lab) == c) continue;
        const int d = cone->degree(lab);
        if (d < worst_deg) {
          worst_deg = d;
          worst = &lab;
        }
      }
    };
    scan(lhs, rhs);
    scan(rhs, lhs);
    rep.equal = false;
    rep.basis_label = b.str();
    if (worst) {
      rep.term_label = worst->str();
      rep.degree = worst_deg;
      rep.lhs_coeff = lhs.coeff(*worst).str();
      rep.rhs_coeff = rhs.coeff(*worst).str();
    }
    return rep;
  }
  return rep;
}

BPSData factorize_spectrum(const SeriesAction& target, const CentralCharge& Z,
                           const Sector& sector, ConePtr cone, int max_degree) {
  const ContextPtr ctx = Z.ctx;
  const int n = ctx->rank();
  BPSData cur;
  cur.ctx = ctx;
  const Sector& full = sector;
  std::vector<FormalLabel> basis;
  for (int k = 0; k < n; ++k) {
    IntVec e(n, 0);
    e[k] = 1;
    basis.push_back(FormalLabel::of_charge(e));
  }
  // cone basis is not exposed; re-derive degree-d shells by scanning a box
  // via the basis of unit vectors expressed in cone coordinates. We simply
  // enumerate lattice points with |coords| <= max_degree in the unit basis
  // and bucket them by cone degree.
  std::map<int, std::vector<IntVec>> shells;
  {
    std::vector<IntVec> unit;
    for (int k = 0; k < n; ++k) {
      IntVec e(n, 0);
      e[k] = 1;
      unit.push_back(e);
    }
    std::function<void(int, IntVec&)> rec = [&](int idx, IntVec& v) {
      if (idx == n) {
        if (algebra::is_zero(v)) return;
        const int d = cone->degree_charge(v);
        if (d >= 1 && d <= max_degree) shells[d].push_back(v);
        return;
      }
      const int box = 4 * max_degree;
      for (int m = -box; m <= box; ++m) {
        v[idx] = m;
        rec(idx + 1, v);
      }
      v[idx] = 0;
    };
    IntVec v(n, 0);
    rec(0, v);
  }
  for (int d = 1; d <= max_degree; ++d) {
    auto it = shells.find(d);
    if (it == shells.end()) continue;
    // unknowns at this degree (only charges that pair nontrivially)
    std::vector<IntVec> unknowns;
    for (auto& g : it->second) {
      bool acts = false;
      for (auto& b : basis)
        if (ctx->pair(g, b.off) != 0) acts = true;
      if (acts && std::abs(Z.eval_charge(g)) > 0) unknowns.push_back(g);
    }
    if (unknowns.empty()) continue;
    // linear system: coefficient of X_{g+b} in (target - current) on probe b
    std::vector<std::vector<Rational>> M;
    std::vector<Rational> rhs;
    for (auto& b : basis) {
      TruncatedSeries x = TruncatedSeries::variable(ctx, cone, max_degree, b);
      TruncatedSeries diff = target(b) - ordered_product(full, Z, cur, x);
      for (size_t u = 0; u < unknowns.size(); ++u) {
        auto lab = compose(FormalLabel::of_charge(unknowns[u]), b);
        if (!lab) continue;
        if (cone->degree(*lab) > max_degree || cone->degree(*lab) < 0) continue;
        std::vector<Rational> row(unknowns.size(), 0);
        for (size_t w = 0; w < unknowns.size(); ++w) {
          if (algebra::add(unknowns[w], b.off) == lab->off)
            row[w] = Rational(ctx->pair(unknowns[w], b.off)) *
                     sigma(*ctx, FormalLabel::of_charge(unknowns[w]), b);
        }
        M.push_back(std::move(row));
        rhs.push_back(diff.coeff(*lab));
      }
    }
    // exact Gaussian elimination with consistency check
    const size_t cols = unknowns.size();
    size_t row = 0;
    std::vector<int> pivot_of(cols, -1);
    for (size_t c = 0; c < cols && row < M.size(); ++c) {
      size_t p = row;
      while (p < M.size() && M[p][c] == 0) ++p;
      if (p == M.size()) continue;
      std::swap(M[p], M[row]);
      std::swap(rhs[p], rhs[row]);
      const Rational piv = M[row][c];
      for (size_t cc = 0; cc < cols; ++cc) M[row][cc] /= piv;
      rhs[row] /= piv;
      for (size_t r = 0; r < M.size(); ++r) {
        if (r == row || M[r][c] == 0) continue;
        const Rational f = M[r][c];
        for (size_t cc = 0; cc < cols; ++cc) M[r][cc] -= f * M[row][cc];
        rhs[r] -= f * rhs[row];
      }
      pivot_of[c] = static_cast<int>(row);
      ++row;
    }
    for (size_t r = row; r < M.size(); ++r)
      if (rhs[r] != 0) fail(errc::no_solution, "target is not an ordered product at this degree");
    for (size_t c = 0; c < cols; ++c) {
      const Rational val = pivot_of[c] < 0 ? Rational(0) : rhs[pivot_of[c]];
      if (boost::multiprecision::denominator(val) != 1)
        fail(errc::no_solution, "non-integer BPS number in factorization");
      if (val != 0)
        cur.omega[unknowns[c]] = static_cast<std::int64_t>(boost::multiprecision::numerator(val));
    }
  }
  // final consistency
  for (auto& b : basis) {
    TruncatedSeries x = TruncatedSeries::variable(ctx, cone, max_degree, b);
    if (!(target(b) == ordered_product(full, Z, cur, x)))
      fail(errc::no_solution, "factorization does not reproduce the target");
  }
  return cur;
}

} // namespace wallcross::wcf
