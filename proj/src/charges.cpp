#include "wallcross/charges.hpp"

#include <algorithm>
#include <sstream>

namespace wallcross::algebra {

IntVec add(const IntVec& a, const IntVec& b) {
  IntVec r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k] + b[k];
  return r;
}

IntVec sub(const IntVec& a, const IntVec& b) {
  IntVec r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k] - b[k];
  return r;
}

IntVec scale(std::int64_t k, const IntVec& a) {
  IntVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = k * a[i];
  return r;
}

bool is_zero(const IntVec& a) {
  return std::all_of(a.begin(), a.end(), [](std::int64_t x) { return x == 0; });
}

PairingContext::PairingContext(std::vector<std::vector<std::int64_t>> pairing)
    : pairing_(std::move(pairing)) {
  const int n = rank();
  zero_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(pairing_[i].size()) != n)
      fail(errc::config_error, "pairing matrix not square");
    for (int j = 0; j < n; ++j)
      if (pairing_[i][j] != -pairing_[j][i])
        fail(errc::config_error, "pairing matrix not antisymmetric");
  }
}

std::int64_t PairingContext::pair(const IntVec& a, const IntVec& b) const {
  if (static_cast<int>(a.size()) != rank() || static_cast<int>(b.size()) != rank())
    fail(errc::context_mismatch, "charge dimension does not match context");
  std::int64_t s = 0;
  for (int i = 0; i < rank(); ++i)
    for (int j = 0; j < rank(); ++j) s += a[i] * pairing_[i][j] * b[j];
  return s;
}

void PairingContext::set_lift(int vacuum, IntVec lift) {
  if (static_cast<int>(lift.size()) != rank())
    fail(errc::config_error, "lift dimension mismatch");
  lifts_[vacuum] = std::move(lift);
}

const IntVec& PairingContext::lift(int vacuum) const {
  auto it = lifts_.find(vacuum);
  return it == lifts_.end() ? zero_ : it->second;
}

std::shared_ptr<const PairingContext> PairingContext::rank2() {
  return std::make_shared<PairingContext>(
      std::vector<std::vector<std::int64_t>>{{0, 1}, {-1, 0}});
}

std::int64_t pair(const Charge& a, const Charge& b) {
  if (a.ctx.get() != b.ctx.get())
    fail(errc::context_mismatch, "charges from different pairing contexts");
  return a.ctx->pair(a.v, b.v);
}

Charge monodromy_apply(int t_power, const Charge& gamma, std::int64_t Delta) {
  if (gamma.v.size() != 2) fail(errc::context_mismatch, "monodromy needs a rank-2 charge");
  Charge r = gamma;
  r.v[0] = gamma.v[0] - static_cast<std::int64_t>(t_power) * Delta * gamma.v[1];
  return r;
}

FormalLabel FormalLabel::of_charge(IntVec v) {
  FormalLabel a;
  a.kind = Kind::charge;
  a.off = std::move(v);
  return a;
}

FormalLabel FormalLabel::of_torsor(int i, IntVec off) {
  FormalLabel a;
  a.kind = Kind::torsor;
  a.i = i;
  a.off = std::move(off);
  return a;
}

FormalLabel FormalLabel::of_relative(int i, int j, IntVec off) {
  if (i == j) fail(errc::config_error, "relative charge needs i != j");
  FormalLabel a;
  a.kind = Kind::relative;
  a.i = i;
  a.j = j;
  a.off = std::move(off);
  return a;
}

bool FormalLabel::operator<(const FormalLabel& o) const {
  if (kind != o.kind) return kind < o.kind;
  if (i != o.i) return i < o.i;
  if (j != o.j) return j < o.j;
  return off < o.off;
}

bool FormalLabel::operator==(const FormalLabel& o) const {
  return kind == o.kind && i == o.i && j == o.j && off == o.off;
}

std::string FormalLabel::str() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::charge: os << "G"; break;
    case Kind::torsor: os << "T" << i; break;
    case Kind::relative: os << "R" << i << "," << j; break;
  }
  os << "[";
  for (size_t k = 0; k < off.size(); ++k) os << (k ? "," : "") << off[k];
  os << "]";
  return os.str();
}

std::optional<FormalLabel> compose(const FormalLabel& a, const FormalLabel& b) {
  using K = FormalLabel::Kind;
  // Gamma + Gamma
  if (a.kind == K::charge && b.kind == K::charge)
    return FormalLabel::of_charge(add(a.off, b.off));
  // Gamma + Gamma_i (both sides)
  if (a.kind == K::charge && b.kind == K::torsor)
    return FormalLabel::of_torsor(b.i, add(a.off, b.off));
  if (a.kind == K::torsor && b.kind == K::charge)
    return FormalLabel::of_torsor(a.i, add(a.off, b.off));
  // Gamma + Gamma_ij (both sides)
  if (a.kind == K::charge && b.kind == K::relative)
    return FormalLabel::of_relative(b.i, b.j, add(a.off, b.off));
  if (a.kind == K::relative && b.kind == K::charge)
    return FormalLabel::of_relative(a.i, a.j, add(a.off, b.off));
  // Gamma_ij + Gamma_j -> Gamma_i
  if (a.kind == K::relative && b.kind == K::torsor && a.j == b.i)
    return FormalLabel::of_torsor(a.i, add(a.off, b.off));
  // Gamma_ij + Gamma_jk -> Gamma_ik, k != i (closing the loop back to the
  // scalar sector would break associativity and S-factor invertibility)
  if (a.kind == K::relative && b.kind == K::relative && a.j == b.i && a.i != b.j)
    return FormalLabel::of_relative(a.i, b.j, add(a.off, b.off));
  return std::nullopt;
}

namespace {
IntVec sigma_lift(const PairingContext& ctx, const FormalLabel& a) {
  using K = FormalLabel::Kind;
  switch (a.kind) {
    case K::charge: return a.off;
    case K::torsor: return add(ctx.lift(a.i), a.off);
    case K::relative: return add(sub(ctx.lift(a.i), ctx.lift(a.j)), a.off);
  }
  return a.off;
}
} // namespace

int sigma(const PairingContext& ctx, const FormalLabel& a, const FormalLabel& b) {
  if (!compose(a, b))
    fail(errc::composition_undefined, "sigma(a,b) needs a+b defined: " + a.str() + " + " + b.str());
  const std::int64_t p = ctx.pair(sigma_lift(ctx, a), sigma_lift(ctx, b));
  return (p % 2 == 0) ? 1 : -1;
}

Cone::Cone(Mode mode, std::vector<IntVec> basis) : mode_(mode), basis_(std::move(basis)) {
  const int n = static_cast<int>(basis_.size());
  if (n == 0) fail(errc::config_error, "cone needs a basis");
  for (auto& b : basis_)
    if (static_cast<int>(b.size()) != n)
      fail(errc::config_error, "cone basis must be square (full rank)");
  // invert the basis matrix over rationals (columns = basis vectors)
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(2 * n, 0));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m[r][c] = Rational(basis_[c][r]);
    m[r][n + r] = 1;
  }
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (m[r][col] != 0) { piv = r; break; }
    if (piv < 0) fail(errc::config_error, "cone basis is singular");
    std::swap(m[col], m[piv]);
    const Rational d = m[col][col];
    for (int c = 0; c < 2 * n; ++c) m[col][c] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0) continue;
      const Rational f = m[r][col];
      for (int c = 0; c < 2 * n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  inv_.assign(n, std::vector<Rational>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) inv_[r][c] = m[r][n + c];
}

int Cone::degree_charge(const IntVec& v) const {
  const int n = static_cast<int>(basis_.size());
  if (static_cast<int>(v.size()) != n) fail(errc::context_mismatch, "charge dimension mismatch");
  Rational total = 0;
  for (int r = 0; r < n; ++r) {
    Rational x = 0;
    for (int c = 0; c < n; ++c) x += inv_[r][c] * v[c];
    if (boost::multiprecision::denominator(x) != 1) return -1; // not a lattice combination
    if (mode_ == Mode::simplicial) {
      if (x < 0) return -1;
      total += x;
    } else {
      total += x < 0 ? -x : x;
    }
  }
  return static_cast<int>(boost::multiprecision::numerator(total));
}

int Cone::degree(const FormalLabel& a) const { return degree_charge(a.off); }

TruncatedSeries::TruncatedSeries(ContextPtr ctx, ConePtr cone, int max_degree)
    : ctx_(std::move(ctx)), cone_(std::move(cone)), max_degree_(max_degree) {
  if (max_degree_ <= 0) fail(errc::config_error, "max_degree must be positive");
}

TruncatedSeries TruncatedSeries::variable(ContextPtr ctx, ConePtr cone, int max_degree,
                                          const FormalLabel& a) {
  TruncatedSeries s(std::move(ctx), std::move(cone), max_degree);
  s.add_term(a, 1);
  return s;
}

TruncatedSeries TruncatedSeries::one(ContextPtr ctx, ConePtr cone, int max_degree) {
  TruncatedSeries s(std::move(ctx), std::move(cone), max_degree);
  s.add_term(FormalLabel::of_charge(IntVec(s.ctx_->rank(), 0)), 1);
  return s;
}

void TruncatedSeries::add_term(const FormalLabel& a, const Rational& c) {
  if (c == 0) return;
  const int d = cone_->degree(a);
  if (d < 0 || d > max_degree_) return; // truncated away, deterministically
  auto [it, fresh] = terms_.try_emplace(a, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Rational TruncatedSeries::coeff(const FormalLabel& a) const {
  auto it = terms_.find(a);
  return it == terms_.end() ? Rational(0) : it->second;
}

void TruncatedSeries::check_compatible(const TruncatedSeries& o) const {
  if (ctx_.get() != o.ctx_.get()) fail(errc::context_mismatch, "series contexts differ");
  if (cone_.get() != o.cone_.get() || max_degree_ != o.max_degree_)
    fail(errc::config_error, "incompatible truncation settings");
}

TruncatedSeries TruncatedSeries::operator+(const TruncatedSeries& o) const {
  check_compatible(o);
  TruncatedSeries r = *this;
  for (auto& [a, c] : o.terms_) r.add_term(a, c);
  return r;
}

TruncatedSeries TruncatedSeries::operator-(const TruncatedSeries& o) const {
  check_compatible(o);
  TruncatedSeries r = *this;
  for (auto& [a, c] : o.terms_) r.add_term(a, -c);
  return r;
}

TruncatedSeries TruncatedSeries::scaled(const Rational& c) const {
  TruncatedSeries r(ctx_, cone_, max_degree_);
  if (c == 0) return r;
  for (auto& [a, v] : terms_) r.terms_[a] = v * c;
  return r;
}

TruncatedSeries TruncatedSeries::operator*(const TruncatedSeries& o) const {
  check_compatible(o);
  TruncatedSeries r(ctx_, cone_, max_degree_);
  for (auto& [a, ca] : terms_) {
    for (auto& [b, cb] : o.terms_) {
      auto ab = compose(a, b);
      if (!ab) continue; // X_a X_b = 0
      const int s = sigma(*ctx_, a, b);
      r.add_term(*ab, ca * cb * s);
    }
  }
  return r;
}

bool TruncatedSeries::operator==(const TruncatedSeries& o) const {
  return terms_ == o.terms_;
}

std::string TruncatedSeries::to_json() const {
  std::ostringstream os;
  os << "{\"max_degree\":" << max_degree_ << ",\"terms\":[";
  bool first = true;
  for (auto& [a, c] : terms_) { // std::map: already label-sorted
    if (!first) os << ",";
    first = false;
    os << "{\"label\":\"" << a.str() << "\",\"coeff\":\"" << c.str() << "\"}";
  }
  os << "]}";
  return os.str();
}

} // namespace wallcross::algebra
