#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wallcross/error.hpp"

namespace wallcross::algebra {

using Rational = boost::multiprecision::cpp_rational;
using IntVec = std::vector<std::int64_t>;

IntVec add(const IntVec& a, const IntVec& b);
IntVec sub(const IntVec& a, const IntVec& b);
IntVec scale(std::int64_t k, const IntVec& a);
bool is_zero(const IntVec& a);

// Lattice with an integral antisymmetric pairing plus the integral lifts
// that define the twisting function on torsor labels.
class PairingContext {
public:
  explicit PairingContext(std::vector<std::vector<std::int64_t>> pairing);

  int rank() const { return static_cast<int>(pairing_.size()); }
  std::int64_t pair(const IntVec& a, const IntVec& b) const;

  // lift l_i used by sigma on labels of vacuum i; defaults to 0
  void set_lift(int vacuum, IntVec lift);
  const IntVec& lift(int vacuum) const;

  // rank-2 context with <gamma_e, gamma_m> = 1
  static std::shared_ptr<const PairingContext> rank2();

private:
  std::vector<std::vector<std::int64_t>> pairing_;
  std::map<int, IntVec> lifts_;
  IntVec zero_;
};

using ContextPtr = std::shared_ptr<const PairingContext>;

struct Charge {
  ContextPtr ctx;
  IntVec v;

  Charge() = default;
  Charge(ContextPtr c, IntVec coeffs) : ctx(std::move(c)), v(std::move(coeffs)) {}
};

std::int64_t pair(const Charge& a, const Charge& b);

// (q, p) -> (q - Delta p, p), applied t_power times (negative powers allowed).
Charge monodromy_apply(int t_power, const Charge& gamma, std::int64_t Delta);

// Labels of the formal variables X_a: a in Gamma, Gamma_i, or Gamma_ij.
struct FormalLabel {
  enum class Kind : std::uint8_t { charge = 0, torsor = 1, relative = 2 };
  Kind kind = Kind::charge;
  int i = -1, j = -1; // torsor: i; relative: (i, j), i != j
  IntVec off;         // offset in Gamma

  static FormalLabel of_charge(IntVec v);
  static FormalLabel of_torsor(int i, IntVec off);
  static FormalLabel of_relative(int i, int j, IntVec off);

  bool operator<(const FormalLabel& o) const;
  bool operator==(const FormalLabel& o) const;
  std::string str() const;
};

// a + b per the composition table; nullopt when undefined.
std::optional<FormalLabel> compose(const FormalLabel& a, const FormalLabel& b);

// sigma(a, b) = (-1)^{<l(a), l(b)>} with l the integral lift; requires a+b
// defined (composition error otherwise).
int sigma(const PairingContext& ctx, const FormalLabel& a, const FormalLabel& b);

// Truncation cone. simplicial: degree = sum of the (unique, nonnegative)
// coordinates in a unimodular basis, -1 outside; additive, so truncated
// products stay associative. norm: degree = sum |coordinates|, for spectra
// that contain opposite charges.
class Cone {
public:
  enum class Mode { simplicial, norm };
  Cone(Mode mode, std::vector<IntVec> basis);

  // degree of a charge vector; -1 means outside the cone
  int degree_charge(const IntVec& v) const;
  // torsor/relative labels: degree of the offset part
  int degree(const FormalLabel& a) const;
  Mode mode() const { return mode_; }

private:
  Mode mode_;
  std::vector<IntVec> basis_;
  std::vector<std::vector<Rational>> inv_; // basis^{-1}
};

using ConePtr = std::shared_ptr<const Cone>;

class TruncatedSeries {
public:
  TruncatedSeries(ContextPtr ctx, ConePtr cone, int max_degree);

  static TruncatedSeries variable(ContextPtr ctx, ConePtr cone, int max_degree,
                                  const FormalLabel& a);
  static TruncatedSeries one(ContextPtr ctx, ConePtr cone, int max_degree);

  void add_term(const FormalLabel& a, const Rational& c); // drops deg > max
  const std::map<FormalLabel, Rational>& terms() const { return terms_; }
  Rational coeff(const FormalLabel& a) const;

  TruncatedSeries operator+(const TruncatedSeries& o) const;
  TruncatedSeries operator-(const TruncatedSeries& o) const;
  TruncatedSeries operator*(const TruncatedSeries& o) const; // series_mul
  TruncatedSeries scaled(const Rational& c) const;

  bool operator==(const TruncatedSeries& o) const;
  bool is_zero() const { return terms_.empty(); }

  int max_degree() const { return max_degree_; }
  const ContextPtr& ctx() const { return ctx_; }
  const ConePtr& cone() const { return cone_; }

  // canonical sorted JSON (labels sorted by (kind, indices, coefficients))
  std::string to_json() const;

private:
  void check_compatible(const TruncatedSeries& o) const;
  ContextPtr ctx_;
  ConePtr cone_;
  int max_degree_;
  std::map<FormalLabel, Rational> terms_;
};

} // namespace wallcross::algebra
