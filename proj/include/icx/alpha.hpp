#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <string>
#include <vector>

#include "icx/complexity.hpp"

namespace icx {

// alpha = c / log B, always an integer pair so that every sign question
// reduces to an exact big-integer power comparison.
struct Alpha {
  u64 c = 1;
  u64 B = 2;
  std::string str() const { return std::to_string(c) + "/log " + std::to_string(B); }
  bool operator==(const Alpha&) const = default;
};

// -1 / 0 / +1 comparison of alpha1 = c1/log B1 against alpha2 = c2/log B2,
// exact: sign(c1 log B2 - c2 log B1) = sign(B2^c1 - B1^c2).
int alpha_compare(const Alpha& a1, const Alpha& a2);

// Certified enclosure [lo, hi] of a real number, MPFR directed rounding.
class Interval {
public:
  explicit Interval(mpfr_prec_t prec = 128);
  Interval(const Interval&);
  Interval& operator=(const Interval&);
  ~Interval();

  static Interval exact(const mpq_class& q, mpfr_prec_t prec);
  static Interval log_of(u64 u, mpfr_prec_t prec);

  Interval operator+(const Interval&) const;
  Interval operator-(const Interval&) const;
  Interval operator*(const Interval&) const;
  Interval operator/(const Interval&) const;  // requires divisor sign known

  bool contains_zero() const;
  int sign() const;  // -1/0(+straddle)/+1; 0 means the interval straddles 0
  double mid() const;
  double width() const;
  mpq_class lower_q() const;  // exact rational equal to the stored lower bound
  mpq_class upper_q() const;
  std::string str(int digits = 12) const;

  mpfr_prec_t precision() const { return prec_; }

private:
  mpfr_t lo_, hi_;
  mpfr_prec_t prec_;
};

// q0 + sum_i q_i * alpha * log(u_i), all q rational, u positive integers.
// An optional positive rational divisor scales the whole expression.
struct CoefExpr {
  mpq_class constant = 0;
  std::vector<std::pair<mpq_class, u64>> log_terms;  // (q_i, u_i)
  mpq_class divisor = 1;

  // exact sign at alpha (big-integer power comparison, no floating point)
  int sign_at(const Alpha& a) const;
  // certified enclosure at alpha
  Interval eval(const Alpha& a, mpfr_prec_t prec) const;

  std::string str() const;

  static CoefExpr rational(const mpq_class& q);
  // r * alpha * log(u) shorthand
  static CoefExpr alog(const mpq_class& r, u64 u);
  CoefExpr plus(const CoefExpr& o) const;
  CoefExpr minus(const CoefExpr& o) const;
  CoefExpr scaled(const mpq_class& r) const;
};

}  // namespace icx
