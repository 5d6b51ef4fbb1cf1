#include "icx/alpha.hpp"

#include <sstream>
#include <stdexcept>

namespace icx {

int alpha_compare(const Alpha& a1, const Alpha& a2) {
  mpz_class lhs, rhs;
  mpz_ui_pow_ui(lhs.get_mpz_t(), a2.B, a1.c);
  mpz_ui_pow_ui(rhs.get_mpz_t(), a1.B, a2.c);
  return cmp(lhs, rhs) > 0 ? 1 : (lhs == rhs ? 0 : -1);
}

Interval::Interval(mpfr_prec_t prec) : prec_(prec) {
  mpfr_init2(lo_, prec);
  mpfr_init2(hi_, prec);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}
Interval::Interval(const Interval& o) : prec_(o.prec_) {
  mpfr_init2(lo_, prec_);
  mpfr_init2(hi_, prec_);
  mpfr_set(lo_, o.lo_, MPFR_RNDD);
  mpfr_set(hi_, o.hi_, MPFR_RNDU);
}
Interval& Interval::operator=(const Interval& o) {
  if (this != &o) {
    mpfr_set_prec(lo_, o.prec_);
    mpfr_set_prec(hi_, o.prec_);
    prec_ = o.prec_;
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
  }
  return *this;
}
Interval::~Interval() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

Interval Interval::exact(const mpq_class& q, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_q(r.lo_, q.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(r.hi_, q.get_mpq_t(), MPFR_RNDU);
  return r;
}

Interval Interval::log_of(u64 u, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_ui(r.lo_, u, MPFR_RNDD);
  mpfr_log(r.lo_, r.lo_, MPFR_RNDD);
  mpfr_set_ui(r.hi_, u, MPFR_RNDU);
  mpfr_log(r.hi_, r.hi_, MPFR_RNDU);
  return r;
}

Interval Interval::operator+(const Interval& o) const {
  Interval r(std::max(prec_, o.prec_));
  mpfr_add(r.lo_, lo_, o.lo_, MPFR_RNDD);
  mpfr_add(r.hi_, hi_, o.hi_, MPFR_RNDU);
  return r;
}
Interval Interval::operator-(const Interval& o) const {
  Interval r(std::max(prec_, o.prec_));
  mpfr_sub(r.lo_, lo_, o.hi_, MPFR_RNDD);
  mpfr_sub(r.hi_, hi_, o.lo_, MPFR_RNDU);
  return r;
}
Interval Interval::operator*(const Interval& o) const {
  Interval r(std::max(prec_, o.prec_));
  mpfr_t c[4];
  for (auto& m : c) mpfr_init2(m, r.prec_);
  mpfr_mul(c[0], lo_, o.lo_, MPFR_RNDD);
  mpfr_mul(c[1], lo_, o.hi_, MPFR_RNDD);
  mpfr_mul(c[2], hi_, o.lo_, MPFR_RNDD);
  mpfr_mul(c[3], hi_, o.hi_, MPFR_RNDD);
  mpfr_min(r.lo_, c[0], c[1], MPFR_RNDD);
  mpfr_min(r.lo_, r.lo_, c[2], MPFR_RNDD);
  mpfr_min(r.lo_, r.lo_, c[3], MPFR_RNDD);
  mpfr_mul(c[0], lo_, o.lo_, MPFR_RNDU);
  mpfr_mul(c[1], lo_, o.hi_, MPFR_RNDU);
  mpfr_mul(c[2], hi_, o.lo_, MPFR_RNDU);
  mpfr_mul(c[3], hi_, o.hi_, MPFR_RNDU);
  mpfr_max(r.hi_, c[0], c[1], MPFR_RNDU);
  mpfr_max(r.hi_, r.hi_, c[2], MPFR_RNDU);
  mpfr_max(r.hi_, r.hi_, c[3], MPFR_RNDU);
  for (auto& m : c) mpfr_clear(m);
  return r;
}
Interval Interval::operator/(const Interval& o) const {
  if (o.contains_zero()) throw std::domain_error("interval division by straddling 0");
  Interval r(std::max(prec_, o.prec_));
  mpfr_t c[4];
  for (auto& m : c) mpfr_init2(m, r.prec_);
  mpfr_div(c[0], lo_, o.lo_, MPFR_RNDD);
  mpfr_div(c[1], lo_, o.hi_, MPFR_RNDD);
  mpfr_div(c[2], hi_, o.lo_, MPFR_RNDD);
  mpfr_div(c[3], hi_, o.hi_, MPFR_RNDD);
  mpfr_min(r.lo_, c[0], c[1], MPFR_RNDD);
  mpfr_min(r.lo_, r.lo_, c[2], MPFR_RNDD);
  mpfr_min(r.lo_, r.lo_, c[3], MPFR_RNDD);
  mpfr_div(c[0], lo_, o.lo_, MPFR_RNDU);
  mpfr_div(c[1], lo_, o.hi_, MPFR_RNDU);
  mpfr_div(c[2], hi_, o.lo_, MPFR_RNDU);
  mpfr_div(c[3], hi_, o.hi_, MPFR_RNDU);
  mpfr_max(r.hi_, c[0], c[1], MPFR_RNDU);
  mpfr_max(r.hi_, r.hi_, c[2], MPFR_RNDU);
  mpfr_max(r.hi_, r.hi_, c[3], MPFR_RNDU);
  for (auto& m : c) mpfr_clear(m);
  return r;
}

bool Interval::contains_zero() const {
  return mpfr_sgn(lo_) <= 0 && mpfr_sgn(hi_) >= 0;
}
int Interval::sign() const {
  if (mpfr_sgn(lo_) > 0) return 1;
  if (mpfr_sgn(hi_) < 0) return -1;
  return 0;
}
double Interval::mid() const {
  return (mpfr_get_d(lo_, MPFR_RNDN) + mpfr_get_d(hi_, MPFR_RNDN)) / 2;
}
double Interval::width() const {
  mpfr_t w;
  mpfr_init2(w, prec_);
  mpfr_sub(w, hi_, lo_, MPFR_RNDU);
  double d = mpfr_get_d(w, MPFR_RNDU);
  mpfr_clear(w);
  return d;
}
mpq_class Interval::lower_q() const {
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), lo_);
  return q;
}
mpq_class Interval::upper_q() const {
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), hi_);
  return q;
}
std::string Interval::str(int digits) const {
  char* s1 = nullptr;
  char* s2 = nullptr;
  mpfr_asprintf(&s1, "%.*Rg", digits, lo_);
  mpfr_asprintf(&s2, "%.*Rg", digits, hi_);
  std::string out = std::string("[") + s1 + ", " + s2 + "]";
  mpfr_free_str(s1);
  mpfr_free_str(s2);
  return out;
}

int CoefExpr::sign_at(const Alpha& a) const {
  // sign of q0 + (c/log B) * sum q_i log u_i
  //   = sign of q0 log B + c sum q_i log u_i          (log B > 0)
  //   = sign of log( B^(d q0) * prod u_i^(d c q_i) )  (d clears denominators)
  // i.e. compare products of integer powers on each side of 1.
  mpz_class d = constant.get_den();
  for (auto& [q, u] : log_terms) d = lcm(d, q.get_den());
  mpz_class e0 = constant.get_num() * (d / constant.get_den());
  mpz_class pos = 1, neg = 1;
  auto mul_pow = [](mpz_class& acc, u64 base, const mpz_class& e) {
    mpz_class p;
    if (!e.fits_ulong_p()) throw std::overflow_error("sign_at: exponent too big");
    mpz_ui_pow_ui(p.get_mpz_t(), base, e.get_ui());
    acc *= p;
  };
  if (e0 > 0) mul_pow(pos, a.B, e0);
  if (e0 < 0) mul_pow(neg, a.B, -e0);
  for (auto& [q, u] : log_terms) {
    mpz_class e = q.get_num() * (d / q.get_den()) * mpz_class((unsigned long)a.c);
    if (e > 0) mul_pow(pos, u, e);
    if (e < 0) mul_pow(neg, u, -e);
  }
  int s = cmp(pos, neg);
  int base = s > 0 ? 1 : (s == 0 ? 0 : -1);
  return sgn(divisor) >= 0 ? base : -base;
}

Interval CoefExpr::eval(const Alpha& a, mpfr_prec_t prec) const {
  Interval alpha = Interval::exact(mpq_class((unsigned long)a.c), prec) /
                   Interval::log_of(a.B, prec);
  Interval acc = Interval::exact(constant, prec);
  for (auto& [q, u] : log_terms)
    acc = acc + Interval::exact(q, prec) * alpha * Interval::log_of(u, prec);
  if (divisor != 1) acc = acc / Interval::exact(divisor, prec);
  return acc;
}

std::string CoefExpr::str() const {
  std::ostringstream os;
  os << constant.get_str();
  for (auto& [q, u] : log_terms)
    os << " + " << q.get_str() << "*a*log(" << u << ")";
  if (divisor != 1) os << " over " << divisor.get_str();
  return os.str();
}

CoefExpr CoefExpr::rational(const mpq_class& q) {
  CoefExpr e;
  e.constant = q;
  return e;
}
CoefExpr CoefExpr::alog(const mpq_class& r, u64 u) {
  CoefExpr e;
  e.log_terms.emplace_back(r, u);
  return e;
}
CoefExpr CoefExpr::plus(const CoefExpr& o) const {
  if (divisor != o.divisor && !(divisor == 1 && o.divisor == 1))
    throw std::logic_error("CoefExpr::plus with mismatched divisors");
  CoefExpr e = *this;
  e.constant += o.constant;
  for (auto& t : o.log_terms) e.log_terms.push_back(t);
  return e;
}
CoefExpr CoefExpr::minus(const CoefExpr& o) const {
  CoefExpr neg = o.scaled(-1);
  return plus(neg);
}
CoefExpr CoefExpr::scaled(const mpq_class& r) const {
  CoefExpr e = *this;
  e.constant *= r;
  for (auto& t : e.log_terms) t.first *= r;
  return e;
}

}  // namespace icx
