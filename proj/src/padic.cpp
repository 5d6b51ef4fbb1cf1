#include "icx/padic.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace icx {

std::string to_string(Balance b) {
  switch (b) {
    case Balance::Balanced: return "balanced";
    case Balance::Efficient: return "efficient";
    default: return "inefficient";
  }
}

namespace {

u64 powmod(u64 b, u64 e, u64 m) {
  unsigned __int128 r = 1, base = b % m;
  while (e) {
    if (e & 1) r = r * base % m;
    base = base * base % m;
    e >>= 1;
  }
  return u64(r);
}

std::vector<std::pair<u64, unsigned>> factorize(u64 n) {
  std::vector<std::pair<u64, unsigned>> f;
  for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p) continue;
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    f.emplace_back(p, e);
  }
  if (n > 1) f.emplace_back(n, 1);
  return f;
}

}  // namespace

u64 multiplicative_order(u64 p, u64 n) {
  if (n < 2 || std::gcd(p, n) != 1)
    throw std::domain_error("multiplicative_order: need n > 1 and gcd(p, n) = 1");
  // d divides lambda(n); start from lambda and strip prime factors
  u64 lambda = 1;
  for (auto [q, e] : factorize(n)) {
    u64 lam_q;
    if (q == 2)
      lam_q = e == 1 ? 1 : (e == 2 ? 2 : (u64(1) << (e - 2)));
    else {
      lam_q = (q - 1);
      for (unsigned i = 1; i < e; ++i) lam_q *= q;
    }
    lambda = std::lcm(lambda, lam_q);
  }
  u64 d = lambda;
  for (auto [q, e] : factorize(lambda)) {
    for (unsigned i = 0; i < e; ++i) {
      if (d % q == 0 && powmod(p, d / q, n) == 1) d /= q;
    }
  }
  if (powmod(p, d, n) != 1)
    throw std::logic_error("multiplicative_order: internal failure");
  return d;
}

PeriodProfile repeating_block(u64 n, unsigned p) {
  PeriodProfile pr;
  pr.n = n;
  pr.p = p;
  pr.period = multiplicative_order(p, n);
  pr.digit_counts.assign(p, 0);

  mpz_class pk, block;
  mpz_ui_pow_ui(pk.get_mpz_t(), p, pr.period);
  block = (pk - 1) / (unsigned long)n;

  if (p == 2) {
    u64 ones = mpz_popcount(block.get_mpz_t());
    pr.digit_counts[1] = ones;
    pr.digit_counts[0] = pr.period - ones;
  } else {
    mpz_class b = block;
    u64 emitted = 0;
    while (b > 0) {
      unsigned long digit = mpz_fdiv_ui(b.get_mpz_t(), p);
      pr.digit_counts[digit]++;
      b /= p;
      ++emitted;
    }
    pr.digit_counts[0] += pr.period - emitted;  // left padding
  }
  return pr;
}

bool PeriodProfile::block_identity_ok() const {
  mpz_class pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), p, period);
  return (pk - 1) % (unsigned long)n == 0;
}

Balance classify2(u64 n) {
  if (n < 3 || n % 2 == 0)
    throw std::domain_error("classify2: n must be odd and > 1");
  PeriodProfile pr = repeating_block(n, 2);
  if (pr.ones() == pr.zeros()) return Balance::Balanced;
  return pr.zeros() > pr.ones() ? Balance::Efficient : Balance::Inefficient;
}

Census census2(u64 x, const CensusOptions& opts) {
  if (x < 3) throw std::domain_error("census2: x must be >= 3");
  Census c;
  c.x = x;
  u64 start = 3;
  if (!opts.checkpoint_path.empty()) {
    std::ifstream in(opts.checkpoint_path);
    if (in) {
      nlohmann::json j;
      in >> j;
      u64 done = j.at("x_done").get<u64>();
      if (done >= start && done <= x) {
        start = done + (done % 2 ? 2 : 1);
        c.balanced = j.at("B").get<u64>();
        c.efficient = j.at("E").get<u64>();
        c.inefficient = j.at("I").get<u64>();
      }
    }
  }
  auto save = [&](u64 done) {
    if (opts.checkpoint_path.empty()) return;
    nlohmann::json j{{"x_done", done},
                     {"B", c.balanced},
                     {"E", c.efficient},
                     {"I", c.inefficient}};
    std::ofstream out(opts.checkpoint_path);
    out << j.dump() << "\n";
  };
  u64 since = 0;
  for (u64 n = start % 2 ? start : start + 1; n <= x; n += 2) {
    PeriodProfile pr = repeating_block(n, 2);
    Balance b = pr.ones() == pr.zeros()
                    ? Balance::Balanced
                    : (pr.zeros() > pr.ones() ? Balance::Efficient
                                              : Balance::Inefficient);
    if (b == Balance::Balanced) ++c.balanced;
    if (b == Balance::Efficient) ++c.efficient;
    if (b == Balance::Inefficient) ++c.inefficient;
    if (opts.rows)
      opts.rows->push_back(std::to_string(n) + "," + std::to_string(pr.period) +
                           "," + std::to_string(pr.ones()) + "," +
                           std::to_string(pr.zeros()) + "," + to_string(b));
    if (++since >= opts.checkpoint_every) {
      save(n);
      since = 0;
    }
  }
  save(x);
  return c;
}

PClassification classify_p(u64 n, unsigned p, PMetric metric,
                           const ComplexityTable* table,
                           bool expected_zero_paper) {
  PeriodProfile pr = repeating_block(n, p);
  PClassification out;
  u64 d = pr.period;
  switch (metric) {
    case PMetric::ZeroCount: {
      // compare zero fraction to 1/(p-1) (paper) or 1/p (uniform model)
      mpq_class frac(pr.digit_counts[0], d);
      frac.canonicalize();
      mpq_class expected = expected_zero_paper ? mpq_class(1, p - 1)
                                               : mpq_class(1, p);
      expected.canonicalize();
      if (frac == expected)
        out.verdict = Balance::Balanced;
      else if (frac > expected)
        out.verdict = Balance::Efficient;
      else
        out.verdict = Balance::Inefficient;
      out.detail = "zero fraction " + std::to_string(pr.digit_counts[0]) + "/" +
                   std::to_string(d);
      out.report_value = double(pr.digit_counts[0]) / double(d);
      break;
    }
    case PMetric::DigitAverage: {
      mpz_class total = 0;
      for (unsigned v = 0; v < p; ++v)
        total += mpz_class((unsigned long)pr.digit_counts[v]) * v;
      mpq_class mean(total, mpz_class((unsigned long)d));
      mean.canonicalize();
      mpq_class half(p - 1, 2);
      half.canonicalize();
      if (mean == half)
        out.verdict = Balance::Balanced;
      else if (mean < half)
        out.verdict = Balance::Efficient;
      else
        out.verdict = Balance::Inefficient;
      out.detail = "mean digit " + mean.get_str() + " vs (p-1)/2 = " + half.get_str();
      out.report_value = mean.get_d();
      break;
    }
    case PMetric::ComplexityAverage: {
      if (!table || table->limit() < p - 1)
        throw std::domain_error("complexity-average metric needs a table covering digits");
      u64 total = 0;
      for (unsigned v = 0; v < p; ++v)
        total += pr.digit_counts[v] * table->complexity(v);
      out.has_verdict = false;  // the paper defines no classification here
      out.report_value = double(total) / double(d);
      out.detail = "mean digit complexity";
      break;
    }
  }
  return out;
}

u64 smallest_inefficient(u64 bound, bool primes_only) {
  auto is_prime = [](u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
      if (n % d == 0) return false;
    return true;
  };
  for (u64 n = 3; n <= bound; n += 2) {
    if (primes_only && !is_prime(n)) continue;
    if (classify2(n) == Balance::Inefficient) return n;
  }
  return 0;
}

}  // namespace icx
