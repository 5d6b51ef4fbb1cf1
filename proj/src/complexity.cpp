#include "icx/complexity.hpp"

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

namespace icx {

namespace {

// floor of the c-th root of B^k, and whether the root is exact
u64 root_of_pow(u64 B, unsigned k, u64 c, bool* exact) {
  mpz_t p, r;
  mpz_init(p);
  mpz_init(r);
  mpz_ui_pow_ui(p, B, k);
  int ex = mpz_root(r, p, c);
  u64 out = mpz_get_ui(r);
  if (exact) *exact = ex != 0;
  mpz_clear(p);
  mpz_clear(r);
  return out;
}

}  // namespace

u64 min_n_with_pow_at_least(u64 B, unsigned k, u64 c) {
  if (k == 0) return 1;
  bool exact = false;
  u64 r = root_of_pow(B, k, c, &exact);
  return exact ? r : r + 1;
}

namespace {
unsigned ub_rec(const ComplexityTable& t, u64 n, std::map<u64, unsigned>& memo) {
  if (n <= t.limit()) return t.complexity(n);
  auto it = memo.find(n);
  if (it != memo.end()) return it->second;
  memo[n] = 0xffff;  // cycle guard; n always shrinks so this never binds
  unsigned best = 0xffff;
  for (u64 d : {2, 3, 4, 5, 6, 7, 8, 9, 12, 16, 24, 36}) {
    u64 r = n % d;
    unsigned c = t.complexity(d) + t.complexity(r) + ub_rec(t, n / d, memo);
    best = std::min(best, c);
  }
  memo[n] = best;
  return best;
}
}  // namespace

unsigned upper_bound_complexity(const ComplexityTable& table, u64 n) {
  std::map<u64, unsigned> memo;
  return ub_rec(table, n, memo);
}

ComplexityTable ComplexityTable::build(u64 limit, u64 cutoff, u64 exact_upto) {
  if (limit == 0) throw std::domain_error("build_table: limit must be >= 1");
  if (exact_upto > limit) exact_upto = limit;

  ComplexityTable t;
  t.cutoff_ = cutoff;
  t.exact_upto_ = exact_upto;
  t.values_.assign(limit + 1, 0);
  auto& v = t.values_;
  v[0] = 0;
  if (limit >= 1) v[1] = 1;

  // smallest prime factor sieve for the divisor scan
  std::vector<std::uint32_t> spf(limit + 1, 0);
  for (u64 i = 2; i <= limit; ++i) {
    if (spf[i] == 0) {
      for (u64 j = i; j <= limit; j += i)
        if (spf[j] == 0) spf[j] = static_cast<std::uint32_t>(i);
    }
  }

  std::vector<std::pair<u64, unsigned>> fact;
  std::vector<u64> divs;
  for (u64 n = 2; n <= limit; ++n) {
    // additive splits, smaller summand a
    u64 amax = n / 2;
    if (cutoff != 0 && n > exact_upto) amax = std::min(amax, cutoff);
    unsigned best = 0xff;
    const std::uint8_t* base = v.data();
    for (u64 a = 1; a <= amax; ++a) {
      unsigned s = unsigned(base[a]) + unsigned(base[n - a]);
      if (s < best) best = s;
    }
    // divisor splits d * (n/d), enumerate divisors <= sqrt(n) from the factorization
    fact.clear();
    u64 m = n;
    while (m > 1) {
      u64 p = spf[m];
      unsigned e = 0;
      while (m % p == 0) {
        m /= p;
        ++e;
      }
      fact.emplace_back(p, e);
    }
    divs.clear();
    divs.push_back(1);
    for (auto [p, e] : fact) {
      size_t sz = divs.size();
      u64 pe = 1;
      for (unsigned i = 1; i <= e; ++i) {
        pe *= p;
        for (size_t j = 0; j < sz; ++j) {
          u64 d = divs[j] * pe;
          if (d * d <= n) divs.push_back(d);
        }
      }
    }
    for (u64 d : divs) {
      if (d < 2) continue;
      unsigned s = unsigned(v[d]) + unsigned(v[n / d]);
      if (s < best) best = s;
    }
    v[n] = static_cast<std::uint8_t>(best);
  }

  t.check_invariants();
  return t;
}

unsigned ComplexityTable::complexity(u64 n) const {
  if (n >= values_.size())
    throw std::out_of_range("complexity: n exceeds table limit");
  return values_[n];
}

unsigned ComplexityTable::max_complexity_upto(u64 x) const {
  if (x >= values_.size())
    throw std::out_of_range("max_complexity_upto: x exceeds table limit");
  unsigned best = 0;
  for (u64 n = 0; n <= x; ++n) best = std::max(best, unsigned(values_[n]));
  return best;
}

std::pair<u64, double> ComplexityTable::max_ratio(u64 lo, u64 hi) const {
  if (lo < 2 || lo > hi || hi >= values_.size())
    throw std::out_of_range("max_ratio: need 2 <= lo <= hi <= limit");
  // float scan first, exact big-integer comparison near the top
  u64 arg = lo;
  double best = values_[lo] / std::log(double(lo));
  for (u64 n = lo + 1; n <= hi; ++n) {
    double r = values_[n] / std::log(double(n));
    if (r > best + 1e-12) {
      best = r;
      arg = n;
    } else if (r > best - 1e-12) {
      // candidate tie: ||a||/ln a vs ||b||/ln b  <=>  a^||b|| vs b^||a||
      mpz_t lhs, rhs;
      mpz_init(lhs);
      mpz_init(rhs);
      mpz_ui_pow_ui(lhs, n, values_[arg]);
      mpz_ui_pow_ui(rhs, arg, values_[n]);
      if (mpz_cmp(rhs, lhs) < 0) {  // arg^||n|| < n^||arg||: n strictly better
        best = r;
        arg = n;
      }
      mpz_clear(lhs);
      mpz_clear(rhs);
    }
  }
  return {arg, values_[arg] / std::log(double(arg))};
}

ComplexityTable::BoundReport ComplexityTable::verify_linear_bound(u64 c, u64 B,
                                                                  u64 lo,
                                                                  u64 hi) const {
  if (lo < 2 || lo > hi || hi >= values_.size())
    throw std::out_of_range("verify_linear_bound: need 2 <= lo <= hi <= limit");
  unsigned kmax = 0;
  for (u64 n = lo; n <= hi; ++n) kmax = std::max(kmax, unsigned(values_[n]));
  std::vector<u64> minn(kmax + 1);
  for (unsigned k = 0; k <= kmax; ++k) minn[k] = min_n_with_pow_at_least(B, k, c);
  for (u64 n = lo; n <= hi; ++n)
    if (n < minn[values_[n]]) return {false, n};
  return {true, 0};
}

void ComplexityTable::check_invariants(u64 sample_seed) const {
  const auto& v = values_;
  u64 limit = v.size() - 1;
  char msg[160];

  if (v[0] != 0) throw std::runtime_error("integrity: ||0|| must be 0");
  if (limit >= 1 && v[1] != 1) throw std::runtime_error("integrity: ||1|| must be 1");

  // Selfridge 3^||n|| >= n^3 and Guy 2^||n|| <= n^3, exact via per-value bounds
  unsigned kmax = 0;
  for (u64 n = 2; n <= limit; ++n) kmax = std::max(kmax, unsigned(v[n]));
  std::vector<u64> self_max(kmax + 1), guy_min(kmax + 1);
  for (unsigned k = 0; k <= kmax; ++k) {
    bool exact = false;
    self_max[k] = root_of_pow(3, k, 3, &exact);         // n <= cbrt(3^k)
    guy_min[k] = min_n_with_pow_at_least(2, k, 3);      // n >= cbrt(2^k)
  }
  for (u64 n = 2; n <= limit; ++n) {
    unsigned k = v[n];
    if (n > self_max[k]) {
      std::snprintf(msg, sizeof msg,
                    "integrity: Selfridge bound 3^%u >= %llu^3 fails", k,
                    (unsigned long long)n);
      throw std::runtime_error(msg);
    }
    if (n < guy_min[k]) {
      std::snprintf(msg, sizeof msg,
                    "integrity: Guy bound 2^%u <= %llu^3 fails", k,
                    (unsigned long long)n);
      throw std::runtime_error(msg);
    }
  }

  // multiplicative subadditivity, all pairs
  for (u64 a = 2; a * a <= limit; ++a)
    for (u64 b = a; a * b <= limit; ++b)
      if (v[a * b] > v[a] + v[b]) {
        std::snprintf(msg, sizeof msg,
                      "integrity: ||%llu*%llu|| > ||%llu||+||%llu||",
                      (unsigned long long)a, (unsigned long long)b,
                      (unsigned long long)a, (unsigned long long)b);
        throw std::runtime_error(msg);
      }

  // additive subadditivity: exhaustive on the exact range, sampled above
  u64 addmax = std::min(limit, exact_upto_ == 0 ? limit : exact_upto_);
  for (u64 n = 2; n <= addmax; ++n)
    for (u64 a = 1; a + a <= n; ++a)
      if (v[n] > v[a] + v[n - a]) {
        std::snprintf(msg, sizeof msg,
                      "integrity: ||%llu|| > ||%llu||+||%llu||",
                      (unsigned long long)n, (unsigned long long)a,
                      (unsigned long long)(n - a));
        throw std::runtime_error(msg);
      }
  if (limit > addmax) {
    std::mt19937_64 rng(sample_seed);
    for (int i = 0; i < 20000; ++i) {
      u64 n = addmax + 1 + rng() % (limit - addmax);
      u64 a = 1 + rng() % (n / 2);
      if (v[n] > v[a] + v[n - a]) {
        std::snprintf(msg, sizeof msg,
                      "integrity: ||%llu|| > ||%llu||+||%llu||",
                      (unsigned long long)n, (unsigned long long)a,
                      (unsigned long long)(n - a));
        throw std::runtime_error(msg);
      }
    }
  }
}

namespace {
constexpr char kMagic[4] = {0x49, 0x43, 0x58, 0x31};  // "ICX1"
}

void ComplexityTable::save_cache(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_cache: cannot open " + path);
  out.write(kMagic, 4);
  std::uint16_t ver = 1;
  unsigned char hdr[10];
  hdr[0] = ver & 0xff;
  hdr[1] = ver >> 8;
  u64 lim = limit();
  for (int i = 0; i < 8; ++i) hdr[2 + i] = (lim >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(hdr), 10);
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size()));
  if (!out) throw std::runtime_error("save_cache: write failed for " + path);
}

ComplexityTable ComplexityTable::load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_cache: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_cache: bad magic (not an ICX1 file)");
  unsigned char hdr[10];
  in.read(reinterpret_cast<char*>(hdr), 10);
  if (!in) throw std::runtime_error("load_cache: truncated header");
  std::uint16_t ver = hdr[0] | (std::uint16_t(hdr[1]) << 8);
  if (ver != 1) throw std::runtime_error("load_cache: unsupported version");
  u64 lim = 0;
  for (int i = 0; i < 8; ++i) lim |= u64(hdr[2 + i]) << (8 * i);

  ComplexityTable t;
  t.values_.assign(lim + 1, 0);
  in.read(reinterpret_cast<char*>(t.values_.data()),
          static_cast<std::streamsize>(lim + 1));
  if (static_cast<u64>(in.gcount()) != lim + 1)
    throw std::runtime_error("load_cache: truncated value block");

  // spot-check invariants on random entries plus the small head
  if (t.values_[0] != 0) throw std::runtime_error("load_cache integrity: ||0|| != 0");
  if (lim >= 1 && t.values_[1] != 1)
    throw std::runtime_error("load_cache integrity: ||1|| != 1");
  std::mt19937_64 rng(0x1c3);
  char msg[160];
  auto check_one = [&](u64 n) {
    unsigned k = t.values_[n];
    bool exact = false;
    u64 smax = root_of_pow(3, k, 3, &exact);
    if (n > smax) {
      std::snprintf(msg, sizeof msg,
                    "load_cache integrity: Selfridge bound 3^%u >= %llu^3 fails",
                    k, (unsigned long long)n);
      throw std::runtime_error(msg);
    }
    if (n < min_n_with_pow_at_least(2, k, 3)) {
      std::snprintf(msg, sizeof msg,
                    "load_cache integrity: Guy bound 2^%u <= %llu^3 fails", k,
                    (unsigned long long)n);
      throw std::runtime_error(msg);
    }
  };
  for (u64 n = 2; n <= std::min<u64>(lim, 64); ++n) check_one(n);
  if (lim > 2)
    for (int i = 0; i < 1000; ++i) check_one(2 + rng() % (lim - 1));
  return t;
}

}  // namespace icx
