#include "icx/residue.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace icx {

namespace {

using i64 = long long;
using u128 = unsigned __int128;

u64 pow_u64(u64 p, unsigned e) {
  u64 r = 1;
  while (e--) {
    if (r > UINT64_MAX / p) throw std::overflow_error("prime power overflow");
    r *= p;
  }
  return r;
}

u64 mod_pos(i64 a, u64 m) {
  i64 r = a % i64(m);
  return r < 0 ? u64(r + i64(m)) : u64(r);
}

u64 mulmod(u64 a, u64 b, u64 m) { return u64((u128(a) * b) % m); }

u64 modinv(u64 a, u64 m) {
  i64 t = 0, newt = 1;
  i64 r = i64(m), newr = i64(a % m);
  while (newr != 0) {
    i64 q = r / newr;
    std::swap(t -= q * newt, newt);
    std::swap(r -= q * newr, newr);
  }
  if (r != 1) throw std::domain_error("modinv: not invertible");
  return mod_pos(t, m);
}

unsigned val_p(u64 n, unsigned p, u64* rest) {
  unsigned v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  if (rest) *rest = n;
  return v;
}

// rational a/b reduced, b > 0 coprime to the tracked prime
void reduce_frac(i64& a, u64& b) {
  u64 g = std::gcd(u64(a < 0 ? -a : a), b);
  if (g > 1) {
    a /= i64(g);
    b /= g;
  }
}

// 2-adic exclusions always determine the other lift
void promote_mod2(PrimeFact& f) {
  if (f.p != 2 || f.kind != PrimeFact::Congruence || f.not_level == 0) return;
  if (f.not_level != f.e + 1) return;
  u64 nl = pow_u64(2, f.not_level);
  u64 lift0 = f.r % nl;
  u64 lift1 = (f.r + pow_u64(2, f.e)) % nl;
  u64 fr = f.not_r % nl;
  u64 keep = (fr == lift0) ? lift1 : (fr == lift1 ? lift0 : UINT64_MAX);
  if (keep == UINT64_MAX) {  // exclusion does not hit a lift; drop it
    f.not_level = 0;
    f.not_r = 0;
    return;
  }
  f.r = keep;
  f.e = f.not_level;
  f.not_level = 0;
  f.not_r = 0;
}

}  // namespace

void ResidueState::add_vp_hypothesis(unsigned p, u64 dmin, u64 dmax) {
  PrimeFact f;
  f.p = p;
  if (dmax != PrimeFact::kUnbounded && dmax == dmin) {
    // pinned depth: value === p^D - 1 (mod p^D), and =!= -1 (mod p^(D+1))
    f.kind = PrimeFact::Congruence;
    f.e = unsigned(dmin);
    u64 pe = pow_u64(p, f.e);
    f.r = pe - 1;
    f.not_level = f.e + 1;
    f.not_r = pow_u64(p, f.not_level) - 1;
    promote_mod2(f);
  } else {
    f.kind = PrimeFact::Tower;
    f.a = -1;
    f.b = 1;
    f.dmin = dmin;
    f.dmax = dmax;
  }
  facts_[p] = f;
}

void ResidueState::add_congruence(unsigned p, u64 r, unsigned e) {
  auto it = facts_.find(p);
  if (it == facts_.end()) {
    PrimeFact f;
    f.kind = PrimeFact::Congruence;
    f.p = p;
    f.r = r % pow_u64(p, e);
    f.e = e;
    facts_[p] = f;
    return;
  }
  if (!refine(r % pow_u64(p, e), pow_u64(p, e)))
    throw std::runtime_error("add_congruence: inconsistent with existing fact");
}

PrimeFact* ResidueState::find(unsigned p) {
  auto it = facts_.find(p);
  return it == facts_.end() ? nullptr : &it->second;
}
const PrimeFact* ResidueState::find(unsigned p) const {
  auto it = facts_.find(p);
  return it == facts_.end() ? nullptr : &it->second;
}

std::optional<u64> ResidueState::residue_mod(u64 m) const {
  // CRT over the prime powers of m; nullopt when any factor is undetermined
  u64 res = 0, mod = 1;
  u64 rem = m;
  for (u64 p = 2; p * p <= rem || rem > 1;) {
    if (rem == 1) break;
    if (rem % p != 0) {
      p = (p == 2) ? 3 : p + 2;
      continue;
    }
    u64 q = 1;
    unsigned e = 0;
    while (rem % p == 0) {
      rem /= p;
      q *= p;
      ++e;
    }
    const PrimeFact* f = find(unsigned(p));
    u64 rq;
    if (!f) return std::nullopt;
    if (f->kind == PrimeFact::Congruence) {
      if (f->e < e) return std::nullopt;
      rq = f->r % q;
    } else {
      if (f->dmin < e) return std::nullopt;
      rq = mulmod(mod_pos(f->a, q), modinv(f->b % q, q), q);
    }
    // combine res (mod mod) with rq (mod q); moduli coprime
    u64 inv = modinv(mod % q, q);
    u64 diff = (rq + q - res % q) % q;
    res = res + mod * mulmod(diff, inv, q);
    mod *= q;
  }
  return res % m;
}

std::vector<u64> ResidueState::consistent_residues(u64 m) const {
  std::vector<u64> res{0};
  u64 mod = 1;
  u64 rem = m;
  for (u64 p = 2; rem > 1;) {
    if (rem % p != 0) {
      p = (p == 2) ? 3 : p + 2;
      continue;
    }
    u64 q = 1;
    unsigned e = 0;
    while (rem % p == 0) {
      rem /= p;
      q *= p;
      ++e;
    }
    const PrimeFact* f = find(unsigned(p));
    std::vector<u64> opts;
    if (f && f->kind == PrimeFact::Tower) {
      if (f->dmin >= e) {
        opts.push_back(mulmod(mod_pos(f->a, q), modinv(f->b % q, q), q));
      } else {
        // every lift of the depth-dmin pattern is reachable by some actual
        // depth D >= dmin (picking a residue pins D)
        u64 bq = pow_u64(unsigned(p), unsigned(f->dmin));
        u64 base = mulmod(mod_pos(f->a, bq), modinv(f->b % bq, bq), bq);
        for (u64 t = base; t < q; t += bq) opts.push_back(t);
      }
    } else {
      u64 base = 0, bq = 1;
      if (f) {
        unsigned known = std::min<unsigned>(f->e, e);
        bq = pow_u64(unsigned(p), known);
        base = f->r % bq;
      }
      for (u64 t = base; t < q; t += bq) {
        if (f && f->not_level && pow_u64(unsigned(p), f->not_level) <= q) {
          u64 nl = pow_u64(unsigned(p), f->not_level);
          if (t % nl == f->not_r % nl) continue;
        }
        opts.push_back(t);
      }
    }
    std::vector<u64> next;
    next.reserve(res.size() * opts.size());
    u64 inv = modinv(mod % q, q);
    for (u64 r0 : res)
      for (u64 rq : opts) {
        u64 diff = (rq + q - r0 % q) % q;
        next.push_back(r0 + mod * mulmod(diff, inv, q));
      }
    res = std::move(next);
    mod *= q;
    if (res.size() > 200000)
      throw std::runtime_error("consistent_residues: class explosion");
  }
  for (auto& r : res) r %= m;
  std::sort(res.begin(), res.end());
  return res;
}

bool ResidueState::refine(u64 r, u64 m) {
  u64 rem = m;
  for (u64 p = 2; rem > 1;) {
    if (rem % p != 0) {
      p = (p == 2) ? 3 : p + 2;
      continue;
    }
    u64 q = 1;
    unsigned e = 0;
    while (rem % p == 0) {
      rem /= p;
      q *= p;
      ++e;
    }
    u64 rq = r % q;
    auto it = facts_.find(unsigned(p));
    if (it == facts_.end()) {
      PrimeFact f;
      f.kind = PrimeFact::Congruence;
      f.p = unsigned(p);
      f.r = rq;
      f.e = e;
      facts_[unsigned(p)] = f;
      continue;
    }
    PrimeFact& f = it->second;
    if (f.kind == PrimeFact::Tower) {
      if (f.dmin >= e) {
        u64 want = mulmod(mod_pos(f.a, q), modinv(f.b % q, q), q);
        if (want != rq) return false;
        continue;
      }
      // the residue decides how deep the tower really goes
      u64 bq = pow_u64(unsigned(p), unsigned(f.dmin));
      u64 want = mulmod(mod_pos(f.a, bq), modinv(f.b % bq, bq), bq);
      if (rq % bq != want) return false;
      u64 full = mulmod(mod_pos(f.a, q), modinv(f.b % q, q), q);
      if (rq == full) {
        // matches the pattern through level e: tower deepens
        if (f.dmax != PrimeFact::kUnbounded && f.dmax < e) return false;
        f.dmin = e;
      } else {
        // pattern breaks before level e: depth is pinned, plain congruence
        unsigned d = unsigned(f.dmin);
        while (true) {
          u64 nq = pow_u64(unsigned(p), d + 1);
          u64 t = mulmod(mod_pos(f.a, nq), modinv(f.b % nq, nq), nq);
          if (rq % nq != t) break;
          ++d;
        }
        if (f.dmax != PrimeFact::kUnbounded && u64(d) > f.dmax) return false;
        f.kind = PrimeFact::Congruence;
        f.r = rq;
        f.e = e;
        f.not_level = 0;
        f.not_r = 0;
      }
      continue;
    }
    unsigned known = std::min<unsigned>(f.e, e);
    u64 kq = pow_u64(unsigned(p), known);
    if (f.r % kq != rq % kq) return false;
    if (e > f.e) {
      if (f.not_level && f.not_level <= e) {
        u64 nl = pow_u64(unsigned(p), f.not_level);
        if (rq % nl == f.not_r % nl) return false;  // excluded lift
        f.not_level = 0;
        f.not_r = 0;
      }
      f.r = rq;
      f.e = e;
    }
  }
  return true;
}

std::optional<std::string> ResidueState::apply_step(const Step& s) {
  // factor y over the tracked primes; any untracked prime factor is an error
  u64 rest = s.y;
  std::vector<std::pair<unsigned, unsigned>> yfac;  // (p, g)
  for (auto& [p, f] : facts_) {
    unsigned g = val_p(rest, p, &rest);
    if (g) yfac.emplace_back(p, g);
  }
  if (rest != 1)
    return "step [" + std::to_string(s.x) + "," + std::to_string(s.y) +
           "]: divisor has untracked prime factor " + std::to_string(rest);

  std::map<unsigned, PrimeFact> next = facts_;
  for (auto& [p, f] : next) {
    unsigned g = 0;
    for (auto& [pp, gg] : yfac)
      if (pp == p) g = gg;
    u64 pg = pow_u64(p, g);
    u64 u = s.y / pg;  // cofactor, coprime to p

    if (f.kind == PrimeFact::Tower) {
      if (g > 0) {
        if (f.dmin < g)
          return "step [" + std::to_string(s.x) + "," + std::to_string(s.y) +
                 "]: tower for p=" + std::to_string(p) +
                 " has insufficient declared depth";
        if (mod_pos(f.a - i64(s.x) * i64(f.b), pg) != 0)
          return "step [" + std::to_string(s.x) + "," + std::to_string(s.y) +
                 "]: not divisible per tower fact for p=" + std::to_string(p);
        f.a = (f.a - i64(s.x) * i64(f.b)) / i64(pg);
        f.dmin -= g;
        if (f.dmax != PrimeFact::kUnbounded) f.dmax -= g;
      } else {
        f.a = f.a - i64(s.x) * i64(f.b);
      }
      if (f.b > UINT64_MAX / u) return "tower denominator overflow";
      f.b *= u;
      reduce_frac(f.a, f.b);
    } else {
      if (g > 0) {
        if (f.e < g) {
          // exclusion alone can decide divisibility only for p = 2, g = 1
          return "step [" + std::to_string(s.x) + "," + std::to_string(s.y) +
                 "]: congruence for p=" + std::to_string(p) +
                 " too shallow to justify division";
        }
        if (f.r % pg != s.x % pg)
          return "step [" + std::to_string(s.x) + "," + std::to_string(s.y) +
                 "]: not divisible (value === " + std::to_string(f.r % pg) +
                 " mod " + std::to_string(pg) + ", needs " +
                 std::to_string(s.x % pg) + ")";
      }
      u64 qe = pow_u64(p, f.e - g);
      if (qe > 1) {
        u64 num = (f.r % pow_u64(p, f.e)) >= s.x % pow_u64(p, f.e)
                      ? f.r - s.x % pow_u64(p, f.e)
                      : f.r + pow_u64(p, f.e) - s.x % pow_u64(p, f.e);
        // r' = ((r - x)/p^g) * inv(u) mod p^(e-g)
        u64 shifted = (num / pg) % qe;
        u64 yin = modinv((s.y / pg) % qe, qe);
        f.r = mulmod(shifted, yin, qe);
      } else {
        f.r = 0;
      }
      f.e -= g;
      // transform or drop the exclusion
      if (f.not_level) {
        unsigned L = f.not_level;
        u64 pl = pow_u64(p, L);
        if (g >= L) {
          if (s.x % pl == f.not_r % pl)
            return "step contradicts exclusion for p=" + std::to_string(p);
          f.not_level = 0;
          f.not_r = 0;
        } else if (g > 0 && f.not_r % pg != s.x % pg) {
          f.not_level = 0;  // vacuous now
          f.not_r = 0;
        } else {
          u64 pl2 = pow_u64(p, L - g);
          u64 num = (f.not_r % pl >= s.x % pl) ? f.not_r - s.x % pl
                                               : f.not_r + pl - s.x % pl;
          u64 yin = modinv((s.y / pg) % pl2, pl2);
          f.not_r = mulmod((num / pg) % pl2, yin, pl2);
          f.not_level = L - g;
        }
      }
      promote_mod2(f);
    }
  }
  facts_ = std::move(next);
  return std::nullopt;
}

std::optional<std::string> ResidueState::apply_fixed(const Step& s, u64 reps) {
  for (u64 i = 0; i < reps; ++i)
    if (auto err = apply_step(s)) return err;
  return std::nullopt;
}

std::vector<ResidueState::ExhaustFork> ResidueState::exhaust(
    const Step& s, u64 min_reps_required, std::string* err) const {
  std::vector<ExhaustFork> forks;
  auto fail = [&](const std::string& m) {
    if (err) *err = m;
    return std::vector<ExhaustFork>{};
  };
  u64 rest = 0;
  unsigned p2 = 0;
  // y must be a prime power of a tracked tower prime
  u64 y = s.y;
  unsigned g = 0;
  for (auto& [p, f] : facts_) {
    u64 r;
    unsigned v = val_p(y, p, &r);
    if (v && r == 1) {
      p2 = p;
      g = v;
      rest = 1;
      break;
    }
  }
  if (rest != 1 || p2 == 0)
    return fail("exhaust: step divisor must be a tracked prime power");
  const PrimeFact* tower = find(p2);
  if (!tower || tower->kind != PrimeFact::Tower)
    return fail("exhaust: no tower fact for p=" + std::to_string(p2));
  if (tower->dmax != PrimeFact::kUnbounded)
    return fail("exhaust: tower depth is bounded; use fixed or symbolic reps");
  // self-similarity: a/b must be the step's fixed point -x/(y-1) for every
  // tracked prime, so that repetition leaves all facts unchanged
  if (i64(tower->a) * i64(s.y - 1) != -i64(s.x) * i64(tower->b))
    return fail("exhaust: tower value is not the fixed point -x/(y-1)");
  for (auto& [q, f] : facts_) {
    if (q == p2) continue;
    if (f.kind == PrimeFact::Tower) {
      if (i64(f.a) * i64(s.y - 1) != -i64(s.x) * i64(f.b))
        return fail("exhaust: fact for p=" + std::to_string(q) +
                    " is not fixed under the step");
    } else {
      u64 qe = pow_u64(q, f.e);
      if (f.e) {
        // need r*(y-1) === -x (mod q^e)
        u64 lhs = mulmod(f.r, (s.y - 1) % qe, qe);
        u64 rhs = mod_pos(-i64(s.x), qe);
        if (lhs != rhs)
          return fail("exhaust: congruence for p=" + std::to_string(q) +
                      " is not fixed under the step");
      }
      if (f.not_level) {
        u64 ql = pow_u64(q, f.not_level);
        u64 lhs = mulmod(f.not_r, (s.y - 1) % ql, ql);
        if (lhs != mod_pos(-i64(s.x), ql))
          return fail("exhaust: exclusion for p=" + std::to_string(q) +
                      " is not fixed under the step");
      }
    }
  }
  // fork per leftover depth class
  for (u64 L = 0; L < g; ++L) {
    u64 D0 = tower->dmin;
    if (D0 % g != L) D0 += (L + g - D0 % g) % g;
    ExhaustFork fk;
    fk.leftover = L;
    fk.min_reps = (D0 - L) / g;
    if (fk.min_reps < min_reps_required) fk.min_reps = min_reps_required;
    fk.state = *this;
    PrimeFact& f = *fk.state.find(p2);
    f.kind = PrimeFact::Congruence;
    if (L > 0) {
      u64 pl = pow_u64(p2, unsigned(L));
      f.r = mulmod(mod_pos(f.a, pl), modinv(f.b % pl, pl), pl);
    } else {
      f.r = 0;
    }
    f.e = unsigned(L);
    u64 pl1 = pow_u64(p2, unsigned(L) + 1);
    f.not_r = mulmod(mod_pos(f.a, pl1), modinv(f.b % pl1, pl1), pl1);
    f.not_level = unsigned(L) + 1;
    promote_mod2(f);
    forks.push_back(std::move(fk));
  }
  return forks;
}

std::string ResidueState::describe() const {
  std::ostringstream os;
  for (auto& [p, f] : facts_) {
    if (f.kind == PrimeFact::Tower) {
      os << "p" << p << ": tower " << f.a << "/" << f.b << " depth>=" << f.dmin;
      if (f.dmax != PrimeFact::kUnbounded) os << "<=" << f.dmax;
    } else {
      os << "p" << p << ": === " << f.r << " mod " << p << "^" << f.e;
      if (f.not_level) os << ", =!= " << f.not_r << " mod " << p << "^" << f.not_level;
    }
    os << "; ";
  }
  return os.str();
}

ResidueState simulate_burn(const ResidueState& st, unsigned p, u64 count,
                           std::string* err) {
  ResidueState out = st;
  if (auto e = out.apply_fixed(Step{p - 1, p}, count)) {
    if (err) *err = *e;
  }
  return out;
}

}  // namespace icx
