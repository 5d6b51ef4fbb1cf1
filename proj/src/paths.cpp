#include "icx/paths.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>

namespace icx {

namespace {

[[noreturn]] void syntax_error(const std::string& text, std::size_t pos,
                               const std::string& what) {
  throw std::invalid_argument("path syntax error at position " +
                              std::to_string(pos) + " in \"" + text +
                              "\": " + what);
}

}  // namespace

Path Path::parse(const std::string& text) {
  std::vector<PathSeg> paper_order;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto read_uint = [&]() -> u64 {
    if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
      syntax_error(text, i, "expected number");
    u64 v = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
      v = v * 10 + (text[i++] - '0');
    return v;
  };
  skip_ws();
  while (i < text.size()) {
    if (text[i] != '[') syntax_error(text, i, "expected '['");
    ++i;
    skip_ws();
    u64 x = read_uint();
    skip_ws();
    if (i >= text.size() || text[i] != ',') syntax_error(text, i, "expected ','");
    ++i;
    skip_ws();
    u64 y = read_uint();
    skip_ws();
    if (i >= text.size() || text[i] != ']') syntax_error(text, i, "expected ']'");
    ++i;
    if (y < 2) syntax_error(text, i, "step divisor y must be >= 2");
    PathSeg seg;
    seg.step = {x, y};
    skip_ws();
    if (i < text.size() && text[i] == '^') {
      ++i;
      skip_ws();
      if (i < text.size() && text[i] == 'v') {
        ++i;
        u64 p = read_uint();
        long off = 0;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
          char sgn = text[i++];
          u64 k = read_uint();
          off = sgn == '-' ? -long(k) : long(k);
        }
        seg.reps = SymCount{unsigned(p), off};
      } else {
        u64 k = read_uint();
        if (k == 0) syntax_error(text, i, "repetition count must be positive");
        seg.reps = k;
      }
    }
    skip_ws();
    paper_order.push_back(seg);
  }
  if (paper_order.empty()) syntax_error(text, 0, "empty path");
  // paper order is rightmost-first application: reverse into application order
  std::reverse(paper_order.begin(), paper_order.end());
  return Path(std::move(paper_order));
}

std::string Path::print() const {
  std::string out;
  for (auto it = segs_.rbegin(); it != segs_.rend(); ++it) {
    out += "[" + std::to_string(it->step.x) + "," + std::to_string(it->step.y) + "]";
    if (auto* fixed = std::get_if<u64>(&it->reps)) {
      if (*fixed != 1) out += "^" + std::to_string(*fixed);
    } else {
      const auto& s = std::get<SymCount>(it->reps);
      out += "^v" + std::to_string(s.p);
      if (s.offset > 0) out += "+" + std::to_string(s.offset);
      if (s.offset < 0) out += std::to_string(s.offset);
    }
  }
  return out;
}

bool Path::fixed() const {
  for (const auto& s : segs_)
    if (!std::holds_alternative<u64>(s.reps)) return false;
  return true;
}

Path Path::resolve(const std::vector<std::pair<unsigned, u64>>& vp) const {
  std::vector<PathSeg> out;
  out.reserve(segs_.size());
  for (const auto& s : segs_) {
    if (auto* fixed = std::get_if<u64>(&s.reps)) {
      out.push_back({s.step, *fixed});
      continue;
    }
    const auto& sym = std::get<SymCount>(s.reps);
    auto it = std::find_if(vp.begin(), vp.end(),
                           [&](auto& kv) { return kv.first == sym.p; });
    if (it == vp.end())
      throw std::invalid_argument("resolve: no value for v" + std::to_string(sym.p));
    long long reps = (long long)it->second + sym.offset;
    if (reps < 0)
      throw std::invalid_argument("resolve: negative repetition count for v" +
                                  std::to_string(sym.p));
    if (reps == 0) continue;  // drop empty segments
    out.push_back({s.step, u64(reps)});
  }
  return Path(std::move(out));
}

Path Path::concat_before(const Path& suffix_applied_first) const {
  std::vector<PathSeg> out = suffix_applied_first.segs_;
  out.insert(out.end(), segs_.begin(), segs_.end());
  return Path(std::move(out));
}

std::variant<u64, Path::Invalid> Path::apply(u64 n) const {
  if (!fixed()) throw std::logic_error("apply: path has symbolic counts");
  mpz_class v = (unsigned long)n;
  std::size_t idx = 0;
  for (const auto& seg : segs_) {
    u64 reps = std::get<u64>(seg.reps);
    for (u64 r = 0; r < reps; ++r) {
      mpz_class t = v - (unsigned long)seg.step.x;
      if (t < 0) return Invalid{Invalid::HitZeroOrNegative, idx};
      if (!mpz_divisible_ui_p(t.get_mpz_t(), seg.step.y))
        return Invalid{Invalid::NotDivisible, idx};
      v = t / (unsigned long)seg.step.y;
    }
    ++idx;
  }
  if (v < 1) return Invalid{Invalid::HitZeroOrNegative, segs_.size() - 1};
  return v.get_ui();
}

u64 Path::cost(const ComplexityTable& table) const {
  if (!fixed()) throw std::logic_error("cost: path has symbolic counts");
  u64 total = 0;
  for (const auto& seg : segs_) {
    u64 reps = std::get<u64>(seg.reps);
    total += reps * (table.complexity(seg.step.x) + table.complexity(seg.step.y));
  }
  return total;
}

std::optional<u64> Path::product_u64() const {
  u64 prod = 1;
  for (const auto& seg : segs_) {
    u64 reps = std::get<u64>(seg.reps);
    for (u64 r = 0; r < reps; ++r) {
      if (prod > UINT64_MAX / seg.step.y) return std::nullopt;
      prod *= seg.step.y;
    }
  }
  return prod;
}

std::string Path::product_str() const {
  mpz_class prod = 1;
  for (const auto& seg : segs_) {
    u64 reps = std::get<u64>(seg.reps);
    mpz_class ypow;
    mpz_ui_pow_ui(ypow.get_mpz_t(), seg.step.y, reps);
    prod *= ypow;
  }
  return prod.get_str();
}

bool Path::budget_ok(u64 c, u64 B, const ComplexityTable& table) const {
  u64 k = cost(table);
  mpz_class lhs, pi, rhs;
  mpz_ui_pow_ui(lhs.get_mpz_t(), B, k);
  pi = 1;
  for (const auto& seg : segs_) {
    mpz_class ypow;
    mpz_ui_pow_ui(ypow.get_mpz_t(), seg.step.y, std::get<u64>(seg.reps));
    pi *= ypow;
  }
  mpz_pow_ui(rhs.get_mpz_t(), pi.get_mpz_t(), c);
  return lhs <= rhs;
}

u64 Path::exceptional_value() const {
  if (!fixed()) throw std::logic_error("exceptional_value: symbolic path");
  mpz_class v = 0;
  for (auto it = segs_.rbegin(); it != segs_.rend(); ++it) {
    u64 reps = std::get<u64>(it->reps);
    for (u64 r = 0; r < reps; ++r)
      v = v * (unsigned long)it->step.y + (unsigned long)it->step.x;
  }
  if (!v.fits_ulong_p())
    throw std::overflow_error("exceptional_value: exceeds 64 bits");
  return v.get_ui();
}

std::pair<u64, u64> Path::affine_u64() const {
  // apply(n) = (n - C)/D with C = exceptional_value, D = product
  auto d = product_u64();
  if (!d) throw std::overflow_error("affine_u64: product exceeds 64 bits");
  return {exceptional_value(), *d};
}

std::vector<Path::Requirement> Path::class_requirements() const {
  if (!fixed()) throw std::logic_error("class_requirements: symbolic path");
  // value before step i is (n - C_i)/D_i; step [x,y] requires
  // (n - C_i)/D_i === x (mod y), i.e. n === C_i + D_i*x (mod D_i*y)
  std::vector<Requirement> reqs;
  mpz_class C = 0, D = 1;
  for (const auto& seg : segs_) {
    u64 reps = std::get<u64>(seg.reps);
    for (u64 r = 0; r < reps; ++r) {
      mpz_class residue = C + D * (unsigned long)seg.step.x;
      mpz_class modulus = D * (unsigned long)seg.step.y;
      if (!modulus.fits_ulong_p())
        throw std::overflow_error("class_requirements: modulus exceeds 64 bits");
      reqs.push_back({mpz_class(residue % modulus).get_ui(), modulus.get_ui()});
      C = residue;
      D = modulus;
    }
  }
  return reqs;
}

Path::ClassCheck Path::validity_on_class(u64 r, u64 m) const {
  auto reqs = class_requirements();
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    u64 q = reqs[i].modulus;
    if (m % q == 0) {
      if (r % q != reqs[i].residue % q) return {ClassValidity::Invalid, i, 0};
    } else {
      u64 l = std::lcm(m, q);
      return {ClassValidity::NeedsSplit, i, l};
    }
  }
  return {ClassValidity::Valid, 0, 0};
}

}  // namespace icx
