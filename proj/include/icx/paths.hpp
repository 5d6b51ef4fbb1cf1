#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "icx/complexity.hpp"

namespace icx {

// One reduction step [x,y]: n -> (n - x) / y.
struct Step {
  u64 x = 0;
  u64 y = 2;  // y >= 2; y = 1 is rejected as degenerate
  bool operator==(const Step&) const = default;
};

// Repetition count: fixed, or symbolic "v<p>" with an additive offset
// (e.g. v2-1), resolved against declared bounds by the lemma checker.
struct SymCount {
  unsigned p = 0;    // the prime of the v_p token
  long offset = 0;   // v_p + offset
  bool operator==(const SymCount&) const = default;
};
using RepCount = std::variant<u64, SymCount>;

struct PathSeg {
  Step step;
  RepCount reps = u64{1};
  bool operator==(const PathSeg&) const = default;
};

// A composition of [x,y] steps stored in application order: segs[0] applies
// first. Paper notation is rightmost-first, so parse reverses the text order.
class Path {
public:
  Path() = default;
  explicit Path(std::vector<PathSeg> segs) : segs_(std::move(segs)) {}

  static Path parse(const std::string& text);
  std::string print() const;  // paper order, round-trips through parse

  const std::vector<PathSeg>& segments() const { return segs_; }
  bool fixed() const;  // no symbolic counts
  bool empty() const { return segs_.empty(); }

  // Substitute symbolic counts given concrete v_p values; throws if a count
  // would be negative.
  Path resolve(const std::vector<std::pair<unsigned, u64>>& vp) const;

  Path concat_before(const Path& suffix_applied_first) const;

  // --- fixed-path operations (throw on symbolic paths) ---

  struct Invalid {
    enum Kind { NotDivisible, HitZeroOrNegative } kind;
    std::size_t step_index;  // application-order index of the offending step
  };
  // Applies the path; valid iff every intermediate is a non-negative integer
  // and the final value is >= 1.
  std::variant<u64, Invalid> apply(u64 n) const;

  // Total cost sum rep*(||x||+||y||) and product Pi = prod y^rep.
  u64 cost(const ComplexityTable& table) const;
  // Product as exact big integer digits could overflow u64; returns decimal string.
  std::string product_str() const;
  // Product if it fits u64.
  std::optional<u64> product_u64() const;

  // Exact budget check B^cost <= Pi^c (equality passes).
  bool budget_ok(u64 c, u64 B, const ComplexityTable& table) const;

  // The unique n for which the path reaches 0 at the last step
  // (back-substitution from 0); all larger class members are valid.
  u64 exceptional_value() const;

  // Affine form: apply(n) = (n - C)/D for valid n.  Returns (C, D) as strings
  // when large; u64 variant throws on overflow.
  std::pair<u64, u64> affine_u64() const;

  // Congruence requirements (a_i mod q_i) that together are equivalent to
  // divisibility at every step: tracking value (n - C)/D, step i requires
  // n === C + D*x (mod D*y).
  struct Requirement {
    u64 residue;
    u64 modulus;
  };
  std::vector<Requirement> class_requirements() const;

  enum class ClassValidity { Valid, Invalid, NeedsSplit };
  struct ClassCheck {
    ClassValidity verdict;
    std::size_t step_index = 0;   // offending requirement for Invalid
    u64 needed_modulus = 0;       // lcm(m, q) for NeedsSplit
  };
  // Valid iff every requirement has q | m and r matches; Invalid if some q | m
  // mismatches; NeedsSplit(lcm) if some q does not divide m.
  ClassCheck validity_on_class(u64 r, u64 m) const;

private:
  std::vector<PathSeg> segs_;
};

}  // namespace icx
