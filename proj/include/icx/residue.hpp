#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icx/paths.hpp"

namespace icx {

// Knowledge about the current reduced value, one record per tracked prime.
//
// Tower fact: value === a/b (mod p^j) for every j <= D, and the congruence
// fails at j = D+1, where D is the p-adic depth. D is only known to lie in
// [dmin, dmax] (dmax 0 = unbounded). The hypothesis v_p(n+1) >= k seeds the
// tower value === -1 (mod p^j), exact at the unknown depth D = v_p(n+1).
//
// Congruence fact: value === r (mod p^e) with nothing known deeper.
// NotFact: value =!= f (mod p^L) (left behind when an exact tower runs out).
struct PrimeFact {
  enum Kind { Tower, Congruence } kind = Congruence;
  unsigned p = 2;
  // Tower: rational a/b with b coprime to p
  long long a = 0;
  u64 b = 1;
  u64 dmin = 0, dmax = 0;  // dmax == kUnbounded means no upper bound
  // Congruence: r mod p^e
  u64 r = 0;
  unsigned e = 0;
  // optional exclusion: value =!= not_r (mod p^not_level); not_level 0 = none
  u64 not_r = 0;
  unsigned not_level = 0;

  static constexpr u64 kUnbounded = ~u64{0};
};

// State of one walk through a case tree: per-prime facts about the current
// reduced value, plus bookkeeping for budgets of exhaust segments.
class ResidueState {
public:
  // Seed from a v_p hypothesis: value === -1 (mod p^D), D in [dmin, dmax].
  void add_vp_hypothesis(unsigned p, u64 dmin, u64 dmax);
  // Seed a plain congruence n === r (mod p^e).
  void add_congruence(unsigned p, u64 r, unsigned e);

  const std::map<unsigned, PrimeFact>& facts() const { return facts_; }
  PrimeFact* find(unsigned p);
  const PrimeFact* find(unsigned p) const;

  // Does the state determine value mod m?  Returns residue if determined.
  std::optional<u64> residue_mod(u64 m) const;

  // All residues mod m consistent with the state (for split enumeration).
  // Throws if a tower with undetermined depth straddles the needed level.
  std::vector<u64> consistent_residues(u64 m) const;

  // Refine with value === r (mod m). Returns false if inconsistent (empty class).
  bool refine(u64 r, u64 m);

  // Apply a single step [x,y]. Returns error text on failure (divisibility not
  // guaranteed by the facts, or insufficient tower depth).
  std::optional<std::string> apply_step(const Step& s);

  // Apply [x,y] `reps` times.
  std::optional<std::string> apply_fixed(const Step& s, u64 reps);

  // Exhaust [x,y] (y = p^g) against the tower for p: apply as often as the
  // tower depth allows.  Forks into one successor state per depth residue
  // class L = D mod g; each fork records its minimum repetition count.
  struct ExhaustFork;
  std::vector<ExhaustFork> exhaust(const Step& s, u64 min_reps_required,
                                   std::string* err) const;

  std::string describe() const;

private:
  std::map<unsigned, PrimeFact> facts_;
};

struct ResidueState::ExhaustFork {
  ResidueState state;
  u64 leftover;   // L = remaining depth after the last full application
  u64 min_reps;   // smallest possible repetition count in this fork
};

// Burning a prime: [p-1, p] preserves value === -1 (mod m) for gcd(m,p)=1.
// Convenience wrapper used by tests and the CLI `path` tools.
ResidueState simulate_burn(const ResidueState& st, unsigned p, u64 count,
                           std::string* err);

}  // namespace icx
