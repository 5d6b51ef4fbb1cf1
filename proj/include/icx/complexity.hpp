#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace icx {

using u64 = std::uint64_t;

// Dense table of integer complexity values ||n|| for 0 <= n <= limit.
// ||n|| is the least number of 1s writing n with + and *; ||0|| = 0 by convention.
class ComplexityTable {
public:
  // cutoff = 0 means the additive scan is exhaustive everywhere.
  static ComplexityTable build(u64 limit, u64 cutoff = 1000, u64 exact_upto = 10000);

  u64 limit() const { return values_.size() - 1; }
  u64 summand_cutoff() const { return cutoff_; }
  u64 built_exact_upto() const { return exact_upto_; }

  unsigned complexity(u64 n) const;                 // ||n||, throws if n > limit
  unsigned operator[](u64 n) const { return values_[n]; }

  // F(x): max of ||n|| over n <= x
  unsigned max_complexity_upto(u64 x) const;

  // argmax of ||n||/ln n over [lo, hi]; ties broken by smallest n.
  // Returns (n, ||n||/ln n).
  std::pair<u64, double> max_ratio(u64 lo, u64 hi) const;

  // Exact check that B^||n|| <= n^c for every n in [lo, hi]
  // (equivalent to ||n|| <= (c/log B) * log n). No floating point in the verdict.
  struct BoundReport {
    bool pass;
    u64 first_failing_n;  // meaningful when !pass
  };
  BoundReport verify_linear_bound(u64 c, u64 B, u64 lo, u64 hi) const;

  // Re-checks the structural invariants (Selfridge/Guy exact bounds and
  // subadditivity); throws integrity errors naming the violated bound and n.
  // Additive subadditivity is exhaustive for n <= exact bound, sampled above.
  void check_invariants(u64 sample_seed = 0x1c3) const;

  // Cache file: "ICX1", u16 LE version=1, u64 LE limit, then limit+1 value bytes.
  void save_cache(const std::string& path) const;
  static ComplexityTable load_cache(const std::string& path);

  const std::vector<std::uint8_t>& values() const { return values_; }

private:
  ComplexityTable() = default;
  std::vector<std::uint8_t> values_;
  u64 cutoff_ = 0;
  u64 exact_upto_ = 0;
};

// Smallest n with n^c >= B^k, exact. Helper shared with the budget checks.
u64 min_n_with_pow_at_least(u64 B, unsigned k, u64 c);

// Sound upper bound on ||n|| for n beyond the table, by greedy division
// splits n = d*(n/d) + r down into table range.
unsigned upper_bound_complexity(const ComplexityTable& table, u64 n);

}  // namespace icx
