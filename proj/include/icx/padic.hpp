#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icx/complexity.hpp"

namespace icx {

enum class Balance { Balanced, Efficient, Inefficient };
std::string to_string(Balance b);

// multiplicative order of p mod n (gcd(p, n) = 1, n > 1)
u64 multiplicative_order(u64 p, u64 n);

// The purely periodic block of -1/n in base p: the base-p digits of
// (p^d - 1)/n, left-padded to length d, where d = ord_p(n).
struct PeriodProfile {
  u64 n = 0;
  unsigned p = 2;
  u64 period = 0;
  std::vector<u64> digit_counts;  // length p
  u64 ones() const { return digit_counts.size() > 1 ? digit_counts[1] : 0; }
  u64 zeros() const { return digit_counts.empty() ? 0 : digit_counts[0]; }
  // verifies n * block == p^d - 1 exactly
  bool block_identity_ok() const;
};

PeriodProfile repeating_block(u64 n, unsigned p = 2);

// odd n > 1, by comparing 1s and 0s of the 2-adic period of -1/n
Balance classify2(u64 n);

struct Census {
  u64 x = 0;
  u64 balanced = 0, efficient = 0, inefficient = 0;
  bool conjecture_holds() const { return balanced + efficient >= inefficient; }
};

// counts over odd 3 <= n <= x; optional per-n rows and checkpointing
struct CensusOptions {
  std::string checkpoint_path;   // resumable JSON {x_done,B,E,I}
  u64 checkpoint_every = 10000;
  std::vector<std::string>* rows = nullptr;  // "n,d,ones,zeros,class" when set
};
Census census2(u64 x, const CensusOptions& opts = {});

// generalizations for odd primes p
enum class PMetric { ZeroCount, DigitAverage, ComplexityAverage };
struct PClassification {
  Balance verdict = Balance::Balanced;  // unused for ComplexityAverage
  bool has_verdict = true;
  // DigitAverage: mean digit as exact rational vs (p-1)/2
  // ComplexityAverage: mean ||digit|| (report value only)
  std::string detail;
  double report_value = 0.0;
};
// expected_zero_paper: metric 1 compares the zero fraction against 1/(p-1)
// as the paper states (switchable to the uniform model 1/p).
PClassification classify_p(u64 n, unsigned p, PMetric metric,
                           const ComplexityTable* table = nullptr,
                           bool expected_zero_paper = true);

// smallest inefficient odd number / prime up to bound (0 if none): findings
u64 smallest_inefficient(u64 bound, bool primes_only);

}  // namespace icx
