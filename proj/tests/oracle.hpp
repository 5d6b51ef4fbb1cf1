#pragma once

#include <cstdint>
#include <set>
#include <vector>

// Independent oracle: smallest number of 1s building n from + and *, found by
// enumerating the sets S_k of everything expressible with exactly k ones.
// Exponential, only for tiny limits; deliberately shares nothing with the
// sieve in icx_core.
inline std::vector<unsigned> brute_force_complexity(std::uint64_t limit,
                                                    unsigned kmax = 24) {
  std::vector<std::set<std::uint64_t>> sets(kmax + 1);
  sets[1] = {1};
  std::vector<unsigned> best(limit + 1, 0xffffffff);
  best[0] = 0;
  if (limit >= 1) best[1] = 1;
  for (unsigned k = 2; k <= kmax; ++k) {
    for (unsigned i = 1; i + 1 <= k; ++i) {
      unsigned j = k - i;
      if (j < i) break;
      for (auto a : sets[i])
        for (auto b : sets[j]) {
          if (a + b <= 4 * limit) sets[k].insert(a + b);
          if (a <= 4 * limit / (b ? b : 1)) sets[k].insert(a * b);
        }
    }
    for (auto v : sets[k])
      if (v <= limit && best[v] > k) best[v] = k;
  }
  return best;
}
