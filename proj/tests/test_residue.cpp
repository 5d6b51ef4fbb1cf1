#include <doctest.h>

#include <random>
#include <numeric>
#include <gmpxx.h>

#include "icx/residue.hpp"

namespace icx_test {
extern unsigned long long seed;
}

using namespace icx;

TEST_CASE("burning preserves -1 mod coprime moduli") {
  ResidueState st;
  st.add_vp_hypothesis(3, 2, 2);               // v_3 = 2 exactly
  st.add_congruence(5, 4, 1);                  // n === -1 (mod 5)
  std::string err;
  ResidueState out = simulate_burn(st, 3, 2, &err);
  CHECK(err.empty());
  CHECK(out.residue_mod(5) == 4);              // still -1 mod 5
  // concrete cross-check from the examples: n = 44, two [2,3] steps -> 4
  CHECK(44 % 5 == 4);
  CHECK(((44 - 2) / 3 - 2) / 3 == 4);
  CHECK(4 % 5 == 4);
}

TEST_CASE("coprime congruence transforms through a step") {
  // value === 2 (mod 5), one [1,2] step: (2-1)*inv(2) === 3 (mod 5)
  ResidueState st;
  st.add_congruence(5, 2, 1);
  st.add_congruence(2, 1, 1);  // odd, so [1,2] applies
  CHECK(!st.apply_step(Step{1, 2}));
  CHECK(st.residue_mod(5) == 3);
}

TEST_CASE("insufficient declared depth is an error") {
  ResidueState st;
  st.add_vp_hypothesis(2, 1, PrimeFact::kUnbounded);
  std::string err;
  ResidueState out = simulate_burn(st, 2, 2, &err);
  CHECK(!err.empty());
  (void)out;
}

TEST_CASE("tower through a transition gadget: -1/2 is 1-repeating 3-adically") {
  // n === -1 mod 3^k (k large); [1,2]-burn keeps it; after [0,2] the value is
  // -1/2 === 1 (mod 3), and each [1,3] consumes one 3-level
  ResidueState st;
  st.add_vp_hypothesis(3, 5, PrimeFact::kUnbounded);
  st.add_vp_hypothesis(2, 1, 1);  // v_2 = 1
  CHECK(!st.apply_step(Step{1, 2}));
  CHECK(!st.apply_step(Step{0, 2}));
  auto* f = st.find(3);
  REQUIRE(f);
  CHECK(f->kind == PrimeFact::Tower);
  CHECK(st.residue_mod(3) == 1);
  for (int i = 0; i < 5; ++i) CHECK(!st.apply_step(Step{1, 3}));
  CHECK(st.find(3)->dmin == 0);
}

TEST_CASE("exhaust forks by leftover depth") {
  // tower -1/3 for p=2 (after [0,2][1,2]^v2 style reductions), exhaust [1,4]
  ResidueState st;
  st.add_vp_hypothesis(2, 6, PrimeFact::kUnbounded);
  st.add_vp_hypothesis(3, 1, PrimeFact::kUnbounded);
  // burn one 2 then divide by 2: tower becomes -1/2... use [1,6] on v3? keep
  // it simple: exhaust [1,2] itself (g = 1, single leftover class)
  std::string err;
  auto forks = st.exhaust(Step{1, 2}, 3, &err);
  REQUIRE(forks.size() == 1);
  CHECK(forks[0].min_reps == 6);
  CHECK(forks[0].leftover == 0);
  // after exhausting all 2s the value is even
  CHECK(forks[0].state.residue_mod(2) == 0);

  // dividing by 2 while the tower still guarantees odd is rejected
  ResidueState st2;
  st2.add_vp_hypothesis(2, 6, PrimeFact::kUnbounded);
  CHECK(!st2.apply_step(Step{1, 2}));  // burn one level: tower -1, depth >= 5
  CHECK(st2.apply_step(Step{0, 2}).has_value());

  ResidueState st3;
  st3.add_vp_hypothesis(2, 7, PrimeFact::kUnbounded);
  auto f3 = st3.exhaust(Step{1, 2}, 1, &err);
  REQUIRE(f3.size() == 1);
  CHECK(f3[0].min_reps == 7);
}

TEST_CASE("exhaust [1,4] on a -1/3 tower gives the two leftover classes") {
  // the v_3 = 2 case-A structure: burn [2,3], refine mod 9, apply [2,9];
  // the 2-adic fact becomes -1/3 (the fixed point of [1,4]) and the exhaust
  // forks by leftover depth
  ResidueState st;
  st.add_vp_hypothesis(2, 9, PrimeFact::kUnbounded);
  st.add_vp_hypothesis(3, 2, 2);  // exactly two trailing 2s base 3
  CHECK(!st.apply_step(Step{2, 3}));
  REQUIRE(st.refine(2, 9));  // case [2,3]n === 2 (mod 9)
  CHECK(!st.apply_step(Step{2, 9}));
  auto* f2 = st.find(2);
  REQUIRE(f2);
  CHECK(f2->kind == PrimeFact::Tower);
  CHECK(f2->a == -1);
  CHECK(f2->b == 3);
  CHECK(f2->dmin == 9);
  std::string err;
  auto forks = st.exhaust(Step{1, 4}, 3, &err);
  REQUIRE_MESSAGE(forks.size() == 2, err);
  CHECK(forks[0].leftover == 0);
  CHECK(forks[0].min_reps == 5);  // depth 10 is the first even depth >= 9
  CHECK(forks[1].leftover == 1);
  CHECK(forks[1].min_reps == 4);  // depth 9: 4 applications, leftover 1
  // leftover 0: value even; leftover 1: value === 3 (mod 4)
  CHECK(forks[0].state.residue_mod(2) == 0);
  CHECK(forks[1].state.residue_mod(4) == 3);
}

TEST_CASE("property: burning preserves -1 for random coprime pairs") {
  std::mt19937_64 rng(icx_test::seed ^ 0xb0b);
  const unsigned primes[] = {2, 3, 5, 7, 11, 13};
  int done = 0;
  for (int iter = 0; iter < 4000 && done < 1000; ++iter) {
    unsigned b = primes[rng() % 6];
    u64 m = 2 + rng() % 60;
    if (std::gcd<u64>(b, m) != 1) continue;
    ++done;
    ResidueState st;
    st.add_vp_hypothesis(b, 3, PrimeFact::kUnbounded);
    u64 r = m - 1;
    st.add_congruence(61, (61 + u64(-1 % 61)) % 61, 1);  // unused tracked prime
    // track -1 mod m via its prime factorization is messy for composite m;
    // check against a concrete witness instead
    mpz_class n;
    // n === -1 mod b^3 and n === -1 mod m: n = lcm - 1 works
    u64 b3 = b * b * b;
    u64 l = std::lcm(b3, m);
    n = l - 1;
    mpz_class cur = n;
    for (int k = 0; k < 3; ++k) {
      CHECK(mpz_divisible_ui_p(mpz_class(cur - (b - 1)).get_mpz_t(), b));
      cur = (cur - (b - 1)) / b;
    }
    CHECK(mpz_class(cur % m) == mpz_class(r));
  }
  CHECK(done >= 1000);
}
