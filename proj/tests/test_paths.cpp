#include <doctest.h>

#include <random>
#include <stdexcept>

#include "icx/complexity.hpp"
#include "icx/paths.hpp"

namespace icx_test {
extern unsigned long long seed;
}

using namespace icx;

namespace {
const ComplexityTable& tbl() {
  static ComplexityTable t = ComplexityTable::build(10000, 1000, 10000);
  return t;
}
}  // namespace

TEST_CASE("parse stores application order, print round-trips") {
  Path p = Path::parse("[1,2][2,3]");
  REQUIRE(p.segments().size() == 2);
  CHECK(p.segments()[0].step == Step{2, 3});  // rightmost applies first
  CHECK(p.segments()[1].step == Step{1, 2});
  CHECK(p.print() == "[1,2][2,3]");
  CHECK(Path::parse(p.print()).segments() == p.segments());

  Path q = Path::parse("[1,2]^3");
  CHECK(q.segments().size() == 1);
  CHECK(std::get<u64>(q.segments()[0].reps) == 3);

  Path s = Path::parse("[1,4][1,2]^v2-1");
  CHECK(!s.fixed());
  CHECK(s.print() == "[1,4][1,2]^v2-1");
  CHECK(std::get<SymCount>(s.segments()[0].reps) == SymCount{2, -1});

  CHECK_THROWS_AS(Path::parse("[1,1]"), std::invalid_argument);
  CHECK_THROWS_AS(Path::parse("[1,2"), std::invalid_argument);
  CHECK_THROWS_AS(Path::parse(""), std::invalid_argument);
}

TEST_CASE("apply_path examples") {
  CHECK(std::get<u64>(Path::parse("[1,6]").apply(7)) == 1);
  auto inv = std::get<Path::Invalid>(Path::parse("[2,4][1,3]").apply(16));
  CHECK(inv.kind == Path::Invalid::NotDivisible);
  CHECK(std::get<u64>(Path::parse("[1,2][2,3]").apply(17)) == 2);
  // reaching zero at the end is invalid
  auto z = std::get<Path::Invalid>(Path::parse("[1,6]").apply(1));
  CHECK(z.kind == Path::Invalid::HitZeroOrNegative);
}

TEST_CASE("cost and product") {
  const auto& t = tbl();
  Path p1 = Path::parse("[1,6]");
  CHECK(p1.cost(t) == 6);
  CHECK(*p1.product_u64() == 6);
  Path p2 = Path::parse("[1,2]^3");
  CHECK(p2.cost(t) == 9);
  CHECK(*p2.product_u64() == 8);
  Path p3 = Path::parse("[1,4]");
  CHECK(p3.cost(t) == 5);
  CHECK(*p3.product_u64() == 4);
}

TEST_CASE("budget checks at thresholds") {
  const auto& t = tbl();
  CHECK(Path::parse("[1,6]").budget_ok(6, 6, t));      // equality
  CHECK(Path::parse("[1,4]").budget_ok(5, 4, t));      // equality
  CHECK(!Path::parse("[1,2]").budget_ok(41, 55296, t));
  // the lemma v2=5 worst case: cost 29, product 2304 at 29/log 2304
  CHECK(Path::parse("[1,3][1,12][1,4][1,2]^4").budget_ok(29, 2304, t));
  CHECK(!Path::parse("[1,3][1,12][1,4][1,2]^5").budget_ok(29, 2304, t));
}

TEST_CASE("exceptional values by back-substitution") {
  CHECK(Path::parse("[1,2]^3").exceptional_value() == 7);
  CHECK(Path::parse("[1,6]").exceptional_value() == 1);
  CHECK(Path::parse("[1,2][2,3]").exceptional_value() == 5);
}

TEST_CASE("class requirements") {
  auto r1 = Path::parse("[1,2]").class_requirements();
  REQUIRE(r1.size() == 1);
  CHECK(r1[0].residue == 1);
  CHECK(r1[0].modulus == 2);

  auto r2 = Path::parse("[1,4][1,2]").class_requirements();
  REQUIRE(r2.size() == 2);
  CHECK(r2[0].residue == 1);
  CHECK(r2[0].modulus == 2);
  CHECK(r2[1].residue == 3);
  CHECK(r2[1].modulus == 8);

  auto r3 = Path::parse("[1,6]").class_requirements();
  CHECK(r3[0].residue == 1);
  CHECK(r3[0].modulus == 6);
}

TEST_CASE("validity on classes") {
  Path p = Path::parse("[1,4]");
  CHECK(p.validity_on_class(1, 4).verdict == Path::ClassValidity::Valid);
  CHECK(p.validity_on_class(3, 4).verdict == Path::ClassValidity::Invalid);
  auto ns = Path::parse("[1,8][1,2]").validity_on_class(3, 8);
  CHECK(ns.verdict == Path::ClassValidity::NeedsSplit);
  CHECK(ns.needed_modulus == 16);
}

TEST_CASE("property: affine law apply(n) == (n - C)/D") {
  std::mt19937_64 rng(icx_test::seed);
  std::vector<Step> steps{{1, 2}, {2, 3}, {1, 4}, {0, 2}, {1, 6}, {4, 5}, {2, 9}};
  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<PathSeg> segs;
    int len = 1 + rng() % 3;
    for (int i = 0; i < len; ++i)
      segs.push_back({steps[rng() % steps.size()], 1 + rng() % 2});
    Path p{segs};
    auto [C, D] = p.affine_u64();
    u64 n = 1 + rng() % 100000;
    auto res = p.apply(n);
    if (auto* v = std::get_if<u64>(&res)) {
      CHECK((n - C) % D == 0);
      CHECK(*v == (n - C) / D);
    }
  }
}

TEST_CASE("property: requirements sound and complete on n <= 10^4") {
  std::mt19937_64 rng(icx_test::seed ^ 0x9e3779b9);
  std::vector<Step> steps{{1, 2}, {2, 3}, {1, 4}, {1, 3}, {0, 2}, {1, 6}};
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<PathSeg> segs;
    int len = 1 + rng() % 3;
    for (int i = 0; i < len; ++i)
      segs.push_back({steps[rng() % steps.size()], u64{1}});
    Path p{segs};
    auto reqs = p.class_requirements();
    u64 n0 = p.exceptional_value();
    for (u64 n = 1; n <= 10000; ++n) {
      bool congr_ok = true;
      for (auto& r : reqs)
        if (n % r.modulus != r.residue) congr_ok = false;
      bool valid = std::holds_alternative<u64>(p.apply(n));
      // valid iff all congruences hold and n is beyond the zero-hitting point
      CHECK(valid == (congr_ok && n > n0));
    }
  }
}

TEST_CASE("property: trailing digit law v_p(n+1) counts trailing p-1 digits") {
  std::mt19937_64 rng(icx_test::seed ^ 0x51ed);
  for (unsigned p : {2u, 3u, 5u, 7u, 13u, 17u}) {
    for (int iter = 0; iter < 200; ++iter) {
      u64 n = 1 + rng() % 1000000;
      unsigned vp = 0;
      u64 m = n + 1;
      while (m % p == 0) {
        m /= p;
        ++vp;
      }
      unsigned trailing = 0;
      u64 d = n;
      while (d % p == p - 1) {
        d /= p;
        ++trailing;
      }
      CHECK(vp == trailing);
    }
  }
}
