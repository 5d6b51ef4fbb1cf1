#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "icx/complexity.hpp"
#include "oracle.hpp"

namespace icx_test {
extern unsigned long long seed;
}

using namespace icx;

namespace {
const ComplexityTable& small_table() {
  static ComplexityTable t = ComplexityTable::build(20000, 1000, 20000);
  return t;
}
}  // namespace

TEST_CASE("oracle values for n <= 10 frozen from expression enumeration") {
  auto oracle = brute_force_complexity(10);
  std::vector<unsigned> expected{0, 1, 2, 3, 4, 5, 5, 6, 6, 6, 7};
  for (u64 n = 0; n <= 10; ++n) CHECK(oracle[n] == expected[n]);
}

TEST_CASE("build_table matches the brute-force oracle on [0, 40]") {
  auto oracle = brute_force_complexity(40);
  const auto& t = small_table();
  for (u64 n = 0; n <= 40; ++n) CHECK(t[n] == oracle[n]);
}

TEST_CASE("published table values") {
  const auto& t = small_table();
  CHECK(t[1] == 1);
  CHECK(t[6] == 5);
  CHECK(t[1439] == 26);
  CHECK(t[15625] == 29);  // 5^6
  CHECK(t[121] == 15);    // 11^2
  CHECK(t[289] == 17);
  CHECK(t[55] == 12);
}

TEST_CASE("complexity lookup and range errors") {
  const auto& t = small_table();
  CHECK(t.complexity(0) == 0);
  CHECK(t.complexity(6) == 5);
  CHECK_THROWS_AS((void)t.complexity(t.limit() + 1), std::out_of_range);
  CHECK_THROWS_AS(ComplexityTable::build(0), std::domain_error);
}

TEST_CASE("max_complexity_upto") {
  const auto& t = small_table();
  CHECK(t.max_complexity_upto(1) == 1);
  CHECK(t.max_complexity_upto(6) == 5);
  CHECK(t.max_complexity_upto(10) == 7);
}

TEST_CASE("max_ratio") {
  const auto& t = small_table();
  auto [n1, r1] = t.max_ratio(2, 2);
  CHECK(n1 == 2);
  CHECK(r1 == doctest::Approx(2.0 / std::log(2.0)));
  auto [n2, r2] = t.max_ratio(2, 10000);
  CHECK(n2 == 1439);
  CHECK(r2 == doctest::Approx(3.5751).epsilon(1e-3));
  CHECK_THROWS(t.max_ratio(0, 5));
}

TEST_CASE("verify_linear_bound exact verdicts") {
  const auto& t = small_table();
  CHECK(t.verify_linear_bound(26, 1439, 2, t.limit()).pass);
  CHECK(t.verify_linear_bound(3, 2, 2, t.limit()).pass);
  // (25, 1439) fails: 1439 is a failure point (needs c = 26), but the first
  // failure in scan order is n = 23 with ||23||/log 23 = 11/log 23 > 25/log 1439
  auto rep = t.verify_linear_bound(25, 1439, 2, 2000);
  CHECK(!rep.pass);
  CHECK(rep.first_failing_n == 23);
  CHECK(!t.verify_linear_bound(26, 1439, 1439, 1439).pass == false);
}

TEST_CASE("oracle equivalence: cutoff table equals exhaustive table") {
  auto cut = ComplexityTable::build(4000, 1000, 100);
  auto full = ComplexityTable::build(4000, 0, 4000);
  CHECK(cut.values() == full.values());
}

TEST_CASE("selfridge attainment at powers of 3") {
  const auto& t = small_table();
  u64 p = 3;
  unsigned k = 1;
  while (p <= t.limit()) {
    CHECK(t[p] == 3 * k);
    p *= 3;
    ++k;
  }
}

TEST_CASE("table invariants hold and are re-checkable") {
  CHECK_NOTHROW(small_table().check_invariants(icx_test::seed));
}

TEST_CASE("cache round-trip, corruption and bad magic") {
  auto t = ComplexityTable::build(10, 0, 10);
  std::string path = "icx_test_cache.icx";
  t.save_cache(path);
  auto back = ComplexityTable::load_cache(path);
  CHECK(back.values() == t.values());

  // corrupt ||6|| to 4: Selfridge 3^4 = 81 < 216 = 6^3 must be reported
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(14 + 6);
    char v = 4;
    f.write(&v, 1);
  }
  CHECK_THROWS_WITH_AS(ComplexityTable::load_cache(path),
                       doctest::Contains("Selfridge"), std::runtime_error);

  {
    std::ofstream f(path, std::ios::binary);
    f << "NOPE";
  }
  CHECK_THROWS_WITH_AS(ComplexityTable::load_cache(path),
                       doctest::Contains("magic"), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("property: subadditivity under + and * on random pairs") {
  const auto& t = small_table();
  std::mt19937_64 rng(icx_test::seed);
  for (int i = 0; i < 2000; ++i) {
    u64 a = 2 + rng() % (t.limit() / 2 - 2);
    u64 b = 1 + rng() % (t.limit() - a - 1);
    CHECK(t[a + b] <= t[a] + t[b]);
    if (a * b <= t.limit() && b >= 2) CHECK(t[a * b] <= t[a] + t[b]);
  }
}
