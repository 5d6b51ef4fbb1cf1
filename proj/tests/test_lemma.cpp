#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "icx/lemma.hpp"

namespace icx_test {
extern unsigned long long seed;
}

using namespace icx;

namespace {
const ComplexityTable& big_table() {
  static ComplexityTable t = ComplexityTable::build(1000000, 1000, 10000);
  return t;
}

std::string lemma_dir() {
  for (auto cand : {"data/lemmas", "../data/lemmas", "../../data/lemmas",
                    "../../../data/lemmas"}) {
    if (std::filesystem::exists(cand)) return cand;
  }
  throw std::runtime_error("lemma data directory not found");
}

LemmaRegistry load_all() {
  LemmaRegistry reg;
  for (auto& e : std::filesystem::directory_iterator(lemma_dir()))
    if (e.path().extension() == ".json") {
      LemmaSpec s = LemmaSpec::load(e.path().string());
      reg[s.id] = std::move(s);
    }
  return reg;
}
}  // namespace

TEST_CASE("shipped lemma files all pass") {
  auto reg = load_all();
  const auto& t = big_table();
  for (auto& [id, spec] : reg) {
    CheckReport rep = check_lemma(spec, t, &reg);
    for (auto& p : rep.problems) MESSAGE(p);
    CHECK_MESSAGE(rep.pass, id);
  }
}

TEST_CASE("check_all summary over the shipped directory") {
  const auto& t = big_table();
  SuiteReport rep = check_all(lemma_dir(), t);
  for (auto& p : rep.problems) MESSAGE(p);
  for (auto& l : rep.lemmas)
    if (!l.pass)
      for (auto& p : l.problems) MESSAGE(p);
  CHECK(rep.pass);
}

TEST_CASE("budget equality cases have zero slack") {
  auto reg = load_all();
  const auto& t = big_table();
  auto rep = check_lemma(reg.at("v2_ge_2"), t, &reg);
  REQUIRE(rep.pass);
  CHECK(rep.min_budget_slack == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mutated lemma files fail") {
  auto reg = load_all();
  const auto& t = big_table();
  // one mutant per shipped file: tighten the threshold numerator by one
  for (auto& e : std::filesystem::directory_iterator(lemma_dir())) {
    if (e.path().extension() != ".json") continue;
    std::ifstream in(e.path());
    nlohmann::json j;
    in >> j;
    j["alpha"]["c"] = j["alpha"]["c"].get<unsigned long>() - 1;
    LemmaSpec bad = LemmaSpec::from_json_text(j.dump());
    CheckReport rep = check_lemma(bad, t, &reg);
    std::string msg = bad.id + " should fail with threshold c-1";
    CHECK_MESSAGE(!rep.pass, msg);
  }
}

TEST_CASE("concrete confirmation: sampled members reduce as claimed") {
  // For each lemma, CRT-construct members of the hypothesis classes and
  // confirm the table satisfies ||n|| <= alpha log n at the threshold
  // whenever n is in table range (the lemma's overall claim).
  auto reg = load_all();
  const auto& t = big_table();
  std::mt19937_64 rng(icx_test::seed ^ 0x777);
  int confirmed = 0;
  for (auto& [id, spec] : reg) {
    for (int iter = 0; iter < 200; ++iter) {
      // random n below the limit satisfying every v_p hypothesis minimum
      u64 mod = 1;
      for (auto& [p, h] : spec.hyps) {
        u64 pk = 1;
        for (u64 i = 0; i < h.min; ++i) pk *= p;
        mod *= pk;
      }
      if (mod < 2) continue;
      u64 span = t.limit() / mod;
      if (span < 2) continue;
      u64 n = mod * (1 + rng() % span) - 1;  // === -1 mod p^k for all hyps
      if (n < 2 || n > t.limit()) continue;
      // claim: S(alpha, n) holds, so either composite or exact bound holds
      bool composite = false;
      for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) {
          composite = true;
          break;
        }
      if (composite) continue;
      CHECK(n >= min_n_with_pow_at_least(spec.alpha.B, t.complexity(n),
                                         spec.alpha.c));
      ++confirmed;
    }
  }
  CHECK(confirmed > 50);
}
