#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "icx/alpha.hpp"
#include "icx/paths.hpp"
#include "icx/residue.hpp"

namespace icx {

// One path segment in a case body: either ordinary steps (possibly with
// symbolic v_p repetition counts, resolved per instance) or an exhaust leg
// that repeats a single prime-power step while the tower depth allows.
struct CaseSeg {
  Path steps;          // kind Ordinary
  Step exhaust_step;   // kind Exhaust
  u64 exhaust_min = 0;
  enum Kind { Ordinary, Exhaust } kind = Ordinary;
};

struct CaseNode;
using CaseNodePtr = std::unique_ptr<CaseNode>;

struct CaseBranch {
  std::vector<u64> residues;           // for split
  std::optional<u64> vp_min, vp_max;   // for vp_split
  CaseNodePtr node;
};

struct CaseNode {
  std::vector<CaseSeg> apply;  // applied before the split / at the leaf
  enum Kind { Split, VpSplit, End, Composite, Discharge } kind = End;
  u64 split_mod = 0;     // Split
  unsigned vp_prime = 0; // VpSplit
  std::vector<CaseBranch> branches;
  std::string discharge_ref;  // Discharge
};

struct VpHyp {
  u64 min = 0;
  std::optional<u64> max;  // inclusive; empty = unbounded
};

struct ConclusionAtom {
  unsigned p;
  u64 k;  // claims v_p >= k
};

struct LemmaSpec {
  std::string id;
  Alpha alpha;
  std::map<unsigned, VpHyp> hyps;
  // bounds established by the inequality engine rather than an earlier
  // definite lemma (documented per file); exempt from the uses-DAG check
  std::map<unsigned, u64> external_hyps;
  std::vector<std::pair<u64, std::vector<u64>>> congruences;  // (mod, residues)
  std::vector<std::string> uses;  // ids of lemmas justifying the hypotheses
  bool conclusion_all = true;     // all = conjunction, any = disjunction
  std::vector<ConclusionAtom> conclusion;
  std::vector<CaseNodePtr> cases;  // one tree per conclusion atom (all) or one (any)
  std::vector<std::string> notes;

  static LemmaSpec load(const std::string& path);
  static LemmaSpec from_json_text(const std::string& text);
};

struct LeafReport {
  std::string context;     // region/instance/class description
  std::string path_text;   // resolved path in paper order ("composite", "discharge")
  bool pass = false;
  double budget_slack = 0; // c*ln(Pi) - cost*ln(B), > 0 means strict pass
  std::vector<u64> exceptions_tested;
  std::string error;
};

struct CheckReport {
  std::string lemma_id;
  bool pass = false;
  u64 instances = 0;
  u64 classes = 0;
  std::vector<LeafReport> leaves;
  std::vector<std::string> problems;
  double min_budget_slack = 0;
};

// registry maps lemma id -> spec, used for discharge nodes and the uses-DAG
using LemmaRegistry = std::map<std::string, LemmaSpec>;

CheckReport check_lemma(const LemmaSpec& spec, const ComplexityTable& table,
                        const LemmaRegistry* registry = nullptr);

struct SuiteReport {
  bool pass = false;
  std::vector<CheckReport> lemmas;
  std::vector<std::string> problems;  // DAG-level findings
};
SuiteReport check_all(const std::string& directory, const ComplexityTable& table);

}  // namespace icx
