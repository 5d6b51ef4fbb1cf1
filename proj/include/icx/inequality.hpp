#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icx/alpha.hpp"

namespace icx {

// One additive term on the right-hand side of a proposition.  var names are
// "v2", "v5", ... or auxiliary names like "m1"; "i5"/"i7" are chosen integers.
struct IneqTerm {
  std::string var;
  CoefExpr coef;
};

// Piecewise constant C(alpha): pieces ordered by increasing alpha, each valid
// while alpha < upto (the last piece has no bound).
struct PiecewiseConst {
  struct Piece {
    CoefExpr expr;
    std::optional<Alpha> upto;
  };
  std::vector<Piece> pieces;
  const CoefExpr& select(const Alpha& a) const;
};

// min(...) auxiliary: each arm is an integer-linear form, optionally floored
// after dividing by `div`:  floor((sum coef_i * v_i + c) / div).
struct AuxArm {
  std::map<std::string, mpq_class> terms;
  mpq_class constant = 0;
  u64 div = 1;  // 1 = no floor
};
struct AuxDef {
  std::vector<AuxArm> arms;  // value = min over arms
};

struct IneqSpec {
  std::string id;
  std::string lhs_var;
  CoefExpr lhs_coef;
  std::vector<IneqTerm> rhs;
  PiecewiseConst constant;  // additive alpha-dependent constant(s)
  std::map<std::string, u64> hyp_min;              // v_p >= k
  // relational hypotheses lhs >= rhs_var + offset (e.g. v2 >= v7 + 8)
  struct RelHyp {
    std::string big, small;
    u64 offset;
  };
  std::vector<RelHyp> hyp_rel;
  // chosen-integer budget: v_budget >= sum w_i * i_var + c  (i5/i7 style)
  struct IBudget {
    std::string budget_var;
    std::map<std::string, u64> weights;
    u64 offset = 0;
  };
  std::optional<IBudget> i_budget;
  std::map<std::string, AuxDef> aux;
  // regression targets: printed corollary coefficients at a given alpha
  struct PrintedValue {
    std::string var;  // "const" for the constant
    std::string value;
  };
  Alpha printed_alpha;
  std::vector<PrintedValue> printed;
  std::vector<std::string> notes;

  static IneqSpec load(const std::string& path);
  static IneqSpec from_json_text(const std::string& text);
};

// Certified derived corollary: per-variable lower bounds of coef/lhs_coef.
struct Corollary {
  struct Entry {
    std::string var;  // "const" for the normalized constant
    Interval value;
    mpq_class lower;
  };
  std::vector<Entry> entries;
  const Entry* find(const std::string& var) const;
};

// Derives the corollary at alpha; requires lhs coefficient Positive and every
// rhs coefficient Positive or Zero (exact signs), else throws with the
// offending expression.
Corollary derive_corollary(const IneqSpec& ineq, const Alpha& a, mpfr_prec_t prec);

// Compares a derived corollary against the printed targets; tolerance is
// 5*10^(1-d) with d the printed decimal count. Returns one line per mismatch.
std::vector<std::string> check_printed(const IneqSpec& ineq, mpfr_prec_t prec);

struct Relation {  // big >= lambda * small + mu, lambda/mu certified from below
  std::string big, small;
  mpq_class lambda, mu;
  std::string source;
};

struct TraceEvent {
  std::string step;
  std::string var;
  mpq_class old_bound, new_bound;
};

class BoundsState {
public:
  void seed(const std::string& var, const mpq_class& bound, const std::string& src);
  mpq_class bound(const std::string& var) const;  // 0 when unknown
  bool has(const std::string& var) const;
  const std::vector<TraceEvent>& trace() const { return trace_; }
  const std::vector<Relation>& relations() const { return relations_; }
  void add_relation(Relation r);

  // integer-bound propagation step; false = hypotheses unsatisfied (rejected)
  bool bound_step(const IneqSpec& ineq, const Alpha& a, mpfr_prec_t prec,
                  std::string* why = nullptr);
  // derive big >= lambda*keep + mu from ineq, all other vars at their bounds
  bool relation_step(const IneqSpec& ineq, const std::string& keep, const Alpha& a,
                     mpfr_prec_t prec, std::string* why = nullptr);

  // lower bound of the aux min-term under current bounds and relations
  std::optional<mpq_class> eval_aux(const AuxDef& def, bool integer_floor) const;

  std::map<std::string, mpq_class> bounds_map() const { return bounds_; }

private:
  std::optional<mpq_class> eval_arm(const AuxArm& arm, bool integer_floor) const;
  bool hyps_ok(const IneqSpec& ineq, u64 i5, u64 i7, std::string* why) const;
  friend struct ProofRunner;
  std::map<std::string, mpq_class> bounds_;
  std::vector<Relation> relations_;
  std::vector<TraceEvent> trace_;
};

struct ProofScript {
  std::string id;
  Alpha alpha;
  struct Seed {
    std::string var;
    u64 value;
    std::string from;
  };
  std::vector<Seed> seeds;
  struct Step {
    enum Kind { Apply, RelationKeep } kind;
    std::string ineq_id;
    std::string keep;  // RelationKeep only
  };
  std::vector<Step> round_steps;  // applied repeatedly until stable
  u64 ceiling = 10000;
  u64 max_rounds = 5000;
  bool limit_mode = false;  // ratios normalized by v3 = 1, constants dropped

  static ProofScript load(const std::string& path);
  static ProofScript from_json_text(const std::string& text);
};

struct ProofResult {
  enum Verdict { Infeasible, Fixpoint, Exhausted } verdict;
  std::string detail;
  std::vector<TraceEvent> trace;
  std::map<std::string, mpq_class> final_bounds;
};

ProofResult run_proof(const ProofScript& script,
                      const std::map<std::string, IneqSpec>& ineqs,
                      mpfr_prec_t prec);

}  // namespace icx
