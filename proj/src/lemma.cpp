#include "icx/lemma.hpp"

#include "icx/padic.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace icx {

using nlohmann::json;

namespace {

u64 pow_u64_l(u64 p, u64 e) {
  u64 r = 1;
  while (e--) r *= p;
  return r;
}

CaseNodePtr parse_node(const json& j);

std::vector<CaseSeg> parse_apply(const json& j) {
  std::vector<CaseSeg> out;
  auto add_string = [&](const std::string& s) {
    CaseSeg seg;
    seg.kind = CaseSeg::Ordinary;
    seg.steps = Path::parse(s);
    out.push_back(std::move(seg));
  };
  if (j.is_string()) {
    add_string(j.get<std::string>());
    return out;
  }
  for (auto& el : j) {
    if (el.is_string()) {
      add_string(el.get<std::string>());
    } else {
      CaseSeg seg;
      seg.kind = CaseSeg::Exhaust;
      Path p = Path::parse(el.at("exhaust").get<std::string>());
      if (p.segments().size() != 1 ||
          !std::holds_alternative<u64>(p.segments()[0].reps) ||
          std::get<u64>(p.segments()[0].reps) != 1)
        throw std::invalid_argument("exhaust segment must be a single step");
      seg.exhaust_step = p.segments()[0].step;
      seg.exhaust_min = el.value("min_reps", u64{1});
      out.push_back(std::move(seg));
    }
  }
  return out;
}

CaseNodePtr parse_node(const json& j) {
  auto node = std::make_unique<CaseNode>();
  for (auto& [k, v] : j.items()) {
    if (k != "apply" && k != "split" && k != "vp_split" && k != "end" &&
        k != "composite" && k != "discharge")
      throw std::invalid_argument("unknown case field '" + k + "'");
  }
  if (j.contains("apply")) node->apply = parse_apply(j.at("apply"));
  if (j.contains("split")) {
    node->kind = CaseNode::Split;
    node->split_mod = j.at("split").at("mod").get<u64>();
    std::set<u64> seen;
    for (auto& b : j.at("split").at("branches")) {
      CaseBranch br;
      for (auto& r : b.at("residues")) {
        u64 res = r.get<u64>();
        if (res >= node->split_mod)
          throw std::invalid_argument("split residue out of range");
        if (!seen.insert(res).second)
          throw std::invalid_argument("overlapping residues in split");
        br.residues.push_back(res);
      }
      json body = b;
      body.erase("residues");
      br.node = parse_node(body);
      node->branches.push_back(std::move(br));
    }
  } else if (j.contains("vp_split")) {
    node->kind = CaseNode::VpSplit;
    node->vp_prime = j.at("vp_split").at("p").get<unsigned>();
    for (auto& b : j.at("vp_split").at("branches")) {
      CaseBranch br;
      br.vp_min = b.at("min").get<u64>();
      if (b.contains("max")) br.vp_max = b.at("max").get<u64>();
      json body = b;
      body.erase("min");
      if (body.contains("max")) body.erase("max");
      br.node = parse_node(body);
      node->branches.push_back(std::move(br));
    }
  } else if (j.contains("composite")) {
    node->kind = CaseNode::Composite;
  } else if (j.contains("discharge")) {
    node->kind = CaseNode::Discharge;
    node->discharge_ref = j.at("discharge").get<std::string>();
  } else if (j.contains("end")) {
    node->kind = CaseNode::End;
  } else if (!node->apply.empty()) {
    node->kind = CaseNode::End;  // bare apply = leaf
  } else {
    throw std::invalid_argument("case node has no body");
  }
  return node;
}

}  // namespace

LemmaSpec LemmaSpec::from_json_text(const std::string& text) {
  json j = json::parse(text);
  for (auto& [k, v] : j.items())
    if (k != "id" && k != "alpha" && k != "hyps" && k != "uses" &&
        k != "conclusion" && k != "cases" && k != "notes")
      throw std::invalid_argument("unknown lemma field '" + k + "'");
  LemmaSpec s;
  s.id = j.at("id").get<std::string>();
  s.alpha = Alpha{j.at("alpha").at("c").get<u64>(), j.at("alpha").at("B").get<u64>()};
  if (j.contains("hyps")) {
    auto& h = j.at("hyps");
    for (auto& [k, v] : h.items())
      if (k != "vp" && k != "congruences" && k != "external_vp")
        throw std::invalid_argument("unknown hyps field '" + k + "'");
    if (h.contains("vp"))
      for (auto& [p, d] : h.at("vp").items()) {
        VpHyp hyp;
        if (d.contains("exact")) {
          hyp.min = d.at("exact").get<u64>();
          hyp.max = hyp.min;
        } else {
          hyp.min = d.value("min", u64{0});
          if (d.contains("max")) hyp.max = d.at("max").get<u64>();
        }
        s.hyps[unsigned(std::stoul(p))] = hyp;
      }
    if (h.contains("external_vp"))
      for (auto& [p, d] : h.at("external_vp").items()) {
        unsigned pp = unsigned(std::stoul(p));
        u64 k = d.get<u64>();
        s.external_hyps[pp] = k;
        auto& hyp = s.hyps[pp];
        hyp.min = std::max(hyp.min, k);
      }
    if (h.contains("congruences"))
      for (auto& c : h.at("congruences")) {
        std::vector<u64> res;
        for (auto& r : c.at("residues")) res.push_back(r.get<u64>());
        s.congruences.emplace_back(c.at("mod").get<u64>(), res);
      }
  }
  if (j.contains("uses"))
    for (auto& u : j.at("uses")) s.uses.push_back(u.get<std::string>());
  auto& c = j.at("conclusion");
  s.conclusion_all = c.value("mode", std::string("all")) == "all";
  for (auto& a : c.at("atoms"))
    s.conclusion.push_back({a.at("p").get<unsigned>(), a.at("k").get<u64>()});
  for (auto& t : j.at("cases")) s.cases.push_back(parse_node(t));
  std::size_t want = s.conclusion_all ? s.conclusion.size() : 1;
  if (s.cases.size() != want)
    throw std::invalid_argument(s.id + ": expected " + std::to_string(want) +
                                " case trees, got " + std::to_string(s.cases.size()));
  if (j.contains("notes"))
    for (auto& n : j.at("notes")) s.notes.push_back(n.get<std::string>());
  return s;
}

LemmaSpec LemmaSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json_text(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

namespace {

// ---------------------------------------------------------------------------
// checker internals

struct Instance {
  std::map<unsigned, u64> pinned;            // prime -> exact depth
  std::map<unsigned, u64> tower_min;         // unbounded primes -> min depth
  std::string describe() const {
    std::ostringstream os;
    for (auto& [p, d] : pinned) os << "v" << p << "=" << d << " ";
    for (auto& [p, d] : tower_min) os << "v" << p << ">=" << d << " ";
    return os.str();
  }
};

struct ExhaustLeg {
  Step step;
  unsigned p = 2;
  unsigned g = 1;       // levels consumed per application
  u64 min_reps = 0;     // this fork's minimum repetitions
  u64 leftover = 0;
  u64 depth_at_min = 0; // v_p(n+1) of class members when reps = min_reps
  std::size_t position = 0;  // index into concrete segment list where it sits
};

struct WalkCtx {
  const LemmaSpec* spec;
  const ComplexityTable* table;
  const LemmaRegistry* registry;
  CheckReport* report;
  Instance inst;
  std::string region_desc;
};

struct WalkState {
  ResidueState st;
  std::vector<PathSeg> concrete;          // fixed segments so far (application order)
  std::optional<ExhaustLeg> exhaust;      //  at most one per leaf
  mpz_class affC = 0, affD = 1;           // value = (n - C)/D over fixed segments
  std::vector<std::pair<mpz_class, mpz_class>> n_congruences;  // (residue, mod)
  std::string klass;                      // human-readable class trail
};

std::string step_str(const Step& s) {
  return "[" + std::to_string(s.x) + "," + std::to_string(s.y) + "]";
}

class LemmaChecker {
 public:
  LemmaChecker(const LemmaSpec& spec, const ComplexityTable& table,
               const LemmaRegistry* registry, CheckReport& rep)
      : spec_(spec), table_(table), registry_(registry), rep_(rep) {}

  void run() {
    rep_.lemma_id = spec_.id;
    rep_.pass = true;
    rep_.min_budget_slack = 1e300;
    // regions: hyps + negation of the conclusion
    std::size_t ntrees = spec_.cases.size();
    for (std::size_t ri = 0; ri < ntrees; ++ri) {
      std::map<unsigned, VpHyp> region = spec_.hyps;
      std::string rdesc;
      if (spec_.conclusion_all) {
        for (std::size_t j = 0; j < ri; ++j) {
          auto& a = spec_.conclusion[j];
          auto& h = region[a.p];
          h.min = std::max(h.min, a.k);
        }
        auto& a = spec_.conclusion[ri];
        auto& h = region[a.p];
        if (a.k == 0) continue;
        u64 newmax = a.k - 1;
        if (h.max && *h.max < newmax) newmax = *h.max;
        if (h.min > newmax) continue;  // region empty, atom implied
        h.max = newmax;
        rdesc = "refuting v" + std::to_string(a.p) + ">=" + std::to_string(a.k);
      } else {
        bool empty = false;
        for (auto& a : spec_.conclusion) {
          auto& h = region[a.p];
          if (a.k == 0) {
            empty = true;
            break;
          }
          u64 newmax = a.k - 1;
          if (h.max && *h.max < newmax) newmax = *h.max;
          if (h.min > newmax) {
            empty = true;
            break;
          }
          h.max = newmax;
        }
        if (empty) continue;
        rdesc = "refuting the disjunction";
      }
      run_region(region, rdesc, *spec_.cases[ri]);
    }
    if (!rep_.problems.empty()) rep_.pass = false;
    if (rep_.min_budget_slack > 1e299) rep_.min_budget_slack = 0;
  }

 private:
  void problem(const std::string& msg) {
    rep_.problems.push_back(spec_.id + ": " + msg);
    rep_.pass = false;
  }

  void run_region(const std::map<unsigned, VpHyp>& region, const std::string& rdesc,
                  const CaseNode& tree) {
    // instance every bounded prime
    std::vector<std::pair<unsigned, std::pair<u64, u64>>> bounded;
    Instance base;
    for (auto& [p, h] : region) {
      if (h.max)
        bounded.push_back({p, {h.min, *h.max}});
      else
        base.tower_min[p] = h.min;
    }
    std::vector<Instance> insts{base};
    for (auto& [p, range] : bounded) {
      std::vector<Instance> next;
      for (auto& ins : insts)
        for (u64 d = range.first; d <= range.second; ++d) {
          Instance n2 = ins;
          n2.pinned[p] = d;
          next.push_back(std::move(n2));
        }
      insts = std::move(next);
    }
    for (auto& ins : insts) {
      rep_.instances++;
      WalkState ws;
      for (auto& [p, d] : ins.pinned) {
        ws.st.add_vp_hypothesis(p, d, d);
        // n === p^d - 1 (mod p^d); the (d+1)-level exclusion is carried by
        // the residue facts and, for the n-class, by lift enumeration
        u64 pd = pow_u64_l(p, d);
        ws.n_congruences.emplace_back(mpz_class((unsigned long)(pd - 1)),
                                      mpz_class((unsigned long)pd));
      }
      for (auto& [p, d] : ins.tower_min) {
        ws.st.add_vp_hypothesis(p, d, PrimeFact::kUnbounded);
        u64 pd = pow_u64_l(p, d);
        ws.n_congruences.emplace_back(mpz_class((unsigned long)(pd - 1)),
                                      mpz_class((unsigned long)pd));
      }
      bool consistent = true;
      for (auto& [m, residues] : spec_.congruences) {
        // hypothesis congruences: a single residue refines, a set splits later
        if (residues.size() == 1) {
          if (!ws.st.refine(residues[0], m)) {
            consistent = false;
            break;
          }
          ws.n_congruences.emplace_back(mpz_class((unsigned long)residues[0]),
                                        mpz_class((unsigned long)m));
        } else {
          problem("multi-residue hypothesis congruences are not supported");
          return;
        }
      }
      if (!consistent) continue;
      ws.klass = rdesc + " [" + ins.describe() + "]";
      Instance saved = cur_inst_;
      cur_inst_ = ins;
      walk(ws, tree);
      cur_inst_ = saved;
    }
  }

  // --- tree walk ---

  void walk(WalkState ws, const CaseNode& node) {
    for (std::size_t si = 0; si < node.apply.size(); ++si) {
      const auto& seg = node.apply[si];
      if (seg.kind == CaseSeg::Ordinary) {
        Path resolved = resolve_path(seg.steps);
        for (auto& ps : resolved.segments()) {
          u64 reps = std::get<u64>(ps.reps);
          for (u64 r = 0; r < reps; ++r) {
            if (auto err = ws.st.apply_step(ps.step)) {
              problem(ws.klass + ": " + *err);
              return;
            }
            if (!ws.exhaust) {  // affine tracking is exact only pre-exhaust
              ws.affC += ws.affD * (unsigned long)ps.step.x;
              ws.affD *= (unsigned long)ps.step.y;
            }
          }
          ws.concrete.push_back({ps.step, reps});
        }
      } else {
        if (ws.exhaust) {
          problem(ws.klass + ": more than one exhaust leg on a branch");
          return;
        }
        unsigned p = 2, g = 0;
        for (unsigned q : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u}) {
          unsigned e = 0;
          u64 t = seg.exhaust_step.y;
          while (t % q == 0) {
            t /= q;
            ++e;
          }
          if (e && t == 1) {
            p = q;
            g = e;
            break;
          }
        }
        u64 tower_dmin = 0;
        if (auto* f = ws.st.find(p); f && f->kind == PrimeFact::Tower)
          tower_dmin = f->dmin;
        std::string err;
        auto forks = ws.st.exhaust(seg.exhaust_step, seg.exhaust_min, &err);
        if (forks.empty()) {
          problem(ws.klass + ": " + err);
          return;
        }
        u64 orig_dmin =
            cur_inst_.tower_min.count(p) ? cur_inst_.tower_min.at(p) : tower_dmin;
        for (auto& fk : forks) {
          WalkState ws2 = ws;
          ws2.st = fk.state;
          ExhaustLeg leg;
          leg.step = seg.exhaust_step;
          leg.p = p;
          leg.g = g;
          leg.min_reps = fk.min_reps;
          leg.leftover = fk.leftover;
          // class depth when reps = min: original hypothesis depth plus the
          // alignment overshoot of this fork
          leg.depth_at_min =
              orig_dmin + (fk.leftover + g * fk.min_reps - tower_dmin);
          leg.position = ws2.concrete.size();
          ws2.exhaust = leg;
          ws2.klass += " exhaust" + step_str(seg.exhaust_step) + "@L" +
                       std::to_string(fk.leftover);
          // continue with the remaining apply segments of this node
          CaseNode rest;
          rest.kind = node.kind;
          rest.split_mod = node.split_mod;
          rest.vp_prime = node.vp_prime;
          rest.discharge_ref = node.discharge_ref;
          for (std::size_t sj = si + 1; sj < node.apply.size(); ++sj)
            rest.apply.push_back(node.apply[sj]);
          walk_tail(std::move(ws2), node, rest);
        }
        return;
      }
    }
    dispatch(std::move(ws), node);
  }

  // applies the segments remaining after an exhaust fork, then dispatches
  void walk_tail(WalkState ws, const CaseNode& node, const CaseNode& rest) {
    for (auto& seg : rest.apply) {
      if (seg.kind == CaseSeg::Exhaust) {
        problem(ws.klass + ": more than one exhaust leg on a branch");
        return;
      }
      Path resolved = resolve_path(seg.steps);
      for (auto& ps : resolved.segments()) {
        u64 reps = std::get<u64>(ps.reps);
        for (u64 r = 0; r < reps; ++r) {
          if (auto err = ws.st.apply_step(ps.step)) {
            problem(ws.klass + ": " + *err);
            return;
          }
        }
        ws.concrete.push_back({ps.step, reps});
      }
    }
    dispatch(std::move(ws), node);
  }

  void dispatch(WalkState ws, const CaseNode& node) {
    switch (node.kind) {
      case CaseNode::Split: {
        auto det = try_residue(ws, node.split_mod);
        std::vector<u64> residues;
        if (det)
          residues.push_back(*det);
        else {
          try {
            residues = ws.st.consistent_residues(node.split_mod);
          } catch (const std::exception& e) {
            problem(ws.klass + ": " + e.what());
            return;
          }
        }
        rep_.classes += residues.size();
        for (u64 r : residues) {
          const CaseBranch* br = nullptr;
          for (auto& b : node.branches)
            if (std::find(b.residues.begin(), b.residues.end(), r) !=
                b.residues.end())
              br = &b;
          if (!br) {
            problem(ws.klass + ": residue " + std::to_string(r) + " mod " +
                    std::to_string(node.split_mod) + " reaches no branch");
            continue;
          }
          WalkState ws2 = ws;
          if (!ws2.st.refine(r, node.split_mod)) continue;  // empty class
          if (!ws.exhaust)  // post-exhaust pullback would depend on the reps
            ws2.n_congruences.emplace_back(
                ws.affC + ws.affD * mpz_class((unsigned long)r),
                ws.affD * mpz_class((unsigned long)node.split_mod));
          ws2.klass += " " + std::to_string(r) + "%" + std::to_string(node.split_mod);
          walk(std::move(ws2), *br->node);
        }
        return;
      }
      case CaseNode::VpSplit: {
        if (ws.affD != 1 || ws.exhaust) {
          problem(ws.klass + ": vp_split must come before any reduction step");
          return;
        }
        unsigned p = node.vp_prime;
        u64 cur_min, cur_max;
        bool pinned = cur_inst_.pinned.count(p) != 0;
        if (pinned) {
          cur_min = cur_max = cur_inst_.pinned.at(p);
        } else if (cur_inst_.tower_min.count(p)) {
          cur_min = cur_inst_.tower_min.at(p);
          cur_max = ~u64{0};
        } else {
          problem(ws.klass + ": vp_split on prime with no hypothesis");
          return;
        }
        // branches must tile [cur_min, cur_max]
        std::vector<std::pair<u64, u64>> covered;
        for (auto& b : node.branches) {
          u64 lo = *b.vp_min;
          u64 hi = b.vp_max ? *b.vp_max : ~u64{0};
          covered.push_back({lo, hi});
        }
        std::sort(covered.begin(), covered.end());
        u64 need = cur_min;
        for (auto& [lo, hi] : covered) {
          if (lo > need) {
            problem(ws.klass + ": vp_split leaves v" + std::to_string(p) + "=" +
                    std::to_string(need) + " uncovered");
            return;
          }
          if (hi == ~u64{0} || hi >= need) need = hi == ~u64{0} ? ~u64{0} : hi + 1;
          if (need == ~u64{0}) break;
        }
        if (need != ~u64{0} && need <= cur_max) {
          problem(ws.klass + ": vp_split does not cover up to the hypothesis range");
          return;
        }
        for (auto& b : node.branches) {
          u64 lo = std::max(*b.vp_min, cur_min);
          u64 hi = b.vp_max ? std::min(*b.vp_max, cur_max) : cur_max;
          if (lo > hi) continue;
          if (b.vp_max) {
            for (u64 d = lo; d <= hi && d <= lo + 64; ++d) {
              WalkState ws2 = ws;
              Instance saved = cur_inst_;
              cur_inst_.pinned[p] = d;
              cur_inst_.tower_min.erase(p);
              if (rebuild_start_state(ws2)) {
                ws2.klass += " v" + std::to_string(p) + "=" + std::to_string(d);
                rep_.instances++;
                walk(std::move(ws2), *b.node);
              }
              cur_inst_ = saved;
            }
          } else {
            WalkState ws2 = ws;
            Instance saved = cur_inst_;
            cur_inst_.tower_min[p] = lo;
            cur_inst_.pinned.erase(p);
            if (rebuild_start_state(ws2)) {
              ws2.klass += " v" + std::to_string(p) + ">=" + std::to_string(lo);
              walk(std::move(ws2), *b.node);
            }
            cur_inst_ = saved;
          }
        }
        return;
      }
      case CaseNode::Composite:
        check_composite(std::move(ws));
        return;
      case CaseNode::Discharge:
        check_discharge(std::move(ws), node.discharge_ref);
        return;
      case CaseNode::End:
        check_leaf(std::move(ws));
        return;
    }
  }

  // rebuilds the start state from cur_inst_, replaying every refinement
  // gathered so far; only valid before any step.  false = branch is empty.
  bool rebuild_start_state(WalkState& ws) {
    ResidueState st;
    auto prior = ws.n_congruences;
    ws.n_congruences.clear();
    for (auto& [q, d] : cur_inst_.pinned) {
      st.add_vp_hypothesis(q, d, d);
      u64 pd = pow_u64_l(q, d);
      ws.n_congruences.emplace_back(mpz_class((unsigned long)(pd - 1)),
                                    mpz_class((unsigned long)pd));
    }
    for (auto& [q, d] : cur_inst_.tower_min) {
      st.add_vp_hypothesis(q, d, PrimeFact::kUnbounded);
      u64 pd = pow_u64_l(q, d);
      ws.n_congruences.emplace_back(mpz_class((unsigned long)(pd - 1)),
                                    mpz_class((unsigned long)pd));
    }
    for (auto& [m, residues] : spec_.congruences)
      if (residues.size() == 1) {
        st.refine(residues[0], m);
        ws.n_congruences.emplace_back(mpz_class((unsigned long)residues[0]),
                                      mpz_class((unsigned long)m));
      }
    // replay the split refinements already made on n
    for (auto& [r, m] : prior) {
      if (!m.fits_ulong_p()) continue;
      u64 mm = m.get_ui();
      u64 rr = mpz_class(r % m).get_ui();
      if (!st.refine(rr, mm)) return false;
      ws.n_congruences.emplace_back(r, m);
    }
    ws.st = st;
    return true;
  }

  std::optional<u64> try_residue(const WalkState& ws, u64 m) {
    return ws.st.residue_mod(m);
  }

  Path resolve_path(const Path& p) {
    std::vector<std::pair<unsigned, u64>> vp;
    for (auto& [q, d] : cur_inst_.pinned) vp.emplace_back(q, d);
    return p.resolve(vp);
  }

  // --- leaf checks ---

  void check_composite(WalkState ws) {
    LeafReport lr;
    lr.context = ws.klass;
    lr.path_text = "composite";
    if (ws.affD != 1) {
      lr.error = "composite shortcut after reduction steps";
      problem(ws.klass + ": " + lr.error);
      rep_.leaves.push_back(std::move(lr));
      return;
    }
    unsigned p_div = 0;
    for (auto& [p, f] : ws.st.facts())
      if (f.kind == PrimeFact::Congruence && f.e >= 1 &&
          f.r % p == 0)
        p_div = p;
    if (!p_div) {
      lr.error = "class does not force a prime divisor";
      problem(ws.klass + ": " + lr.error);
      rep_.leaves.push_back(std::move(lr));
      return;
    }
    // n divisible by p_div: composite except n = p_div itself
    if (in_class(ws, p_div)) {
      if (!small_n_ok(p_div)) {
        lr.error = "exception n = " + std::to_string(p_div) + " fails the bound";
        problem(ws.klass + ": " + lr.error);
        rep_.leaves.push_back(std::move(lr));
        return;
      }
      lr.exceptions_tested.push_back(p_div);
    }
    lr.pass = true;
    lr.budget_slack = 1e300;  // no budget involved
    rep_.leaves.push_back(std::move(lr));
  }

  void check_discharge(WalkState ws, const std::string& ref) {
    LeafReport lr;
    lr.context = ws.klass;
    lr.path_text = "discharge -> " + ref;
    if (!registry_ || !registry_->count(ref)) {
      lr.error = "referenced lemma '" + ref + "' not in registry";
      problem(ws.klass + ": " + lr.error);
      rep_.leaves.push_back(std::move(lr));
      return;
    }
    const LemmaSpec& other = registry_->at(ref);
    if (alpha_compare(other.alpha, spec_.alpha) > 0) {
      lr.error = "referenced lemma has a larger threshold";
      problem(ws.klass + ": " + lr.error);
      rep_.leaves.push_back(std::move(lr));
      return;
    }
    // the referenced conclusion must fail on this instance:
    //   mode any: every atom violated; mode all: at least one violated
    auto violated = [&](const ConclusionAtom& a) {
      auto it = cur_inst_.pinned.find(a.p);
      return it != cur_inst_.pinned.end() && it->second < a.k;
    };
    bool ok;
    if (other.conclusion_all) {
      ok = std::any_of(other.conclusion.begin(), other.conclusion.end(), violated);
    } else {
      ok = std::all_of(other.conclusion.begin(), other.conclusion.end(), violated);
    }
    if (!ok) {
      lr.error = "instance does not violate the conclusion of '" + ref + "'";
      problem(ws.klass + ": " + lr.error);
      rep_.leaves.push_back(std::move(lr));
      return;
    }
    lr.pass = true;
    lr.budget_slack = 1e300;
    rep_.leaves.push_back(std::move(lr));
  }

  bool small_n_ok(u64 n) {
    // S(alpha, n) for a specific small n: composite shortcut or exact bound
    if (n <= 1) return true;
    for (u64 d = 2; d * d <= n; ++d)
      if (n % d == 0) return true;
    unsigned k = n <= table_.limit() ? table_.complexity(n)
                                     : upper_bound_complexity(table_, n);
    return n >= min_n_with_pow_at_least(spec_.alpha.B, k, spec_.alpha.c);
  }

  bool in_class(const WalkState& ws, u64 n) {
    mpz_class nz((unsigned long)n);
    for (auto& [r, m] : ws.n_congruences)
      if ((nz - r) % m != 0) return false;
    return true;
  }

  void check_leaf(WalkState ws) {
    LeafReport lr;
    lr.context = ws.klass;
    // leaf must actually have reduced something
    if (ws.concrete.empty() && !ws.exhaust) {
      lr.error = "empty path at leaf";
      problem(ws.klass + ": " + lr.error);
      rep_.leaves.push_back(std::move(lr));
      return;
    }
    // budget + exceptions, exact
    const Alpha& a = spec_.alpha;
    bool ok = true;
    std::string err;
    // per-step surplus requirement for the exhaust leg
    if (ws.exhaust) {
      const auto& leg = *ws.exhaust;
      u64 c1 = table_.complexity(leg.step.x) + table_.complexity(leg.step.y);
      mpz_class lhs, rhs;
      mpz_ui_pow_ui(lhs.get_mpz_t(), a.B, c1);
      mpz_ui_pow_ui(rhs.get_mpz_t(), leg.step.y, a.c);
      if (lhs > rhs) {
        ok = false;
        err = "exhaust step " + step_str(leg.step) +
              " runs a per-step deficit; unbounded repetition cannot be budgeted";
      }
    }
    std::vector<PathSeg> full = ws.concrete;
    if (ok && ws.exhaust) {
      full.insert(full.begin() + ws.exhaust->position,
                  {ws.exhaust->step, ws.exhaust->min_reps});
    }
    Path fullpath{full};
    if (ok && !fullpath.budget_ok(a.c, a.B, table_)) {
      ok = false;
      err = "budget fails: B^cost > Pi^c for " + fullpath.print();
    }
    lr.path_text = fullpath.print();
    if (ok) {
      u64 cost = fullpath.cost(table_);
      double lnPi = 0;
      for (auto& s : full)
        lnPi += double(std::get<u64>(s.reps)) * std::log(double(s.step.y));
      lr.budget_slack = a.c * lnPi / std::log(double(a.B)) - double(cost);
      rep_.min_budget_slack = std::min(rep_.min_budget_slack, lr.budget_slack);
    }
    // exceptions
    if (ok) {
      std::string exc_err;
      if (!check_exceptions(ws, lr, &exc_err)) {
        ok = false;
        err = exc_err;
      }
    }
    lr.pass = ok;
    lr.error = err;
    if (!ok) problem(ws.klass + ": " + err);
    rep_.leaves.push_back(std::move(lr));
  }

  // CRT of the class congruences; false = inconsistent (empty class)
  static bool crt_class(const WalkState& ws,
                        const std::vector<std::pair<mpz_class, mpz_class>>& extra,
                        mpz_class* R_out, mpz_class* M_out) {
    mpz_class M = 1, R = 0;
    auto merge = [&](const mpz_class& r, const mpz_class& m) -> bool {
      mpz_class g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), M.get_mpz_t(),
                 m.get_mpz_t());
      if ((r - R) % g != 0) return false;
      mpz_class lcm = M / g * m;
      mpz_class diff = (r - R) / g;
      mpz_class step = M * ((diff * s) % (m / g));
      R = (R + step) % lcm;
      if (R < 0) R += lcm;
      M = lcm;
      return true;
    };
    for (auto& [r, m] : ws.n_congruences)
      if (!merge(r, m)) return false;
    for (auto& [r, m] : extra)
      if (!merge(r, m)) return false;
    *R_out = R;
    *M_out = M;
    return true;
  }

  // enumerate class members <= n0 and test them directly
  bool test_members(const WalkState& ws, const mpz_class& n0,
                    const std::vector<std::pair<mpz_class, mpz_class>>& extra,
                    LeafReport& lr, std::string* err) {
    mpz_class R, M;
    if (!crt_class(ws, extra, &R, &M)) return true;  // empty class
    for (mpz_class n = R; n <= n0; n += M) {
      if (n <= 1) continue;
      if (!n.fits_ulong_p()) break;
      u64 nn = n.get_ui();
      if (!small_n_ok(nn)) {
        *err = "exception n = " + std::to_string(nn) + " fails the bound";
        return false;
      }
      lr.exceptions_tested.push_back(nn);
    }
    return true;
  }

  bool check_exceptions(const WalkState& ws, LeafReport& lr, std::string* err) {
    if (!ws.exhaust) {
      Path p{ws.concrete};
      mpz_class n0((unsigned long)0);
      {
        // back-substitution with big integers
        mpz_class v = 0;
        for (auto it = ws.concrete.rbegin(); it != ws.concrete.rend(); ++it) {
          u64 reps = std::get<u64>(it->reps);
          for (u64 r = 0; r < reps; ++r)
            v = v * (unsigned long)it->step.y + (unsigned long)it->step.x;
        }
        n0 = v;
      }
      return test_members(ws, n0, {}, lr, err);
    }
    // exhaust leg: n0 grows with extra reps t; class minimum grows at least as
    // fast, so only finitely many t can carry exceptions
    const auto& leg = *ws.exhaust;
    u64 P = 1;
    for (unsigned i = 0; i < leg.g; ++i) P *= leg.p;
    // affine pieces: n0(t) = pre(ex(t, post(0)))
    auto backsub = [&](mpz_class v, std::size_t from, std::size_t to) {
      // segments [from, to) in application order, back-substituted
      for (std::size_t i = to; i-- > from;) {
        u64 reps = std::get<u64>(ws.concrete[i].reps);
        for (u64 r = 0; r < reps; ++r)
          v = v * (unsigned long)ws.concrete[i].step.y +
              (unsigned long)ws.concrete[i].step.x;
      }
      return v;
    };
    auto n0_of = [&](u64 t) {
      mpz_class v = backsub(0, leg.position, ws.concrete.size());
      for (u64 r = 0; r < leg.min_reps + t; ++r)
        v = v * (unsigned long)leg.step.y + (unsigned long)leg.step.x;
      return backsub(v, 0, leg.position);
    };
    // class minimum R(t) and n0(t) both scale by P per extra repetition, with
    // the coefficient of R periodic in t (period = ord of P mod the odd part
    // of the class modulus).  Compare two consecutive periods: once the gap
    // R - n0 is positive throughout a period and does not shrink across the
    // next one, it stays positive forever.
    auto class_at = [&](u64 t, mpz_class* R, mpz_class* M) {
      u64 D = leg.depth_at_min + leg.g * t;
      std::vector<std::pair<mpz_class, mpz_class>> extra;
      mpz_class pd = 1;
      for (u64 i = 0; i < D; ++i) pd *= (unsigned long)leg.p;
      extra.emplace_back(pd - 1, pd);
      return crt_class(ws, extra, R, M);
    };
    mpz_class R0, M0;
    if (!class_at(0, &R0, &M0)) return true;  // empty class for every t
    // fast rule: every class member is === -1 modulo the product K of the
    // "minus one" hypothesis moduli and 2^D(t), so members exceed K - 1.
    // K scales by exactly P per extra rep while n0 is affine in P^t, so a
    // single positive gap with (P-1)(gap+1) >= c persists forever.
    {
      mpz_class Kodd = 1;
      for (auto& [r, m] : ws.n_congruences)
        if (r == m - 1 && m % leg.p != 0) Kodd = lcm(Kodd, m);
      for (u64 t = 0; t < 8; ++t) {
        mpz_class pd = 1;
        for (u64 i = 0; i < leg.depth_at_min + leg.g * t; ++i)
          pd *= (unsigned long)leg.p;
        mpz_class K = Kodd * pd;
        mpz_class n0 = n0_of(t), n0b = n0_of(t + 1);
        mpz_class gap = K - 1 - n0;
        mpz_class c = n0b - n0 * (unsigned long)P;
        if (gap > 0 && (gap + 1) * (unsigned long)(P - 1) >= c) {
          // enumerate and test the members for reps below t
          for (u64 s = 0; s < t; ++s) {
            mpz_class n0s = n0_of(s), R, M;
            if (!class_at(s, &R, &M)) return true;
            std::vector<std::pair<mpz_class, mpz_class>> extra;
            mpz_class pds = 1;
            for (u64 i = 0; i < leg.depth_at_min + leg.g * s; ++i)
              pds *= (unsigned long)leg.p;
            extra.emplace_back(pds - 1, pds);
            if (!test_members(ws, n0s, extra, lr, err)) return false;
          }
          return true;
        }
      }
    }
    mpz_class modd = M0;
    while (modd % leg.p == 0) modd /= leg.p;
    u64 T = 1;
    if (modd > 1) {
      if (!modd.fits_ulong_p()) {
        *err = "exception analysis: class modulus too large";
        return false;
      }
      T = multiplicative_order(P, modd.get_ui());
    }
    u64 window = 2 * T + 9;
    if (window > 600) {
      *err = "exception analysis: period too long for " + step_str(leg.step);
      return false;
    }
    std::vector<mpz_class> gap(window);
    for (u64 t = 0; t < window; ++t) {
      mpz_class n0 = n0_of(t), R, M;
      if (!class_at(t, &R, &M)) return true;
      if (R <= n0) {
        std::vector<std::pair<mpz_class, mpz_class>> extra;  // re-test members
        u64 D = leg.depth_at_min + leg.g * t;
        mpz_class pd = 1;
        for (u64 i = 0; i < D; ++i) pd *= (unsigned long)leg.p;
        extra.emplace_back(pd - 1, pd);
        if (!test_members(ws, n0, extra, lr, err)) return false;
      }
      gap[t] = R - n0;
    }
    // gap(t+T) = P^T gap(t) + c with c independent of t, so one period of
    // positive, non-shrinking gaps stays positive for every later t
    for (u64 t = 0; t + 2 * T < window; ++t) {
      bool ok = true;
      for (u64 s = t; s < t + T && ok; ++s)
        if (gap[s] <= 0 || gap[s + T] < gap[s]) ok = false;
      if (ok) return true;
    }
    *err = "exception analysis window exhausted for " + step_str(leg.step);
    return false;
  }

  const LemmaSpec& spec_;
  const ComplexityTable& table_;
  const LemmaRegistry* registry_;
  CheckReport& rep_;
  Instance cur_inst_;
};

}  // namespace

CheckReport check_lemma(const LemmaSpec& spec, const ComplexityTable& table,
                        const LemmaRegistry* registry) {
  CheckReport rep;
  LemmaChecker checker(spec, table, registry, rep);
  checker.run();
  return rep;
}

SuiteReport check_all(const std::string& directory, const ComplexityTable& table) {
  SuiteReport out;
  out.pass = true;
  LemmaRegistry reg;
  std::vector<std::string> files;
  for (auto& e : std::filesystem::directory_iterator(directory))
    if (e.path().extension() == ".json") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  for (auto& f : files) {
    LemmaSpec spec = LemmaSpec::load(f);
    reg[spec.id] = std::move(spec);
  }
  // hypothesis DAG: every v_p >= k hypothesis must be justified by an earlier
  // conclusion at a threshold no larger than the user's
  for (auto& [id, spec] : reg) {
    for (auto& [p, hyp] : spec.hyps) {
      if (hyp.min == 0) continue;
      if (spec.external_hyps.count(p) && spec.external_hyps.at(p) >= hyp.min)
        continue;  // documented bound from the inequality engine
      bool justified = false;
      for (auto& [oid, other] : reg) {
        if (oid == id) continue;
        if (alpha_compare(other.alpha, spec.alpha) > 0) continue;
        for (auto& atom : other.conclusion) {
          if (atom.p != p || atom.k < hyp.min) continue;
          if (other.conclusion_all || other.conclusion.size() == 1) {
            justified = true;
          } else {
            // disjunction: usable when this lemma's hypotheses or its own
            // refuted-conclusion regions rule out the other disjuncts
            bool others_refuted = true;
            for (auto& o : other.conclusion) {
              if (o.p == atom.p) continue;
              auto it = spec.hyps.find(o.p);
              bool refuted = it != spec.hyps.end() && it->second.max &&
                             *it->second.max < o.k;
              for (auto& own : spec.conclusion)
                if (own.p == o.p && own.k <= o.k) refuted = true;
              if (!refuted) others_refuted = false;
            }
            if (others_refuted) justified = true;
          }
        }
      }
      if (!justified)
        out.problems.push_back(id + ": hypothesis v" + std::to_string(p) +
                               " >= " + std::to_string(hyp.min) +
                               " has no justifying lemma at or below its threshold");
    }
  }
  for (auto& [id, spec] : reg) {
    out.lemmas.push_back(check_lemma(spec, table, &reg));
    if (!out.lemmas.back().pass) out.pass = false;
  }
  if (!out.problems.empty()) out.pass = false;
  return out;
}

}  // namespace icx
