#include "icx/inequality.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace icx {

using nlohmann::json;

namespace {

mpq_class parse_q(const json& j) {
  if (j.is_number_integer()) return mpq_class(j.get<long>());
  std::string s = j.get<std::string>();
  mpq_class q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
  q.canonicalize();
  return q;
}

CoefExpr parse_coef(const json& j) {
  CoefExpr e;
  if (j.contains("q")) e.constant = parse_q(j.at("q"));
  if (j.contains("logs"))
    for (auto& t : j.at("logs"))
      e.log_terms.emplace_back(parse_q(t.at(0)), t.at(1).get<u64>());
  if (j.contains("div")) e.divisor = parse_q(j.at("div"));
  return e;
}

Alpha parse_alpha(const json& j) {
  return Alpha{j.at("c").get<u64>(), j.at("B").get<u64>()};
}

PiecewiseConst parse_pieces(const json& j) {
  PiecewiseConst pc;
  if (j.is_null()) {
    pc.pieces.push_back({CoefExpr{}, std::nullopt});
    return pc;
  }
  if (j.is_object() && !j.contains("pieces")) {
    pc.pieces.push_back({parse_coef(j), std::nullopt});
    return pc;
  }
  for (auto& p : j.at("pieces")) {
    PiecewiseConst::Piece piece;
    piece.expr = parse_coef(p.at("expr"));
    if (p.contains("upto")) piece.upto = parse_alpha(p.at("upto"));
    pc.pieces.push_back(std::move(piece));
  }
  return pc;
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& ctx) {
  for (auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto* key : keys)
      if (k == key) ok = true;
    if (!ok) throw std::invalid_argument("unknown field '" + k + "' in " + ctx);
  }
}

}  // namespace

const CoefExpr& PiecewiseConst::select(const Alpha& a) const {
  for (auto& p : pieces) {
    if (!p.upto) return p.expr;
    if (alpha_compare(a, *p.upto) < 0) return p.expr;
  }
  return pieces.back().expr;
}

IneqSpec IneqSpec::from_json_text(const std::string& text) {
  json j = json::parse(text);
  reject_unknown(j, {"id", "lhs", "rhs", "constant", "hyps", "aux",
                     "printed_corollary", "notes"},
                 "proposition file");
  IneqSpec s;
  s.id = j.at("id").get<std::string>();
  s.lhs_var = j.at("lhs").at("var").get<std::string>();
  s.lhs_coef = parse_coef(j.at("lhs").at("coef"));
  for (auto& t : j.at("rhs"))
    s.rhs.push_back({t.at("var").get<std::string>(), parse_coef(t.at("coef"))});
  s.constant = parse_pieces(j.contains("constant") ? j.at("constant") : json());
  if (j.contains("hyps")) {
    auto& h = j.at("hyps");
    reject_unknown(h, {"min", "rel", "i_budget"}, "hyps");
    if (h.contains("min"))
      for (auto& [k, v] : h.at("min").items()) s.hyp_min[k] = v.get<u64>();
    if (h.contains("rel"))
      for (auto& r : h.at("rel"))
        s.hyp_rel.push_back({r.at("big").get<std::string>(),
                             r.at("small").get<std::string>(),
                             r.at("offset").get<u64>()});
    if (h.contains("i_budget")) {
      IBudget b;
      b.budget_var = h.at("i_budget").at("var").get<std::string>();
      for (auto& [k, v] : h.at("i_budget").at("weights").items())
        b.weights[k] = v.get<u64>();
      b.offset = h.at("i_budget").at("offset").get<u64>();
      s.i_budget = b;
    }
  }
  if (j.contains("aux"))
    for (auto& [name, d] : j.at("aux").items()) {
      AuxDef def;
      for (auto& arm : d.at("min_of")) {
        AuxArm a;
        if (arm.contains("terms"))
          for (auto& [v, c] : arm.at("terms").items()) a.terms[v] = parse_q(c);
        if (arm.contains("const")) a.constant = parse_q(arm.at("const"));
        if (arm.contains("floor_div")) a.div = arm.at("floor_div").get<u64>();
        def.arms.push_back(std::move(a));
      }
      s.aux[name] = std::move(def);
    }
  if (j.contains("printed_corollary")) {
    s.printed_alpha = parse_alpha(j.at("printed_corollary").at("alpha"));
    for (auto& v : j.at("printed_corollary").at("values"))
      s.printed.push_back(
          {v.at("var").get<std::string>(), v.at("value").get<std::string>()});
  }
  if (j.contains("notes"))
    for (auto& n : j.at("notes")) s.notes.push_back(n.get<std::string>());
  return s;
}

IneqSpec IneqSpec::load(const std::string& path) {
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

const Corollary::Entry* Corollary::find(const std::string& var) const {
  for (auto& e : entries)
    if (e.var == var) return &e;
  return nullptr;
}

Corollary derive_corollary(const IneqSpec& ineq, const Alpha& a, mpfr_prec_t prec) {
  if (ineq.lhs_coef.sign_at(a) <= 0)
    throw std::runtime_error(ineq.id + ": lhs coefficient not positive at alpha " +
                             a.str() + " (" + ineq.lhs_coef.str() + ")");
  Interval lhs = ineq.lhs_coef.eval(a, prec);
  Corollary out;
  for (auto& t : ineq.rhs) {
    int s = t.coef.sign_at(a);
    if (s < 0)
      throw std::runtime_error(ineq.id + ": rhs coefficient for " + t.var +
                               " negative at alpha " + a.str() + " (" +
                               t.coef.str() + ")");
    Interval v = t.coef.eval(a, prec) / lhs;
    out.entries.push_back({t.var, v, v.lower_q()});
  }
  Interval c = ineq.constant.select(a).eval(a, prec) / lhs;
  out.entries.push_back({"const", c, c.lower_q()});
  return out;
}

std::vector<std::string> check_printed(const IneqSpec& ineq, mpfr_prec_t prec) {
  std::vector<std::string> issues;
  if (ineq.printed.empty()) return issues;
  Corollary cor = derive_corollary(ineq, ineq.printed_alpha, prec);
  for (auto& pv : ineq.printed) {
    auto* e = cor.find(pv.var);
    if (!e) {
      issues.push_back(ineq.id + ": no derived entry for " + pv.var);
      continue;
    }
    auto dot = pv.value.find('.');
    int d = dot == std::string::npos ? 0 : int(pv.value.size() - dot - 1);
    mpq_class printed;
    {  // parse decimal
      std::string s = pv.value;
      bool neg = !s.empty() && s[0] == '-';
      if (neg) s = s.substr(1);
      auto p = s.find('.');
      std::string digits = p == std::string::npos ? s : s.substr(0, p) + s.substr(p + 1);
      mpz_class num(digits);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, d);
      printed = mpq_class(num, den);
      printed.canonicalize();
      if (neg) printed = -printed;
    }
    mpq_class tol(5);
    for (int i = 0; i < d - 1; ++i) tol /= 10;
    mpq_class lo = e->value.lower_q(), hi = e->value.upper_q();
    mpq_class dist = 0;
    if (printed < lo) dist = lo - printed;
    if (printed > hi) dist = printed - hi;
    if (dist > tol) {
      std::ostringstream os;
      os << ineq.id << ": printed " << pv.var << " = " << pv.value
         << " but derived value is " << e->value.str(10) << " (tolerance "
         << tol.get_d() << ")";
      issues.push_back(os.str());
    }
  }
  return issues;
}

void BoundsState::seed(const std::string& var, const mpq_class& bound,
                       const std::string& src) {
  auto it = bounds_.find(var);
  mpq_class old = it == bounds_.end() ? mpq_class(0) : it->second;
  if (it == bounds_.end() || bound > it->second) {
    bounds_[var] = bound;
    trace_.push_back({src, var, old, bound});
  }
}

mpq_class BoundsState::bound(const std::string& var) const {
  auto it = bounds_.find(var);
  return it == bounds_.end() ? mpq_class(0) : it->second;
}
bool BoundsState::has(const std::string& var) const {
  return bounds_.count(var) != 0;
}
void BoundsState::add_relation(Relation r) { relations_.push_back(std::move(r)); }

std::optional<mpq_class> BoundsState::eval_arm(const AuxArm& arm,
                                               bool integer_floor) const {
  // lower-bound sum a_i v_i + c; negative coefficients need a stored relation
  mpq_class acc = arm.constant;
  std::vector<std::pair<std::string, mpq_class>> neg;
  std::map<std::string, mpq_class> pos;
  for (auto& [v, c] : arm.terms) {
    if (c >= 0)
      pos[v] = c;
    else
      neg.emplace_back(v, c);
  }
  for (auto& [v, c] : neg) {
    bool fixed = false;
    for (auto& r : relations_) {
      auto it = pos.find(r.big);
      if (it == pos.end() || r.small != v) continue;
      mpq_class combined = it->second * r.lambda + c;  // coef on v after subst
      if (combined < 0) continue;
      acc += it->second * r.mu + combined * bound(v);
      pos.erase(it);
      fixed = true;
      break;
    }
    if (!fixed) return std::nullopt;
  }
  for (auto& [v, c] : pos) acc += c * bound(v);
  if (arm.div > 1) {
    if (integer_floor) {
      // the true numerator is an integer >= acc, so floor(ceil(acc)/div)
      mpz_class up, fl, d((unsigned long)arm.div);
      mpz_cdiv_q(up.get_mpz_t(), acc.get_num_mpz_t(), acc.get_den_mpz_t());
      mpz_fdiv_q(fl.get_mpz_t(), up.get_mpz_t(), d.get_mpz_t());
      return mpq_class(fl);
    }
    return acc / mpq_class((unsigned long)arm.div);
  }
  return acc;
}

std::optional<mpq_class> BoundsState::eval_aux(const AuxDef& def,
                                               bool integer_floor) const {
  std::optional<mpq_class> best;
  for (auto& arm : def.arms) {
    auto v = eval_arm(arm, integer_floor);
    if (!v) return std::nullopt;  // min needs every arm bounded
    if (!best || *v < *best) best = v;
  }
  return best;
}

bool BoundsState::hyps_ok(const IneqSpec& ineq, u64 i5, u64 i7,
                          std::string* why) const {
  for (auto& [v, k] : ineq.hyp_min)
    if (bound(v) < mpq_class((unsigned long)k)) {
      if (why) *why = "needs " + v + " >= " + std::to_string(k);
      return false;
    }
  for (auto& r : ineq.hyp_rel) {
    bool ok = false;
    for (auto& rel : relations_) {
      if (rel.big != r.big || rel.small != r.small) continue;
      // big - small >= (lambda-1)*L(small) + mu
      mpq_class gap = (rel.lambda - 1) * bound(r.small) + rel.mu;
      if (gap >= mpq_class((unsigned long)r.offset)) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      if (why)
        *why = "needs relation " + r.big + " >= " + r.small + " + " +
               std::to_string(r.offset);
      return false;
    }
  }
  if (ineq.i_budget) {
    mpq_class need(ineq.i_budget->offset);
    for (auto& [iv, w] : ineq.i_budget->weights) {
      u64 ival = iv == "i5" ? i5 : i7;
      need += mpq_class((unsigned long)(w * ival));
    }
    if (bound(ineq.i_budget->budget_var) < need) {
      if (why) *why = "i-budget unsatisfied";
      return false;
    }
  }
  return true;
}

bool BoundsState::bound_step(const IneqSpec& ineq, const Alpha& a,
                             mpfr_prec_t prec, std::string* why) {
  Corollary cor;
  try {
    cor = derive_corollary(ineq, a, prec);
  } catch (const std::exception& e) {
    if (why) *why = e.what();
    return false;
  }
  // choose i5/i7 maximizing the rhs subject to the budget hypothesis
  u64 best_i5 = 0, best_i7 = 0;
  bool have_i = false;
  for (auto& t : ineq.rhs)
    if (t.var == "i5" || t.var == "i7") have_i = true;
  mpq_class best_val;
  bool any = false;
  u64 cap5 = 0, cap7 = 0;
  if (have_i) {
    mpq_class b5 = bound("v5"), b7 = bound("v7");
    cap5 = b5 > 0 ? mpz_class(b5.get_num() / b5.get_den()).get_ui() : 0;
    cap7 = b7 > 0 ? mpz_class(b7.get_num() / b7.get_den()).get_ui() : 0;
  }
  for (u64 i5 = have_i ? 1 : 0; i5 <= cap5; ++i5) {
    for (u64 i7 = have_i ? 1 : 0; i7 <= cap7; ++i7) {
      if (!hyps_ok(ineq, i5, i7, why)) continue;
      mpq_class val = 0;
      bool usable = true;
      for (auto& t : ineq.rhs) {
        mpq_class c = cor.find(t.var) ? cor.find(t.var)->lower : mpq_class(0);
        mpq_class vb;
        if (t.var == "i5")
          vb = mpq_class((unsigned long)i5);
        else if (t.var == "i7")
          vb = mpq_class((unsigned long)i7);
        else if (ineq.aux.count(t.var)) {
          auto av = eval_aux(ineq.aux.at(t.var), true);
          if (!av) {
            usable = false;
            break;
          }
          vb = *av;
          if (vb < 0) vb = 0;
        } else {
          vb = bound(t.var);
        }
        val += c * vb;
      }
      if (!usable) continue;
      val += cor.find("const")->lower;
      if (!any || val > best_val) {
        any = true;
        best_val = val;
        best_i5 = i5;
        best_i7 = i7;
      }
      if (!have_i) break;
    }
    if (!have_i) break;
  }
  (void)best_i5;
  (void)best_i7;
  if (!any) {
    if (why && why->empty()) *why = "no admissible evaluation";
    return false;
  }
  // smallest integer strictly greater than the certified lower bound
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), best_val.get_num_mpz_t(), best_val.get_den_mpz_t());
  mpq_class nb(fl + 1);
  if (nb > bound(ineq.lhs_var)) {
    mpq_class old = bound(ineq.lhs_var);
    bounds_[ineq.lhs_var] = nb;
    trace_.push_back({ineq.id, ineq.lhs_var, old, nb});
    return true;
  }
  return true;  // applied, no improvement
}

bool BoundsState::relation_step(const IneqSpec& ineq, const std::string& keep,
                                const Alpha& a, mpfr_prec_t prec,
                                std::string* why) {
  Corollary cor;
  try {
    cor = derive_corollary(ineq, a, prec);
  } catch (const std::exception& e) {
    if (why) *why = e.what();
    return false;
  }
  if (!hyps_ok(ineq, 0, 0, why)) return false;
  mpq_class lambda = 0, mu = cor.find("const")->lower;
  bool found_keep = false;
  for (auto& t : ineq.rhs) {
    mpq_class c = cor.find(t.var)->lower;
    if (t.var == keep) {
      lambda = c;
      found_keep = true;
      continue;
    }
    mpq_class vb;
    if (ineq.aux.count(t.var)) {
      auto av = eval_aux(ineq.aux.at(t.var), true);
      if (!av) {
        if (why) *why = "aux term " + t.var + " not derivable";
        return false;
      }
      vb = *av;
      if (vb < 0) vb = 0;
    } else {
      vb = bound(t.var);
    }
    mu += c * vb;
  }
  if (!found_keep) {
    if (why) *why = "kept variable " + keep + " not on rhs";
    return false;
  }
  for (auto& r : relations_)
    if (r.source == ineq.id && r.small == keep && r.big == ineq.lhs_var) {
      r.lambda = lambda;  // bounds are monotone, so this only improves
      r.mu = mu;
      return true;
    }
  relations_.push_back({ineq.lhs_var, keep, lambda, mu, ineq.id});
  return true;
}

ProofScript ProofScript::from_json_text(const std::string& text) {
  json j = json::parse(text);
  reject_unknown(j, {"id", "alpha", "seeds", "steps", "ceiling", "max_rounds",
                     "limit_mode"},
                 "proof script");
  ProofScript s;
  s.id = j.at("id").get<std::string>();
  s.alpha = parse_alpha(j.at("alpha"));
  if (j.contains("seeds"))
    for (auto& sd : j.at("seeds"))
      s.seeds.push_back({sd.at("var").get<std::string>(), sd.at("value").get<u64>(),
                         sd.value("from", std::string())});
  for (auto& st : j.at("steps")) {
    Step step;
    if (st.contains("relation")) {
      step.kind = Step::RelationKeep;
      step.ineq_id = st.at("relation").get<std::string>();
      step.keep = st.at("keep").get<std::string>();
    } else {
      step.kind = Step::Apply;
      step.ineq_id = st.at("apply").get<std::string>();
    }
    s.round_steps.push_back(std::move(step));
  }
  s.ceiling = j.value("ceiling", u64{10000});
  s.max_rounds = j.value("max_rounds", u64{5000});
  s.limit_mode = j.value("limit_mode", false);
  return s;
}

ProofScript ProofScript::load(const std::string& path) {
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

// sound downward quantization keeps limit-mode rationals small
mpq_class quantize_down(const mpq_class& q) {
  mpz_class num = q.get_num() << 32;
  mpz_class scaled;
  mpz_fdiv_q(scaled.get_mpz_t(), num.get_mpz_t(), q.get_den_mpz_t());
  mpq_class out(scaled, mpz_class(1) << 32);
  out.canonicalize();
  return out;
}

}  // namespace

struct ProofRunner {
  static ProofResult run(const ProofScript& script,
                         const std::map<std::string, IneqSpec>& ineqs,
                         mpfr_prec_t prec) {
    BoundsState st;
    for (auto& s : script.seeds)
      st.seed(s.var, mpq_class((unsigned long)s.value),
              s.from.empty() ? "seed" : "seed " + s.from);

    auto max_bound = [&] {
      mpq_class m = 0;
      for (auto& [v, b] : st.bounds_)
        if (b > m) m = b;
      return m;
    };

    u64 growing_streak = 0;
    for (u64 round = 1; round <= script.max_rounds; ++round) {
      std::size_t trace_before = st.trace().size();
      for (auto& step : script.round_steps) {
        auto it = ineqs.find(step.ineq_id);
        if (it == ineqs.end())
          throw std::runtime_error(script.id + ": unknown inequality " +
                                   step.ineq_id);
        const IneqSpec& ineq = it->second;
        std::string why;
        if (step.kind == ProofScript::Step::RelationKeep) {
          st.relation_step(ineq, step.keep, script.alpha, prec, &why);
          continue;
        }
        if (script.limit_mode)
          limit_step(st, ineq, script.alpha, prec);
        else
          st.bound_step(ineq, script.alpha, prec, &why);
      }
      bool grew = st.trace().size() > trace_before;
      growing_streak = grew ? growing_streak + 1 : 0;

      // certificate: a relation pair with lambda product >= 1, positive mus
      for (auto& r1 : st.relations())
        for (auto& r2 : st.relations())
          if (r1.big == r2.small && r1.small == r2.big && r1.big != r1.small &&
              r1.lambda * r2.lambda >= 1 && r1.mu > 0 && r2.mu > 0)
            return {ProofResult::Infeasible,
                    "relation cycle " + r1.big + "/" + r1.small +
                        " has certified slope product >= 1 with positive offsets",
                    st.trace(), st.bounds_map()};

      if (max_bound() > mpq_class((unsigned long)script.ceiling) &&
          growing_streak >= 50)
        return {ProofResult::Infeasible,
                "bounds exceed ceiling " + std::to_string(script.ceiling) +
                    " after sustained strict growth",
                st.trace(), st.bounds_map()};

      if (!grew) {
        // also treat an early huge jump as infeasible only via the streak rule;
        // a stable round is a fixpoint
        return {ProofResult::Fixpoint, "no bound changed in a full round",
                st.trace(), st.bounds_map()};
      }
    }
    return {ProofResult::Exhausted, "max rounds reached", st.trace(),
            st.bounds_map()};
  }

  // ratio propagation: constants dropped, rational bounds, no hypothesis gates
  static void limit_step(BoundsState& st, const IneqSpec& ineq, const Alpha& a,
                         mpfr_prec_t prec) {
    Corollary cor;
    try {
      cor = derive_corollary(ineq, a, prec);
    } catch (const std::exception&) {
      return;  // sign loss: inequality unusable at this alpha
    }
    mpq_class val = 0;
    for (auto& t : ineq.rhs) {
      if (t.var == "i5" || t.var == "i7") return;  // not meaningful in ratios
      mpq_class c = cor.find(t.var)->lower;
      mpq_class vb;
      if (ineq.aux.count(t.var)) {
        mpq_class best;
        bool first = true;
        for (auto& arm : ineq.aux.at(t.var).arms) {
          mpq_class acc = 0;  // constants dropped in limit mode
          for (auto& [v, cc] : arm.terms) acc += cc * st.bound(v);
          if (arm.div > 1) acc /= mpq_class((unsigned long)arm.div);
          if (first || acc < best) {
            best = acc;
            first = false;
          }
        }
        vb = best;
      } else {
        vb = st.bound(t.var);
      }
      if (vb < 0) vb = 0;
      val += c * vb;
    }
    val = quantize_down(val);
    if (val > st.bound(ineq.lhs_var)) {
      mpq_class old = st.bound(ineq.lhs_var);
      st.bounds_[ineq.lhs_var] = val;
      st.trace_.push_back({ineq.id, ineq.lhs_var, old, val});
    }
  }
};

ProofResult run_proof(const ProofScript& script,
                      const std::map<std::string, IneqSpec>& ineqs,
                      mpfr_prec_t prec) {
  return ProofRunner::run(script, ineqs, prec);
}

}  // namespace icx
