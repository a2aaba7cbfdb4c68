#include "stickyrpq/rewrite.hpp"

#include <algorithm>

#include "stickyrpq/sticky.hpp"

namespace stickyrpq {

namespace {

class UnionFind {
 public:
  Term find(Term t) {
    auto it = parent_.find(t);
    if (it == parent_.end()) {
      parent_.emplace(t, t);
      return t;
    }
    if (it->second == t) return t;
    Term root = find(it->second);
    parent_[t] = root;
    return root;
  }
  void unite(Term a, Term b) {
    Term ra = find(a), rb = find(b);
    if (ra != rb) parent_[ra] = rb;
  }
  std::map<Term, std::vector<Term>> classes() {
    std::map<Term, std::vector<Term>> out;
    std::vector<Term> keys;
    for (const auto& [t, p] : parent_) keys.push_back(t);
    for (Term t : keys) out[find(t)].push_back(t);
    return out;
  }

 private:
  std::map<Term, Term> parent_;
};

Rule rename_rule_apart(const Rule& rule) {
  size_t counter = 0;
  return rename_apart(rule, "$r", counter);
}

}  // namespace

std::vector<CQ> backward_rewrite(const CQ& q, const Rule& original) {
  std::vector<CQ> out;
  const Rule rule = rename_rule_apart(original);
  const Atom& head = rule.head();
  std::vector<size_t> candidates;
  for (size_t i = 0; i < q.atoms.size(); ++i) {
    if (q.atoms[i].predicate == head.predicate && q.atoms[i].arity() == head.arity()) candidates.push_back(i);
  }
  if (candidates.empty()) return out;
  if (candidates.size() > 20) throw ResourceExhausted("too many unifiable atoms in one disjunct");

  const TermSet existentials(rule.existentials().begin(), rule.existentials().end());
  const TermSet answer(q.answer.begin(), q.answer.end());

  for (uint64_t subset = 1; subset < (uint64_t{1} << candidates.size()); ++subset) {
    std::vector<bool> in_s(q.atoms.size(), false);
    for (size_t b = 0; b < candidates.size(); ++b) {
      if (subset >> b & 1) in_s[candidates[b]] = true;
    }
    UnionFind uf;
    for (size_t i = 0; i < q.atoms.size(); ++i) {
      if (!in_s[i]) continue;
      for (size_t j = 0; j < head.arity(); ++j) uf.unite(head.args[j], q.atoms[i].args[j]);
    }
    TermSet outside;
    for (size_t i = 0; i < q.atoms.size(); ++i) {
      if (!in_s[i]) outside.insert(q.atoms[i].args.begin(), q.atoms[i].args.end());
    }
    TermMap rep;
    bool ok = true;
    for (auto& [root, members] : uf.classes()) {
      size_t constants = 0, rule_terms = 0, existential_count = 0;
      bool touches_answer = false, touches_outside = false;
      for (Term t : members) {
        if (t.is_constant()) ++constants;
        if (existentials.contains(t)) ++existential_count;
        bool from_rule = t.is_variable() && t.name().starts_with("$r");
        if (from_rule) ++rule_terms;
        if (!from_rule && answer.contains(t)) touches_answer = true;
        if (!from_rule && !t.is_constant() && outside.contains(t)) touches_outside = true;
      }
      if (constants > 1) {
        ok = false;
        break;
      }
      if (existential_count > 0) {
        if (constants > 0 || rule_terms > 1 || touches_answer || touches_outside) {
          ok = false;
          break;
        }
      }
      Term chosen = members.front();
      auto pick = [&](auto pred) {
        for (Term t : members) {
          if (pred(t)) return std::optional<Term>(t);
        }
        return std::optional<Term>();
      };
      if (auto c = pick([](Term t) { return t.is_constant(); })) {
        chosen = *c;
      } else if (touches_answer) {
        for (Term a : q.answer) {
          if (std::find(members.begin(), members.end(), a) != members.end()) {
            chosen = a;
            break;
          }
        }
      } else if (auto v = pick([](Term t) { return !t.name().starts_with("$r"); })) {
        chosen = *v;
      }
      for (Term t : members) {
        if (t != chosen) rep[t] = chosen;
      }
    }
    if (!ok) continue;

    CQ result;
    std::set<Atom> seen;
    auto add = [&](const Atom& a) {
      Atom s = substitute(a, rep);
      if (seen.insert(s).second) result.atoms.push_back(std::move(s));
    };
    for (size_t i = 0; i < q.atoms.size(); ++i) {
      if (!in_s[i]) add(q.atoms[i]);
    }
    for (const Atom& a : rule.body()) add(a);
    for (Term a : q.answer) {
      auto it = rep.find(a);
      result.answer.push_back(it == rep.end() ? a : it->second);
    }
    out.push_back(std::move(result));
  }
  return out;
}

CQ normalize_variables(const CQ& q) {
  TermMap m;
  auto visit = [&](Term t) {
    if (t.is_constant() || m.contains(t)) return;
    m.emplace(t, Term::variable("V" + std::to_string(m.size())));
  };
  for (Term t : q.answer) visit(t);
  for (const Atom& a : q.atoms) {
    for (Term t : a.args) visit(t);
  }
  CQ out;
  out.atoms = substitute(q.atoms, m);
  for (Term t : q.answer) out.answer.push_back(t.is_constant() ? t : m.at(t));
  return out;
}

namespace {

CQ tidy(const CQ& q) { return normalize_variables(core(q)); }

// Inserts c unless an existing disjunct contains it; drops disjuncts it
// contains. Returns whether c was inserted.
bool insert_maximal(std::vector<CQ>& disjuncts, const CQ& c) {
  for (const CQ& e : disjuncts) {
    if (cq_contained(c, e)) return false;
  }
  std::erase_if(disjuncts, [&](const CQ& e) { return cq_contained(e, c); });
  disjuncts.push_back(c);
  return true;
}

}  // namespace

UCQ prune_subsumed(const UCQ& q) {
  UCQ out{{}, q.arity};
  for (const CQ& d : q.disjuncts) insert_maximal(out.disjuncts, d);
  return out;
}

UCQ backward_step_all(const UCQ& q, const Ruleset& rules) {
  UCQ out{{}, q.arity};
  for (const CQ& d : q.disjuncts) insert_maximal(out.disjuncts, d);
  for (const CQ& d : q.disjuncts) {
    for (const Rule& r : rules) {
      for (const CQ& c : backward_rewrite(d, r)) insert_maximal(out.disjuncts, tidy(c));
    }
  }
  return out;
}

UCQ rewrite_ucq(const UCQ& q, const Ruleset& rules, const RewriteOptions& options) {
  UCQ result{{}, q.arity};
  for (const CQ& d : q.disjuncts) insert_maximal(result.disjuncts, tidy(d));
  std::vector<CQ> frontier = result.disjuncts;
  for (size_t round = 0; !frontier.empty(); ++round) {
    if (round >= options.max_rounds) {
      throw RewriteLimitExceeded("rewriting did not converge within " + std::to_string(options.max_rounds) +
                                     " rounds",
                                 result);
    }
    std::vector<CQ> added;
    for (const CQ& d : frontier) {
      for (const Rule& r : rules) {
        if (options.stop.stop_requested()) throw RewriteLimitExceeded("rewriting cancelled", result);
        for (const CQ& c : backward_rewrite(d, r)) {
          CQ t = tidy(c);
          if (insert_maximal(result.disjuncts, t)) {
            std::erase_if(added, [&](const CQ& e) { return cq_contained(e, t); });
            added.push_back(std::move(t));
          }
        }
      }
      if (result.disjuncts.size() > options.max_disjuncts) {
        throw RewriteLimitExceeded("rewriting exceeded " + std::to_string(options.max_disjuncts) + " disjuncts",
                                   result);
      }
    }
    frontier = std::move(added);
  }
  return result;
}

Rule normalize_variables(const Rule& rule) {
  TermMap m;
  size_t body_count = 0;
  for (const Atom& a : rule.body()) {
    for (Term t : a.args) {
      if (t.is_variable() && !m.contains(t)) m.emplace(t, Term::variable("X" + std::to_string(body_count++)));
    }
  }
  std::vector<Term> ex;
  for (Term z : rule.existentials()) {
    Term fresh = Term::variable("Z" + std::to_string(ex.size()));
    m.emplace(z, fresh);
    ex.push_back(fresh);
  }
  return Rule(substitute(rule.body(), m), substitute(rule.head(), m), ex);
}

Ruleset deduplicate(const Ruleset& rules) {
  Ruleset out;
  std::set<std::string> seen;
  for (const Rule& r : rules) {
    Rule n = normalize_variables(r);
    std::vector<Atom> body = n.body();
    std::sort(body.begin(), body.end(), [](const Atom& a, const Atom& b) { return to_string(a) < to_string(b); });
    std::string key = to_string(normalize_variables(Rule(body, n.head(), n.existentials())));
    if (seen.insert(key).second) out.push_back(r);
  }
  return out;
}

Ruleset rewrite_rule_bodies(const Ruleset& rules, const RewriteOptions& options) {
  Ruleset out = rules;
  for (const Rule& rho : rules) {
    CQ body{rho.body(), rho.frontier()};
    UCQ rewritten = rewrite_ucq(UCQ{{body}, body.answer.size()}, rules, options);
    for (const CQ& d : rewritten.disjuncts) {
      if (cq_equivalent(d, body)) continue;
      TermMap m;
      for (size_t i = 0; i < rho.frontier().size(); ++i) m[rho.frontier()[i]] = d.answer[i];
      std::vector<Term> ex;
      for (size_t i = 0; i < rho.existentials().size(); ++i) {
        Term fresh = Term::variable("$z" + std::to_string(i));
        m[rho.existentials()[i]] = fresh;
        ex.push_back(fresh);
      }
      out.push_back(normalize_variables(Rule(d.atoms, substitute(rho.head(), m), ex)));
    }
  }
  return deduplicate(out);
}

Ruleset core_rule_bodies(const Ruleset& rules) {
  Ruleset out;
  for (const Rule& r : rules) {
    TermSet frozen(r.frontier().begin(), r.frontier().end());
    out.emplace_back(core(r.body(), frozen), r.head(), r.existentials());
  }
  return deduplicate(out);
}

Ruleset add_stellar_variants(const Ruleset& rules) {
  Ruleset out = rules;
  for (const Rule& r : rules) {
    if (is_stellar(r)) continue;
    TermSet used = terms_of(r.body());
    used.insert(r.head().args.begin(), r.head().args.end());
    std::string name = "J";
    while (used.contains(Term::variable(name))) name += "_";
    TermMap m;
    for (Term j : r.join_variables()) m[j] = Term::variable(name);
    out.emplace_back(substitute(r.body(), m), substitute(r.head(), m), r.existentials());
  }
  return deduplicate(out);
}

Ruleset prune_multijoin(const Ruleset& rules) {
  Ruleset out;
  for (const Rule& r : rules) {
    if (r.join_variables().size() <= 1) out.push_back(r);
  }
  return out;
}

Instance saturate_database(const Instance& d, const Ruleset& rules, const RewriteOptions& options) {
  Signature sig = signature_of(rules);
  sig.merge(signature_of(d));
  TermSet domain = active_domain(d);
  Instance out = d;
  for (const auto& [p, n] : sig.entries()) {
    CQ atomic;
    Atom a{p, {}};
    for (size_t i = 0; i < n; ++i) a.args.push_back(Term::variable("X" + std::to_string(i)));
    atomic.atoms.push_back(a);
    atomic.answer = a.args;
    UCQ rewritten = rewrite_ucq(UCQ{{atomic}, n}, rules, options);
    for (const AnswerTuple& t : eval_ucq(rewritten, d)) {
      if (std::all_of(t.begin(), t.end(), [&](Term x) { return domain.contains(x); })) out.insert(Atom{p, t});
    }
  }
  return out;
}

}  // namespace stickyrpq
