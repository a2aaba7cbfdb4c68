#include <gtest/gtest.h>

#include "stickyrpq/chase.hpp"
#include "stickyrpq/quotient.hpp"
#include "stickyrpq/sticky.hpp"
#include "stickyrpq/textio.hpp"
#include "support/checks.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace stickyrpq;

namespace {

Term c(const char* n) { return Term::constant(n); }
Term n(uint64_t id) { return Term::null(id); }
Atom A(const char* p, std::vector<Term> args) { return Atom{Predicate(p), std::move(args)}; }
std::pair<Predicate, size_t> inc(const char* p, size_t i) { return {Predicate(p), i}; }

DFA dfa(const char* text) { return compile_regex(parse_query(text).regex); }

RegularType reflexive(const DFA& d) {
  RegularType out;
  uint32_t states = static_cast<uint32_t>(d.num_states() + (d.sink ? 0 : 1));
  for (uint32_t q = 0; q < states; ++q) out.emplace(q, q);
  return out;
}

}  // namespace

TEST(StellarType, Examples) {
  Instance i{A("P", {c("a"), c("b")}), A("Q", {c("b"), c("b")})};
  EXPECT_EQ(stellar_type(c("b"), i), (StellarType{inc("P", 2), inc("Q", 1), inc("Q", 2)}));
  EXPECT_THROW(stellar_type(c("zz"), i), ModelError);
  Instance chain{A("E", {c("a"), n(1)}), A("E", {n(1), n(2)}), A("E", {n(2), n(3)})};
  EXPECT_EQ(stellar_type(n(1), chain), (StellarType{inc("E", 1), inc("E", 2)}));
  EXPECT_EQ(stellar_type(n(1), chain), stellar_type(n(2), chain));
  EXPECT_NE(stellar_type(n(1), chain), stellar_type(n(3), chain));
  EXPECT_EQ(stellar_types(chain).at(n(2)), stellar_type(n(2), chain));
}

TEST(StellarType, EqualityMatchesStellarQueryEquivalence) {
  gen::Random r(91);
  for (int k = 0; k < 200; ++k) {
    Instance inst = gen::random_instance(r, 10, 6);
    auto types = stellar_types(inst);
    for (const auto& [s, ts] : types) {
      for (const auto& [t, tt] : types) {
        auto qs = oracle::stellar_query(s, inst), qt = oracle::stellar_query(t, inst);
        bool equivalent = oracle::sq_contained(qs, qt) && oracle::sq_contained(qt, qs);
        EXPECT_EQ(ts == tt, equivalent);
      }
    }
  }
}

TEST(RegularType, NoOutgoingEdgesGivesReflexivePairs) {
  DFA d = dfa("E");
  Instance i{A("E", {c("a"), c("b")})};
  EXPECT_EQ(regular_type(c("b"), i, d), reflexive(d));
  RegularType ta = regular_type(c("a"), i, d);
  bool start_to_accept = false;
  for (auto [q, p] : ta) start_to_accept = start_to_accept || (q == d.start && d.accepting[p]);
  EXPECT_TRUE(start_to_accept);
  EXPECT_THROW(regular_type(c("zz"), i, d), ModelError);
}

TEST(RegularType, ChainNullsShareTypeWithoutQueryLabels) {
  Ruleset rules = parse_ruleset("E(X,Y) -> exists Z. E(Y,Z).");
  Instance prefix = chase_bounded(parse_database("E(a,b)."), rules, 5).instance;
  DFA d = dfa("F");
  auto types = regular_types(prefix, d);
  // Every term with a successor sees the same words: E^k, all leading to the trap.
  std::set<RegularType> seen;
  for (const Atom& a : prefix.atoms()) seen.insert(types.at(a.args[0]));
  EXPECT_EQ(seen.size(), 1u);
  RegularType expected = reflexive(d);
  for (uint32_t q = 0; q < d.num_states(); ++q) expected.emplace(q, *d.sink);
  EXPECT_EQ(*seen.begin(), expected);
}

TEST(RegularType, MatchesWalkOracle) {
  gen::Random r(92);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  for (int k = 0; k < 150; ++k) {
    Regex x = gen::random_regex(r, 2, labels, k % 2 == 1);
    DFA d = compile_regex(x);
    Instance g = gen::random_graph(r, 5, 4, labels);
    uint32_t trap = d.sink ? *d.sink : static_cast<uint32_t>(d.num_states());
    uint32_t states = static_cast<uint32_t>(d.num_states() + (d.sink ? 0 : 1));
    for (const auto& [t, ty] : regular_types(g, d)) {
      // Explicit walks from t of length <= 4 cover every pair on graphs this
      // small. Inverse edges are walked only for inverse letters of the DFA.
      RegularType expected;
      std::vector<std::pair<Term, std::vector<Label>>> walks{{t, {}}};
      for (size_t step = 0; step <= 4; ++step) {
        std::vector<std::pair<Term, std::vector<Label>>> next;
        for (const auto& [at, word] : walks) {
          for (uint32_t q = 0; q < states; ++q) {
            uint32_t s = q;
            for (const Label& l : word) {
              if (s == trap) break;
              auto to = d.next(s, l);
              s = to ? *to : trap;
            }
            expected.emplace(q, s);
          }
          for (const Atom& a : g.atoms()) {
            if (a.args[0] == at) {
              auto w = word;
              w.push_back(Label{a.predicate, false});
              next.emplace_back(a.args[1], w);
            }
            if (a.args[1] == at && d.letter(Label{a.predicate, true})) {
              auto w = word;
              w.push_back(Label{a.predicate, true});
              next.emplace_back(a.args[0], w);
            }
          }
        }
        walks = std::move(next);
      }
      EXPECT_EQ(ty, expected) << to_string(x) << " " << to_string(t) << "\n" << to_string(g);
    }
  }
}

TEST(RegularType, QueryHoldsIffSomeTermHasAcceptingPair) {
  gen::Random r(93);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  for (int k = 0; k < 200; ++k) {
    DFA d = compile_regex(gen::random_regex(r, 3, labels, k % 2 == 1));
    Instance g = gen::random_graph(r, 6, 5, labels);
    bool some = false;
    for (const auto& [t, ty] : regular_types(g, d)) {
      for (auto [q, p] : ty) some = some || (q == d.start && p < d.num_states() && d.accepting[p]);
    }
    EXPECT_EQ(eval_rpq(d, g).holds, some);
  }
}

TEST(MergeTerms, Examples) {
  Instance i{A("E", {c("a"), n(1)}), A("E", {c("a"), n(2)})};
  Term u;
  Instance m = merge_terms(i, n(1), n(2), &u);
  EXPECT_EQ(m, (Instance{A("E", {c("a"), u})}));
  EXPECT_TRUE(u.is_null());
  EXPECT_NE(u, n(1));
  EXPECT_NE(u, n(2));
  Instance loop = merge_terms(Instance{A("E", {n(1), n(2)})}, n(1), n(2), &u);
  EXPECT_EQ(loop, (Instance{A("E", {u, u})}));
  EXPECT_THROW(merge_terms(i, c("a"), n(1)), ModelError);
  EXPECT_THROW(merge_terms(i, n(1), n(1)), ModelError);
}

TEST(MergeTerms, UntouchedStellarTypesUnchanged) {
  gen::Random r(94);
  for (int k = 0; k < 200; ++k) {
    Instance inst = gen::random_instance(r, 10, 6);
    for (auto [s, t] : check::stellar_twins(inst)) {
      Term u;
      Instance m = merge_terms(inst, s, t, &u);
      auto before = stellar_types(inst), after = stellar_types(m);
      EXPECT_EQ(after.at(u), before.at(s));
      for (const auto& [x, ty] : before) {
        if (x != s && x != t) EXPECT_EQ(after.at(x), ty);
      }
    }
  }
}

TEST(Quotient, ClassesBecomeFreshNulls) {
  Instance i{A("E", {n(1), n(2)}), A("E", {n(2), n(3)}), A("E", {n(3), n(4)})};
  Instance q = quotient(i, {{n(1), n(3)}, {n(2), n(4)}, {n(5)}});
  EXPECT_EQ(q.size(), 2u);
  EXPECT_EQ(active_domain(q).size(), 2u);
}

TEST(Modelhood, JoinlessRulesSurviveAnyMerge) {
  gen::Random r(95);
  size_t merges = 0;
  for (int k = 0; k < 300; ++k) {
    Rule rule = check::random_rule_where(r, false);
    auto model = check::repair_to_model(gen::random_instance(r, 8, 6), {rule}, 12);
    if (!model) continue;
    TermSet dom = active_domain(*model);
    std::vector<Term> nulls;
    for (Term t : dom) {
      if (!t.is_constant()) nulls.push_back(t);
    }
    if (nulls.size() < 2) continue;
    Term s = nulls[r.below(nulls.size())], t = nulls[r.below(nulls.size())];
    if (s == t) continue;
    EXPECT_TRUE(models(merge_terms(*model, s, t), {rule})) << to_string(rule) << "\n" << to_string(*model);
    ++merges;
  }
  EXPECT_GT(merges, 50u);
}

TEST(Modelhood, StellarRulesWithSingleFrontierSurviveTwinMerge) {
  gen::Random r(96);
  size_t merges = 0;
  for (int k = 0; k < 1500; ++k) {
    Rule rule = check::random_rule_where(r, true);
    if (rule.frontier().size() != 1) continue;
    auto model = check::repair_to_model(gen::random_instance(r, 8, 6), {rule}, 12);
    if (!model) continue;
    for (auto [s, t] : check::stellar_twins(*model)) {
      EXPECT_TRUE(models(merge_terms(*model, s, t), {rule})) << to_string(rule) << "\n" << to_string(*model);
      ++merges;
    }
  }
  EXPECT_GT(merges, 20u);
}

// A stellar rule whose head keeps a second frontier variable: the twins s and
// t share a stellar type, yet merging them joins E(a,s) with F(t,d).
TEST(Modelhood, WiderFrontierBreaksUnderTwinMerge) {
  Ruleset rule = parse_ruleset("E(X,Y), F(Y,Z) -> G(Y,X,Z).");
  ASSERT_TRUE(is_stellar(rule));
  Instance i = parse_database("E(a,_n1). F(_n1,c). G(_n1,a,c). E(b,_n2). F(_n2,d). G(_n2,b,d).");
  ASSERT_TRUE(models(i, rule));
  ASSERT_EQ(stellar_type(n(1), i), stellar_type(n(2), i));
  EXPECT_FALSE(models(merge_terms(i, n(1), n(2)), rule));
}

TEST(RegularTypeMerge, TwinMergePreservesQueryBothWays) {
  gen::Random r(97);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  size_t merges = 0;
  for (int k = 0; k < 300; ++k) {
    DFA d = compile_regex(gen::random_regex(r, 2, labels));
    if (d.num_states() > 4) continue;
    Instance inst = gen::random_instance(r, 10, 6);
    bool before = eval_rpq(d, inst).holds;
    for (auto [s, t] : check::regular_twins(inst, d)) {
      EXPECT_EQ(eval_rpq(d, merge_terms(inst, s, t)).holds, before) << to_string(inst);
      ++merges;
    }
  }
  EXPECT_GT(merges, 50u);
}

TEST(ActiveTriggers, ModelsMatchesDefinition) {
  Ruleset rules = parse_ruleset("E(X,Y) -> exists Z. E(Y,Z).");
  EXPECT_FALSE(models(parse_database("E(a,b)."), rules));
  EXPECT_TRUE(models(parse_database("E(a,b). E(b,b)."), rules));
  EXPECT_EQ(active_triggers(parse_database("E(a,b). E(c,d)."), rules).size(), 2u);
  EXPECT_EQ(active_triggers(parse_database("E(a,b). E(c,d)."), rules, 1).size(), 1u);
}

TEST(BuildCountermodel, ChainFoldsIntoLoop) {
  Instance d = parse_database("E(a,b).");
  Ruleset rules = parse_ruleset("E(X,Y) -> exists Z. E(Y,Z).");
  DFA q = dfa("F");
  CountermodelResult res = build_countermodel(d, rules, q);
  ASSERT_TRUE(res.model.has_value()) << res.diagnostics;
  EXPECT_TRUE(res.check.ok());
  EXPECT_TRUE(verify_countermodel(*res.model, d, rules, q).ok());
  ASSERT_EQ(res.model->size(), 3u);
  Term u;
  for (const Atom& a : res.model->atoms()) {
    if (a.args[0] == c("b")) u = a.args[1];
  }
  ASSERT_TRUE(u.is_null());
  EXPECT_EQ(*res.model, (Instance{A("E", {c("a"), c("b")}), A("E", {c("b"), u}), A("E", {u, u})}));
}

TEST(BuildCountermodel, ModelAlreadyGiven) {
  Instance d = parse_database("E(a,b). E(b,b).");
  Ruleset rules = parse_ruleset("E(X,Y) -> exists Z. E(Y,Z).");
  CountermodelResult res = build_countermodel(d, rules, dfa("F"));
  ASSERT_TRUE(res.model.has_value());
  EXPECT_EQ(*res.model, d);
  EXPECT_EQ(res.rounds, 0u);
}

TEST(BuildCountermodel, EntailedQueryExhausts) {
  Instance d = parse_database("E(a,b).");
  Ruleset rules = parse_ruleset("E(X,Y) -> exists Z. F(Y,Z).");
  CountermodelOptions o;
  o.max_rounds = 8;
  EXPECT_FALSE(build_countermodel(d, rules, dfa("F"), o).model.has_value());
  EXPECT_FALSE(brute_force_countermodel(d, rules, dfa("F"), o).model.has_value());
}

TEST(BuildCountermodel, ResultsAlwaysVerify) {
  gen::Random r(98);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  size_t built = 0;
  for (int k = 0; k < 80; ++k) {
    Ruleset rules;
    for (int i = 0; i < 2; ++i) rules.push_back(check::random_rule_where(r, r.chance(0.5)));
    Instance d = gen::random_database(r, 4);
    DFA q = compile_regex(gen::random_regex(r, 2, labels));
    CountermodelOptions o;
    o.max_rounds = 16;
    o.max_atoms = 5'000;
    CountermodelResult res = build_countermodel(d, rules, q, o);
    if (!res.model) continue;
    EXPECT_TRUE(verify_countermodel(*res.model, d, rules, q).ok());
    ++built;
  }
  EXPECT_GT(built, 10u);
}

TEST(BruteForceCountermodel, FindsSmallModels) {
  Instance d = parse_database("E(a,b).");
  Ruleset rules = parse_ruleset("E(X,Y) -> exists Z. E(Y,Z). E(X,Y), E(Y,Z) -> F(X,Z).");
  DFA q = dfa("E / E / E / E / E");
  CountermodelResult res = brute_force_countermodel(d, rules, q);
  // Any model has an E-cycle reachable from a, hence arbitrarily long E-walks.
  EXPECT_FALSE(res.model.has_value());
  DFA f = dfa("F / F / E / E / E / E / E / E");
  CountermodelResult g = brute_force_countermodel(d, rules, dfa("G"));
  ASSERT_TRUE(g.model.has_value());
  EXPECT_TRUE(verify_countermodel(*g.model, d, rules, dfa("G")).ok());
  (void)f;
}
