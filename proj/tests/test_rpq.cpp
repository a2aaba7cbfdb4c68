#include <gtest/gtest.h>

#include "stickyrpq/chase.hpp"
#include "stickyrpq/rpq.hpp"
#include "stickyrpq/sticky.hpp"
#include "stickyrpq/tca.hpp"
#include "stickyrpq/textio.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace stickyrpq;

namespace {

Term c(const char* n) { return Term::constant(n); }
Atom A(const char* p, std::vector<Term> args) { return Atom{Predicate(p), std::move(args)}; }
Label L(const char* p, bool inv = false) { return Label{Predicate(p), inv}; }

Regex re(const char* text) { return parse_query(text).regex; }

bool goal_derived(const Instance& inst, const DFA& dfa) {
  Signature sig = signature_of(inst);
  DatalogTranslation dl = rpq_to_datalog(dfa, sig);
  ChaseTrace t = chase_bounded(inst, dl.rules, 10'000);
  EXPECT_TRUE(t.fixpoint);
  return t.instance.contains(Atom{dl.goal, {}});
}

// The walk is a chain of edges and its label word is accepted.
void expect_valid_witness(const RpqResult& res, const DFA& dfa, const Instance& inst) {
  ASSERT_TRUE(res.holds);
  Term at = res.source;
  std::vector<Label> word;
  for (const PathStep& s : res.path) {
    EXPECT_TRUE(inst.contains(s.atom));
    ASSERT_EQ(s.atom.arity(), 2u);
    Term from = s.inverse ? s.atom.args[1] : s.atom.args[0];
    Term to = s.inverse ? s.atom.args[0] : s.atom.args[1];
    EXPECT_EQ(from, at);
    at = to;
    word.push_back(Label{s.atom.predicate, s.inverse});
  }
  EXPECT_EQ(at, res.target);
  EXPECT_TRUE(dfa.accepts(word));
}

}  // namespace

TEST(CompileRegex, SingleSymbol) {
  DFA d = compile_regex(re("E"));
  EXPECT_EQ(d.num_states(), 3u);
  ASSERT_TRUE(d.sink.has_value());
  std::vector<Label> e{L("E")}, ee{L("E"), L("E")};
  EXPECT_TRUE(d.accepts(e));
  EXPECT_FALSE(d.accepts(ee));
  EXPECT_FALSE(d.accepts({}));
}

TEST(CompileRegex, StarOfIncX) {
  DFA d = compile_regex(re("IncX*"));
  std::vector<Label> none, one{L("IncX")}, two{L("IncX"), L("IncX")}, other{L("IncY")};
  EXPECT_TRUE(d.accepts(none));
  EXPECT_TRUE(d.accepts(one));
  EXPECT_TRUE(d.accepts(two));
  EXPECT_FALSE(d.accepts(other));
}

TEST(CompileRegex, EpsilonAndEmpty) {
  EXPECT_TRUE(compile_regex(Regex::epsilon()).accepts({}));
  DFA none = compile_regex(Regex::empty());
  EXPECT_FALSE(none.accepts({}));
  EXPECT_TRUE(none.dead_states()[none.start]);
}

TEST(CompileRegex, TcaAutomatonLanguageUpToSixLetters) {
  TCA m = parse_tca("start a. halt h.\nstate a: if X == 0 then X += 1 goto h else X -= 1 goto a.");
  EncodedTca enc = encode_tca(m);
  DFA d = compile_regex(enc.query.regex);
  std::vector<Label> sigma{L("XZero"), L("YZero"), L("IncX"), L("DecX"), L("IncY"), L("DecY")};
  for (const auto& w : oracle::words_up_to(sigma, 6)) {
    EXPECT_EQ(d.accepts(w), oracle::regex_matches(enc.query.regex, w));
  }
}

TEST(CompileRegex, AgreesWithSyntaxOracle) {
  gen::Random r(81);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  for (int k = 0; k < 200; ++k) {
    Regex x = gen::random_regex(r, 3, labels, k % 3 == 0);
    DFA d = compile_regex(x);
    std::vector<Label> sigma{L("E"), L("F")};
    if (x.uses_inverse()) sigma = {L("E"), L("F"), L("E", true), L("F", true)};
    for (const auto& w : oracle::words_up_to(sigma, k % 3 == 0 ? 3 : 5)) {
      ASSERT_EQ(d.accepts(w), oracle::regex_matches(x, w)) << to_string(x);
    }
  }
}

TEST(CompileRegex, MinimalAndDeterministic) {
  gen::Random r(82);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  for (int k = 0; k < 100; ++k) {
    Regex x = gen::random_regex(r, 3, labels);
    DFA d = compile_regex(x);
    DFA again = compile_regex(x);
    EXPECT_EQ(d.delta, again.delta);
    EXPECT_EQ(minimize(d).num_states(), d.num_states());
    // Minimal: all states pairwise distinguishable by some short word.
    std::set<std::vector<bool>> signatures;
    for (uint32_t s = 0; s < d.num_states(); ++s) {
      DFA from = d;
      from.start = s;
      std::vector<bool> sig;
      for (const auto& w : oracle::words_up_to(d.alphabet, static_cast<size_t>(d.num_states()))) {
        sig.push_back(from.accepts(w));
      }
      signatures.insert(sig);
    }
    EXPECT_EQ(signatures.size(), d.num_states()) << to_string(x);
  }
}

TEST(DfaToRegex, RoundTripsLanguage) {
  gen::Random r(83);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  for (int k = 0; k < 100; ++k) {
    Regex x = gen::random_regex(r, 3, labels);
    DFA d = compile_regex(x);
    Regex back = dfa_to_regex(d);
    for (const auto& w : oracle::words_up_to({L("E"), L("F")}, 5)) {
      ASSERT_EQ(oracle::regex_matches(back, w), d.accepts(w)) << to_string(x) << " vs " << to_string(back);
    }
  }
}

TEST(EvalRpq, Examples) {
  Instance i{A("E", {c("a"), c("b")})};
  RpqResult one = eval_rpq(parse_query("E"), i);
  ASSERT_TRUE(one.holds);
  EXPECT_EQ(one.source, c("a"));
  EXPECT_EQ(one.target, c("b"));
  ASSERT_EQ(one.path.size(), 1u);
  EXPECT_FALSE(eval_rpq(parse_query("E / E"), i).holds);
  EXPECT_TRUE(eval_rpq(parse_query("^E"), i).holds);
  EXPECT_FALSE(eval_rpq(parse_query("^E / E / E"), i).holds);
  EXPECT_TRUE(eval_rpq(parse_query("E / ^E"), i).holds);
}

TEST(EvalRpq, EmptyWordNeedsATerm) {
  EXPECT_FALSE(eval_rpq(parse_query("E*"), Instance{}).holds);
  EXPECT_TRUE(eval_rpq(parse_query("E*"), Instance{A("F", {c("a"), c("b")})}).holds);
}

TEST(EvalRpq, GridOrigin) {
  Instance g = grid_instance(3);
  Query q = parse_query("XZero / YZero / IncX");
  RpqResult res = eval_rpq(q, g);
  DFA d = compile_regex(q.regex);
  expect_valid_witness(res, d, g);
  EXPECT_EQ(res.source, grid_term(0, 0));
  EXPECT_EQ(res.target, grid_term(1, 0));
}

TEST(EvalRpq, MaxLengthBoundsTheWalk) {
  Instance chain = parse_database("E(a,b). E(b,c). E(c,d).");
  DFA three = compile_regex(re("E / E / E"));
  EXPECT_TRUE(eval_rpq(three, chain).holds);
  EXPECT_FALSE(eval_rpq(three, chain, 2).holds);
  EXPECT_TRUE(eval_rpq(three, chain, 3).holds);
}

TEST(EvalRpq, AgreesWithWalkEnumeration) {
  gen::Random r(84);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  for (int k = 0; k < 300; ++k) {
    Regex x = gen::random_regex(r, 3, labels, k % 2 == 1);
    Instance g = gen::random_graph(r, 5, 4, labels);
    DFA d = compile_regex(x);
    // Walks of at most 4 edges are compared exactly.
    RpqResult bounded = eval_rpq(d, g, 4);
    EXPECT_EQ(bounded.holds, oracle::rpq_by_words(x, g, 4)) << to_string(x) << "\n" << to_string(g);
    if (bounded.holds) expect_valid_witness(bounded, d, g);
    RpqResult full = eval_rpq(d, g);
    if (full.holds) expect_valid_witness(full, d, g);
    EXPECT_TRUE(!bounded.holds || full.holds);
  }
}

TEST(EvalRpq, PairsMatchPerPairWitnesses) {
  Instance g = parse_database("E(a,b). E(b,c). F(c,a).");
  auto pairs = eval_rpq_pairs(compile_regex(re("E+")), g);
  std::set<std::pair<Term, Term>> expected{{c("a"), c("b")}, {c("b"), c("c")}, {c("a"), c("c")}};
  EXPECT_EQ(pairs, expected);
}

TEST(EvalHrpq, ProjectsToFirstTwoPositions) {
  Term z = Term::null(1), z2 = Term::null(2);
  Instance i{Atom{Predicate("IncX"), {z, z2, c("x"), c("x1"), c("y")}}};
  EXPECT_TRUE(eval_hrpq(re("IncX"), i).holds);
  EXPECT_FALSE(eval_hrpq(re("IncX / IncX"), i).holds);
  EXPECT_EQ(project_binary(i), (Instance{Atom{Predicate("IncX"), {z, z2}}}));
  Instance unary{A("U", {c("a")})};
  EXPECT_THROW(eval_hrpq(re("U"), unary), ModelError);
}

TEST(EvalHrpq, BinaryInstancesMatchRpq) {
  gen::Random r(85);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  for (int k = 0; k < 100; ++k) {
    Regex x = gen::random_regex(r, 3, labels);
    Instance g = gen::random_graph(r, 5, 4, labels);
    EXPECT_EQ(eval_hrpq(x, g).holds, eval_rpq(compile_regex(x), g).holds);
  }
}

TEST(ReduceTwoWay, InverseBecomesFreshPredicate) {
  TwoWayReduction red = reduce_two_way(parse_query("^E"), {});
  EXPECT_EQ(red.query.kind, QueryKind::RPQ);
  EXPECT_EQ(red.query.regex, Regex::symbol(Predicate("E_inv")));
  ASSERT_EQ(red.rules.size(), 1u);
  EXPECT_EQ(red.rules[0], parse_ruleset("E(X,Y) -> E_inv(Y,X).")[0]);
}

TEST(ReduceTwoWay, InverseFreeQueryUnchanged) {
  Ruleset rules = parse_ruleset("E(X,Y) -> exists Z. F(Y,Z).");
  Query q = parse_query("E / F");
  TwoWayReduction red = reduce_two_way(q, rules);
  EXPECT_EQ(red.query.regex, q.regex);
  EXPECT_EQ(red.rules.size(), 3u);
  EXPECT_TRUE(check_sticky(red.rules).sticky);
}

TEST(ReduceTwoWay, EntailmentAgreesOnTerminatingChases) {
  gen::Random r(86);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  size_t compared = 0;
  for (int k = 0; k < 80; ++k) {
    Ruleset rules = gen::random_sticky_ruleset(r);
    Instance d = gen::random_database(r, 4);
    Query q{QueryKind::TwoWay, gen::random_regex(r, 3, labels, true)};
    TwoWayReduction red = reduce_two_way(q, rules, signature_of(d));
    EXPECT_TRUE(check_sticky(red.rules).sticky);
    ChaseTrace before = chase_bounded(d, rules, 10, ChaseOptions{50'000, {}});
    if (!before.fixpoint) continue;
    ChaseTrace after = chase_bounded(d, red.rules, 11, ChaseOptions{50'000, {}});
    ASSERT_TRUE(after.fixpoint);
    EXPECT_EQ(eval_rpq(q, before.instance).holds, eval_rpq(red.query, after.instance).holds) << to_string(q);
    ++compared;
  }
  EXPECT_GT(compared, 30u);
}

TEST(Datalog, SingleSymbolRules) {
  DFA d = compile_regex(re("E"));
  Signature sig;
  sig.declare(Predicate("E"), 2);
  DatalogTranslation dl = rpq_to_datalog(d, sig);
  EXPECT_EQ(dl.goal.name(), "Goal");
  EXPECT_EQ(dl.state_predicates.size(), d.num_states());
  // Two seeds for E's positions, one live transition, one accepting rule.
  EXPECT_EQ(dl.rules.size(), 4u);
  for (const Rule& rule : dl.rules) EXPECT_TRUE(rule.is_datalog());
  EXPECT_TRUE(goal_derived(parse_database("E(a,b)."), d));
  EXPECT_FALSE(goal_derived(parse_database("F(a,b)."), d));
}

TEST(Datalog, EpsilonAndEmptyInstance) {
  DFA star = compile_regex(re("E*"));
  EXPECT_TRUE(goal_derived(parse_database("F(a,b)."), star));
  EXPECT_FALSE(goal_derived(Instance{}, compile_regex(re("E"))));
  EXPECT_FALSE(goal_derived(Instance{}, star));
}

TEST(Datalog, GoalMatchesEvalRpq) {
  gen::Random r(87);
  std::vector<Predicate> labels{Predicate("E"), Predicate("F")};
  for (int k = 0; k < 300; ++k) {
    Regex x = gen::random_regex(r, 3, labels, k % 2 == 1);
    Instance inst = gen::random_instance(r, 12, 6);
    DFA d = compile_regex(x);
    EXPECT_EQ(goal_derived(inst, d), eval_rpq(d, inst).holds) << to_string(x) << "\n" << to_string(inst);
  }
}
