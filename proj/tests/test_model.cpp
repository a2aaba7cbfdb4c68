#include <gtest/gtest.h>

#include "stickyrpq/model.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace stickyrpq;

namespace {

Term c(const char* n) { return Term::constant(n); }
Term v(const char* n) { return Term::variable(n); }
Atom A(const char* p, std::vector<Term> args) { return Atom{Predicate(p), std::move(args)}; }

}  // namespace

TEST(Term, NamespacesAreDisjoint) {
  EXPECT_NE(c("x"), v("x"));
  EXPECT_NE(Term::null(3), c("_n3"));
  EXPECT_TRUE(Term::null(3).is_null());
  EXPECT_EQ(to_string(Term::null(3)), "_n3");
}

TEST(Term, FunctionalTermsAreStructural) {
  SkolemSymbol f{"tau", "Z", 1};
  Term a = Term::functional(f, {c("a")});
  Term b = Term::functional(f, {c("a")});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, Term::functional(f, {c("b")}));
  EXPECT_NE(a, Term::functional(SkolemSymbol{"tau", "Z2", 1}, {c("a")}));
  EXPECT_EQ(Term::functional(f, {a}).depth(), 2u);
  EXPECT_THROW(Term::functional(f, {c("a"), c("b")}), ModelError);
}

TEST(SkolemSymbol, EqualityNeedsAllThreeFields) {
  SkolemSymbol f{"t", "Z", 2};
  EXPECT_EQ(f, (SkolemSymbol{"t", "Z", 2}));
  EXPECT_NE(f, (SkolemSymbol{"t2", "Z", 2}));
  EXPECT_NE(f, (SkolemSymbol{"t", "Z", 1}));
  EXPECT_EQ(intern_skolem_symbol(f), intern_skolem_symbol(SkolemSymbol{"t", "Z", 2}));
}

TEST(IsoType, RenamingOfExistentials) {
  std::vector<Term> fx{v("x")};
  std::vector<Atom> p1{A("P", {v("x"), v("u")})};
  std::vector<Atom> p2{A("P", {v("x"), v("v")})};
  EXPECT_EQ(iso_type(p1, fx).id, iso_type(p2, fx).id);
}

TEST(IsoType, FreeIdentificationPatternMatters) {
  // Skolemization abstracts mapped frontier values to placeholders; equal
  // values share one placeholder.
  std::vector<Atom> aa{A("GridPoint", {v("f0"), v("f0"), v("z")})};
  std::vector<Atom> ab{A("GridPoint", {v("f0"), v("f1"), v("z")})};
  std::vector<Term> fa{v("f0")}, fab{v("f0"), v("f1")};
  EXPECT_NE(iso_type(aa, fa).id, iso_type(ab, fab).id);
}

TEST(IsoType, SwappedExistentials) {
  std::vector<Term> fx{v("x")};
  std::vector<Atom> q1{A("P", {v("x"), v("u"), v("v")})};
  std::vector<Atom> q2{A("P", {v("x"), v("v"), v("u")})};
  EXPECT_TRUE(oracle::isomorphic(q1, fx, q2, fx));
  EXPECT_EQ(iso_type(q1, fx).id, iso_type(q2, fx).id);
}

TEST(IsoType, AgreesWithBijectionSearch) {
  gen::Random r(7);
  std::vector<Term> pool{v("X"), v("Y"), v("Z"), v("W"), c("k")};
  for (int round = 0; round < 400; ++round) {
    std::vector<Atom> a, b;
    size_t n = 1 + r.below(3);
    for (size_t i = 0; i < n; ++i) a.push_back(gen::random_atom(r, gen::default_signature(), pool));
    for (size_t i = 0; i < n; ++i) b.push_back(gen::random_atom(r, gen::default_signature(), pool));
    if (r.chance(0.5)) {
      // b becomes a renaming of a, in shuffled order.
      std::vector<Term> perm{v("X"), v("Y"), v("Z"), v("W")};
      std::shuffle(perm.begin(), perm.end(), r.engine());
      TermMap h{{v("X"), perm[0]}, {v("Y"), perm[1]}, {v("Z"), perm[2]}, {v("W"), perm[3]}};
      b = substitute(a, h);
      std::shuffle(b.begin(), b.end(), r.engine());
    }
    std::vector<Term> fa, fb;
    if (r.chance(0.5)) {
      fa = {v("X")};
      fb = {v("X")};
    }
    bool expected = oracle::isomorphic(a, fa, b, fb);
    EXPECT_EQ(iso_type(a, fa).id == iso_type(b, fb).id, expected)
        << to_string(Instance(a)) << " vs " << to_string(Instance(b));
  }
}

TEST(IsoType, StableUnderRepeatsAndAtomOrder) {
  std::vector<Atom> q{A("E", {v("x"), v("y")}), A("F", {v("y"), v("z")}), A("E", {v("z"), v("x")})};
  std::vector<Term> free{v("x")};
  IsoType t = iso_type(q, free);
  for (int i = 0; i < 5; ++i) {
    std::rotate(q.begin(), q.begin() + 1, q.end());
    EXPECT_EQ(iso_type(q, free).id, t.id);
  }
}

TEST(Instance, ActiveDomain) {
  EXPECT_EQ(active_domain(Instance{A("P", {c("a"), c("b")})}), (TermSet{c("a"), c("b")}));
  EXPECT_TRUE(active_domain(Instance{}).empty());
  Term fa = Term::functional(SkolemSymbol{"t", "Z", 1}, {c("a")});
  EXPECT_EQ(active_domain(Instance{A("P", {c("a"), fa})}), (TermSet{c("a"), fa}));
}

TEST(Instance, SetSemantics) {
  Instance i;
  EXPECT_TRUE(i.insert(A("P", {c("a")})));
  EXPECT_FALSE(i.insert(A("P", {c("a")})));
  EXPECT_EQ(i.size(), 1u);
  EXPECT_EQ((Instance{A("P", {c("a")}), A("Q", {c("b")})}), (Instance{A("Q", {c("b")}), A("P", {c("a")})}));
}

TEST(Instance, Restrict) {
  Term n = Term::null(1);
  Instance i{A("E", {c("a"), c("b")}), A("E", {c("b"), n})};
  EXPECT_EQ(restrict(i, {c("a"), c("b")}), (Instance{A("E", {c("a"), c("b")})}));
  EXPECT_EQ(restrict(i, active_domain(i)), i);
  Instance z{A("XZero", {c("z0"), c("z0")})};
  EXPECT_TRUE(restrict(z, {}).empty());
}

TEST(Instance, RestrictToDomainIsIdentityOnRandomInstances) {
  gen::Random r(11);
  for (int k = 0; k < 100; ++k) {
    Instance i = gen::random_instance(r, 10, 5);
    EXPECT_EQ(restrict(i, active_domain(i)), i);
  }
}

TEST(Rule, DerivedVariableSets) {
  Rule r({A("E", {v("X"), v("Y")}), A("E", {v("Y"), v("X")}), A("A", {v("W")})}, A("F", {v("Y"), v("Z")}),
         {v("Z")});
  EXPECT_EQ(r.frontier(), (std::vector<Term>{v("Y")}));
  EXPECT_EQ(r.join_variables(), (std::vector<Term>{v("X"), v("Y")}));
  EXPECT_EQ(r.existentials(), (std::vector<Term>{v("Z")}));
  Rule same_atom({A("E", {v("X"), v("X")})}, A("A", {v("X")}), {});
  EXPECT_EQ(same_atom.join_variables(), (std::vector<Term>{v("X")}));
}

TEST(Rule, Validation) {
  EXPECT_THROW(Rule({A("E", {v("X"), v("Y")})}, A("F", {v("X"), v("Z")}), {}), ModelError);
  EXPECT_THROW(Rule({A("E", {v("X"), v("Z")})}, A("F", {v("X"), v("Z")}), {v("Z")}), ModelError);
  Rule inferred = Rule::with_inferred_existentials({A("E", {v("X"), v("Y")})}, A("F", {v("X"), v("Z")}));
  EXPECT_EQ(inferred.existentials(), (std::vector<Term>{v("Z")}));
}

TEST(Signature, RejectsArityClash) {
  Signature s;
  s.declare(Predicate("E"), 2);
  EXPECT_NO_THROW(s.declare(Predicate("E"), 2));
  EXPECT_THROW(s.declare(Predicate("E"), 3), ModelError);
}
