#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stickyrpq {

// Raised for malformed symbolic objects (arity clashes, unsafe rules, ...).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Interned predicate name. Comparison is by intern id; use name() for
// anything user visible.
class Predicate {
 public:
  Predicate() = default;
  explicit Predicate(std::string_view name);

  const std::string& name() const;
  uint32_t id() const { return id_; }
  bool valid() const { return id_ != 0; }

  friend bool operator==(Predicate, Predicate) = default;
  friend std::strong_ordering operator<=>(Predicate a, Predicate b) { return a.id_ <=> b.id_; }

 private:
  uint32_t id_ = 0;
};

// Houses f_z^tau: one function symbol per (head isomorphism type, existential).
struct SkolemSymbol {
  std::string iso_type;
  std::string existential_var;
  uint32_t arity = 0;

  friend bool operator==(const SkolemSymbol&, const SkolemSymbol&) = default;
  friend auto operator<=>(const SkolemSymbol&, const SkolemSymbol&) = default;
};

// A hash-consed term handle. Constants, variables, nulls and functional
// terms live in disjoint namespaces; equal handles are structurally equal
// terms and vice versa.
class Term {
 public:
  enum class Kind : uint8_t { Constant = 0, Variable = 1, Null = 2, Functional = 3 };

  Term() = default;

  static Term constant(std::string_view name);
  static Term variable(std::string_view name);
  static Term null(uint64_t id);
  static Term functional(const SkolemSymbol& symbol, std::vector<Term> args);
  static Term functional(uint32_t symbol_id, std::vector<Term> args);

  Kind kind() const { return static_cast<Kind>(bits_ >> kPayloadBits); }
  bool is_constant() const { return kind() == Kind::Constant; }
  bool is_variable() const { return kind() == Kind::Variable; }
  bool is_null() const { return kind() == Kind::Null; }
  bool is_functional() const { return kind() == Kind::Functional; }

  // Constants and variables only.
  const std::string& name() const;
  // Nulls only.
  uint64_t null_id() const;
  // Functional terms only.
  uint32_t symbol_id() const;
  const SkolemSymbol& symbol() const;
  std::span<const Term> args() const;
  // Nesting depth of functional terms; 0 for everything else.
  uint32_t depth() const;

  uint64_t raw() const { return bits_; }

  friend bool operator==(Term, Term) = default;
  friend std::strong_ordering operator<=>(Term a, Term b) { return a.bits_ <=> b.bits_; }

 private:
  static constexpr int kPayloadBits = 62;
  static constexpr uint64_t kPayloadMask = (uint64_t{1} << kPayloadBits) - 1;
  Term(Kind kind, uint64_t payload)
      : bits_((static_cast<uint64_t>(kind) << kPayloadBits) | (payload & kPayloadMask)) {}
  uint64_t payload() const { return bits_ & kPayloadMask; }

  uint64_t bits_ = 0;
};

const SkolemSymbol& skolem_symbol(uint32_t id);
uint32_t intern_skolem_symbol(const SkolemSymbol& symbol);

struct TermHash {
  size_t operator()(Term t) const noexcept { return std::hash<uint64_t>{}(t.raw()); }
};

using TermSet = std::set<Term>;
using TermMap = std::map<Term, Term>;

std::string to_string(Term t);
std::ostream& operator<<(std::ostream& out, Term t);

struct Atom {
  Predicate predicate;
  std::vector<Term> args;

  Atom() = default;
  Atom(Predicate p, std::vector<Term> a) : predicate(p), args(std::move(a)) {}

  size_t arity() const { return args.size(); }

  friend bool operator==(const Atom&, const Atom&) = default;
  friend std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
    if (auto c = a.predicate <=> b.predicate; c != 0) return c;
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(),
                                                  b.args.end());
  }
};

struct AtomHash {
  size_t operator()(const Atom& a) const noexcept;
};

std::string to_string(const Atom& a);
std::ostream& operator<<(std::ostream& out, const Atom& a);

// Applies a term substitution; unmapped terms are kept.
Atom substitute(const Atom& atom, const TermMap& mapping);
std::vector<Atom> substitute(std::span<const Atom> atoms, const TermMap& mapping);

// Finite set of atoms with set semantics. Atoms keep insertion order, which
// the chase uses to address its per-level deltas; indexes by predicate and
// by (predicate, position, term) back homomorphism search.
class Instance {
 public:
  Instance() = default;
  Instance(std::initializer_list<Atom> atoms);
  explicit Instance(std::span<const Atom> atoms);

  // Returns true when the atom was not present yet.
  bool insert(const Atom& atom);
  bool contains(const Atom& atom) const;

  size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& operator[](size_t i) const { return atoms_[i]; }

  std::vector<Atom> sorted_atoms() const;
  std::span<const uint32_t> with_predicate(Predicate p) const;
  std::span<const uint32_t> with_term_at(Predicate p, size_t position, Term t) const;

  // True when every argument of every atom is a constant.
  bool is_database() const;

  friend bool operator==(const Instance& a, const Instance& b);

 private:
  struct PositionKey {
    uint32_t predicate;
    uint32_t position;
    uint64_t term;
    friend bool operator==(const PositionKey&, const PositionKey&) = default;
  };
  struct PositionKeyHash {
    size_t operator()(const PositionKey& k) const noexcept;
  };

  std::vector<Atom> atoms_;
  std::unordered_map<Atom, uint32_t, AtomHash> position_;
  std::unordered_map<uint32_t, std::vector<uint32_t>> by_predicate_;
  std::unordered_map<PositionKey, std::vector<uint32_t>, PositionKeyHash> by_term_;
};

TermSet active_domain(const Instance& instance);
TermSet terms_of(std::span<const Atom> atoms);
// Atoms all of whose arguments lie in `terms`.
Instance restrict(const Instance& instance, const TermSet& terms);
// Atoms restricted to a set of predicates.
Instance restrict_predicates(const Instance& instance, const std::set<Predicate>& predicates);
Instance union_of(const Instance& a, const Instance& b);
std::string to_string(const Instance& instance);

// Predicate -> arity. declare() rejects an arity clash.
class Signature {
 public:
  void declare(Predicate p, size_t arity);
  void declare(const Atom& atom) { declare(atom.predicate, atom.arity()); }
  bool contains(Predicate p) const { return arity_.contains(p); }
  size_t arity(Predicate p) const;
  const std::map<Predicate, size_t>& entries() const { return arity_; }
  void merge(const Signature& other);

 private:
  std::map<Predicate, size_t> arity_;
};

// A single-head existential rule: body -> exists existentials. head.
class Rule {
 public:
  Rule() = default;
  // Throws ModelError if an existential occurs in the body or a head
  // variable is neither a body variable nor declared existential.
  Rule(std::vector<Atom> body, Atom head, std::vector<Term> existentials);
  // Every head variable missing from the body becomes existential.
  static Rule with_inferred_existentials(std::vector<Atom> body, Atom head);

  const std::vector<Atom>& body() const { return body_; }
  const Atom& head() const { return head_; }
  // In order of first occurrence in the head.
  const std::vector<Term>& existentials() const { return existentials_; }
  // Body variables that occur in the head, in order of first head occurrence.
  const std::vector<Term>& frontier() const { return frontier_; }
  // Variables with two or more body occurrences, in order of first body occurrence.
  const std::vector<Term>& join_variables() const { return join_; }
  std::vector<Term> body_variables() const;

  bool is_datalog() const { return existentials_.empty(); }

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.body_ == b.body_ && a.head_ == b.head_ && a.existentials_ == b.existentials_;
  }

 private:
  std::vector<Atom> body_;
  Atom head_;
  std::vector<Term> existentials_;
  std::vector<Term> frontier_;
  std::vector<Term> join_;
};

using Ruleset = std::vector<Rule>;

// Parsed rule that may carry several head atoms; see to_single_head.
struct MultiHeadRule {
  std::vector<Atom> body;
  std::vector<Atom> heads;
  std::vector<Term> existentials;
};

std::string to_string(const Rule& rule);
std::string to_string(const Ruleset& rules);

Signature signature_of(const Instance& instance);
Signature signature_of(const Ruleset& rules);

// Renames every variable of the rule apart using `prefix` and a counter.
Rule rename_apart(const Rule& rule, std::string_view prefix, size_t& counter);

// Canonical form of a conjunction under bijective renaming of its
// non-constant terms. Designated free terms are renamed among themselves
// and kept distinct from the remaining (existential) terms.
struct IsoType {
  std::string id;
  std::vector<Term> free_order;         // designated terms in canonical order
  std::vector<Term> existential_order;  // other renamable terms in canonical order

  friend bool operator==(const IsoType& a, const IsoType& b) { return a.id == b.id; }
};

IsoType iso_type(std::span<const Atom> atoms, std::span<const Term> free_terms);

}  // namespace stickyrpq
