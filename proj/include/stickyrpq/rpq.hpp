#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stickyrpq/model.hpp"

namespace stickyrpq {

// Edge label: a binary predicate, possibly traversed backwards.
struct Label {
  Predicate predicate;
  bool inverse = false;

  friend bool operator==(const Label&, const Label&) = default;
  friend auto operator<=>(const Label&, const Label&) = default;
};

std::string to_string(const Label& l);

struct Regex {
  enum class Kind { Symbol, Concat, Union, Star, Plus, Optional, Epsilon, Empty };

  Kind kind = Kind::Empty;
  Label label;                  // Symbol
  std::vector<Regex> children;  // Concat/Union: >= 2, Star/Plus/Optional: 1

  static Regex symbol(Predicate p, bool inverse = false);
  static Regex concat(std::vector<Regex> parts);
  static Regex alt(std::vector<Regex> parts);
  static Regex star(Regex r);
  static Regex plus(Regex r);
  static Regex optional(Regex r);
  static Regex epsilon();
  static Regex empty();

  bool uses_inverse() const;
  std::set<Label> labels() const;

  friend bool operator==(const Regex&, const Regex&) = default;
};

// Fully parenthesized where needed; parses back to an equal tree for trees
// built through the factory functions.
std::string to_string(const Regex& r);

enum class QueryKind { RPQ, TwoWay, Hyper };

struct Query {
  QueryKind kind = QueryKind::RPQ;
  Regex regex;
};

std::string to_string(const Query& q);

// Complete DFA over the labels of its regex. State `sink` (if any) is the
// rejecting trap; labels outside the alphabet also lead there.
struct DFA {
  std::vector<Label> alphabet;
  std::vector<std::vector<uint32_t>> delta;  // [state][letter]
  uint32_t start = 0;
  std::vector<bool> accepting;
  std::optional<uint32_t> sink;

  size_t num_states() const { return delta.size(); }
  std::optional<size_t> letter(const Label& l) const;
  // Transition on an arbitrary label; nullopt stands for the implicit trap.
  std::optional<uint32_t> next(uint32_t state, const Label& l) const;
  bool accepts(std::span<const Label> word) const;
  // States from which no accepting state is reachable.
  std::vector<bool> dead_states() const;
};

// Thompson construction, subset construction, then minimization.
DFA compile_regex(const Regex& r);
// Minimal complete DFA equivalent to `d` (unreachable states dropped).
DFA minimize(const DFA& d);
// State elimination; the result denotes the DFA's language.
Regex dfa_to_regex(const DFA& d);

struct PathStep {
  Atom atom;
  bool inverse = false;
};

struct RpqResult {
  bool holds = false;
  Term source, target;
  std::vector<PathStep> path;  // walked edges, source to target
};

// Some pair of terms is joined by a path whose label word is accepted.
// Paths of length 0 count. Only binary atoms are edges. With max_length the
// search is restricted to walks of at most that many edges.
RpqResult eval_rpq(const DFA& dfa, const Instance& instance, std::optional<size_t> max_length = std::nullopt);
RpqResult eval_rpq(const Query& q, const Instance& instance, std::optional<size_t> max_length = std::nullopt);

// Pairs (s, t) joined by an accepted path.
std::set<std::pair<Term, Term>> eval_rpq_pairs(const DFA& dfa, const Instance& instance);

// Atoms of arity >= 2 projected to their first two arguments.
Instance project_binary(const Instance& instance);
// Throws ModelError if a query predicate occurs with arity < 2.
RpqResult eval_hrpq(const Regex& r, const Instance& instance, std::optional<size_t> max_length = std::nullopt);

struct TwoWayReduction {
  Query query;
  Ruleset rules;
  std::map<Predicate, Predicate> inverse_of;  // E -> E_inv
};

// Replaces every inverse symbol ^E by a fresh E_inv and adds E(X,Y) -> E_inv(Y,X)
// for each binary predicate of `signature`, the rules and the query.
TwoWayReduction reduce_two_way(const Query& q, const Ruleset& rules, const Signature& signature = {});

struct DatalogTranslation {
  Ruleset rules;
  Predicate goal;
  std::vector<Predicate> state_predicates;  // index = DFA state
};

// Unary predicate per DFA state, seeded for every term occurring at any
// position of a predicate in `signature`, one rule per live transition, and
// accepting states flowing into the nullary Goal. Fresh names avoid
// `signature`. Edge predicates declared with a higher arity are matched on
// their first two positions.
DatalogTranslation rpq_to_datalog(const DFA& dfa, const Signature& signature);

}  // namespace stickyrpq
