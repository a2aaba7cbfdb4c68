#pragma once

#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "stickyrpq/chase.hpp"
#include "stickyrpq/rpq.hpp"

namespace stickyrpq {

// (predicate, 1-based position) incidences of a term.
using StellarType = std::set<std::pair<Predicate, size_t>>;
// State pairs (q, q') such that some outgoing path from the term leads the
// automaton from q to q'. Letters outside the DFA alphabet lead to the trap,
// which is the DFA's sink or, if it has none, the extra state num_states().
using RegularType = std::set<std::pair<uint32_t, uint32_t>>;

StellarType stellar_type(Term t, const Instance& instance);  // throws ModelError if t is absent
std::map<Term, StellarType> stellar_types(const Instance& instance);
RegularType regular_type(Term t, const Instance& instance, const DFA& dfa);  // throws ModelError if t is absent
std::map<Term, RegularType> regular_types(const Instance& instance, const DFA& dfa);

// Smallest null id not used in the instance (one past the largest).
uint64_t next_null_id(const Instance& instance);

// Replaces s and t by one fresh null. Throws ModelError on constants or s == t.
Instance merge_terms(const Instance& instance, Term s, Term t, Term* merged = nullptr);
// Replaces every class of two or more terms by its own fresh null.
Instance quotient(const Instance& instance, const std::vector<std::vector<Term>>& classes);

// Triggers without an extension to the head (standard satisfaction).
std::vector<Trigger> active_triggers(const Instance& instance, const Ruleset& rules, size_t limit = SIZE_MAX);
bool models(const Instance& instance, const Ruleset& rules);

struct CountermodelCheck {
  bool contains_database = false;
  bool models_rules = false;
  bool avoids_query = false;
  bool ok() const { return contains_database && models_rules && avoids_query; }
};

CountermodelCheck verify_countermodel(const Instance& model, const Instance& database, const Ruleset& rules,
                                      const DFA& query);
std::string to_string(const CountermodelCheck& check);

struct CountermodelOptions {
  size_t max_rounds = 64;
  size_t max_atoms = 100'000;
  size_t lookahead = 1;
  // Fallback enumeration limits.
  size_t max_fresh_nulls = 6;
  size_t max_nodes = 2'000'000;
  std::stop_token stop;
};

struct CountermodelResult {
  std::optional<Instance> model;
  size_t rounds = 0;
  CountermodelCheck check;
  std::string diagnostics;
};

// Chase-and-quotient loop: each round repairs every unsatisfied trigger with
// fresh nulls, types the nulls on a short lookahead of the chase, identifies
// nulls with equal stellar and regular type, and stops once the instance
// contains the database, models the rules and avoids the query. Requires
// stellar rules.
CountermodelResult build_countermodel(const Instance& database, const Ruleset& rules, const DFA& query,
                                      const CountermodelOptions& options = {});

// Exhaustive repair search: repeatedly satisfy the first unsatisfied trigger
// with an existing term or a fresh null, never passing through an instance
// that satisfies the query. Fresh-null budgets grow from 0 up to
// max_fresh_nulls, so any countermodel with that many extra terms is found.
CountermodelResult brute_force_countermodel(const Instance& database, const Ruleset& rules, const DFA& query,
                                            const CountermodelOptions& options = {});

}  // namespace stickyrpq
