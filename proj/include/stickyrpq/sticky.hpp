#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stickyrpq/model.hpp"

namespace stickyrpq {

// Splits every multi-head rule into one existential rule with a fresh head
// predicate carrying the frontier and existential variables, plus one
// Datalog projection per original head atom. Single-head rules pass through.
// Fresh predicates are named P_rho<k>, avoiding names in `taken`.
Ruleset to_single_head(const std::vector<MultiHeadRule>& rules, const Signature& taken = {});

// Predicate -> marked positions (1-based).
struct Marking {
  std::map<Predicate, std::set<size_t>> marked;

  bool is_marked(Predicate p, size_t position) const {
    auto it = marked.find(p);
    return it != marked.end() && it->second.contains(position);
  }
  friend bool operator==(const Marking&, const Marking&) = default;
};

struct StickyReport {
  bool sticky = false;
  Marking marking;        // meaningful when sticky
  std::string violation;  // every violating rule with one offending variable
};

// Decides stickiness through the doomed-position fixpoint and returns the
// complement of the doomed positions as marking.
StickyReport check_sticky(const Ruleset& rules);

// Checks a marking directly against the two marking conditions: every join
// variable and every variable at a marked body position must occur at some
// marked head position. On failure `why` receives an explanation.
bool verify_marking(const Ruleset& rules, const Marking& marking, std::string* why = nullptr);

bool is_joinless(const Rule& rule);
bool is_joinless(const Ruleset& rules);
// At most one join variable, and that variable is a frontier variable.
bool is_stellar(const Rule& rule);
bool is_stellar(const Ruleset& rules);

std::string to_string(const Marking& marking, const Signature& signature);

}  // namespace stickyrpq
