#pragma once

#include <stdexcept>
#include <stop_token>

#include "stickyrpq/chase.hpp"
#include "stickyrpq/homcore.hpp"
#include "stickyrpq/model.hpp"

namespace stickyrpq {

struct RewriteOptions {
  size_t max_rounds = 10'000;
  size_t max_disjuncts = 100'000;
  std::stop_token stop;
};

// Thrown when the rewriting does not reach a fixpoint within the limits.
class RewriteLimitExceeded : public ResourceExhausted {
 public:
  RewriteLimitExceeded(const std::string& what, UCQ partial)
      : ResourceExhausted(what), partial_(std::move(partial)) {}
  const UCQ& partial() const { return partial_; }

 private:
  UCQ partial_;
};

// All one-step backward rewritings of `q` by the rule: for each set S of
// query atoms unifiable with the head, the most general unifier must keep
// every existential of the rule apart from constants, answer positions,
// frontier variables and other existentials, and the query variables it
// absorbs must not occur outside S. The result is
// (q \ S) ∪ body under the unifier.
std::vector<CQ> backward_rewrite(const CQ& q, const Rule& rule);

// q together with every one-step rewriting of its disjuncts, pruned to the
// containment-maximal disjuncts.
UCQ backward_step_all(const UCQ& q, const Ruleset& rules);

// Least fixpoint of backward_step_all modulo containment. Disjuncts are
// cored with their answer terms fixed and renamed to V0, V1, ...
UCQ rewrite_ucq(const UCQ& q, const Ruleset& rules, const RewriteOptions& options = {});

// Keeps only containment-maximal disjuncts, preferring earlier ones on ties.
UCQ prune_subsumed(const UCQ& q);

// R together with, for each rule, the rules whose bodies are the rewritings
// of that rule's body (frontier variables as answer tuple).
Ruleset rewrite_rule_bodies(const Ruleset& rules, const RewriteOptions& options = {});
// Each body replaced by its core with the frontier fixed.
Ruleset core_rule_bodies(const Ruleset& rules);
// Adds, for every non-stellar rule, the copy with all join variables
// replaced by one fresh variable.
Ruleset add_stellar_variants(const Ruleset& rules);
// Drops rules with two or more join variables.
Ruleset prune_multijoin(const Ruleset& rules);
// Facts over the database's constants entailed by (d, rules), computed by
// rewriting each atomic query P(X1..Xn) and evaluating it over d.
Instance saturate_database(const Instance& d, const Ruleset& rules, const RewriteOptions& options = {});

// Variables renamed V0, V1, ... by first occurrence (answer tuple first).
CQ normalize_variables(const CQ& q);
// Variables renamed X0, X1, ... by first occurrence; duplicates by that
// form are removed while keeping order.
Rule normalize_variables(const Rule& rule);
Ruleset deduplicate(const Ruleset& rules);

}  // namespace stickyrpq
