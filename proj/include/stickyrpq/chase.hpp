#pragma once

#include <optional>
#include <stdexcept>
#include <stop_token>
#include <vector>

#include "stickyrpq/homcore.hpp"
#include "stickyrpq/model.hpp"

namespace stickyrpq {

// Thrown when a computation outgrows its configured limits or is cancelled.
class ResourceExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trigger {
  size_t rule = 0;  // index into the ruleset
  TermMap mapping;  // body variables only

  friend bool operator==(const Trigger&, const Trigger&) = default;
  friend auto operator<=>(const Trigger&, const Trigger&) = default;
};

// Applies the trigger's frontier assignment to the head, replacing each
// existential z by f_z^tau(distinct frontier values in order of first
// occurrence), tau being the iso type of the instantiated head with those
// values as free terms.
Atom skolemize(const Rule& rule, const TermMap& mapping);

std::vector<Trigger> triggers(const Instance& instance, const Ruleset& rules);

// One breadth-first Skolem step: the instance plus every trigger application.
Instance chase_step(const Instance& instance, const Ruleset& rules);

struct ChaseOptions {
  size_t max_atoms = 1'000'000;
  std::stop_token stop;
};

// Breadth-first Skolem chase that can be advanced one level at a time.
// Level k holds the atoms added by the k-th step; level 0 is the start.
class Chase {
 public:
  Chase(Instance start, Ruleset rules, ChaseOptions options = {});

  // Performs one step. Returns false when the step added nothing (fixpoint).
  // Throws ResourceExhausted past max_atoms or when stop is requested; the
  // partially computed level is discarded in that case.
  bool step();
  // Steps until `levels` levels have been computed or a fixpoint is reached.
  void run(size_t levels);

  const Instance& instance() const { return instance_; }
  const Ruleset& rules() const { return rules_; }
  size_t levels() const { return level_end_.size() - 1; }
  bool fixpoint() const { return fixpoint_; }

  // Atom indices of level k: [level_begin(k), level_end(k)).
  size_t level_begin(size_t k) const { return k == 0 ? 0 : level_end_[k - 1]; }
  size_t level_end(size_t k) const { return level_end_[k]; }
  size_t level_of_atom(size_t index) const;
  // Atoms up to and including level k.
  Instance prefix(size_t k) const;

  // Index of the atom a chase-introduced term was born in.
  std::optional<size_t> birth(Term t) const;
  // Terms of the atom that were present before it, in argument order.
  std::vector<Term> frontier_terms(size_t atom_index) const;

 private:
  Instance instance_;
  Ruleset rules_;
  ChaseOptions options_;
  std::vector<size_t> level_end_;
  std::map<Term, size_t> birth_;
  bool fixpoint_ = false;
};

struct ChaseTrace {
  Instance instance;
  std::vector<size_t> level_end;  // cumulative atom counts per level
  std::map<Term, size_t> birth;   // term -> atom index
  bool fixpoint = false;

  size_t levels() const { return level_end.size() - 1; }
  Instance level(size_t k) const;
  Instance prefix(size_t k) const;
  std::vector<Term> frontier_terms(size_t atom_index) const;
};

ChaseTrace chase_bounded(const Instance& start, const Ruleset& rules, size_t steps, ChaseOptions options = {});

struct QuickViolation {
  size_t sample = 0;
  Atom atom;
  size_t level = 0;
};

struct QuickReport {
  std::vector<QuickViolation> violations;
  size_t atoms_checked = 0;
  bool ok() const { return violations.empty(); }
};

// Every atom of the depth-k chase whose frontier terms lie in the sample's
// domain must already be produced by a single chase step.
QuickReport check_quick_sample(const Ruleset& rules, std::span<const Instance> samples, size_t depth,
                               ChaseOptions options = {});

}  // namespace stickyrpq
