#pragma once

#include <chrono>
#include <optional>
#include <stop_token>
#include <string>

#include "stickyrpq/quotient.hpp"
#include "stickyrpq/rewrite.hpp"
#include "stickyrpq/rpq.hpp"

namespace stickyrpq {

struct EntailmentWitness {
  size_t chase_level = 0;  // level of the combined chase where Goal appeared
  Term source, target;
  std::vector<PathStep> path;
  std::vector<Label> word;
};

struct Verdict {
  enum class Tag { Entailed, NotEntailed, ResourceExhausted };

  Tag tag = Tag::ResourceExhausted;
  std::optional<EntailmentWitness> witness;
  std::optional<Instance> countermodel;
  std::string report;  // verification report or diagnostics
};

std::string to_string(Verdict::Tag tag);

struct PipelineArtifacts {
  Ruleset rew, cr, crplus, rplus;
  Instance dplus;
  DFA dfa;
  DatalogTranslation datalog;
};

struct SearchBudget {
  std::chrono::milliseconds time{10'000};
  size_t max_atoms = 1'000'000;
  std::stop_token stop;
};

// The rewriting pipeline. Stages are computed in order; a rewriting limit
// propagates as RewriteLimitExceeded.
PipelineArtifacts build_pipeline(const Instance& database, const Ruleset& rules, const Query& query,
                                 const RewriteOptions& options = {});

// Chases the database with rules plus the query's Datalog translation until
// Goal appears. The witness path is re-derived and replayed on an
// independent rules-only chase before Entailed is reported.
Verdict forward_search(const Instance& database, const Ruleset& rules, const Query& query, const SearchBudget& budget);

// Checks an Entailed witness against a fresh chase of (database, rules).
bool replay_witness(const Instance& database, const Ruleset& rules, const Query& query,
                    const EntailmentWitness& witness, std::string* why = nullptr);

// Builds the pipeline, runs the quotient construction on (D+, R+), and falls
// back to the exhaustive repair search.
Verdict countermodel_search(const Instance& database, const Ruleset& rules, const Query& query,
                            const SearchBudget& budget, const CountermodelOptions& options = {});

struct DecideOptions {
  std::chrono::milliseconds budget{10'000};
  double forward_share = 0.5;  // fraction of the budget for the forward search
  size_t max_atoms = 1'000'000;
  CountermodelOptions countermodel;
};

// Refuses non-sticky rulesets with ModelError. Two-way queries are reduced
// first. Both searches run concurrently; the first verified verdict wins.
Verdict decide_entailment(const Instance& database, const Ruleset& rules, const Query& query,
                          const DecideOptions& options = {});

}  // namespace stickyrpq
