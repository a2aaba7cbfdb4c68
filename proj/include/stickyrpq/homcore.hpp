#pragma once

#include <functional>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include "stickyrpq/model.hpp"

namespace stickyrpq {

// Conjunctive query. `answer` lists the free positions; entries are usually
// variables but rewriting may place constants or repeat a variable there.
struct CQ {
  std::vector<Atom> atoms;
  std::vector<Term> answer;

  friend bool operator==(const CQ&, const CQ&) = default;
};

struct UCQ {
  std::vector<CQ> disjuncts;
  size_t arity = 0;
};

std::string to_string(const CQ& q);
std::string to_string(const UCQ& q);

// Half-open window of target atom indices (insertion order) that a source
// atom may be matched against.
struct AtomRange {
  uint32_t begin = 0;
  uint32_t end = std::numeric_limits<uint32_t>::max();
};

// Return false from the callback to stop the enumeration.
using HomomorphismCallback = std::function<bool(const TermMap&)>;

// Enumerates homomorphisms from `source` into `target` that extend `fixed`.
// Constants map to themselves; every other source term not in `fixed` is
// free. Each mapping is reported once. `ranges`, when non-empty, gives one
// window per source atom. Returns false iff the callback stopped the search.
bool for_each_homomorphism(std::span<const Atom> source, const Instance& target, const TermMap& fixed,
                           const HomomorphismCallback& callback, std::span<const AtomRange> ranges = {});

std::vector<TermMap> find_homomorphisms(std::span<const Atom> source, const Instance& target,
                                        const TermMap& fixed = {});
bool has_homomorphism(std::span<const Atom> source, const Instance& target, const TermMap& fixed = {});

using AnswerTuple = std::vector<Term>;

std::set<AnswerTuple> eval_cq(const CQ& q, const Instance& instance);
std::set<AnswerTuple> eval_ucq(const UCQ& q, const Instance& instance);
// Boolean satisfaction; for non-Boolean queries, whether some answer exists.
bool satisfies(const Instance& instance, const CQ& q);
bool satisfies(const Instance& instance, const UCQ& q);

// q1 is contained in q2 (every answer of q1 is an answer of q2): there is a
// homomorphism from q2 into q1 sending answer position i to answer position i.
bool cq_contained(const CQ& q1, const CQ& q2);
bool cq_equivalent(const CQ& q1, const CQ& q2);

// A core of the atoms, keeping `frozen` terms and constants fixed. The result
// is a subset of the input onto which the input retracts.
std::vector<Atom> core(std::span<const Atom> atoms, const TermSet& frozen);
Instance core(const Instance& instance, const TermSet& frozen);
CQ core(const CQ& q);

}  // namespace stickyrpq
