#include "stickyrpq/homcore.hpp"

#include <algorithm>
#include <optional>

namespace stickyrpq {

std::string to_string(const CQ& q) {
  std::string out = "(";
  for (size_t i = 0; i < q.answer.size(); ++i) {
    if (i) out += ",";
    out += to_string(q.answer[i]);
  }
  out += ") :- ";
  for (size_t i = 0; i < q.atoms.size(); ++i) {
    if (i) out += ", ";
    out += to_string(q.atoms[i]);
  }
  return out;
}

std::string to_string(const UCQ& q) {
  std::string out;
  for (const CQ& d : q.disjuncts) out += to_string(d) + "\n";
  return out;
}

namespace {

class HomSearch {
 public:
  HomSearch(std::span<const Atom> source, const Instance& target, const TermMap& fixed,
            const HomomorphismCallback& callback, std::span<const AtomRange> ranges)
      : target_(target), callback_(callback) {
    std::set<Atom> seen;
    for (size_t i = 0; i < source.size(); ++i) {
      if (!seen.insert(source[i]).second) continue;
      atoms_.push_back(&source[i]);
      ranges_.push_back(ranges.empty() ? AtomRange{} : ranges[i]);
    }
    for (const Atom* a : atoms_) {
      for (Term t : a->args) {
        if (t.is_constant() || index_.contains(t)) continue;
        index_.emplace(t, vars_.size());
        vars_.push_back(t);
      }
    }
    value_.assign(vars_.size(), Term());
    bound_.assign(vars_.size(), false);
    for (auto [from, to] : fixed) {
      if (auto it = index_.find(from); it != index_.end()) {
        value_[it->second] = to;
        bound_[it->second] = true;
      }
    }
    fixed_ = fixed;
    matched_.assign(atoms_.size(), false);
  }

  bool run() { return search(0); }

 private:
  // Returns the bound image of `t`, or nullopt when free.
  std::optional<Term> image(Term t) const {
    if (t.is_constant()) return t;
    size_t i = index_.at(t);
    if (!bound_[i]) return std::nullopt;
    return value_[i];
  }

  std::span<const uint32_t> candidates(const Atom& a) const {
    std::span<const uint32_t> best = target_.with_predicate(a.predicate);
    for (size_t j = 0; j < a.args.size(); ++j) {
      auto img = image(a.args[j]);
      if (!img) continue;
      auto c = target_.with_term_at(a.predicate, j, *img);
      if (c.size() < best.size()) best = c;
      if (best.empty()) break;
    }
    return best;
  }

  bool search(size_t depth) {
    if (depth == atoms_.size()) return emit();
    size_t pick = atoms_.size();
    std::span<const uint32_t> pick_candidates;
    for (size_t i = 0; i < atoms_.size(); ++i) {
      if (matched_[i]) continue;
      auto c = candidates(*atoms_[i]);
      if (pick == atoms_.size() || c.size() < pick_candidates.size()) {
        pick = i;
        pick_candidates = c;
        if (c.empty()) break;
      }
    }
    if (pick_candidates.empty()) return true;
    const Atom& a = *atoms_[pick];
    const AtomRange range = ranges_[pick];
    matched_[pick] = true;
    std::vector<size_t> newly;
    for (uint32_t idx : pick_candidates) {
      if (idx < range.begin || idx >= range.end) continue;
      const Atom& b = target_[idx];
      if (b.args.size() != a.args.size()) continue;
      newly.clear();
      bool ok = true;
      for (size_t j = 0; j < a.args.size() && ok; ++j) {
        Term s = a.args[j];
        if (s.is_constant()) {
          ok = s == b.args[j];
          continue;
        }
        size_t v = index_.at(s);
        if (bound_[v]) {
          ok = value_[v] == b.args[j];
        } else {
          bound_[v] = true;
          value_[v] = b.args[j];
          newly.push_back(v);
        }
      }
      bool keep_going = !ok || search(depth + 1);
      for (size_t v : newly) bound_[v] = false;
      if (!keep_going) {
        matched_[pick] = false;
        return false;
      }
    }
    matched_[pick] = false;
    return true;
  }

  bool emit() {
    TermMap m = fixed_;
    for (size_t i = 0; i < vars_.size(); ++i) m[vars_[i]] = value_[i];
    return callback_(m);
  }

  const Instance& target_;
  const HomomorphismCallback& callback_;
  std::vector<const Atom*> atoms_;
  std::vector<AtomRange> ranges_;
  std::vector<bool> matched_;
  std::map<Term, size_t> index_;
  std::vector<Term> vars_;
  std::vector<Term> value_;
  std::vector<bool> bound_;
  TermMap fixed_;
};

}  // namespace

bool for_each_homomorphism(std::span<const Atom> source, const Instance& target, const TermMap& fixed,
                           const HomomorphismCallback& callback, std::span<const AtomRange> ranges) {
  if (!ranges.empty() && ranges.size() != source.size()) {
    throw ModelError("for_each_homomorphism: one range per source atom required");
  }
  return HomSearch(source, target, fixed, callback, ranges).run();
}

std::vector<TermMap> find_homomorphisms(std::span<const Atom> source, const Instance& target,
                                        const TermMap& fixed) {
  std::vector<TermMap> out;
  for_each_homomorphism(source, target, fixed, [&](const TermMap& m) {
    out.push_back(m);
    return true;
  });
  return out;
}

bool has_homomorphism(std::span<const Atom> source, const Instance& target, const TermMap& fixed) {
  return !for_each_homomorphism(source, target, fixed, [](const TermMap&) { return false; });
}

namespace {

// Seeds the mapping of answer positions; fails on a constant clash or a
// repeated answer term sent to two different values.
bool seed_answer(const std::vector<Term>& pattern, const std::vector<Term>& values, TermMap& fixed) {
  if (pattern.size() != values.size()) return false;
  for (size_t i = 0; i < pattern.size(); ++i) {
    Term p = pattern[i];
    if (p.is_constant()) {
      if (p != values[i]) return false;
      continue;
    }
    auto [it, inserted] = fixed.try_emplace(p, values[i]);
    if (!inserted && it->second != values[i]) return false;
  }
  return true;
}

}  // namespace

std::set<AnswerTuple> eval_cq(const CQ& q, const Instance& instance) {
  std::set<AnswerTuple> out;
  for_each_homomorphism(q.atoms, instance, {}, [&](const TermMap& m) {
    AnswerTuple t;
    t.reserve(q.answer.size());
    for (Term a : q.answer) {
      auto it = m.find(a);
      t.push_back(it == m.end() ? a : it->second);
    }
    out.insert(std::move(t));
    return true;
  });
  return out;
}

std::set<AnswerTuple> eval_ucq(const UCQ& q, const Instance& instance) {
  std::set<AnswerTuple> out;
  for (const CQ& d : q.disjuncts) {
    auto part = eval_cq(d, instance);
    out.insert(part.begin(), part.end());
  }
  return out;
}

bool satisfies(const Instance& instance, const CQ& q) { return has_homomorphism(q.atoms, instance); }

bool satisfies(const Instance& instance, const UCQ& q) {
  return std::any_of(q.disjuncts.begin(), q.disjuncts.end(),
                     [&](const CQ& d) { return satisfies(instance, d); });
}

bool cq_contained(const CQ& q1, const CQ& q2) {
  TermMap fixed;
  if (!seed_answer(q2.answer, q1.answer, fixed)) return false;
  Instance target(q1.atoms);
  return has_homomorphism(q2.atoms, target, fixed);
}

bool cq_equivalent(const CQ& q1, const CQ& q2) { return cq_contained(q1, q2) && cq_contained(q2, q1); }

std::vector<Atom> core(std::span<const Atom> atoms, const TermSet& frozen) {
  std::vector<Atom> current;
  {
    std::set<Atom> unique(atoms.begin(), atoms.end());
    current.assign(unique.begin(), unique.end());
  }
  std::sort(current.begin(), current.end(),
            [](const Atom& a, const Atom& b) { return to_string(a) < to_string(b); });
  TermMap fixed;
  for (Term t : terms_of(current)) {
    if (frozen.contains(t)) fixed.emplace(t, t);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t drop = current.size(); drop-- > 0;) {
      std::vector<Atom> rest;
      rest.reserve(current.size() - 1);
      for (size_t i = 0; i < current.size(); ++i) {
        if (i != drop) rest.push_back(current[i]);
      }
      Instance target(rest);
      std::optional<TermMap> found;
      for_each_homomorphism(current, target, fixed, [&](const TermMap& m) {
        found = m;
        return false;
      });
      if (!found) continue;
      std::set<Atom> image;
      for (const Atom& a : current) image.insert(substitute(a, *found));
      std::vector<Atom> next;
      for (const Atom& a : current) {
        if (image.contains(a)) next.push_back(a);
      }
      current = std::move(next);
      changed = true;
      break;
    }
  }
  return current;
}

Instance core(const Instance& instance, const TermSet& frozen) {
  return Instance(std::span<const Atom>(core(instance.atoms(), frozen)));
}

CQ core(const CQ& q) {
  TermSet frozen(q.answer.begin(), q.answer.end());
  return CQ{core(q.atoms, frozen), q.answer};
}

}  // namespace stickyrpq
