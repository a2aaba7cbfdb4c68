#include "stickyrpq/chase.hpp"

#include <algorithm>

namespace stickyrpq {

Atom skolemize(const Rule& rule, const TermMap& mapping) {
  const Atom& head = rule.head();
  if (rule.existentials().empty()) return substitute(head, mapping);

  // Pattern atom: one placeholder per distinct frontier value, one per
  // existential, rule constants kept.
  std::vector<Term> values;
  std::map<Term, Term> placeholder_of_value;
  std::map<Term, Term> placeholder_of_existential;
  Atom pattern{head.predicate, {}};
  Atom instantiated{head.predicate, {}};
  for (Term t : head.args) {
    if (!t.is_variable()) {
      pattern.args.push_back(t);
      continue;
    }
    if (auto it = mapping.find(t); it != mapping.end()) {
      Term v = it->second;
      auto [pit, inserted] = placeholder_of_value.try_emplace(v, Term());
      if (inserted) {
        pit->second = Term::variable("$f" + std::to_string(values.size()));
        values.push_back(v);
      }
      pattern.args.push_back(pit->second);
    } else {
      auto [pit, inserted] = placeholder_of_existential.try_emplace(t, Term());
      if (inserted) pit->second = Term::variable("$z" + std::to_string(placeholder_of_existential.size() - 1));
      pattern.args.push_back(pit->second);
    }
  }
  std::vector<Term> free;
  for (size_t i = 0; i < values.size(); ++i) free.push_back(placeholder_of_value.at(values[i]));
  IsoType tau = iso_type(std::span<const Atom>(&pattern, 1), free);

  TermMap full = mapping;
  for (Term z : rule.existentials()) {
    Term ph = placeholder_of_existential.at(z);
    auto pos = std::find(tau.existential_order.begin(), tau.existential_order.end(), ph);
    SkolemSymbol symbol{tau.id, "E" + std::to_string(pos - tau.existential_order.begin()),
                        static_cast<uint32_t>(values.size())};
    full[z] = Term::functional(symbol, values);
  }
  return substitute(head, full);
}

namespace {

// Enumerates triggers that use at least one atom of [delta_begin, delta_end)
// and otherwise atoms below delta_end.
void for_each_new_trigger(const Instance& instance, const Ruleset& rules, uint32_t delta_begin, uint32_t delta_end,
                          const std::function<bool(size_t, const TermMap&)>& fn) {
  for (size_t r = 0; r < rules.size(); ++r) {
    const auto& body = rules[r].body();
    if (body.empty()) {
      if (delta_begin == 0 && !fn(r, {})) return;
      continue;
    }
    std::vector<AtomRange> ranges(body.size());
    for (size_t i = 0; i < body.size(); ++i) {
      for (size_t j = 0; j < body.size(); ++j) {
        if (j < i) ranges[j] = {0, delta_begin};
        else if (j == i) ranges[j] = {delta_begin, delta_end};
        else ranges[j] = {0, delta_end};
      }
      bool go_on = for_each_homomorphism(body, instance, {}, [&](const TermMap& m) { return fn(r, m); }, ranges);
      if (!go_on) return;
    }
  }
}

}  // namespace

std::vector<Trigger> triggers(const Instance& instance, const Ruleset& rules) {
  std::vector<Trigger> out;
  for (size_t r = 0; r < rules.size(); ++r) {
    for (TermMap& m : find_homomorphisms(rules[r].body(), instance)) out.push_back(Trigger{r, std::move(m)});
  }
  return out;
}

Instance chase_step(const Instance& instance, const Ruleset& rules) {
  Instance out = instance;
  for (const Trigger& t : triggers(instance, rules)) out.insert(skolemize(rules[t.rule], t.mapping));
  return out;
}

Chase::Chase(Instance start, Ruleset rules, ChaseOptions options)
    : instance_(std::move(start)), rules_(std::move(rules)), options_(std::move(options)) {
  level_end_.push_back(instance_.size());
}

bool Chase::step() {
  if (fixpoint_) return false;
  const auto delta_begin = static_cast<uint32_t>(level_begin(levels()));
  const auto delta_end = static_cast<uint32_t>(level_end(levels()));
  std::vector<Atom> produced;
  std::set<Atom> fresh;
  size_t visited = 0;
  for_each_new_trigger(instance_, rules_, delta_begin, delta_end, [&](size_t r, const TermMap& m) {
    if ((++visited & 1023) == 0 && options_.stop.stop_requested()) throw ResourceExhausted("chase cancelled");
    Atom a = skolemize(rules_[r], m);
    if (!instance_.contains(a) && fresh.insert(a).second) {
      produced.push_back(std::move(a));
      if (instance_.size() + produced.size() > options_.max_atoms) {
        throw ResourceExhausted("chase exceeded " + std::to_string(options_.max_atoms) + " atoms");
      }
    }
    return true;
  });
  if (options_.stop.stop_requested()) throw ResourceExhausted("chase cancelled");
  if (produced.empty()) {
    fixpoint_ = true;
    return false;
  }
  for (const Atom& a : produced) {
    size_t idx = instance_.size();
    instance_.insert(a);
    for (Term t : a.args) {
      if (t.is_functional() && !birth_.contains(t)) birth_.emplace(t, idx);
    }
  }
  level_end_.push_back(instance_.size());
  return true;
}

void Chase::run(size_t levels) {
  while (this->levels() < levels && step()) {
  }
}

size_t Chase::level_of_atom(size_t index) const {
  return static_cast<size_t>(std::upper_bound(level_end_.begin(), level_end_.end(), index) - level_end_.begin());
}

Instance Chase::prefix(size_t k) const {
  k = std::min(k, levels());
  Instance out;
  for (size_t i = 0; i < level_end_[k]; ++i) out.insert(instance_[i]);
  return out;
}

std::optional<size_t> Chase::birth(Term t) const {
  if (auto it = birth_.find(t); it != birth_.end()) return it->second;
  return std::nullopt;
}

namespace {

std::vector<Term> frontier_terms_of(const Atom& atom, size_t index, const std::map<Term, size_t>& birth) {
  std::vector<Term> out;
  for (Term t : atom.args) {
    auto it = birth.find(t);
    if (it != birth.end() && it->second == index) continue;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<Term> Chase::frontier_terms(size_t atom_index) const {
  return frontier_terms_of(instance_[atom_index], atom_index, birth_);
}

Instance ChaseTrace::level(size_t k) const {
  Instance out;
  for (size_t i = k == 0 ? 0 : level_end[k - 1]; i < level_end[k]; ++i) out.insert(instance[i]);
  return out;
}

Instance ChaseTrace::prefix(size_t k) const {
  k = std::min(k, levels());
  Instance out;
  for (size_t i = 0; i < level_end[k]; ++i) out.insert(instance[i]);
  return out;
}

std::vector<Term> ChaseTrace::frontier_terms(size_t atom_index) const {
  return frontier_terms_of(instance[atom_index], atom_index, birth);
}

ChaseTrace chase_bounded(const Instance& start, const Ruleset& rules, size_t steps, ChaseOptions options) {
  Chase chase(start, rules, std::move(options));
  chase.run(steps);
  ChaseTrace trace;
  trace.instance = chase.instance();
  for (size_t k = 0; k <= chase.levels(); ++k) trace.level_end.push_back(chase.level_end(k));
  for (size_t i = 0; i < trace.instance.size(); ++i) {
    for (Term t : trace.instance[i].args) {
      if (auto b = chase.birth(t); b && *b == i) trace.birth.emplace(t, i);
    }
  }
  trace.fixpoint = chase.fixpoint();
  return trace;
}

QuickReport check_quick_sample(const Ruleset& rules, std::span<const Instance> samples, size_t depth,
                               ChaseOptions options) {
  QuickReport report;
  for (size_t s = 0; s < samples.size(); ++s) {
    const Instance& sample = samples[s];
    TermSet domain = active_domain(sample);
    Instance one = chase_step(sample, rules);
    ChaseTrace trace = chase_bounded(sample, rules, depth, options);
    for (size_t i = trace.level_end[0]; i < trace.instance.size(); ++i) {
      auto frontier = trace.frontier_terms(i);
      if (!std::all_of(frontier.begin(), frontier.end(), [&](Term t) { return domain.contains(t); })) continue;
      ++report.atoms_checked;
      if (!one.contains(trace.instance[i])) {
        size_t level = static_cast<size_t>(
            std::upper_bound(trace.level_end.begin(), trace.level_end.end(), i) - trace.level_end.begin());
        report.violations.push_back(QuickViolation{s, trace.instance[i], level});
      }
    }
  }
  return report;
}

}  // namespace stickyrpq
