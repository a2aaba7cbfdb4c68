#include "stickyrpq/quotient.hpp"

#include <algorithm>
#include <unordered_set>

#include "stickyrpq/sticky.hpp"

namespace stickyrpq {

std::map<Term, StellarType> stellar_types(const Instance& instance) {
  std::map<Term, StellarType> out;
  for (const Atom& a : instance.atoms()) {
    for (size_t i = 0; i < a.args.size(); ++i) out[a.args[i]].emplace(a.predicate, i + 1);
  }
  return out;
}

StellarType stellar_type(Term t, const Instance& instance) {
  StellarType out;
  for (const Atom& a : instance.atoms()) {
    for (size_t i = 0; i < a.args.size(); ++i) {
      if (a.args[i] == t) out.emplace(a.predicate, i + 1);
    }
  }
  if (out.empty()) throw ModelError("term " + to_string(t) + " does not occur in the instance");
  return out;
}

namespace {

// Reachable-state sets for every node of the term x state product, via
// strongly connected components.
class RegularTyper {
 public:
  RegularTyper(const Instance& instance, const DFA& dfa) : dfa_(dfa) {
    for (const Atom& a : instance.atoms()) {
      for (Term t : a.args) {
        if (index_.emplace(t, static_cast<uint32_t>(terms_.size())).second) terms_.push_back(t);
      }
    }
    trap_ = dfa.sink ? *dfa.sink : static_cast<uint32_t>(dfa.num_states());
    states_ = dfa.num_states() + (dfa.sink ? 0 : 1);
    edges_.resize(terms_.size());
    for (const Atom& a : instance.atoms()) {
      if (a.arity() != 2) continue;
      uint32_t s = index_.at(a.args[0]), t = index_.at(a.args[1]);
      auto fwd = dfa.letter(Label{a.predicate, false});
      edges_[s].push_back({fwd ? static_cast<int>(*fwd) : -1, t});
      if (auto inv = dfa.letter(Label{a.predicate, true})) edges_[t].push_back({static_cast<int>(*inv), s});
    }
    compute();
  }

  RegularType type_of(Term t) const {
    auto it = index_.find(t);
    if (it == index_.end()) throw ModelError("term " + to_string(t) + " does not occur in the instance");
    RegularType out;
    for (uint32_t q = 0; q < states_; ++q) {
      const auto& bits = reach_[component_[node(it->second, q)]];
      for (uint32_t p = 0; p < states_; ++p) {
        if (bits[p / 64] >> (p % 64) & 1) out.emplace(q, p);
      }
    }
    return out;
  }

  const std::vector<Term>& terms() const { return terms_; }

 private:
  struct Edge {
    int letter;  // -1: outside the alphabet
    uint32_t to;
  };

  size_t node(uint32_t term, uint32_t state) const { return static_cast<size_t>(term) * states_ + state; }

  uint32_t step(uint32_t state, int letter) const {
    if (state == trap_ || letter < 0) return trap_;
    if (state >= dfa_.num_states()) return trap_;
    return dfa_.delta[state][letter];
  }

  template <typename F>
  void successors(size_t v, F&& f) const {
    uint32_t term = static_cast<uint32_t>(v / states_), state = static_cast<uint32_t>(v % states_);
    for (const Edge& e : edges_[term]) f(node(e.to, step(state, e.letter)));
  }

  void compute() {
    const size_t n = terms_.size() * states_;
    const size_t words = (states_ + 63) / 64;
    component_.assign(n, UINT32_MAX);
    std::vector<uint32_t> low(n), order(n, UINT32_MAX);
    std::vector<bool> on_stack(n, false);
    std::vector<size_t> stack;
    uint32_t counter = 0;
    // Iterative Tarjan; components are numbered in reverse topological order,
    // so successors' components are complete when a component closes.
    struct Frame {
      size_t v;
      std::vector<size_t> succ;
      size_t next;
    };
    for (size_t root = 0; root < n; ++root) {
      if (order[root] != UINT32_MAX) continue;
      std::vector<Frame> frames;
      auto open = [&](size_t v) {
        order[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        Frame f{v, {}, 0};
        successors(v, [&](size_t w) { f.succ.push_back(w); });
        frames.push_back(std::move(f));
      };
      open(root);
      while (!frames.empty()) {
        Frame& f = frames.back();
        if (f.next < f.succ.size()) {
          size_t w = f.succ[f.next++];
          if (order[w] == UINT32_MAX) {
            open(w);
          } else if (on_stack[w]) {
            low[f.v] = std::min(low[f.v], order[w]);
          }
          continue;
        }
        size_t v = f.v;
        if (low[v] == order[v]) {
          auto id = static_cast<uint32_t>(reach_.size());
          std::vector<uint64_t> bits(words, 0);
          std::vector<size_t> members;
          while (true) {
            size_t w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            component_[w] = id;
            members.push_back(w);
            if (w == v) break;
          }
          for (size_t w : members) {
            uint32_t st = static_cast<uint32_t>(w % states_);
            bits[st / 64] |= uint64_t{1} << (st % 64);
            successors(w, [&](size_t x) {
              uint32_t c = component_[x];
              if (c != id && c != UINT32_MAX) {
                for (size_t k = 0; k < words; ++k) bits[k] |= reach_[c][k];
              }
            });
          }
          reach_.push_back(std::move(bits));
        }
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }

  const DFA& dfa_;
  std::vector<Term> terms_;
  std::map<Term, uint32_t> index_;
  uint32_t trap_ = 0;
  size_t states_ = 0;
  std::vector<std::vector<Edge>> edges_;
  std::vector<uint32_t> component_;
  std::vector<std::vector<uint64_t>> reach_;
};

}  // namespace

RegularType regular_type(Term t, const Instance& instance, const DFA& dfa) {
  return RegularTyper(instance, dfa).type_of(t);
}

std::map<Term, RegularType> regular_types(const Instance& instance, const DFA& dfa) {
  RegularTyper typer(instance, dfa);
  std::map<Term, RegularType> out;
  for (Term t : typer.terms()) out.emplace(t, typer.type_of(t));
  return out;
}

uint64_t next_null_id(const Instance& instance) {
  uint64_t next = 0;
  for (const Atom& a : instance.atoms()) {
    for (Term t : a.args) {
      if (t.is_null()) next = std::max(next, t.null_id() + 1);
    }
  }
  return next;
}

Instance quotient(const Instance& instance, const std::vector<std::vector<Term>>& classes) {
  TermMap m;
  uint64_t next = next_null_id(instance);
  for (const auto& cls : classes) {
    if (cls.size() < 2) continue;
    Term fresh = Term::null(next++);
    for (Term t : cls) {
      if (t.is_constant()) throw ModelError("cannot merge constant " + to_string(t));
      m[t] = fresh;
    }
  }
  Instance out;
  for (const Atom& a : instance.atoms()) out.insert(substitute(a, m));
  return out;
}

Instance merge_terms(const Instance& instance, Term s, Term t, Term* merged) {
  if (s == t) throw ModelError("merge_terms needs two distinct terms");
  if (s.is_constant() || t.is_constant()) throw ModelError("cannot merge a constant");
  if (merged) *merged = Term::null(next_null_id(instance));
  return quotient(instance, {{s, t}});
}

std::vector<Trigger> active_triggers(const Instance& instance, const Ruleset& rules, size_t limit) {
  std::vector<Trigger> out;
  for (size_t r = 0; r < rules.size() && out.size() < limit; ++r) {
    const Rule& rule = rules[r];
    std::vector<Atom> head{rule.head()};
    for_each_homomorphism(rule.body(), instance, {}, [&](const TermMap& h) {
      TermMap fixed;
      for (Term v : rule.frontier()) fixed.emplace(v, h.at(v));
      if (!has_homomorphism(head, instance, fixed)) out.push_back(Trigger{r, h});
      return out.size() < limit;
    });
  }
  return out;
}

bool models(const Instance& instance, const Ruleset& rules) { return active_triggers(instance, rules, 1).empty(); }

CountermodelCheck verify_countermodel(const Instance& model, const Instance& database, const Ruleset& rules,
                                      const DFA& query) {
  CountermodelCheck c;
  c.contains_database = std::all_of(database.atoms().begin(), database.atoms().end(),
                                    [&](const Atom& a) { return model.contains(a); });
  c.models_rules = models(model, rules);
  c.avoids_query = !eval_rpq(query, model).holds;
  return c;
}

std::string to_string(const CountermodelCheck& c) {
  auto mark = [](bool b) { return b ? "yes" : "no"; };
  return std::string("contains database: ") + mark(c.contains_database) + ", models rules: " +
         mark(c.models_rules) + ", avoids query: " + mark(c.avoids_query);
}

namespace {

// Applies every active trigger once, inventing fresh nulls.
Instance restricted_step(const Instance& instance, const Ruleset& rules, uint64_t& next_null) {
  Instance out = instance;
  for (const Trigger& t : active_triggers(instance, rules)) {
    const Rule& rule = rules[t.rule];
    TermMap m = t.mapping;
    for (Term z : rule.existentials()) m[z] = Term::null(next_null++);
    out.insert(substitute(rule.head(), m));
  }
  return out;
}

}  // namespace

CountermodelResult build_countermodel(const Instance& database, const Ruleset& rules, const DFA& query,
                                      const CountermodelOptions& options) {
  if (!is_stellar(rules)) throw ModelError("build_countermodel requires stellar rules");
  CountermodelResult result;
  Instance current = database;
  for (size_t round = 0;; ++round) {
    result.rounds = round;
    result.check = verify_countermodel(current, database, rules, query);
    if (result.check.ok()) {
      result.model = current;
      result.diagnostics = "quotient model after " + std::to_string(round) + " rounds";
      return result;
    }
    if (!result.check.avoids_query) {
      result.diagnostics = "intermediate instance satisfies the query after " + std::to_string(round) + " rounds";
      return result;
    }
    if (round >= options.max_rounds) {
      result.diagnostics = "round limit " + std::to_string(options.max_rounds) + " reached";
      return result;
    }
    if (options.stop.stop_requested()) {
      result.diagnostics = "cancelled";
      return result;
    }
    uint64_t next_null = next_null_id(current);
    current = restricted_step(current, rules, next_null);
    Instance ahead = current;
    for (size_t k = 0; k < options.lookahead; ++k) ahead = restricted_step(ahead, rules, next_null);
    if (ahead.size() > options.max_atoms) {
      result.diagnostics = "atom limit " + std::to_string(options.max_atoms) + " reached";
      return result;
    }
    auto stellar = stellar_types(ahead);
    RegularTyper typer(ahead, query);
    std::map<std::pair<StellarType, RegularType>, std::vector<Term>> groups;
    for (Term t : active_domain(current)) {
      if (t.is_constant()) continue;
      groups[{stellar.at(t), typer.type_of(t)}].push_back(t);
    }
    std::vector<std::vector<Term>> classes;
    for (auto& [key, members] : groups) {
      if (members.size() > 1) classes.push_back(std::move(members));
    }
    current = quotient(current, classes);
  }
}

namespace {

class RepairSearch {
 public:
  RepairSearch(const Instance& database, const Ruleset& rules, const DFA& query, const CountermodelOptions& options)
      : database_(database), rules_(rules), query_(query), options_(options) {}

  std::optional<Instance> run(size_t fresh_budget) {
    budget_ = fresh_budget;
    visited_.clear();
    return search(database_, next_null_id(database_), 0);
  }

  size_t nodes() const { return nodes_; }
  bool exhausted() const { return exhausted_; }

 private:
  std::optional<Instance> search(const Instance& current, uint64_t next_null, size_t used) {
    if (++nodes_ > options_.max_nodes || options_.stop.stop_requested()) {
      exhausted_ = true;
      return std::nullopt;
    }
    if (!visited_.insert(key(current)).second) return std::nullopt;
    if (eval_rpq(query_, current).holds) return std::nullopt;
    auto active = active_triggers(current, rules_, 1);
    if (active.empty()) return current;
    const Rule& rule = rules_[active.front().rule];
    const auto& ex = rule.existentials();
    const TermSet adom = active_domain(current);
    const std::vector<Term> domain(adom.begin(), adom.end());
    std::vector<Term> choice(ex.size());
    std::optional<Instance> found;
    // Assign existentials in order; a fresh null may be introduced only as
    // the next unused id, which removes renaming symmetry.
    std::function<bool(size_t, uint64_t, size_t)> assign = [&](size_t i, uint64_t nn, size_t u) -> bool {
      if (exhausted_) return false;
      if (i == ex.size()) {
        TermMap m = active.front().mapping;
        for (size_t k = 0; k < ex.size(); ++k) m[ex[k]] = choice[k];
        Instance next = current;
        next.insert(substitute(rule.head(), m));
        found = search(next, nn, u);
        return !found;
      }
      for (Term t : domain) {
        choice[i] = t;
        if (!assign(i + 1, nn, u)) return false;
      }
      for (size_t k = 0; k < i; ++k) {
        if (choice[k].is_null() && choice[k].null_id() >= next_null) {
          choice[i] = choice[k];
          if (!assign(i + 1, nn, u)) return false;
        }
      }
      if (u < budget_) {
        choice[i] = Term::null(nn);
        if (!assign(i + 1, nn + 1, u + 1)) return false;
      }
      return true;
    };
    assign(0, next_null, used);
    return found;
  }

  static std::string key(const Instance& instance) {
    std::vector<std::string> parts;
    for (const Atom& a : instance.atoms()) parts.push_back(to_string(a));
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (const auto& p : parts) out += p + ";";
    return out;
  }

  const Instance& database_;
  const Ruleset& rules_;
  const DFA& query_;
  const CountermodelOptions& options_;
  size_t budget_ = 0;
  size_t nodes_ = 0;
  bool exhausted_ = false;
  std::unordered_set<std::string> visited_;
};

}  // namespace

CountermodelResult brute_force_countermodel(const Instance& database, const Ruleset& rules, const DFA& query,
                                            const CountermodelOptions& options) {
  CountermodelResult result;
  RepairSearch search(database, rules, query, options);
  for (size_t k = 0; k <= options.max_fresh_nulls; ++k) {
    auto model = search.run(k);
    if (model) {
      result.model = *model;
      result.check = verify_countermodel(*model, database, rules, query);
      result.rounds = k;
      result.diagnostics = "repair search with " + std::to_string(k) + " fresh nulls";
      if (!result.check.ok()) result.model.reset();
      return result;
    }
    if (search.exhausted()) {
      result.diagnostics = "repair search stopped after " + std::to_string(search.nodes()) + " nodes";
      return result;
    }
  }
  result.diagnostics = "no countermodel with at most " + std::to_string(options.max_fresh_nulls) + " fresh nulls";
  return result;
}

}  // namespace stickyrpq
