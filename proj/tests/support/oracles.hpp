#pragma once

// Brute-force reference implementations used to cross-check the engine.
// Everything here enumerates; nothing calls into the search code it checks.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "stickyrpq/model.hpp"
#include "stickyrpq/rpq.hpp"
#include "stickyrpq/sticky.hpp"

namespace oracle {

using namespace stickyrpq;

inline std::vector<Term> renamable_terms(std::span<const Atom> atoms) {
  std::vector<Term> out;
  for (const Atom& a : atoms) {
    for (Term t : a.args) {
      if (!t.is_constant() && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
  }
  return out;
}

inline std::set<Atom> atom_set(std::span<const Atom> atoms) { return {atoms.begin(), atoms.end()}; }

// Every total assignment of the source's non-constant terms over the target's
// domain, kept when it extends `fixed` and maps each atom into the target.
inline std::set<TermMap> all_homomorphisms(std::span<const Atom> source, const Instance& target,
                                           const TermMap& fixed = {}) {
  std::vector<Term> vars = renamable_terms(source);
  std::vector<Term> domain;
  for (const Atom& a : target.atoms()) {
    for (Term t : a.args) {
      if (std::find(domain.begin(), domain.end(), t) == domain.end()) domain.push_back(t);
    }
  }
  std::set<TermMap> out;
  if (domain.empty()) {
    if (source.empty()) out.insert(fixed);
    return out;
  }
  std::vector<size_t> choice(vars.size(), 0);
  while (true) {
    TermMap h;
    bool ok = true;
    for (size_t i = 0; i < vars.size() && ok; ++i) {
      h[vars[i]] = domain[choice[i]];
      auto f = fixed.find(vars[i]);
      if (f != fixed.end() && f->second != domain[choice[i]]) ok = false;
    }
    for (const auto& [k, v] : fixed) {
      if (!h.contains(k)) h[k] = v;
    }
    if (ok) {
      for (const Atom& a : source) {
        if (!target.contains(substitute(a, h))) {
          ok = false;
          break;
        }
      }
    }
    if (ok) out.insert(h);
    size_t i = 0;
    while (i < vars.size() && ++choice[i] == domain.size()) choice[i++] = 0;
    if (i == vars.size()) break;
  }
  return out;
}

inline bool maps_into(std::span<const Atom> source, std::span<const Atom> target, const TermMap& fixed = {}) {
  return !all_homomorphisms(source, Instance(target), fixed).empty();
}

// Bijective renaming of non-constant terms taking the first conjunction onto
// the second, with the free terms mapped onto the free terms.
inline bool isomorphic(std::span<const Atom> a, std::span<const Term> free_a, std::span<const Atom> b,
                       std::span<const Term> free_b) {
  std::vector<Term> va = renamable_terms(a), vb = renamable_terms(b);
  if (va.size() != vb.size() || atom_set(a).size() != atom_set(b).size()) return false;
  std::set<Term> fa(free_a.begin(), free_a.end()), fb(free_b.begin(), free_b.end());
  std::set<Atom> target = atom_set(b);
  std::vector<size_t> perm(vb.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  do {
    TermMap h;
    bool ok = true;
    for (size_t i = 0; i < va.size() && ok; ++i) {
      h[va[i]] = vb[perm[i]];
      if (fa.contains(va[i]) != fb.contains(vb[perm[i]])) ok = false;
    }
    if (!ok) continue;
    std::set<Atom> image;
    for (const Atom& x : a) image.insert(substitute(x, h));
    if (image == target) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// Size of a smallest subset onto which the atoms retract with `frozen` and
// constants fixed; exhaustive over all subsets.
inline size_t core_size(std::span<const Atom> atoms, const TermSet& frozen) {
  const std::set<Atom> distinct = atom_set(atoms);
  std::vector<Atom> all(distinct.begin(), distinct.end());
  TermMap fixed;
  for (Term t : frozen) fixed[t] = t;
  size_t best = all.size();
  for (uint32_t mask = 0; mask < (1u << all.size()); ++mask) {
    size_t n = static_cast<size_t>(__builtin_popcount(mask));
    if (n >= best) continue;
    std::vector<Atom> sub;
    for (size_t i = 0; i < all.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(all[i]);
    }
    bool keeps_frozen = true;
    TermSet present = terms_of(sub);
    for (Term t : frozen) {
      if (terms_of(all).contains(t) && !present.contains(t)) keeps_frozen = false;
    }
    if (keeps_frozen && maps_into(all, sub, fixed)) best = n;
  }
  return best;
}

// Every marking of the signature's positions, checked against the two
// marking conditions literally. Returns some witnessing marking.
inline std::optional<Marking> find_marking(const Ruleset& rules) {
  std::vector<std::pair<Predicate, size_t>> positions;
  const Signature sig = signature_of(rules);
  for (const auto& [p, n] : sig.entries()) {
    for (size_t i = 1; i <= n; ++i) positions.emplace_back(p, i);
  }
  if (positions.size() > 20) throw std::runtime_error("too many positions for exhaustive marking search");
  auto marked_in = [](const Marking& m, const Atom& a, Term v) {
    for (size_t i = 0; i < a.args.size(); ++i) {
      if (a.args[i] == v && m.is_marked(a.predicate, i + 1)) return true;
    }
    return false;
  };
  for (uint32_t mask = 0; mask < (1u << positions.size()); ++mask) {
    Marking m;
    for (size_t i = 0; i < positions.size(); ++i) {
      if (mask & (1u << i)) m.marked[positions[i].first].insert(positions[i].second);
    }
    bool ok = true;
    for (const Rule& r : rules) {
      std::map<Term, int> count;
      for (const Atom& a : r.body()) {
        for (Term t : a.args) {
          if (t.is_variable()) ++count[t];
        }
      }
      for (const auto& [v, c] : count) {
        bool at_marked_body = false;
        for (const Atom& a : r.body()) at_marked_body = at_marked_body || marked_in(m, a, v);
        if ((c >= 2 || at_marked_body) && !marked_in(m, r.head(), v)) ok = false;
      }
      if (!ok) break;
    }
    if (ok) return m;
  }
  return std::nullopt;
}

// Regex membership by direct recursion on the syntax tree.
inline bool regex_matches(const Regex& r, std::span<const Label> w) {
  using K = Regex::Kind;
  std::function<std::set<size_t>(const Regex&, size_t)> ends = [&](const Regex& e, size_t i) -> std::set<size_t> {
    switch (e.kind) {
      case K::Empty:
        return {};
      case K::Epsilon:
        return {i};
      case K::Symbol:
        if (i < w.size() && w[i] == e.label) return {i + 1};
        return {};
      case K::Concat: {
        std::set<size_t> cur{i};
        for (const Regex& c : e.children) {
          std::set<size_t> next;
          for (size_t j : cur) {
            auto s = ends(c, j);
            next.insert(s.begin(), s.end());
          }
          cur = std::move(next);
        }
        return cur;
      }
      case K::Union: {
        std::set<size_t> out;
        for (const Regex& c : e.children) {
          auto s = ends(c, i);
          out.insert(s.begin(), s.end());
        }
        return out;
      }
      case K::Optional: {
        auto s = ends(e.children[0], i);
        s.insert(i);
        return s;
      }
      case K::Star:
      case K::Plus: {
        std::set<size_t> reached = e.kind == K::Star ? std::set<size_t>{i} : std::set<size_t>{};
        std::set<size_t> frontier{i};
        std::set<size_t> seen_start;
        while (!frontier.empty()) {
          std::set<size_t> next;
          for (size_t j : frontier) {
            if (!seen_start.insert(j).second) continue;
            for (size_t k : ends(e.children[0], j)) {
              if (reached.insert(k).second || !seen_start.contains(k)) next.insert(k);
            }
          }
          frontier = std::move(next);
        }
        return reached;
      }
    }
    return {};
  };
  return ends(r, 0).contains(w.size());
}

// All words over the alphabet of length <= n.
inline std::vector<std::vector<Label>> words_up_to(const std::vector<Label>& alphabet, size_t n) {
  std::vector<std::vector<Label>> out{{}};
  std::vector<std::vector<Label>> layer{{}};
  for (size_t k = 0; k < n; ++k) {
    std::vector<std::vector<Label>> next;
    for (const auto& w : layer) {
      for (const Label& l : alphabet) {
        auto v = w;
        v.push_back(l);
        next.push_back(v);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

// Walk-based RPQ check: breadth-first over (term, word-prefix automaton
// state) using the regex oracle on explicit words up to `max_len` edges.
inline bool rpq_by_words(const Regex& r, const Instance& inst, size_t max_len) {
  struct Edge {
    Term to;
    Label label;
  };
  std::map<Term, std::vector<Edge>> out;
  TermSet terms;
  for (const Atom& a : inst.atoms()) {
    for (Term t : a.args) terms.insert(t);
    if (a.arity() != 2) continue;
    out[a.args[0]].push_back({a.args[1], Label{a.predicate, false}});
    out[a.args[1]].push_back({a.args[0], Label{a.predicate, true}});
  }
  std::vector<Label> word;
  std::function<bool(Term, size_t)> dfs = [&](Term at, size_t depth) {
    if (regex_matches(r, word)) return true;
    if (depth == max_len) return false;
    for (const Edge& e : out[at]) {
      word.push_back(e.label);
      bool hit = dfs(e.to, depth + 1);
      word.pop_back();
      if (hit) return true;
    }
    return false;
  };
  for (Term t : terms) {
    if (dfs(t, 0)) return true;
  }
  return false;
}

// The most specific stellar query of t, connected part: one atom per
// incidence of t, with t replaced by the answer variable Y and every other
// position by its own fresh variable.
inline std::vector<Atom> stellar_query(Term t, const Instance& inst) {
  std::vector<Atom> out;
  size_t fresh = 0;
  const Term y = Term::variable("Y");
  for (const Atom& a : inst.atoms()) {
    for (size_t i = 0; i < a.args.size(); ++i) {
      if (a.args[i] != t) continue;
      Atom q{a.predicate, {}};
      for (size_t j = 0; j < a.args.size(); ++j) {
        q.args.push_back(j == i ? y : Term::variable("W" + std::to_string(fresh++)));
      }
      out.push_back(q);
    }
  }
  return out;
}

// Containment of stellar queries: a homomorphism from `b` into `a` fixing Y.
// Atoms of `b` share no variable but Y, so the search splits per atom.
inline bool sq_contained(const std::vector<Atom>& a, const std::vector<Atom>& b) {
  const Term y = Term::variable("Y");
  for (const Atom& atom : b) {
    if (!maps_into(std::span<const Atom>(&atom, 1), a, TermMap{{y, y}})) return false;
  }
  return true;
}

}  // namespace oracle
