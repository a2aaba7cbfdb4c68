#include "stickyrpq/rpq.hpp"

#include <algorithm>
#include <deque>

namespace stickyrpq {

std::string to_string(const Label& l) { return (l.inverse ? "^" : "") + l.predicate.name(); }

// --- regex -----------------------------------------------------------------

Regex Regex::symbol(Predicate p, bool inverse) {
  Regex r;
  r.kind = Kind::Symbol;
  r.label = Label{p, inverse};
  return r;
}

namespace {

Regex nary(Regex::Kind kind, std::vector<Regex> parts) {
  std::vector<Regex> flat;
  for (Regex& p : parts) {
    if (p.kind == kind) {
      for (Regex& c : p.children) flat.push_back(std::move(c));
    } else {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) return kind == Regex::Kind::Concat ? Regex::epsilon() : Regex::empty();
  if (flat.size() == 1) return std::move(flat.front());
  Regex r;
  r.kind = kind;
  r.children = std::move(flat);
  return r;
}

Regex unary(Regex::Kind kind, Regex child) {
  Regex r;
  r.kind = kind;
  r.children.push_back(std::move(child));
  return r;
}

}  // namespace

Regex Regex::concat(std::vector<Regex> parts) { return nary(Kind::Concat, std::move(parts)); }
Regex Regex::alt(std::vector<Regex> parts) { return nary(Kind::Union, std::move(parts)); }
Regex Regex::star(Regex r) { return unary(Kind::Star, std::move(r)); }
Regex Regex::plus(Regex r) { return unary(Kind::Plus, std::move(r)); }
Regex Regex::optional(Regex r) { return unary(Kind::Optional, std::move(r)); }

Regex Regex::epsilon() {
  Regex r;
  r.kind = Kind::Epsilon;
  return r;
}

Regex Regex::empty() { return Regex(); }

bool Regex::uses_inverse() const {
  if (kind == Kind::Symbol) return label.inverse;
  return std::any_of(children.begin(), children.end(), [](const Regex& c) { return c.uses_inverse(); });
}

std::set<Label> Regex::labels() const {
  std::set<Label> out;
  if (kind == Kind::Symbol) out.insert(label);
  for (const Regex& c : children) {
    auto sub = c.labels();
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

namespace {

int precedence(const Regex& r) {
  switch (r.kind) {
    case Regex::Kind::Union:
      return 0;
    case Regex::Kind::Concat:
      return 1;
    case Regex::Kind::Star:
    case Regex::Kind::Plus:
    case Regex::Kind::Optional:
      return 2;
    default:
      return 3;
  }
}

std::string render(const Regex& r, int context) {
  std::string s;
  switch (r.kind) {
    case Regex::Kind::Symbol:
      return to_string(r.label);
    case Regex::Kind::Epsilon:
      return "()";
    case Regex::Kind::Empty:
      return "[]";
    case Regex::Kind::Union:
    case Regex::Kind::Concat: {
      const char* sep = r.kind == Regex::Kind::Union ? " | " : " / ";
      int child_context = precedence(r) + 1;
      for (size_t i = 0; i < r.children.size(); ++i) {
        if (i) s += sep;
        s += render(r.children[i], child_context);
      }
      break;
    }
    case Regex::Kind::Star:
    case Regex::Kind::Plus:
    case Regex::Kind::Optional: {
      const char* op = r.kind == Regex::Kind::Star ? "*" : r.kind == Regex::Kind::Plus ? "+" : "?";
      s = render(r.children.front(), 3) + op;
      break;
    }
  }
  if (precedence(r) < context) s = "(" + s + ")";
  return s;
}

}  // namespace

std::string to_string(const Regex& r) { return render(r, 0); }

std::string to_string(const Query& q) {
  const char* prefix = q.kind == QueryKind::RPQ ? "rpq: " : q.kind == QueryKind::TwoWay ? "2rpq: " : "hrpq: ";
  return prefix + to_string(q.regex);
}

// --- automata --------------------------------------------------------------

std::optional<size_t> DFA::letter(const Label& l) const {
  auto it = std::lower_bound(alphabet.begin(), alphabet.end(), l);
  if (it == alphabet.end() || *it != l) return std::nullopt;
  return static_cast<size_t>(it - alphabet.begin());
}

std::optional<uint32_t> DFA::next(uint32_t state, const Label& l) const {
  auto i = letter(l);
  if (!i) return std::nullopt;
  return delta[state][*i];
}

bool DFA::accepts(std::span<const Label> word) const {
  uint32_t q = start;
  for (const Label& l : word) {
    auto n = next(q, l);
    if (!n) return false;
    q = *n;
  }
  return accepting[q];
}

std::vector<bool> DFA::dead_states() const {
  std::vector<std::vector<uint32_t>> reverse(num_states());
  for (uint32_t q = 0; q < num_states(); ++q) {
    for (uint32_t n : delta[q]) reverse[n].push_back(q);
  }
  std::vector<bool> live(num_states(), false);
  std::deque<uint32_t> queue;
  for (uint32_t q = 0; q < num_states(); ++q) {
    if (accepting[q]) {
      live[q] = true;
      queue.push_back(q);
    }
  }
  while (!queue.empty()) {
    uint32_t q = queue.front();
    queue.pop_front();
    for (uint32_t p : reverse[q]) {
      if (!live[p]) {
        live[p] = true;
        queue.push_back(p);
      }
    }
  }
  std::vector<bool> dead(num_states());
  for (size_t q = 0; q < dead.size(); ++q) dead[q] = !live[q];
  return dead;
}

namespace {

struct Nfa {
  struct Edge {
    int letter;  // -1 = epsilon
    uint32_t to;
  };
  std::vector<std::vector<Edge>> edges;

  uint32_t add() {
    edges.emplace_back();
    return static_cast<uint32_t>(edges.size() - 1);
  }
};

// Thompson fragment: (entry, exit).
std::pair<uint32_t, uint32_t> thompson(const Regex& r, const std::vector<Label>& alphabet, Nfa& nfa) {
  uint32_t in = nfa.add(), out = nfa.add();
  switch (r.kind) {
    case Regex::Kind::Symbol: {
      int l = static_cast<int>(std::lower_bound(alphabet.begin(), alphabet.end(), r.label) - alphabet.begin());
      nfa.edges[in].push_back({l, out});
      break;
    }
    case Regex::Kind::Epsilon:
      nfa.edges[in].push_back({-1, out});
      break;
    case Regex::Kind::Empty:
      break;
    case Regex::Kind::Concat: {
      uint32_t cur = in;
      for (const Regex& c : r.children) {
        auto [ci, co] = thompson(c, alphabet, nfa);
        nfa.edges[cur].push_back({-1, ci});
        cur = co;
      }
      nfa.edges[cur].push_back({-1, out});
      break;
    }
    case Regex::Kind::Union:
      for (const Regex& c : r.children) {
        auto [ci, co] = thompson(c, alphabet, nfa);
        nfa.edges[in].push_back({-1, ci});
        nfa.edges[co].push_back({-1, out});
      }
      break;
    case Regex::Kind::Star:
    case Regex::Kind::Plus:
    case Regex::Kind::Optional: {
      auto [ci, co] = thompson(r.children.front(), alphabet, nfa);
      nfa.edges[in].push_back({-1, ci});
      nfa.edges[co].push_back({-1, out});
      if (r.kind != Regex::Kind::Plus) nfa.edges[in].push_back({-1, out});
      if (r.kind != Regex::Kind::Optional) nfa.edges[co].push_back({-1, ci});
      break;
    }
  }
  return {in, out};
}

std::vector<uint32_t> closure(const Nfa& nfa, std::vector<uint32_t> states) {
  std::vector<bool> seen(nfa.edges.size(), false);
  std::vector<uint32_t> stack = states;
  for (uint32_t s : states) seen[s] = true;
  while (!stack.empty()) {
    uint32_t s = stack.back();
    stack.pop_back();
    for (const auto& e : nfa.edges[s]) {
      if (e.letter == -1 && !seen[e.to]) {
        seen[e.to] = true;
        states.push_back(e.to);
        stack.push_back(e.to);
      }
    }
  }
  std::sort(states.begin(), states.end());
  return states;
}

void mark_sink(DFA& d) {
  d.sink.reset();
  for (uint32_t q = 0; q < d.num_states(); ++q) {
    if (d.accepting[q]) continue;
    if (std::all_of(d.delta[q].begin(), d.delta[q].end(), [&](uint32_t n) { return n == q; })) {
      d.sink = q;
      return;
    }
  }
}

}  // namespace

DFA compile_regex(const Regex& r) {
  DFA d;
  auto labels = r.labels();
  d.alphabet.assign(labels.begin(), labels.end());
  Nfa nfa;
  auto [entry, exit] = thompson(r, d.alphabet, nfa);

  std::map<std::vector<uint32_t>, uint32_t> ids;
  std::vector<std::vector<uint32_t>> subsets;
  auto intern = [&](std::vector<uint32_t> s) {
    auto [it, inserted] = ids.try_emplace(s, static_cast<uint32_t>(subsets.size()));
    if (inserted) {
      subsets.push_back(std::move(s));
      d.delta.emplace_back(d.alphabet.size(), 0);
    }
    return it->second;
  };
  d.start = intern(closure(nfa, {entry}));
  for (size_t i = 0; i < subsets.size(); ++i) {
    for (size_t l = 0; l < d.alphabet.size(); ++l) {
      std::vector<uint32_t> targets;
      for (uint32_t s : subsets[i]) {
        for (const auto& e : nfa.edges[s]) {
          if (e.letter == static_cast<int>(l)) targets.push_back(e.to);
        }
      }
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      uint32_t id = intern(closure(nfa, std::move(targets)));
      d.delta[i][l] = id;
    }
  }
  d.accepting.resize(subsets.size());
  for (size_t i = 0; i < subsets.size(); ++i) {
    d.accepting[i] = std::binary_search(subsets[i].begin(), subsets[i].end(), exit);
  }
  return minimize(d);
}

DFA minimize(const DFA& d) {
  // Reachable states in BFS order from the start.
  std::vector<int> order_of(d.num_states(), -1);
  std::vector<uint32_t> reachable{d.start};
  order_of[d.start] = 0;
  for (size_t i = 0; i < reachable.size(); ++i) {
    for (uint32_t n : d.delta[reachable[i]]) {
      if (order_of[n] < 0) {
        order_of[n] = static_cast<int>(reachable.size());
        reachable.push_back(n);
      }
    }
  }
  // Moore refinement.
  std::vector<uint32_t> block(d.num_states(), 0);
  for (uint32_t q : reachable) block[q] = d.accepting[q] ? 1 : 0;
  size_t count = 0;
  while (true) {
    std::map<std::vector<uint32_t>, uint32_t> signature_ids;
    std::vector<uint32_t> next(d.num_states(), 0);
    for (uint32_t q : reachable) {
      std::vector<uint32_t> sig{block[q]};
      for (uint32_t n : d.delta[q]) sig.push_back(block[n]);
      auto [it, inserted] = signature_ids.try_emplace(sig, static_cast<uint32_t>(signature_ids.size()));
      next[q] = it->second;
    }
    block = std::move(next);
    if (signature_ids.size() == count) break;
    count = signature_ids.size();
  }
  // Renumber blocks in BFS order so the start is state 0.
  std::vector<int> new_id(count, -1);
  uint32_t fresh = 0;
  for (uint32_t q : reachable) {
    if (new_id[block[q]] < 0) new_id[block[q]] = static_cast<int>(fresh++);
  }
  DFA out;
  out.alphabet = d.alphabet;
  out.delta.assign(fresh, std::vector<uint32_t>(d.alphabet.size(), 0));
  out.accepting.assign(fresh, false);
  for (uint32_t q : reachable) {
    uint32_t b = static_cast<uint32_t>(new_id[block[q]]);
    for (size_t l = 0; l < d.alphabet.size(); ++l) out.delta[b][l] = static_cast<uint32_t>(new_id[block[d.delta[q][l]]]);
    out.accepting[b] = d.accepting[q];
  }
  out.start = static_cast<uint32_t>(new_id[block[d.start]]);
  mark_sink(out);
  return out;
}

namespace {

Regex simplify_concat(Regex a, Regex b) {
  if (a.kind == Regex::Kind::Empty || b.kind == Regex::Kind::Empty) return Regex::empty();
  if (a.kind == Regex::Kind::Epsilon) return b;
  if (b.kind == Regex::Kind::Epsilon) return a;
  return Regex::concat({std::move(a), std::move(b)});
}

Regex simplify_alt(Regex a, Regex b) {
  if (a.kind == Regex::Kind::Empty) return b;
  if (b.kind == Regex::Kind::Empty) return a;
  if (a == b) return a;
  return Regex::alt({std::move(a), std::move(b)});
}

Regex simplify_star(Regex a) {
  if (a.kind == Regex::Kind::Empty || a.kind == Regex::Kind::Epsilon) return Regex::epsilon();
  if (a.kind == Regex::Kind::Star) return a;
  return Regex::star(std::move(a));
}

}  // namespace

Regex dfa_to_regex(const DFA& d) {
  // Generalized NFA: states 0..n-1 of d, n = initial, n+1 = final.
  const size_t n = d.num_states();
  const size_t init = n, fin = n + 1;
  std::vector<std::vector<Regex>> g(n + 2, std::vector<Regex>(n + 2, Regex::empty()));
  auto dead = d.dead_states();
  for (size_t q = 0; q < n; ++q) {
    if (dead[q]) continue;
    for (size_t l = 0; l < d.alphabet.size(); ++l) {
      uint32_t to = d.delta[q][l];
      if (dead[to]) continue;
      g[q][to] = simplify_alt(g[q][to], Regex::symbol(d.alphabet[l].predicate, d.alphabet[l].inverse));
    }
    if (d.accepting[q]) g[q][fin] = Regex::epsilon();
  }
  if (!dead[d.start]) g[init][d.start] = Regex::epsilon();
  std::vector<bool> removed(n + 2, false);
  for (size_t k = 0; k < n; ++k) {
    if (dead[k]) {
      removed[k] = true;
      continue;
    }
    Regex loop = simplify_star(g[k][k]);
    for (size_t i = 0; i < n + 2; ++i) {
      if (removed[i] || i == k || g[i][k].kind == Regex::Kind::Empty) continue;
      for (size_t j = 0; j < n + 2; ++j) {
        if (removed[j] || j == k || g[k][j].kind == Regex::Kind::Empty) continue;
        g[i][j] = simplify_alt(g[i][j], simplify_concat(simplify_concat(g[i][k], loop), g[k][j]));
      }
    }
    removed[k] = true;
  }
  return g[init][fin];
}

// --- evaluation --------------------------------------------------------------

namespace {

struct ProductGraph {
  std::vector<Term> terms;
  std::map<Term, uint32_t> index;
  struct Edge {
    uint32_t letter;
    uint32_t to;
    uint32_t atom;
    bool inverse;
  };
  std::vector<std::vector<Edge>> out;

  ProductGraph(const DFA& dfa, const Instance& instance) {
    for (const Atom& a : instance.atoms()) {
      for (Term t : a.args) {
        if (index.emplace(t, static_cast<uint32_t>(terms.size())).second) terms.push_back(t);
      }
    }
    out.resize(terms.size());
    for (uint32_t i = 0; i < instance.size(); ++i) {
      const Atom& a = instance[i];
      if (a.arity() != 2) continue;
      uint32_t s = index.at(a.args[0]), t = index.at(a.args[1]);
      if (auto l = dfa.letter(Label{a.predicate, false})) out[s].push_back({static_cast<uint32_t>(*l), t, i, false});
      if (auto l = dfa.letter(Label{a.predicate, true})) out[t].push_back({static_cast<uint32_t>(*l), s, i, true});
    }
  }
};

struct Search {
  const DFA& dfa;
  const Instance& instance;
  ProductGraph graph;
  std::vector<bool> dead;
  size_t states;

  Search(const DFA& d, const Instance& i) : dfa(d), instance(i), graph(d, i), dead(d.dead_states()), states(d.num_states()) {}

  size_t node(uint32_t term, uint32_t state) const { return term * states + state; }

  // BFS from the given source terms; returns accepting node and parents.
  RpqResult run(const std::vector<uint32_t>& sources, std::optional<size_t> max_length,
                std::vector<std::pair<uint32_t, uint32_t>>* all_targets = nullptr) {
    RpqResult result;
    if (dead[dfa.start]) return result;
    const size_t total = graph.terms.size() * states;
    std::vector<int64_t> parent(total, -2);  // -2 unseen, -1 root
    std::vector<uint32_t> via_atom(total), origin(total);
    std::vector<bool> via_inverse(total);
    std::vector<uint32_t> depth(total, 0);
    std::deque<size_t> queue;
    for (uint32_t s : sources) {
      size_t v = node(s, dfa.start);
      if (parent[v] != -2) continue;
      parent[v] = -1;
      origin[v] = s;
      queue.push_back(v);
    }
    while (!queue.empty()) {
      size_t v = queue.front();
      queue.pop_front();
      uint32_t term = static_cast<uint32_t>(v / states), state = static_cast<uint32_t>(v % states);
      if (dfa.accepting[state]) {
        if (all_targets) {
          all_targets->emplace_back(origin[v], term);
        } else {
          result.holds = true;
          result.source = graph.terms[origin[v]];
          result.target = graph.terms[term];
          for (size_t u = v; parent[u] >= 0; u = static_cast<size_t>(parent[u])) {
            result.path.push_back(PathStep{instance[via_atom[u]], via_inverse[u]});
          }
          std::reverse(result.path.begin(), result.path.end());
          return result;
        }
      }
      if (max_length && depth[v] >= *max_length) continue;
      for (const auto& e : graph.out[term]) {
        uint32_t ns = dfa.delta[state][e.letter];
        if (dead[ns]) continue;
        size_t w = node(e.to, ns);
        if (parent[w] != -2) continue;
        parent[w] = static_cast<int64_t>(v);
        via_atom[w] = e.atom;
        via_inverse[w] = e.inverse;
        origin[w] = origin[v];
        depth[w] = depth[v] + 1;
        queue.push_back(w);
      }
    }
    return result;
  }
};

}  // namespace

RpqResult eval_rpq(const DFA& dfa, const Instance& instance, std::optional<size_t> max_length) {
  Search search(dfa, instance);
  std::vector<uint32_t> sources(search.graph.terms.size());
  for (uint32_t i = 0; i < sources.size(); ++i) sources[i] = i;
  return search.run(sources, max_length);
}

std::set<std::pair<Term, Term>> eval_rpq_pairs(const DFA& dfa, const Instance& instance) {
  Search search(dfa, instance);
  std::set<std::pair<Term, Term>> out;
  for (uint32_t s = 0; s < search.graph.terms.size(); ++s) {
    std::vector<std::pair<uint32_t, uint32_t>> found;
    search.run({s}, std::nullopt, &found);
    for (auto [a, b] : found) out.emplace(search.graph.terms[a], search.graph.terms[b]);
  }
  return out;
}

Instance project_binary(const Instance& instance) {
  Instance out;
  for (const Atom& a : instance.atoms()) {
    if (a.arity() >= 2) out.insert(Atom{a.predicate, {a.args[0], a.args[1]}});
  }
  return out;
}

RpqResult eval_hrpq(const Regex& r, const Instance& instance, std::optional<size_t> max_length) {
  std::set<Predicate> used;
  for (const Label& l : r.labels()) used.insert(l.predicate);
  for (const Atom& a : instance.atoms()) {
    if (used.contains(a.predicate) && a.arity() < 2) {
      throw ModelError("HRPQ predicate " + a.predicate.name() + " has arity " + std::to_string(a.arity()));
    }
  }
  return eval_rpq(compile_regex(r), project_binary(instance), max_length);
}

RpqResult eval_rpq(const Query& q, const Instance& instance, std::optional<size_t> max_length) {
  if (q.kind == QueryKind::Hyper) return eval_hrpq(q.regex, instance, max_length);
  if (q.kind == QueryKind::RPQ && q.regex.uses_inverse()) throw ModelError("inverse symbol in a one-way RPQ");
  return eval_rpq(compile_regex(q.regex), instance, max_length);
}

// --- reductions ----------------------------------------------------------------

namespace {

std::string fresh_name(std::string base, const std::set<std::string>& taken) {
  while (taken.contains(base)) base += "_";
  return base;
}

Regex replace_inverses(const Regex& r, const std::map<Predicate, Predicate>& inv) {
  if (r.kind == Regex::Kind::Symbol) {
    return r.label.inverse ? Regex::symbol(inv.at(r.label.predicate)) : r;
  }
  Regex out = r;
  for (Regex& c : out.children) c = replace_inverses(c, inv);
  return out;
}

}  // namespace

TwoWayReduction reduce_two_way(const Query& q, const Ruleset& rules, const Signature& signature) {
  Signature sig = signature;
  sig.merge(signature_of(rules));
  for (const Label& l : q.regex.labels()) sig.declare(l.predicate, 2);
  std::set<std::string> taken;
  for (const auto& [p, n] : sig.entries()) taken.insert(p.name());

  TwoWayReduction out;
  out.rules = rules;
  const Term x = Term::variable("X"), y = Term::variable("Y");
  for (const auto& [p, n] : sig.entries()) {
    if (n != 2) continue;
    std::string name = fresh_name(p.name() + "_inv", taken);
    taken.insert(name);
    Predicate inv(name);
    out.inverse_of.emplace(p, inv);
    out.rules.emplace_back(std::vector<Atom>{Atom{p, {x, y}}}, Atom{inv, {y, x}}, std::vector<Term>{});
  }
  out.query.kind = QueryKind::RPQ;
  out.query.regex = replace_inverses(q.regex, out.inverse_of);
  return out;
}

DatalogTranslation rpq_to_datalog(const DFA& dfa, const Signature& signature) {
  std::set<std::string> taken;
  for (const auto& [p, n] : signature.entries()) taken.insert(p.name());
  for (const Label& l : dfa.alphabet) taken.insert(l.predicate.name());

  DatalogTranslation out;
  out.goal = Predicate(fresh_name("Goal", taken));
  taken.insert(out.goal.name());
  for (size_t q = 0; q < dfa.num_states(); ++q) {
    std::string name = fresh_name("Aut_q" + std::to_string(q), taken);
    taken.insert(name);
    out.state_predicates.emplace_back(name);
  }
  auto dead = dfa.dead_states();
  const Term x = Term::variable("X"), y = Term::variable("Y");
  if (!dead[dfa.start]) {
    for (const auto& [p, n] : signature.entries()) {
      Atom body{p, {}};
      for (size_t i = 0; i < n; ++i) body.args.push_back(Term::variable("X" + std::to_string(i)));
      for (size_t i = 0; i < n; ++i) {
        out.rules.emplace_back(std::vector<Atom>{body}, Atom{out.state_predicates[dfa.start], {body.args[i]}},
                               std::vector<Term>{});
      }
    }
  }
  for (uint32_t q = 0; q < dfa.num_states(); ++q) {
    if (dead[q]) continue;
    for (size_t l = 0; l < dfa.alphabet.size(); ++l) {
      uint32_t to = dfa.delta[q][l];
      if (dead[to]) continue;
      const Label& label = dfa.alphabet[l];
      Atom edge = label.inverse ? Atom{label.predicate, {y, x}} : Atom{label.predicate, {x, y}};
      if (signature.contains(label.predicate)) {
        size_t n = signature.arity(label.predicate);
        if (n < 2) continue;
        for (size_t i = 2; i < n; ++i) edge.args.push_back(Term::variable("W" + std::to_string(i)));
      }
      out.rules.emplace_back(std::vector<Atom>{Atom{out.state_predicates[q], {x}}, edge},
                             Atom{out.state_predicates[to], {y}}, std::vector<Term>{});
    }
    if (dfa.accepting[q]) {
      out.rules.emplace_back(std::vector<Atom>{Atom{out.state_predicates[q], {x}}}, Atom{out.goal, {}},
                             std::vector<Term>{});
    }
  }
  return out;
}

}  // namespace stickyrpq
