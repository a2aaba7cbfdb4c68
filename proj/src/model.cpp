#include "stickyrpq/model.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <mutex>
#include <shared_mutex>
#include <sstream>

namespace stickyrpq {

namespace {

struct FunctionalNode {
  uint32_t symbol;
  std::vector<Term> args;
  uint32_t depth;
};

struct FunctionalKey {
  uint32_t symbol;
  std::vector<uint64_t> args;
  friend bool operator==(const FunctionalKey&, const FunctionalKey&) = default;
};

struct FunctionalKeyHash {
  size_t operator()(const FunctionalKey& k) const noexcept {
    size_t h = std::hash<uint32_t>{}(k.symbol);
    for (uint64_t a : k.args) h = h * 1000003u ^ std::hash<uint64_t>{}(a);
    return h;
  }
};

// Process-wide intern tables. Deques keep element addresses stable while
// other threads append.
class Pool {
 public:
  uint32_t intern_name(std::string_view name) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = name_ids_.find(std::string(name)); it != name_ids_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = name_ids_.try_emplace(std::string(name), static_cast<uint32_t>(names_.size()));
    if (inserted) names_.emplace_back(name);
    return it->second;
  }

  const std::string& name(uint32_t id) const {
    std::shared_lock lock(mutex_);
    return names_.at(id);
  }

  uint32_t intern_symbol(const SkolemSymbol& s) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = symbol_ids_.find(s); it != symbol_ids_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = symbol_ids_.try_emplace(s, static_cast<uint32_t>(symbols_.size()));
    if (inserted) symbols_.push_back(s);
    return it->second;
  }

  const SkolemSymbol& symbol(uint32_t id) const {
    std::shared_lock lock(mutex_);
    return symbols_.at(id);
  }

  uint64_t intern_functional(uint32_t symbol, std::vector<Term> args) {
    FunctionalKey key{symbol, {}};
    key.args.reserve(args.size());
    uint32_t depth = 0;
    for (Term a : args) {
      key.args.push_back(a.raw());
      depth = std::max(depth, a.depth());
    }
    {
      std::shared_lock lock(mutex_);
      if (auto it = functional_ids_.find(key); it != functional_ids_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = functional_ids_.try_emplace(std::move(key), functionals_.size());
    if (inserted) functionals_.push_back(FunctionalNode{symbol, std::move(args), depth + 1});
    return it->second;
  }

  const FunctionalNode& functional(uint64_t id) const {
    std::shared_lock lock(mutex_);
    return functionals_.at(id);
  }

 private:
  Pool() { names_.emplace_back(); name_ids_.emplace("", 0); }
  friend Pool& pool();

  mutable std::shared_mutex mutex_;
  std::deque<std::string> names_;
  std::unordered_map<std::string, uint32_t> name_ids_;
  std::deque<SkolemSymbol> symbols_;
  std::map<SkolemSymbol, uint32_t> symbol_ids_;
  std::deque<FunctionalNode> functionals_;
  std::unordered_map<FunctionalKey, uint64_t, FunctionalKeyHash> functional_ids_;
};

Pool& pool() {
  static Pool instance;
  return instance;
}

}  // namespace

Predicate::Predicate(std::string_view name) : id_(pool().intern_name(name)) {
  if (name.empty()) throw ModelError("empty predicate name");
}

const std::string& Predicate::name() const { return pool().name(id_); }

Term Term::constant(std::string_view name) { return Term(Kind::Constant, pool().intern_name(name)); }

Term Term::variable(std::string_view name) { return Term(Kind::Variable, pool().intern_name(name)); }

Term Term::null(uint64_t id) { return Term(Kind::Null, id); }

Term Term::functional(const SkolemSymbol& symbol, std::vector<Term> args) {
  return functional(intern_skolem_symbol(symbol), std::move(args));
}

Term Term::functional(uint32_t symbol_id, std::vector<Term> args) {
  if (skolem_symbol(symbol_id).arity != args.size()) {
    throw ModelError("functional term arity mismatch for Skolem symbol f" + std::to_string(symbol_id));
  }
  return Term(Kind::Functional, pool().intern_functional(symbol_id, std::move(args)));
}

const std::string& Term::name() const {
  if (kind() != Kind::Constant && kind() != Kind::Variable) throw ModelError("term has no name");
  return pool().name(static_cast<uint32_t>(payload()));
}

uint64_t Term::null_id() const {
  if (!is_null()) throw ModelError("term is not a null");
  return payload();
}

uint32_t Term::symbol_id() const {
  if (!is_functional()) throw ModelError("term is not functional");
  return pool().functional(payload()).symbol;
}

const SkolemSymbol& Term::symbol() const { return skolem_symbol(symbol_id()); }

std::span<const Term> Term::args() const {
  if (!is_functional()) return {};
  return pool().functional(payload()).args;
}

uint32_t Term::depth() const { return is_functional() ? pool().functional(payload()).depth : 0; }

const SkolemSymbol& skolem_symbol(uint32_t id) { return pool().symbol(id); }

uint32_t intern_skolem_symbol(const SkolemSymbol& symbol) { return pool().intern_symbol(symbol); }

std::string to_string(Term t) {
  switch (t.kind()) {
    case Term::Kind::Constant:
    case Term::Kind::Variable:
      return t.name();
    case Term::Kind::Null:
      return "_n" + std::to_string(t.null_id());
    case Term::Kind::Functional: {
      std::string out = "f" + std::to_string(t.symbol_id()) + "(";
      bool first = true;
      for (Term a : t.args()) {
        if (!first) out += ",";
        first = false;
        out += to_string(a);
      }
      return out + ")";
    }
  }
  return "?";
}

std::ostream& operator<<(std::ostream& out, Term t) { return out << to_string(t); }

size_t AtomHash::operator()(const Atom& a) const noexcept {
  size_t h = std::hash<uint32_t>{}(a.predicate.id());
  for (Term t : a.args) h = (h * 1000003u) ^ TermHash{}(t);
  return h;
}

std::string to_string(const Atom& a) {
  std::string out = a.predicate.name() + "(";
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ",";
    out += to_string(a.args[i]);
  }
  return out + ")";
}

std::ostream& operator<<(std::ostream& out, const Atom& a) { return out << to_string(a); }

Atom substitute(const Atom& atom, const TermMap& mapping) {
  Atom out = atom;
  for (Term& t : out.args) {
    if (auto it = mapping.find(t); it != mapping.end()) t = it->second;
  }
  return out;
}

std::vector<Atom> substitute(std::span<const Atom> atoms, const TermMap& mapping) {
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const Atom& a : atoms) out.push_back(substitute(a, mapping));
  return out;
}

size_t Instance::PositionKeyHash::operator()(const PositionKey& k) const noexcept {
  return (std::hash<uint64_t>{}(k.term) * 31 + k.position) * 1000003u + k.predicate;
}

Instance::Instance(std::initializer_list<Atom> atoms) {
  for (const Atom& a : atoms) insert(a);
}

Instance::Instance(std::span<const Atom> atoms) {
  for (const Atom& a : atoms) insert(a);
}

bool Instance::insert(const Atom& atom) {
  auto idx = static_cast<uint32_t>(atoms_.size());
  auto [it, inserted] = position_.try_emplace(atom, idx);
  if (!inserted) return false;
  atoms_.push_back(atom);
  by_predicate_[atom.predicate.id()].push_back(idx);
  for (size_t i = 0; i < atom.args.size(); ++i) {
    by_term_[PositionKey{atom.predicate.id(), static_cast<uint32_t>(i), atom.args[i].raw()}].push_back(idx);
  }
  return true;
}

bool Instance::contains(const Atom& atom) const { return position_.contains(atom); }

std::vector<Atom> Instance::sorted_atoms() const {
  std::vector<Atom> out = atoms_;
  std::sort(out.begin(), out.end());
  return out;
}

std::span<const uint32_t> Instance::with_predicate(Predicate p) const {
  auto it = by_predicate_.find(p.id());
  if (it == by_predicate_.end()) return {};
  return it->second;
}

std::span<const uint32_t> Instance::with_term_at(Predicate p, size_t position, Term t) const {
  auto it = by_term_.find(PositionKey{p.id(), static_cast<uint32_t>(position), t.raw()});
  if (it == by_term_.end()) return {};
  return it->second;
}

bool Instance::is_database() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) {
    return std::all_of(a.args.begin(), a.args.end(), [](Term t) { return t.is_constant(); });
  });
}

bool operator==(const Instance& a, const Instance& b) {
  if (a.size() != b.size()) return false;
  return std::all_of(a.atoms_.begin(), a.atoms_.end(), [&](const Atom& x) { return b.contains(x); });
}

TermSet active_domain(const Instance& instance) { return terms_of(instance.atoms()); }

TermSet terms_of(std::span<const Atom> atoms) {
  TermSet out;
  for (const Atom& a : atoms) out.insert(a.args.begin(), a.args.end());
  return out;
}

Instance restrict(const Instance& instance, const TermSet& terms) {
  Instance out;
  for (const Atom& a : instance.atoms()) {
    if (std::all_of(a.args.begin(), a.args.end(), [&](Term t) { return terms.contains(t); })) out.insert(a);
  }
  return out;
}

Instance restrict_predicates(const Instance& instance, const std::set<Predicate>& predicates) {
  Instance out;
  for (const Atom& a : instance.atoms()) {
    if (predicates.contains(a.predicate)) out.insert(a);
  }
  return out;
}

Instance union_of(const Instance& a, const Instance& b) {
  Instance out = a;
  for (const Atom& x : b.atoms()) out.insert(x);
  return out;
}

std::string to_string(const Instance& instance) {
  std::vector<std::string> parts;
  for (const Atom& a : instance.atoms()) parts.push_back(to_string(a));
  std::sort(parts.begin(), parts.end());
  std::string out = "{";
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out + "}";
}

void Signature::declare(Predicate p, size_t arity) {
  auto [it, inserted] = arity_.try_emplace(p, arity);
  if (!inserted && it->second != arity) {
    throw ModelError("arity mismatch for predicate " + p.name() + ": " + std::to_string(it->second) +
                     " vs " + std::to_string(arity));
  }
}

size_t Signature::arity(Predicate p) const {
  auto it = arity_.find(p);
  if (it == arity_.end()) throw ModelError("undeclared predicate " + p.name());
  return it->second;
}

void Signature::merge(const Signature& other) {
  for (auto [p, n] : other.arity_) declare(p, n);
}

namespace {

void push_unique(std::vector<Term>& out, Term t) {
  if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
}

}  // namespace

Rule::Rule(std::vector<Atom> body, Atom head, std::vector<Term> existentials)
    : head_(std::move(head)) {
  std::set<Atom> seen;
  for (Atom& a : body) {
    if (seen.insert(a).second) body_.push_back(std::move(a));
  }
  std::set<Term> body_vars;
  std::map<Term, int> occurrences;
  std::vector<Term> body_order;
  for (const Atom& a : body_) {
    for (Term t : a.args) {
      if (!t.is_variable()) continue;
      if (body_vars.insert(t).second) body_order.push_back(t);
      ++occurrences[t];
    }
  }
  for (Term t : body_order) {
    if (occurrences[t] >= 2) join_.push_back(t);
  }
  std::set<Term> declared(existentials.begin(), existentials.end());
  for (Term z : declared) {
    if (!z.is_variable()) throw ModelError("existential " + to_string(z) + " is not a variable");
    if (body_vars.contains(z)) {
      throw ModelError("existential variable " + to_string(z) + " occurs in the body");
    }
  }
  for (Term t : head_.args) {
    if (!t.is_variable()) continue;
    if (body_vars.contains(t)) {
      push_unique(frontier_, t);
    } else if (declared.contains(t)) {
      push_unique(existentials_, t);
    } else {
      throw ModelError("head variable " + to_string(t) + " is neither in the body nor existential");
    }
  }
  // Declared but unused existentials are dropped: they do not change the rule.
}

Rule Rule::with_inferred_existentials(std::vector<Atom> body, Atom head) {
  TermSet body_vars = terms_of(body);
  std::vector<Term> ex;
  for (Term t : head.args) {
    if (t.is_variable() && !body_vars.contains(t)) push_unique(ex, t);
  }
  return Rule(std::move(body), std::move(head), std::move(ex));
}

std::vector<Term> Rule::body_variables() const {
  std::vector<Term> out;
  for (const Atom& a : body_) {
    for (Term t : a.args) {
      if (t.is_variable()) push_unique(out, t);
    }
  }
  return out;
}

std::string to_string(const Rule& rule) {
  std::string out;
  for (size_t i = 0; i < rule.body().size(); ++i) {
    if (i) out += ", ";
    out += to_string(rule.body()[i]);
  }
  out += " -> ";
  if (!rule.existentials().empty()) {
    out += "exists ";
    for (size_t i = 0; i < rule.existentials().size(); ++i) {
      if (i) out += ",";
      out += to_string(rule.existentials()[i]);
    }
    out += ". ";
  }
  return out + to_string(rule.head()) + ".";
}

std::string to_string(const Ruleset& rules) {
  std::string out;
  for (const Rule& r : rules) out += to_string(r) + "\n";
  return out;
}

Signature signature_of(const Instance& instance) {
  Signature s;
  for (const Atom& a : instance.atoms()) s.declare(a);
  return s;
}

Signature signature_of(const Ruleset& rules) {
  Signature s;
  for (const Rule& r : rules) {
    for (const Atom& a : r.body()) s.declare(a);
    s.declare(r.head());
  }
  return s;
}

Rule rename_apart(const Rule& rule, std::string_view prefix, size_t& counter) {
  TermMap m;
  auto fresh = [&](Term v) {
    if (!m.contains(v)) m.emplace(v, Term::variable(std::string(prefix) + std::to_string(counter++)));
  };
  for (const Atom& a : rule.body()) {
    for (Term t : a.args) {
      if (t.is_variable()) fresh(t);
    }
  }
  for (Term t : rule.head().args) {
    if (t.is_variable()) fresh(t);
  }
  std::vector<Term> ex;
  for (Term z : rule.existentials()) ex.push_back(m.at(z));
  return Rule(substitute(rule.body(), m), substitute(rule.head(), m), std::move(ex));
}

// --- isomorphism types -----------------------------------------------------

namespace {

class Canonicalizer {
 public:
  Canonicalizer(std::span<const Atom> atoms, std::span<const Term> free_terms) {
    std::set<Atom> unique(atoms.begin(), atoms.end());
    atoms_.assign(unique.begin(), unique.end());
    std::set<Term> free(free_terms.begin(), free_terms.end());
    auto add = [&](Term t, bool is_free) {
      if (index_.contains(t)) return;
      index_.emplace(t, terms_.size());
      terms_.push_back(t);
      is_free_.push_back(is_free);
    };
    for (Term t : free_terms) add(t, true);
    for (const Atom& a : atoms_) {
      for (Term t : a.args) {
        if (!t.is_constant() || free.contains(t)) add(t, free.contains(t));
      }
    }
  }

  IsoType run() {
    std::vector<int> colors(terms_.size());
    for (size_t i = 0; i < terms_.size(); ++i) colors[i] = is_free_[i] ? 0 : 1;
    refine(colors);
    search(colors);
    IsoType out;
    out.id = best_;
    for (size_t i : best_order_) {
      (is_free_[i] ? out.free_order : out.existential_order).push_back(terms_[i]);
    }
    return out;
  }

 private:
  std::string arg_code(Term t, const std::vector<int>& colors) const {
    auto it = index_.find(t);
    if (it == index_.end()) return "k" + to_string(t);
    return "c" + std::to_string(colors[it->second]);
  }

  void refine(std::vector<int>& colors) const {
    size_t classes = std::set<int>(colors.begin(), colors.end()).size();
    while (true) {
      std::vector<std::string> sig(terms_.size());
      for (size_t i = 0; i < terms_.size(); ++i) sig[i] = std::to_string(colors[i]) + "|";
      std::vector<std::vector<std::string>> occ(terms_.size());
      for (const Atom& a : atoms_) {
        std::string base = a.predicate.name() + "(";
        for (size_t j = 0; j < a.args.size(); ++j) base += arg_code(a.args[j], colors) + ",";
        for (size_t j = 0; j < a.args.size(); ++j) {
          auto it = index_.find(a.args[j]);
          if (it != index_.end()) occ[it->second].push_back(base + "@" + std::to_string(j));
        }
      }
      for (size_t i = 0; i < terms_.size(); ++i) {
        std::sort(occ[i].begin(), occ[i].end());
        for (const auto& o : occ[i]) sig[i] += o + ";";
      }
      std::vector<std::string> distinct = sig;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (size_t i = 0; i < terms_.size(); ++i) {
        colors[i] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), sig[i]) - distinct.begin());
      }
      if (distinct.size() == classes) return;
      classes = distinct.size();
    }
  }

  void search(const std::vector<int>& colors) {
    // First non-singleton cell (smallest color).
    std::map<int, std::vector<size_t>> cells;
    for (size_t i = 0; i < terms_.size(); ++i) cells[colors[i]].push_back(i);
    for (auto& [color, members] : cells) {
      if (members.size() < 2) continue;
      for (size_t m : members) {
        std::vector<int> next(colors.size());
        for (size_t i = 0; i < colors.size(); ++i) next[i] = colors[i] * 2 + 1;
        next[m] = color * 2;
        refine(next);
        search(next);
      }
      return;
    }
    emit(colors);
  }

  void emit(const std::vector<int>& colors) {
    std::vector<size_t> order(terms_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return colors[a] < colors[b]; });
    std::map<Term, std::string> label;
    size_t nf = 0, ne = 0;
    for (size_t i : order) {
      label[terms_[i]] = is_free_[i] ? "F" + std::to_string(nf++) : "E" + std::to_string(ne++);
    }
    std::vector<std::string> parts;
    for (const Atom& a : atoms_) {
      std::string s = a.predicate.name() + "(";
      for (size_t j = 0; j < a.args.size(); ++j) {
        if (j) s += ",";
        auto it = label.find(a.args[j]);
        s += it == label.end() ? "'" + to_string(a.args[j]) : it->second;
      }
      parts.push_back(s + ")");
    }
    std::sort(parts.begin(), parts.end());
    std::string id = std::to_string(nf) + "/" + std::to_string(ne) + ":";
    for (size_t i = 0; i < parts.size(); ++i) {
      if (i) id += "&";
      id += parts[i];
    }
    if (best_.empty() || id < best_) {
      best_ = id;
      best_order_ = order;
    }
  }

  std::vector<Atom> atoms_;
  std::vector<Term> terms_;
  std::vector<bool> is_free_;
  std::map<Term, size_t> index_;
  std::string best_;
  std::vector<size_t> best_order_;
};

}  // namespace

IsoType iso_type(std::span<const Atom> atoms, std::span<const Term> free_terms) {
  return Canonicalizer(atoms, free_terms).run();
}

}  // namespace stickyrpq
