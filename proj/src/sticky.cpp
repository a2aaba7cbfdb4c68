#include "stickyrpq/sticky.hpp"

#include <algorithm>

namespace stickyrpq {

Ruleset to_single_head(const std::vector<MultiHeadRule>& rules, const Signature& taken) {
  Ruleset out;
  std::set<std::string> names;
  for (const auto& [p, n] : taken.entries()) names.insert(p.name());
  for (const MultiHeadRule& r : rules) {
    for (const Atom& a : r.body) names.insert(a.predicate.name());
    for (const Atom& a : r.heads) names.insert(a.predicate.name());
  }
  size_t counter = 0;
  for (const MultiHeadRule& r : rules) {
    if (r.heads.size() == 1) {
      out.emplace_back(r.body, r.heads.front(), r.existentials);
      continue;
    }
    if (r.heads.empty()) throw ModelError("rule without head atoms");
    std::string name;
    do {
      name = "P_rho" + std::to_string(counter++);
    } while (names.contains(name));
    names.insert(name);

    TermSet body_vars = terms_of(r.body);
    std::vector<Term> frontier, existentials;
    for (const Atom& h : r.heads) {
      for (Term t : h.args) {
        if (!t.is_variable()) continue;
        auto& bucket = body_vars.contains(t) ? frontier : existentials;
        if (std::find(bucket.begin(), bucket.end(), t) == bucket.end()) bucket.push_back(t);
      }
    }
    std::vector<Term> args = frontier;
    args.insert(args.end(), existentials.begin(), existentials.end());
    Atom joint{Predicate(name), args};
    out.emplace_back(r.body, joint, r.existentials);
    for (const Atom& h : r.heads) out.emplace_back(std::vector<Atom>{joint}, h, std::vector<Term>{});
  }
  return out;
}

namespace {

using Position = std::pair<Predicate, size_t>;  // 1-based

std::vector<Position> positions_of(Term v, std::span<const Atom> atoms) {
  std::vector<Position> out;
  for (const Atom& a : atoms) {
    for (size_t i = 0; i < a.args.size(); ++i) {
      if (a.args[i] == v) out.emplace_back(a.predicate, i + 1);
    }
  }
  return out;
}

}  // namespace

StickyReport check_sticky(const Ruleset& rules) {
  std::set<Position> doomed;
  auto doomed_var = [&](const Rule& r, Term v) {
    auto heads = positions_of(v, std::span<const Atom>(&r.head(), 1));
    return std::all_of(heads.begin(), heads.end(), [&](const Position& p) { return doomed.contains(p); });
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Rule& r : rules) {
      for (Term v : r.body_variables()) {
        if (!doomed_var(r, v)) continue;
        for (const Position& p : positions_of(v, r.body())) changed |= doomed.insert(p).second;
      }
    }
  }

  StickyReport report;
  for (const Rule& r : rules) {
    for (Term v : r.join_variables()) {
      if (!doomed_var(r, v)) continue;
      if (!report.violation.empty()) report.violation += "; ";
      report.violation += "join variable " + to_string(v) + " of rule " + to_string(r) +
                          " does not stick to a marked head position";
      break;
    }
  }
  if (!report.violation.empty()) return report;
  report.sticky = true;
  Signature sig = signature_of(rules);
  for (const auto& [p, n] : sig.entries()) {
    auto& cell = report.marking.marked[p];
    for (size_t i = 1; i <= n; ++i) {
      if (!doomed.contains({p, i})) cell.insert(i);
    }
  }
  return report;
}

bool verify_marking(const Ruleset& rules, const Marking& marking, std::string* why) {
  auto fail = [&](const Rule& r, Term v, const char* what) {
    if (why) *why = std::string(what) + " " + to_string(v) + " in " + to_string(r);
    return false;
  };
  for (const Rule& r : rules) {
    auto marked_in_head = [&](Term v) {
      const Atom& h = r.head();
      for (size_t i = 0; i < h.args.size(); ++i) {
        if (h.args[i] == v && marking.is_marked(h.predicate, i + 1)) return true;
      }
      return false;
    };
    for (Term v : r.join_variables()) {
      if (!marked_in_head(v)) return fail(r, v, "join variable not at a marked head position:");
    }
    for (const Atom& a : r.body()) {
      for (size_t i = 0; i < a.args.size(); ++i) {
        Term v = a.args[i];
        if (!v.is_variable() || !marking.is_marked(a.predicate, i + 1)) continue;
        if (!marked_in_head(v)) return fail(r, v, "marked body variable not at a marked head position:");
      }
    }
  }
  return true;
}

bool is_joinless(const Rule& rule) { return rule.join_variables().empty(); }

bool is_joinless(const Ruleset& rules) {
  return std::all_of(rules.begin(), rules.end(), [](const Rule& r) { return is_joinless(r); });
}

bool is_stellar(const Rule& rule) {
  const auto& joins = rule.join_variables();
  if (joins.empty()) return true;
  if (joins.size() > 1) return false;
  const auto& f = rule.frontier();
  return std::find(f.begin(), f.end(), joins.front()) != f.end();
}

bool is_stellar(const Ruleset& rules) {
  return std::all_of(rules.begin(), rules.end(), [](const Rule& r) { return is_stellar(r); });
}

std::string to_string(const Marking& marking, const Signature& signature) {
  std::string out;
  for (const auto& [p, n] : signature.entries()) {
    out += p.name() + ": {";
    bool first = true;
    auto it = marking.marked.find(p);
    if (it != marking.marked.end()) {
      for (size_t i : it->second) {
        if (!first) out += ",";
        first = false;
        out += std::to_string(i);
      }
    }
    out += "}\n";
  }
  return out;
}

}  // namespace stickyrpq
