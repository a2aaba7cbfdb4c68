#include "stickyrpq/tca.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace stickyrpq {

void validate(const TCA& m) {
  std::set<std::string> known(m.states.begin(), m.states.end());
  auto require = [&](const std::string& s, const std::string& where) {
    if (!known.contains(s)) throw ModelError("unknown state " + s + " in " + where);
  };
  require(m.start, "start");
  require(m.halt, "halt");
  if (m.instr.contains(m.halt)) throw ModelError("halting state " + m.halt + " carries an instruction");
  for (const std::string& q : m.states) {
    if (q == m.halt) continue;
    auto it = m.instr.find(q);
    if (it == m.instr.end()) throw ModelError("state " + q + " has no instruction");
    const Instruction& i = it->second;
    if (i.delta != 1 && i.delta != -1) throw ModelError("increment of state " + q + " must be +1 or -1");
    require(i.then_state, "instruction of " + q);
    require(i.else_state, "instruction of " + q);
  }
  for (const auto& [q, i] : m.instr) require(q, "instruction list");
}

Configuration tca_step(const Configuration& c, const TCA& m) {
  auto it = m.instr.find(c.state);
  if (it == m.instr.end()) throw ModelError("state " + c.state + " has no instruction");
  const Instruction& i = it->second;
  Configuration next = c;
  uint64_t& counter = i.counter == Counter::X ? next.x : next.y;
  if (counter == 0) {
    counter += 1;
    next.state = i.then_state;
  } else {
    counter = i.delta > 0 ? counter + 1 : counter - 1;
    next.state = i.else_state;
  }
  return next;
}

RunResult run_tca(const TCA& m, size_t max_steps) {
  RunResult r;
  Configuration c{m.start, 0, 0};
  r.trace.push_back(c);
  while (c.state != m.halt && r.steps < max_steps) {
    c = tca_step(c, m);
    ++r.steps;
    r.trace.push_back(c);
  }
  r.halted = c.state == m.halt;
  return r;
}

namespace {

Term term(const std::string& name) {
  return std::isupper(static_cast<unsigned char>(name[0])) ? Term::variable(name) : Term::constant(name);
}

Atom atom(const std::string& pred, std::initializer_list<const char*> args) {
  Atom a{Predicate(pred), {}};
  for (const char* s : args) a.args.push_back(term(s));
  return a;
}

Rule rule(std::vector<Atom> body, Atom head) { return Rule::with_inferred_existentials(std::move(body), std::move(head)); }

Ruleset grid_core_rules() {
  return {
      rule({atom("Succ", {"X", "X1"})}, atom("Succ", {"X1", "X2"})),
      rule({atom("Succ", {"X", "X1"}), atom("Succ", {"Y", "Y1"})}, atom("GridPoint", {"X", "Y", "Z"})),
      rule({atom("GridPoint", {"X", "Y", "Z"})}, atom("XCoord", {"Z", "X"})),
      rule({atom("GridPoint", {"X", "Y", "Z"})}, atom("YCoord", {"Z", "Y"})),
  };
}

std::vector<Atom> phi_right() {
  return {atom("XCoord", {"Z", "X"}), atom("YCoord", {"Z", "Y"}), atom("XCoord", {"Z1", "X1"}),
          atom("YCoord", {"Z1", "Y"}), atom("Succ", {"X", "X1"})};
}

std::vector<Atom> phi_up() {
  return {atom("XCoord", {"Z", "X"}), atom("YCoord", {"Z", "Y"}), atom("XCoord", {"Z1", "X"}),
          atom("YCoord", {"Z1", "Y1"}), atom("Succ", {"Y", "Y1"})};
}

Instance grid_database() { return Instance{atom("Succ", {"a", "b"}), atom("Zero", {"a"})}; }

}  // namespace

GridProblem grid_ruleset() {
  Ruleset r = grid_core_rules();
  r.push_back(rule(phi_right(), atom("IncX", {"Z", "Z1"})));
  r.push_back(rule(phi_up(), atom("IncY", {"Z", "Z1"})));
  r.push_back(rule({atom("IncX", {"Z", "Z1"})}, atom("DecX", {"Z1", "Z"})));
  r.push_back(rule({atom("IncY", {"Z", "Z1"})}, atom("DecY", {"Z1", "Z"})));
  r.push_back(rule({atom("XCoord", {"Z", "X"}), atom("Zero", {"X"})}, atom("XZero", {"Z", "Z"})));
  r.push_back(rule({atom("YCoord", {"Z", "Y"}), atom("Zero", {"Y"})}, atom("YZero", {"Z", "Z"})));
  return {grid_database(), r};
}

GridProblem sticky_grid_ruleset() {
  Ruleset r = grid_core_rules();
  r.push_back(rule(phi_right(), atom("IncX", {"Z", "Z1", "X", "X1", "Y"})));
  r.push_back(rule(phi_up(), atom("IncY", {"Z", "Z1", "X", "Y", "Y1"})));
  r.push_back(rule({atom("IncX", {"Z", "Z1", "U", "V", "T"})}, atom("DecX", {"Z1", "Z", "U", "V", "T"})));
  r.push_back(rule({atom("IncY", {"Z", "Z1", "U", "V", "T"})}, atom("DecY", {"Z1", "Z", "U", "V", "T"})));
  r.push_back(rule({atom("XCoord", {"Z", "X"}), atom("Zero", {"X"})}, atom("XZero", {"Z", "Z", "X"})));
  r.push_back(rule({atom("YCoord", {"Z", "Y"}), atom("Zero", {"Y"})}, atom("YZero", {"Z", "Z", "Y"})));
  return {grid_database(), r};
}

Ruleset hrpq_projection_rules() {
  Ruleset r;
  for (const char* p : {"IncX", "DecX", "IncY", "DecY"}) {
    r.push_back(rule({atom(p, {"Z", "Z1", "U", "V", "T"})}, atom(std::string(p) + "Bin", {"Z", "Z1"})));
  }
  r.push_back(rule({atom("XZero", {"Z", "Z", "X"})}, atom("XZeroBin", {"Z", "Z"})));
  r.push_back(rule({atom("YZero", {"Z", "Z", "Y"})}, atom("YZeroBin", {"Z", "Z"})));
  return r;
}

Term grid_term(size_t x, size_t y) { return Term::constant("z_" + std::to_string(x) + "_" + std::to_string(y)); }

Instance grid_instance(size_t n) {
  if (n == 0) throw ModelError("grid size must be positive");
  Instance g;
  const Predicate inc_x("IncX"), dec_x("DecX"), inc_y("IncY"), dec_y("DecY"), x_zero("XZero"), y_zero("YZero");
  for (size_t y = 0; y < n; ++y) {
    for (size_t x = 0; x < n; ++x) {
      Term z = grid_term(x, y);
      if (x + 1 < n) {
        g.insert(Atom{inc_x, {z, grid_term(x + 1, y)}});
        g.insert(Atom{dec_x, {grid_term(x + 1, y), z}});
      }
      if (y + 1 < n) {
        g.insert(Atom{inc_y, {z, grid_term(x, y + 1)}});
        g.insert(Atom{dec_y, {grid_term(x, y + 1), z}});
      }
      if (x == 0) g.insert(Atom{x_zero, {z, z}});
      if (y == 0) g.insert(Atom{y_zero, {z, z}});
    }
  }
  return g;
}

TcaAutomaton tca_automaton(const TCA& m) {
  validate(m);
  TcaAutomaton a;
  DFA& d = a.dfa;
  for (const char* p : {"IncX", "DecX", "IncY", "DecY", "XZero", "YZero"}) d.alphabet.push_back(Label{Predicate(p)});
  std::sort(d.alphabet.begin(), d.alphabet.end());
  auto add_state = [&] {
    d.delta.emplace_back(d.alphabet.size(), UINT32_MAX);
    d.accepting.push_back(false);
    return static_cast<uint32_t>(d.delta.size() - 1);
  };
  for (const std::string& q : m.states) a.state_of[q] = add_state();
  auto letter = [&](const std::string& p) { return *d.letter(Label{Predicate(p)}); };
  for (const std::string& q : m.states) {
    auto it = m.instr.find(q);
    if (it == m.instr.end()) continue;
    const Instruction& i = it->second;
    const std::string c = i.counter == Counter::X ? "X" : "Y";
    const std::string zero = c + "Zero", inc = "Inc" + c, dec = "Dec" + c;
    uint32_t then1 = add_state(), then2 = add_state(), else1 = add_state(), else2 = add_state();
    uint32_t from = a.state_of.at(q);
    d.delta[from][letter(zero)] = then1;
    d.delta[then1][letter(zero)] = then2;
    d.delta[then2][letter(inc)] = a.state_of.at(i.then_state);
    d.delta[from][letter(dec)] = else1;
    d.delta[else1][letter(inc)] = else2;
    d.delta[else2][letter(i.delta > 0 ? inc : dec)] = a.state_of.at(i.else_state);
  }
  uint32_t sink = add_state();
  for (auto& row : d.delta) {
    for (uint32_t& t : row) {
      if (t == UINT32_MAX) t = sink;
    }
  }
  d.sink = sink;
  d.start = a.state_of.at(m.start);
  d.accepting[a.state_of.at(m.halt)] = true;
  return a;
}

EncodedTca encode_tca(const TCA& m, bool sticky_hrpq) {
  EncodedTca e;
  e.automaton = tca_automaton(m);
  GridProblem g = sticky_hrpq ? sticky_grid_ruleset() : grid_ruleset();
  e.database = std::move(g.database);
  e.rules = std::move(g.rules);
  e.query.kind = sticky_hrpq ? QueryKind::Hyper : QueryKind::RPQ;
  e.query.regex = Regex::concat(
      {Regex::symbol(Predicate("XZero")), Regex::symbol(Predicate("YZero")), dfa_to_regex(e.automaton.dfa)});
  return e;
}

ThreeStepReport verify_three_step_correspondence(const TCA& m, size_t n, size_t steps) {
  if (n < 2) throw ModelError("grid size must be at least 2");
  ThreeStepReport report;
  TcaAutomaton a = tca_automaton(m);
  const DFA& d = a.dfa;
  Instance grid = grid_instance(n);

  std::map<Term, std::vector<std::pair<Label, Term>>> out;
  for (const Atom& at : grid.atoms()) out[at.args[0]].push_back({Label{at.predicate}, at.args[1]});

  std::map<uint32_t, std::string> name_of;
  for (const auto& [q, s] : a.state_of) name_of[s] = q;

  for (const auto& [q, instr] : m.instr) {
    for (size_t x = 0; x + 2 <= n; ++x) {
      for (size_t y = 0; y + 2 <= n; ++y) {
        std::set<std::pair<Term, uint32_t>> frontier{{grid_term(x, y), a.state_of.at(q)}};
        for (int k = 0; k < 3; ++k) {
          std::set<std::pair<Term, uint32_t>> next;
          for (auto [t, s] : frontier) {
            for (const auto& [label, to] : out[t]) {
              uint32_t ns = d.delta[s][*d.letter(label)];
              if (ns != *d.sink) next.emplace(to, ns);
            }
          }
          frontier = std::move(next);
        }
        Configuration c = tca_step(Configuration{q, x, y}, m);
        std::set<std::pair<Term, uint32_t>> expected{{grid_term(c.x, c.y), a.state_of.at(c.state)}};
        ++report.configurations_checked;
        report.matches[Configuration{q, x, y}] = frontier == expected;
        if (frontier != expected) {
          ++report.mismatches;
          std::string got;
          for (auto [t, s] : frontier) got += " " + to_string(t) + "@" + name_of[s];
          report.mismatch_details.push_back("<" + q + "," + std::to_string(x) + "," + std::to_string(y) +
                                            "> expected " + to_string(grid_term(c.x, c.y)) + "@" + c.state +
                                            " got" + (got.empty() ? " nothing" : got));
        }
      }
    }
  }

  RunResult run = run_tca(m, steps);
  for (const Configuration& c : run.trace) {
    if (c.x + 2 > n || c.y + 2 > n) throw ModelError("TCA run leaves the grid window of size " + std::to_string(n));
  }
  report.reachable_configurations = run.trace.size();
  report.halts_within_bound = run.halted;
  EncodedTca e = encode_tca(m);
  report.accepting_walk_within_bound = eval_rpq(compile_regex(e.query.regex), grid, 3 * steps + 2).holds;
  return report;
}

}  // namespace stickyrpq
