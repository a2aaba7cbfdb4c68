#pragma once

#include <map>
#include <string>
#include <vector>

#include "stickyrpq/rpq.hpp"

namespace stickyrpq {

enum class Counter { X, Y };

// if C == 0 then C += 1, goto then_state else C += delta, goto else_state
struct Instruction {
  Counter counter = Counter::X;
  int delta = 1;  // -1 or +1
  std::string then_state;
  std::string else_state;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct TCA {
  std::vector<std::string> states;  // declaration order; start first by convention
  std::map<std::string, Instruction> instr;
  std::string start;
  std::string halt;

  friend bool operator==(const TCA&, const TCA&) = default;
};

// Throws ModelError on a missing instruction, an unknown state, an
// instruction on the halting state, or delta outside {-1, +1}.
void validate(const TCA& m);

struct Configuration {
  std::string state;
  uint64_t x = 0;
  uint64_t y = 0;

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration&, const Configuration&) = default;
};

Configuration tca_step(const Configuration& c, const TCA& m);

struct RunResult {
  bool halted = false;
  size_t steps = 0;
  std::vector<Configuration> trace;  // includes the initial configuration
};

// Runs from <start, 0, 0> for at most max_steps steps.
RunResult run_tca(const TCA& m, size_t max_steps);

struct GridProblem {
  Instance database;
  Ruleset rules;
};

// D_grid = {Succ(a,b), Zero(a)} with the ten grid-building rules.
GridProblem grid_ruleset();
// The same grid with IncX(z,z',x,x',y)-style higher-arity edges; sticky.
GridProblem sticky_grid_ruleset();
// Datalog projections IncXBin(z,z') etc. of the higher-arity edges.
Ruleset hrpq_projection_rules();

// Term of the finite grid at coordinates (x, y).
Term grid_term(size_t x, size_t y);
// The n x n window of the grid over IncX/DecX/IncY/DecY/XZero/YZero.
Instance grid_instance(size_t n);

// The automaton A_M: one state per TCA state plus four auxiliary states per
// instruction-bearing state; accepting state is the halting state. The
// result is complete (a sink is added) but not minimized.
struct TcaAutomaton {
  DFA dfa;
  std::map<std::string, uint32_t> state_of;  // TCA state -> DFA state
};
TcaAutomaton tca_automaton(const TCA& m);

struct EncodedTca {
  Instance database;
  Ruleset rules;
  Query query;  // XZero / YZero / A_M
  TcaAutomaton automaton;
};

EncodedTca encode_tca(const TCA& m, bool sticky_hrpq = false);

struct ThreeStepReport {
  size_t configurations_checked = 0;
  size_t mismatches = 0;
  std::vector<std::string> mismatch_details;
  std::map<Configuration, bool> matches;  // per checked configuration
  bool halts_within_bound = false;
  bool accepting_walk_within_bound = false;
  size_t reachable_configurations = 0;
  bool ok() const { return mismatches == 0 && halts_within_bound == accepting_walk_within_bound; }
};

// For every state with an instruction and every (x, y) with x, y <= n - 2,
// compares the set of product nodes A_M reaches in exactly three steps on
// grid_instance(n) with tca_step. Also compares halting within `steps`
// against an accepting walk of Q_M of length <= 3 * steps + 2. Throws
// ModelError when the run leaves the window.
ThreeStepReport verify_three_step_correspondence(const TCA& m, size_t n, size_t steps);

}  // namespace stickyrpq
