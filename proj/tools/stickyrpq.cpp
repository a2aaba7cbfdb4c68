// Command-line front end: stickiness checks, chase, rewriting pipeline,
// query evaluation, the entailment driver and the TCA reduction.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stickyrpq/chase.hpp"
#include "stickyrpq/decide.hpp"
#include "stickyrpq/sticky.hpp"
#include "stickyrpq/tca.hpp"
#include "stickyrpq/textio.hpp"

using namespace stickyrpq;
using json = nlohmann::json;

namespace {

// Exit codes: 0 success, 1 input or model error, 2 failed check (not sticky,
// correspondence mismatch), 3 resource limit.
constexpr int kExhausted = 3;

struct Inputs {
  std::string rules, database, query, ucq, tca;
};

std::string load(const std::string& path) { return path.empty() ? std::string() : read_file(path); }

// A query argument naming an existing file is read from it; anything else is
// the expression itself.
std::string query_text(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) return read_file(arg);
  return arg;
}

std::string step_text(const PathStep& s) { return (s.inverse ? "^" : "") + to_string(s.atom); }

json path_json(const std::vector<PathStep>& path) {
  json out = json::array();
  for (const PathStep& s : path) out.push_back(step_text(s));
  return out;
}

json atoms_json(const Instance& inst) {
  json out = json::array();
  for (const Atom& a : inst.atoms()) out.push_back(to_string(a));
  return out;
}

Query reduced_query(const Query& q, const Ruleset& rules, const Instance& d, Ruleset* out_rules) {
  *out_rules = rules;
  if (q.kind != QueryKind::TwoWay) return q;
  TwoWayReduction red = reduce_two_way(q, rules, signature_of(d));
  *out_rules = red.rules;
  return red.query;
}

int cmd_check_sticky(const Inputs& in) {
  Ruleset rules = parse_ruleset(load(in.rules));
  StickyReport rep = check_sticky(rules);
  if (!rep.sticky) {
    std::cout << "not sticky\n" << rep.violation << "\n";
    return 2;
  }
  std::cout << "sticky\n" << to_string(rep.marking, signature_of(rules));
  return 0;
}

int cmd_normalize(const Inputs& in) {
  std::cout << format_ruleset(to_single_head(parse_multihead_ruleset(load(in.rules))));
  return 0;
}

int cmd_chase(const Inputs& in, size_t steps, const std::string& format) {
  Ruleset rules = parse_ruleset(load(in.rules));
  Instance d = parse_database(load(in.database));
  ChaseTrace t = chase_bounded(d, rules, steps);
  if (format == "json") {
    json levels = json::array();
    for (size_t k = 0; k <= t.levels(); ++k) levels.push_back(atoms_json(t.level(k)));
    std::cout << json{{"levels", levels}, {"fixpoint", t.fixpoint}, {"atoms", t.instance.size()}}.dump(2) << "\n";
    return 0;
  }
  for (size_t k = 0; k <= t.levels(); ++k) {
    std::cout << "% level " << k << "\n";
    Instance level = t.level(k);
    for (const Atom& a : level.atoms()) std::cout << to_string(a) << ".\n";
  }
  if (t.fixpoint) std::cout << "% fixpoint\n";
  return 0;
}

int cmd_rewrite_query(const Inputs& in, size_t max_rounds) {
  Ruleset rules = parse_ruleset(load(in.rules));
  UCQ q = parse_ucq(load(in.ucq));
  RewriteOptions o;
  o.max_rounds = max_rounds;
  try {
    std::cout << format_ucq(rewrite_ucq(q, rules, o));
  } catch (const RewriteLimitExceeded& e) {
    std::cout << format_ucq(e.partial());
    std::cerr << "rewriting incomplete: " << e.what() << "\n";
    return kExhausted;
  }
  return 0;
}

int cmd_transform(const Inputs& in, const std::string& stage) {
  Ruleset rules = parse_ruleset(load(in.rules));
  Instance d = parse_database(load(in.database));
  Query q = parse_query(query_text(in.query));
  Ruleset r;
  Query plain = reduced_query(q, rules, d, &r);
  PipelineArtifacts p = build_pipeline(d, r, plain);
  if (stage == "rew") std::cout << format_ruleset(p.rew);
  else if (stage == "cr") std::cout << format_ruleset(p.cr);
  else if (stage == "crplus") std::cout << format_ruleset(p.crplus);
  else if (stage == "rplus") std::cout << format_ruleset(p.rplus);
  else std::cout << format_database(p.dplus);
  return 0;
}

int cmd_eval_query(const Inputs& in, std::optional<size_t> max_length, bool pairs) {
  Instance d = parse_database(load(in.database));
  Query q = parse_query(query_text(in.query));
  if (pairs) {
    DFA dfa = compile_regex(q.regex);
    Instance target = q.kind == QueryKind::Hyper ? project_binary(d) : d;
    for (const auto& [s, t] : eval_rpq_pairs(dfa, target)) std::cout << to_string(s) << " " << to_string(t) << "\n";
    return 0;
  }
  RpqResult r = q.kind == QueryKind::Hyper ? eval_hrpq(q.regex, d, max_length) : eval_rpq(q, d, max_length);
  if (!r.holds) {
    std::cout << "false\n";
    return 0;
  }
  std::cout << "true\n" << to_string(r.source) << " -> " << to_string(r.target) << "\n";
  for (const PathStep& s : r.path) std::cout << "  " << step_text(s) << "\n";
  return 0;
}

int cmd_entail(const Inputs& in, double budget, const std::string& format, double bias) {
  Ruleset rules = parse_ruleset(load(in.rules));
  Instance d = parse_database(load(in.database));
  Query q = parse_query(query_text(in.query));
  DecideOptions o;
  o.budget = std::chrono::milliseconds(static_cast<long long>(budget * 1000));
  o.forward_share = bias;
  Verdict v = decide_entailment(d, rules, q, o);
  if (format == "json") {
    json out;
    switch (v.tag) {
      case Verdict::Tag::Entailed: {
        const EntailmentWitness& w = *v.witness;
        json word = json::array();
        for (const Label& l : w.word) word.push_back(to_string(l));
        out = {{"verdict", "entailed"},
               {"chase_level", w.chase_level},
               {"path", path_json(w.path)},
               {"witness", {{"source", to_string(w.source)}, {"target", to_string(w.target)}, {"word", word}}}};
        break;
      }
      case Verdict::Tag::NotEntailed:
        out = {{"verdict", "not_entailed"},
               {"countermodel_atoms", v.countermodel->size()},
               {"witness", atoms_json(*v.countermodel)}};
        break;
      case Verdict::Tag::ResourceExhausted:
        out = {{"verdict", "unknown"}, {"witness", nullptr}};
        break;
    }
    out["report"] = v.report;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << to_string(v.tag) << "\n";
    if (v.witness) {
      std::cout << "chase level " << v.witness->chase_level << "\n";
      for (const PathStep& s : v.witness->path) std::cout << "  " << step_text(s) << "\n";
    }
    if (v.countermodel) std::cout << format_database(*v.countermodel);
    if (!v.report.empty()) std::cout << "% " << v.report << "\n";
  }
  return v.tag == Verdict::Tag::ResourceExhausted ? kExhausted : 0;
}

int cmd_countermodel(const Inputs& in, double budget) {
  Ruleset rules = parse_ruleset(load(in.rules));
  Instance d = parse_database(load(in.database));
  Query q = parse_query(query_text(in.query));
  Ruleset r;
  Query plain = reduced_query(q, rules, d, &r);
  Verdict v = countermodel_search(d, r, plain,
                                  SearchBudget{std::chrono::milliseconds(static_cast<long long>(budget * 1000)),
                                               1'000'000, {}});
  if (!v.countermodel) {
    std::cout << "% no countermodel found\n% " << v.report << "\n";
    return kExhausted;
  }
  std::cout << format_database(*v.countermodel);
  CountermodelCheck check = verify_countermodel(*v.countermodel, d, r, compile_regex(plain.regex));
  std::cout << "% " << to_string(check) << "\n";
  return 0;
}

int cmd_tca_encode(const Inputs& in, bool sticky_hrpq, const std::string& dir) {
  EncodedTca e = encode_tca(parse_tca(load(in.tca)), sticky_hrpq);
  std::string rules = format_ruleset(e.rules), database = format_database(e.database), query = format_query(e.query);
  if (dir.empty()) {
    std::cout << "% rules\n" << rules << "% database\n" << database << "% query\n" << query << "\n";
    return 0;
  }
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(std::filesystem::path(dir) / name);
    f << text;
    if (!text.empty() && text.back() != '\n') f << "\n";
    if (!f) throw std::runtime_error(std::string("cannot write ") + name);
  };
  write("rules.txt", rules);
  write("database.txt", database);
  write("query.txt", query);
  return 0;
}

int cmd_tca_verify(const Inputs& in, size_t steps, size_t grid) {
  TCA m = parse_tca(load(in.tca));
  ThreeStepReport rep = verify_three_step_correspondence(m, grid, steps);
  for (const auto& [q, instr] : m.instr) {
    std::cout << "state " << q << " (rows y = " << grid - 2 << " .. 0, columns x = 0 .. " << grid - 2 << ")\n";
    for (size_t y = grid - 1; y-- > 0;) {
      std::cout << "  ";
      for (size_t x = 0; x + 1 < grid; ++x) std::cout << (rep.matches.at(Configuration{q, x, y}) ? '.' : 'X');
      std::cout << "\n";
    }
  }
  for (const std::string& s : rep.mismatch_details) std::cout << "mismatch " << s << "\n";
  std::cout << "configurations " << rep.configurations_checked << ", mismatches " << rep.mismatches << "\n"
            << "halts within " << steps << " steps: " << (rep.halts_within_bound ? "yes" : "no") << "\n"
            << "accepting walk of length <= " << 3 * steps + 2 << ": "
            << (rep.accepting_walk_within_bound ? "yes" : "no") << "\n"
            << (rep.ok() ? "PASS" : "FAIL") << "\n";
  return rep.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entailment of regular path queries over sticky existential rules"};
  app.require_subcommand(1);
  Inputs in;

  auto add_rules = [&](CLI::App* c) { c->add_option("-r,--rules", in.rules, "ruleset file")->required(); };
  auto add_database = [&](CLI::App* c) { c->add_option("-d,--database", in.database, "database file")->required(); };
  auto add_query = [&](CLI::App* c) {
    c->add_option("-q,--query", in.query, "query expression or file")->required();
  };

  auto* check = app.add_subcommand("check-sticky", "decide stickiness and print the marking");
  add_rules(check);

  auto* normalize = app.add_subcommand("normalize", "print the single-head form of a ruleset");
  add_rules(normalize);

  size_t steps = 3;
  std::string format = "text";
  auto* chase = app.add_subcommand("chase", "run the Skolem chase for a number of levels");
  add_rules(chase);
  add_database(chase);
  chase->add_option("--steps", steps, "chase levels")->required();
  chase->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  size_t max_rounds = 10'000;
  auto* rewrite = app.add_subcommand("rewrite-query", "UCQ rewriting of a conjunctive query");
  add_rules(rewrite);
  rewrite->add_option("-u,--ucq", in.ucq, "UCQ file")->required();
  rewrite->add_option("--max-rounds", max_rounds);

  std::string stage;
  auto* transform = app.add_subcommand("transform", "print one stage of the rewriting pipeline");
  add_rules(transform);
  add_database(transform);
  add_query(transform);
  transform->add_option("--stage", stage)->required()->check(CLI::IsMember({"rew", "cr", "crplus", "rplus", "dplus"}));

  std::optional<size_t> max_length;
  bool pairs = false;
  auto* eval = app.add_subcommand("eval-query", "evaluate a path query over a finite instance");
  add_database(eval);
  add_query(eval);
  eval->add_option("--max-length", max_length, "bound on walk length");
  eval->add_flag("--pairs", pairs, "print every answer pair");

  double budget = 10;
  double bias = 0.5;
  auto* entail = app.add_subcommand("entail", "decide entailment within a time budget");
  add_rules(entail);
  add_database(entail);
  add_query(entail);
  entail->add_option("--budget", budget, "seconds");
  entail->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  entail->add_option("--bias", bias, "share of the budget for the forward search")->check(CLI::Range(0.0, 1.0));

  auto* counter = app.add_subcommand("countermodel", "search for a finite countermodel");
  add_rules(counter);
  add_database(counter);
  add_query(counter);
  counter->add_option("--budget", budget, "seconds");

  bool sticky_hrpq = false;
  std::string out_dir;
  auto* encode = app.add_subcommand("tca-encode", "encode a two-counter automaton as an entailment problem");
  encode->add_option("-m,--machine", in.tca, "TCA file")->required();
  encode->add_flag("--sticky-hrpq", sticky_hrpq, "higher-arity sticky variant");
  encode->add_option("-o,--out", out_dir, "directory for rules.txt, database.txt and query.txt");

  size_t grid = 8;
  auto* verify = app.add_subcommand("tca-verify", "check the three-step correspondence on the grid");
  verify->add_option("-m,--machine", in.tca, "TCA file")->required();
  verify->add_option("--steps", steps, "run length")->required();
  verify->add_option("--grid", grid, "grid size");

  size_t size = 3;
  auto* grid_cmd = app.add_subcommand("grid", "print the finite grid instance");
  grid_cmd->add_option("--size", size)->required()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check) return cmd_check_sticky(in);
    if (*normalize) return cmd_normalize(in);
    if (*chase) return cmd_chase(in, steps, format);
    if (*rewrite) return cmd_rewrite_query(in, max_rounds);
    if (*transform) return cmd_transform(in, stage);
    if (*eval) return cmd_eval_query(in, max_length, pairs);
    if (*entail) return cmd_entail(in, budget, format, bias);
    if (*counter) return cmd_countermodel(in, budget);
    if (*encode) return cmd_tca_encode(in, sticky_hrpq, out_dir);
    if (*verify) return cmd_tca_verify(in, steps, grid);
    if (*grid_cmd) {
      std::cout << format_database(grid_instance(size));
      return 0;
    }
  } catch (const RewriteLimitExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExhausted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
