#include "stickyrpq/decide.hpp"

#include <condition_variable>
#include <mutex>
#include <thread>

#include "stickyrpq/sticky.hpp"

namespace stickyrpq {

std::string to_string(Verdict::Tag tag) {
  switch (tag) {
    case Verdict::Tag::Entailed:
      return "entailed";
    case Verdict::Tag::NotEntailed:
      return "not_entailed";
    case Verdict::Tag::ResourceExhausted:
      return "resource_exhausted";
  }
  return "?";
}

namespace {

// Stop source that fires on the parent's request or at the deadline.
class Deadline {
 public:
  Deadline(std::chrono::milliseconds budget, std::stop_token parent)
      : forward_(parent, Forward{&source_}),
        timer_([this, until = std::chrono::steady_clock::now() + budget](std::stop_token own) {
          std::mutex m;
          std::condition_variable_any cv;
          std::unique_lock lock(m);
          if (!cv.wait_until(lock, own, until, [] { return false; })) {
            if (!own.stop_requested()) source_.request_stop();
          }
        }) {}

  std::stop_token token() const { return source_.get_token(); }

 private:
  struct Forward {
    std::stop_source* source;
    void operator()() const { source->request_stop(); }
  };
  std::stop_source source_;
  std::stop_callback<Forward> forward_;
  std::jthread timer_;
};

Signature problem_signature(const Instance& database, const Ruleset& rules, const Query& query) {
  Signature sig = signature_of(database);
  sig.merge(signature_of(rules));
  for (const Label& l : query.regex.labels()) {
    if (!sig.contains(l.predicate)) sig.declare(l.predicate, 2);
  }
  return sig;
}

Instance query_graph(const Query& query, const Instance& instance) {
  return query.kind == QueryKind::Hyper ? project_binary(instance) : instance;
}

}  // namespace

PipelineArtifacts build_pipeline(const Instance& database, const Ruleset& rules, const Query& query,
                                 const RewriteOptions& options) {
  PipelineArtifacts p;
  p.rew = rewrite_rule_bodies(rules, options);
  p.cr = core_rule_bodies(p.rew);
  p.crplus = add_stellar_variants(p.cr);
  p.rplus = prune_multijoin(p.crplus);
  p.dplus = saturate_database(database, p.crplus, options);
  p.dfa = compile_regex(query.regex);
  p.datalog = rpq_to_datalog(p.dfa, problem_signature(database, rules, query));
  return p;
}

bool replay_witness(const Instance& database, const Ruleset& rules, const Query& query,
                    const EntailmentWitness& witness, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  ChaseTrace trace = chase_bounded(database, rules, witness.chase_level);
  Instance graph = query_graph(query, trace.instance);
  Term at = witness.source;
  std::vector<Label> word;
  for (const PathStep& s : witness.path) {
    if (s.atom.arity() != 2) return fail("path atom " + to_string(s.atom) + " is not binary");
    if (!graph.contains(s.atom)) return fail("path atom " + to_string(s.atom) + " not derived");
    Term from = s.inverse ? s.atom.args[1] : s.atom.args[0];
    Term to = s.inverse ? s.atom.args[0] : s.atom.args[1];
    if (from != at) return fail("path is not connected at " + to_string(s.atom));
    at = to;
    word.push_back(Label{s.atom.predicate, s.inverse});
  }
  if (at != witness.target) return fail("path does not end at the target");
  if (word != witness.word) return fail("recorded word differs from the path labels");
  if (witness.path.empty() && !active_domain(graph).contains(witness.source)) {
    return fail("empty path at a term outside the chase");
  }
  if (!compile_regex(query.regex).accepts(word)) return fail("path word is rejected by the automaton");
  return true;
}

Verdict forward_search(const Instance& database, const Ruleset& rules, const Query& query, const SearchBudget& budget) {
  Verdict v;
  Deadline deadline(budget.time, budget.stop);
  DFA dfa = compile_regex(query.regex);
  Signature sig = problem_signature(database, rules, query);
  DatalogTranslation tr = rpq_to_datalog(dfa, sig);
  Ruleset combined = rules;
  combined.insert(combined.end(), tr.rules.begin(), tr.rules.end());
  const Atom goal{tr.goal, {}};
  try {
    Chase chase(database, combined, ChaseOptions{budget.max_atoms, deadline.token()});
    while (!chase.instance().contains(goal)) {
      if (!chase.step()) {
        // Terminating chase: a finite universal model without Goal.
        std::set<Predicate> original;
        for (const auto& [p, n] : sig.entries()) original.insert(p);
        Instance model = restrict_predicates(chase.instance(), original);
        CountermodelCheck check = verify_countermodel(model, database, rules, dfa);
        if (query.kind == QueryKind::Hyper) check.avoids_query = !eval_rpq(dfa, project_binary(model)).holds;
        if (!check.ok()) {
          v.report = "terminating chase failed verification: " + to_string(check);
          return v;
        }
        v.tag = Verdict::Tag::NotEntailed;
        v.countermodel = std::move(model);
        v.report = "chase terminated at level " + std::to_string(chase.levels()) + " without Goal; " +
                   to_string(check);
        return v;
      }
    }
    EntailmentWitness w;
    w.chase_level = chase.levels();
    std::set<Predicate> original;
    for (const auto& [p, n] : sig.entries()) original.insert(p);
    Instance graph = query_graph(query, restrict_predicates(chase.instance(), original));
    RpqResult r = eval_rpq(dfa, graph);
    if (!r.holds) {
      v.report = "Goal derived but no accepted path found";
      return v;
    }
    w.source = r.source;
    w.target = r.target;
    w.path = r.path;
    for (const PathStep& s : r.path) w.word.push_back(Label{s.atom.predicate, s.inverse});
    std::string why;
    if (!replay_witness(database, rules, query, w, &why)) {
      v.report = "witness replay failed: " + why;
      return v;
    }
    v.tag = Verdict::Tag::Entailed;
    v.report = "Goal at chase level " + std::to_string(w.chase_level) + "; path replayed";
    v.witness = std::move(w);
  } catch (const ResourceExhausted& e) {
    v.report = std::string("forward search: ") + e.what();
  }
  return v;
}

Verdict countermodel_search(const Instance& database, const Ruleset& rules, const Query& query,
                            const SearchBudget& budget, const CountermodelOptions& options) {
  Verdict v;
  Deadline deadline(budget.time, budget.stop);
  Query q = query;
  Ruleset r = rules;
  if (q.kind == QueryKind::Hyper) throw ModelError("countermodel search needs a binary query");
  if (q.kind == QueryKind::TwoWay) {
    auto red = reduce_two_way(q, r, signature_of(database));
    q = red.query;
    r = red.rules;
  }
  if (auto s = check_sticky(r); !s.sticky) throw ModelError("ruleset is not sticky: " + s.violation);
  try {
    RewriteOptions ro;
    ro.stop = deadline.token();
    PipelineArtifacts p = build_pipeline(database, r, q, ro);
    CountermodelOptions co = options;
    co.stop = deadline.token();
    CountermodelResult res = build_countermodel(p.dplus, p.rplus, p.dfa, co);
    std::string trail = "quotient loop: " + res.diagnostics;
    if (!res.model) {
      res = brute_force_countermodel(p.dplus, p.rplus, p.dfa, co);
      trail += "; " + res.diagnostics;
    }
    if (res.model) {
      CountermodelCheck check = verify_countermodel(*res.model, p.dplus, p.rplus, p.dfa);
      if (check.ok()) {
        v.tag = Verdict::Tag::NotEntailed;
        v.countermodel = std::move(res.model);
        v.report = trail + "; " + to_string(check);
        return v;
      }
      trail += "; verification failed: " + to_string(check);
    }
    v.report = trail;
  } catch (const ResourceExhausted& e) {
    v.report = std::string("countermodel search: ") + e.what();
  }
  return v;
}

Verdict decide_entailment(const Instance& database, const Ruleset& rules, const Query& query,
                          const DecideOptions& options) {
  if (query.kind == QueryKind::Hyper) throw ModelError("entailment is decided for RPQs and 2RPQs only");
  if (auto s = check_sticky(rules); !s.sticky) throw ModelError("ruleset is not sticky: " + s.violation);
  Query q = query;
  Ruleset r = rules;
  if (q.kind == QueryKind::TwoWay) {
    auto red = reduce_two_way(q, r, signature_of(database));
    q = red.query;
    r = red.rules;
  }

  std::stop_source cancel;
  std::mutex mutex;
  std::optional<Verdict> winner;
  std::string diagnostics[2];
  auto offer = [&](int slot, Verdict v) {
    std::lock_guard lock(mutex);
    if (v.tag != Verdict::Tag::ResourceExhausted) {
      if (!winner) {
        winner = std::move(v);
        cancel.request_stop();
      }
    } else {
      diagnostics[slot] = v.report;
    }
  };
  const double share = std::clamp(options.forward_share, 0.0, 1.0);
  auto total = options.budget;
  auto forward_time = std::chrono::milliseconds(static_cast<int64_t>(total.count() * share));
  auto counter_time = total - forward_time;
  {
    std::jthread forward([&] {
      try {
        offer(0, forward_search(database, r, q, SearchBudget{forward_time, options.max_atoms, cancel.get_token()}));
      } catch (const std::exception& e) {
        offer(0, Verdict{Verdict::Tag::ResourceExhausted, {}, {}, e.what()});
      }
    });
    std::jthread backward([&] {
      try {
        offer(1, countermodel_search(database, r, q, SearchBudget{counter_time, options.max_atoms, cancel.get_token()},
                                     options.countermodel));
      } catch (const std::exception& e) {
        offer(1, Verdict{Verdict::Tag::ResourceExhausted, {}, {}, e.what()});
      }
    });
  }
  if (winner) return *winner;
  Verdict v;
  v.report = "forward: " + diagnostics[0] + " | countermodel: " + diagnostics[1];
  return v;
}

}  // namespace stickyrpq
