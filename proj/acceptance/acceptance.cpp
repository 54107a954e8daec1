// Acceptance run: one PASS/FAIL line per criterion with its wall time and
// time limit. Exits 0 only when every criterion passes within its limit.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "nacforge/attributed.hpp"
#include "nacforge/encoder.hpp"
#include "nacforge/explorer.hpp"
#include "nacforge/morphism.hpp"
#include "nacforge/serialize.hpp"
#include "oracle/naive_safe.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace nacforge;
using nftest::client_server;
using nftest::client_server_enriched;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<Outcome()> run;
};

struct Named {
  const char* name;
  const char* src;
  const char* tgt;
};

// The enriched client-server type graph as drawn by hand: the original
// seven node types, one complement node per OUT and IN shape, and one
// complement edge per shape.
Graph expected_tg_bar() {
  Graph g;
  for (const char* n : {"C1", "C2", "C3", "M1", "M2", "S1", "S2", "bar(M2,s0)", "bar(M1,s1)", "bar(M1,s2)",
                        "bar(M2,s3)"})
    g.add_node(n);
  const Named edges[] = {
      {"in12", "C1", "M2"},
      {"in21", "C2", "M1"},
      {"in31", "C3", "M1"},
      {"in32", "C3", "M2"},
      {"by1", "M1", "S1"},
      {"by2", "M2", "S2"},
      {"bar(in12,s0)", "C1", "bar(M2,s0)"},
      {"bar(in21,s1)", "C2", "bar(M1,s1)"},
      {"bar(by1,s2)", "bar(M1,s2)", "S1"},
      {"bar(by2,s3)", "bar(M2,s3)", "S2"},
      {"bar(in12,s4)", "C1", "M2"},
      {"bar(in21,s5)", "C2", "M1"},
      {"bar(in31,s6)", "C3", "M1"},
      {"bar(in32,s7)", "C3", "M2"},
  };
  for (const Named& e : edges) g.add_edge(e.name, g.find_node(e.src), g.find_node(e.tgt));
  return g;
}

// Exact match by name: same item counts and every named edge joins the
// same named nodes.
bool same_named_graph(const Graph& expected, const Graph& actual) {
  if (expected.node_count() != actual.node_count() || expected.edge_count() != actual.edge_count()) return false;
  try {
    Morphism m = map_by_name(expected, actual);
    return is_injective(m) && is_morphism(expected, actual, m, false);
  } catch (const Error&) {
    return false;
  }
}

Outcome type_graph_fidelity() {
  const Graph& tg_bar = enrich_type_graph(client_server()).tg_bar;
  bool ok = same_named_graph(expected_tg_bar(), tg_bar);
  return {ok, std::to_string(tg_bar.node_count()) + " node types, " + std::to_string(tg_bar.edge_count()) +
                  " edge types" + (ok ? ", iso to the drawn graph" : ", differs from the drawn graph")};
}

Outcome closure_fidelity() {
  EnrichedTypeGraph etg = enrich_type_graph(client_server());
  Graph closed = invariant_closure(client_server().start, etg);
  const Graph& t = etg.tg_bar;
  Graph expected;
  for (const char* n : {"C1", "C2", "C3", "bar(M2,s0)", "bar(M1,s1)"}) expected.add_node(n, t.find_node(n));
  expected.add_edge("bar(in12,s0)", expected.find_node("C1"), expected.find_node("bar(M2,s0)"),
                    t.find_edge("bar(in12,s0)"));
  expected.add_edge("bar(in21,s1)", expected.find_node("C2"), expected.find_node("bar(M1,s1)"),
                    t.find_edge("bar(in21,s1)"));
  bool ok = isomorphic_typed(expected, closed);
  return {ok, std::to_string(closed.node_count()) + " nodes, " + std::to_string(closed.edge_count()) + " edges"};
}

Outcome family_fidelity() {
  EnrichedGrammar e = enrich_grammar(client_server());
  std::size_t sm_members = 0;
  for (const FamilyView& f : families(e.grammar))
    if (f.name == "sm(S1)") sm_members = f.members.size();
  const Rule* jm = e.grammar.find_rule("jm(C2,M1)bar");
  std::set<std::string> deleted;
  if (jm) {
    ItemSet kept = image(jm->l, jm->lhs);
    for (Index x = 0; x < jm->lhs.edge_count(); ++x)
      if (!kept.edges[x]) deleted.insert(e.etg.tg_bar.edge(jm->lhs.edge(x).type).name);
  }
  bool ok = sm_members == 4 && deleted.count("bar(in21,s1)") && deleted.count("bar(in21,s5)");
  std::string dl;
  for (const std::string& d : deleted) dl += (dl.empty() ? "" : " ") + d;
  return {ok, "sm(S1) family has " + std::to_string(sm_members) + " members; jm(C2,M1) deletes {" + dl + "}"};
}

const EnrichedGrammar& enriched() { return client_server_enriched(); }

const Lts& enriched_lts() {
  static const Lts l = explore(enriched().grammar);
  return l;
}

Outcome invariant_everywhere() {
  InvariantCheck c = check_invariant_reachable(enriched_lts(), enriched().phi);
  return {c.ok() && !enriched_lts().bound_reached,
          std::to_string(c.states) + " reachable states, " + std::to_string(c.violations.size()) + " violations"};
}

Outcome nacs_redundant() {
  RedundancyCheck c = check_nac_redundancy(enriched().grammar, enriched_lts());
  return {c.ok() && c.pairs > 0,
          std::to_string(c.pairs) + " (state, match) pairs, " + std::to_string(c.violations.size()) + " blocked"};
}

// Golden sizes of the client-server state space, fixed by the brute-force
// rewriter.
constexpr std::size_t kGoldenStates = 20, kGoldenTransitions = 30;

Outcome bisimilar_to_nac_free() {
  oracle::NLts naive = oracle::explore(oracle::read_grammar(grammar_to_json(client_server())));
  bool golden = naive.states.size() == kGoldenStates && naive.transitions == kGoldenTransitions;
  EquivCheck c = check_equiv(client_server(), drop_nacs(enriched().grammar));
  bool counts = c.states_a == kGoldenStates && c.transitions_a == kGoldenTransitions &&
                c.states_b == kGoldenStates && c.transitions_b == kGoldenTransitions;
  bool ok = golden && counts && c.functional_forth && c.functional_back && c.fixpoint_bisimilar;
  return {ok, "CG " + std::to_string(c.states_a) + "/" + std::to_string(c.transitions_a) + ", DE " +
                  std::to_string(c.states_b) + "/" + std::to_string(c.transitions_b) + ", oracle " +
                  std::to_string(naive.states.size()) + "/" + std::to_string(naive.transitions) +
                  (c.fixpoint_bisimilar ? ", bisimilar" : ", not bisimilar") +
                  (c.functional_forth && c.functional_back ? " both ways" : "")};
}

Outcome independence_preserved() {
  GrammarMorphism f = build_e(client_server(), enriched());
  MorphismReport m = check_morphism(f, enriched().grammar, client_server());
  if (!m.ok()) return {false, "e is not a grammar morphism (condition " + std::to_string(m.first_failed()) + ")"};
  IndependenceCheck c = check_independence(f, enriched().grammar, client_server(), enriched_lts());
  return {c.ok(), std::to_string(c.pairs) + " consecutive pairs, " + std::to_string(c.independent_source) +
                      " independent, " +
                      std::to_string(c.preservation_violations.size() + c.church_rosser_violations.size()) +
                      " violations, " + std::to_string(c.findings.size()) + " reflection findings"};
}

Outcome property_suites() {
  namespace prop = nftest::prop;
  std::vector<prop::Run> runs;
  runs.push_back(prop::pushout_universal(1001, 150));
  runs.push_back(prop::pushout_direct_vs_colimit(1002, 150));
  runs.push_back(prop::pullback_universal(1003, 100));
  std::size_t independent = 0;
  runs.push_back(prop::local_church_rosser(1004, 300, &independent));
  runs.push_back(prop::closure_round_trip(1005, 150));
  runs.push_back(prop::nac_order_satisfaction(1006, 3));
  runs.push_back(prop::nac_order_encoding(1007, 12));
  std::size_t cases = 0, failed = 0;
  std::string first;
  for (const prop::Run& r : runs) {
    cases += r.cases;
    failed += r.failures.size();
    if (first.empty() && !r.ok()) first = "; first in " + r.name + ": " + r.failures.front();
  }
  return {failed == 0 && cases >= 500 && independent > 0,
          std::to_string(cases) + " cases in " + std::to_string(runs.size()) + " runs, " + std::to_string(failed) +
              " failures" + first};
}

Outcome attributed_equivalence() {
  AttributedGrammar tcr = load_attributed_grammar(nftest::corpus("tcr.json"));
  std::size_t curators = 0;
  for (const Node& n : tcr.start.graph.nodes())
    if (tcr.type_graph.node(n.type).name == "Curator") ++curators;
  CounterEncoding enc = encode_counters(tcr);
  AttrExploreOptions o;
  o.max_steps = 12;
  CounterEquivReport rep = check_counter_encoding(tcr, enc, o);
  return {rep.ok() && curators == 4,
          std::to_string(curators) + " curators, depth 12: " + std::to_string(rep.original_states) + " / " +
              std::to_string(rep.encoded_states) + " states" + (rep.equiv.ok() ? ", bisimilar" : ", not bisimilar") +
              ", " + std::to_string(rep.invariants.violations.size()) + " invariant violations, " +
              std::to_string(rep.non_negative.violations.size()) + " negative rwds"};
}

Outcome majority_boundary() {
  const std::int64_t no_curs = 4;
  bool ok = true;
  std::string row;
  Comparison c = parse_comparison("maj(r, ch) == 1");
  for (std::int64_t votes = 0; votes <= no_curs; ++votes) {
    ReadFn read = [&](const std::string& item, const std::string&) { return item == "r" ? no_curs : votes; };
    bool direct = maj(votes, no_curs) == 1;
    ok = ok && direct == (votes >= 2) && holds(c, read) == direct;
    row += (row.empty() ? "" : " ") + std::to_string(direct ? 1 : 0);
  }
  return {ok, "noCurs = 4, noVotes 0..4 gives maj " + row};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "enriched type graph fidelity", 1, type_graph_fidelity},
      {2, "invariant closure of the start graph", 1, closure_fidelity},
      {3, "rule family fidelity", 1, family_fidelity},
      {4, "invariant holds in every reachable enriched state", 5, invariant_everywhere},
      {5, "enriched NACs never block a match", 5, nacs_redundant},
      {6, "CG bisimilar to the NAC-free enriched grammar", 10, bisimilar_to_nac_free},
      {7, "independence preserved by e", 10, independence_preserved},
      {8, "randomised property suites", 60, property_suites},
      {9, "TCR counter encoding equivalent to depth 12", 120, attributed_equivalence},
      {10, "majority boundary", 1, majority_boundary},
  };
  int failed = 0;
  double total = 0;
  for (const Criterion& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total += secs;
    bool in_time = secs < c.limit_seconds;
    bool pass = out.ok && in_time;
    if (!pass) ++failed;
    std::printf("%s  %2d  %-52s %8.3f s (limit %g s)  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                c.limit_seconds, out.detail.c_str(), in_time ? "" : "; over the time limit");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed in %.3f s\n", static_cast<int>(criteria.size()) - failed, criteria.size(),
              total);
  return failed == 0 ? 0 : 1;
}
