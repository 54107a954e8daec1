#pragma once

// Randomised property runs over graphs with at most four nodes, shared by
// the property suite and the acceptance binary. Each run takes a seed and a
// case count and reports how many cases it checked and which failed.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "nacforge/attributed.hpp"
#include "nacforge/engine.hpp"
#include "support.hpp"

namespace nftest::prop {

using namespace nacforge;
using Rng = std::mt19937;

struct Run {
  std::string name;
  std::size_t cases = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// Untyped graph with nodes v0, v1, ... and edges e0, e1, ... between
// random endpoints (loops and parallel edges allowed).
inline Graph random_graph(Rng& rng, std::size_t max_nodes, std::size_t max_edges, std::size_t min_nodes = 0) {
  Graph g;
  std::size_t n = pick(rng, min_nodes, max_nodes);
  for (std::size_t v = 0; v < n; ++v) g.add_node("v" + std::to_string(v));
  if (n == 0) return g;
  std::size_t m = pick(rng, 0, max_edges);
  for (std::size_t e = 0; e < m; ++e)
    g.add_edge("e" + std::to_string(e), static_cast<Index>(pick(rng, 0, n - 1)),
               static_cast<Index>(pick(rng, 0, n - 1)));
  return g;
}

inline std::optional<Morphism> random_morphism(Rng& rng, const Graph& a, const Graph& b, bool injective) {
  std::vector<Morphism> all = all_morphisms(a, b, injective);
  if (all.empty()) return std::nullopt;
  return all[pick(rng, 0, all.size() - 1)];
}

// A random subgraph of `g`, returned with its inclusion.
inline Subgraph random_subgraph(Rng& rng, const Graph& g) {
  std::vector<bool> kn(g.node_count()), ke(g.edge_count());
  for (Index v = 0; v < g.node_count(); ++v) kn[v] = coin(rng, 0.7);
  for (Index e = 0; e < g.edge_count(); ++e) ke[e] = kn[g.edge(e).src] && kn[g.edge(e).tgt] && coin(rng, 0.6);
  return select(g, kn, ke);
}

// Is there an iso w: x.object → y.object with w ∘ x.left = y.left and
// w ∘ x.right = y.right?
inline bool same_cospan(const Cospan& x, const Cospan& y) {
  if (x.object.node_count() != y.object.node_count() || x.object.edge_count() != y.object.edge_count())
    return false;
  for (const Morphism& w : all_morphisms(x.object, y.object, true))
    if (compose(w, x.left) == y.left && compose(w, x.right) == y.right) return true;
  return false;
}

// A random untyped rule L ← K → R: K is a subgraph of L, and R adds up to
// two nodes and two edges to K.
inline Rule random_rule(Rng& rng, const std::string& name) {
  Rule r;
  r.name = name;
  r.lhs = random_graph(rng, 3, 2, 1);
  Subgraph k = random_subgraph(rng, r.lhs);
  r.interface = k.graph;
  r.l = k.inclusion;
  r.rhs = r.interface;
  std::size_t extra = pick(rng, 0, 2);
  for (std::size_t v = 0; v < extra; ++v) r.rhs.add_node("new" + std::to_string(v));
  if (r.rhs.node_count() > 0) {
    std::size_t edges = pick(rng, 0, 2);
    for (std::size_t e = 0; e < edges; ++e)
      r.rhs.add_edge("ne" + std::to_string(e), static_cast<Index>(pick(rng, 0, r.rhs.node_count() - 1)),
                     static_cast<Index>(pick(rng, 0, r.rhs.node_count() - 1)));
  }
  r.r = identity(r.interface);
  return r;
}

// Applies `r` at a random match of `host` for which the dangling condition
// holds.
inline std::optional<DerivationStep> random_step(Rng& rng, const Rule& r, const Graph& host, std::size_t step) {
  std::vector<Morphism> ms = find_matches(r, host);
  std::shuffle(ms.begin(), ms.end(), rng);
  ApplyOptions opt;
  opt.step = step;
  for (const Morphism& m : ms)
    if (auto s = try_apply(r, m, host, opt)) return s;
  return std::nullopt;
}

inline Run pushout_universal(std::uint32_t seed, std::size_t cases) {
  Rng rng(seed);
  Run run{"pushout universal property", 0, {}};
  while (run.cases < cases) {
    Graph a = random_graph(rng, 2, 1);
    Graph b = random_graph(rng, 3, 2, 1);
    Graph c = random_graph(rng, 3, 2, 1);
    bool mono = coin(rng);
    auto f = random_morphism(rng, a, b, mono);
    auto g = random_morphism(rng, a, c, mono);
    if (!f || !g) continue;
    ++run.cases;
    Cospan po = pushout(a, b, c, *f, *g);
    Graph x = random_graph(rng, 2, 2, 1);
    bool ok = is_morphism(b, po.object, po.left) && is_morphism(c, po.object, po.right) &&
              compose(po.left, *f) == compose(po.right, *g) &&
              pushout_universal_against(a, b, c, *f, *g, po, x);
    if (!ok) run.failures.push_back("B: " + describe(b) + " C: " + describe(c) + " X: " + describe(x));
  }
  return run;
}

// The direct pushout of two monos against the general colimit.
inline Run pushout_direct_vs_colimit(std::uint32_t seed, std::size_t cases) {
  Rng rng(seed);
  Run run{"direct pushout of monos equals colimit", 0, {}};
  while (run.cases < cases) {
    Graph a = random_graph(rng, 3, 2);
    Graph b = random_graph(rng, 4, 3);
    Graph c = random_graph(rng, 4, 3);
    auto f = random_morphism(rng, a, b, true);
    auto g = random_morphism(rng, a, c, true);
    if (!f || !g) continue;
    ++run.cases;
    auto direct = detail::pushout_of_monos(a, b, c, *f, *g);
    Diagram d;
    d.objects = {b, c, a};
    d.arrows = {{2, 0, *f}, {2, 1, *g}};
    Colimit col = colimit(d);
    Cospan general{col.object, col.injections[0], col.injections[1]};
    if (!direct || !same_cospan(*direct, general))
      run.failures.push_back("A: " + describe(a) + " B: " + describe(b) + " C: " + describe(c));
  }
  return run;
}

inline Run pullback_universal(std::uint32_t seed, std::size_t cases) {
  Rng rng(seed);
  Run run{"pullback universal property", 0, {}};
  while (run.cases < cases) {
    Graph d = random_graph(rng, 3, 2, 1);
    Graph b = random_graph(rng, 3, 2);
    Graph c = random_graph(rng, 3, 2);
    auto f = random_morphism(rng, b, d, false);
    auto g = random_morphism(rng, c, d, false);
    if (!f || !g) continue;
    ++run.cases;
    Span pb = pullback(b, c, *f, *g);
    Graph x = random_graph(rng, 2, 2, 1);
    bool ok = is_morphism(pb.object, b, pb.left) && is_morphism(pb.object, c, pb.right) &&
              compose(*f, pb.left) == compose(*g, pb.right) && pullback_universal_against(b, c, *f, *g, pb, x);
    if (!ok) run.failures.push_back("B: " + describe(b) + " C: " + describe(c) + " D: " + describe(d));
  }
  return run;
}

// Two consecutive random steps; when they are sequentially independent the
// swapped order ends in an isomorphic graph. `independent` receives how
// many of the pairs were independent.
inline Run local_church_rosser(std::uint32_t seed, std::size_t cases, std::size_t* independent = nullptr) {
  Rng rng(seed);
  Run run{"local Church-Rosser", 0, {}};
  std::size_t indep = 0;
  for (std::size_t attempt = 0; attempt < 40 * cases && run.cases < cases; ++attempt) {
    Graph host = random_graph(rng, 4, 4, 1);
    Rule p1 = random_rule(rng, "p1"), p2 = random_rule(rng, "p2");
    auto s1 = random_step(rng, p1, host, 0);
    if (!s1) continue;
    auto s2 = random_step(rng, p2, s1->after, 1);
    if (!s2) continue;
    ++run.cases;
    IndependenceWitness w = check_sequential_independence(p1, *s1, p2, *s2);
    if (!w.independent) continue;
    ++indep;
    bool ok = w.first && w.second && isomorphic_typed(w.second->after, s2->after) &&
              is_morphism(p2.lhs, w.first->before, w.first->match) &&
              is_morphism(p1.lhs, w.second->before, w.second->match);
    if (!ok) run.failures.push_back("G0: " + describe(host) + " H: " + describe(s2->after));
  }
  if (independent) *independent = indep;
  return run;
}

// Random subgraphs of the client-server type graph: closing and restricting
// again gives the graph back, the closure satisfies the invariant, and
// closing twice changes nothing.
inline Run closure_round_trip(std::uint32_t seed, std::size_t cases) {
  Rng rng(seed);
  Run run{"closure round trip", 0, {}};
  const EnrichedGrammar& e = client_server_enriched();
  Graph full = as_instance(client_server().type_graph);
  for (; run.cases < cases; ++run.cases) {
    Graph g = random_subgraph(rng, full).graph;
    Graph closed = invariant_closure(g, e.etg);
    bool ok = isomorphic_typed(restrict_to_tg(closed, e.etg), g) && eval_invariant(closed, e.phi).ok() &&
              isomorphic_typed(invariant_closure(closed, e.etg), closed);
    if (!ok) run.failures.push_back(describe(g));
  }
  return run;
}

inline const AttributedGrammar& tcr() {
  static const AttributedGrammar g = load_attributed_grammar(corpus("tcr.json"));
  return g;
}

// Reachable TCR graphs against the rules with several constraints, each
// match judged under shuffled constraint lists.
inline Run nac_order_satisfaction(std::uint32_t seed, std::size_t shuffles_per_match) {
  Rng rng(seed);
  Run run{"constraint order: satisfaction", 0, {}};
  AttrExploreOptions o;
  o.max_steps = 5;
  AttrLts lts = explore_attributed(tcr(), o);
  for (const AttrRule& ar : tcr().rules) {
    if (ar.rule.nacs.size() < 2) continue;
    for (const AttributedGraph& s : lts.states)
      for (const Morphism& m : find_matches(ar.rule, s.graph)) {
        bool base = !violated_constraint(ar.rule, m, s.graph).has_value();
        Rule shuffled = ar.rule;
        for (std::size_t t = 0; t < shuffles_per_match; ++t) {
          std::shuffle(shuffled.nacs.begin(), shuffled.nacs.end(), rng);
          ++run.cases;
          if (!violated_constraint(shuffled, m, s.graph).has_value() != base)
            run.failures.push_back(ar.rule.name + " at a match in " + describe(s.graph));
        }
      }
  }
  return run;
}

// The counter encoding of TCR with every rule's constraints shuffled: the
// same types, the same counters and the same bounded state space.
inline Run nac_order_encoding(std::uint32_t seed, std::size_t cases) {
  Rng rng(seed);
  Run run{"constraint order: counter encoding", 0, {}};
  CounterEncoding reference = encode_counters(tcr());
  AttrExploreOptions o;
  o.max_steps = 4;
  AttrLts ref_lts = explore_attributed(reference.grammar, o);
  for (; run.cases < cases; ++run.cases) {
    AttributedGrammar g = tcr();
    for (AttrRule& r : g.rules) std::shuffle(r.rule.nacs.begin(), r.rule.nacs.end(), rng);
    CounterEncoding enc = encode_counters(g);
    AttrLts lts = explore_attributed(enc.grammar, o);
    bool ok = enc.invariants.size() == reference.invariants.size() &&
              enc.nac_counters.size() == reference.nac_counters.size() &&
              enc.grammar.type_graph == reference.grammar.type_graph && lts.keys == ref_lts.keys &&
              lts.transitions.size() == ref_lts.transitions.size() && check_counter_encoding(g, enc, o).ok();
    if (!ok) run.failures.push_back("shuffle " + std::to_string(run.cases));
  }
  return run;
}

}  // namespace nftest::prop
