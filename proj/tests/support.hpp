#pragma once

// Shared fixtures for the test suites: corpus grammars loaded once, a small
// graph builder, and an exhaustive checker for the pushout universal
// property.

#include <functional>
#include <initializer_list>
#include <string>
#include <tuple>
#include <vector>

#include "nacforge/constructions.hpp"
#include "nacforge/encoder.hpp"
#include "nacforge/io.hpp"
#include "nacforge/search.hpp"

namespace nftest {

using namespace nacforge;

inline std::string corpus(const std::string& file) { return std::string(NACFORGE_GRAMMAR_DIR) + "/" + file; }

inline const ConditionalGrammar& client_server() {
  static const ConditionalGrammar g = load_grammar(corpus("clientserver.json"));
  return g;
}

inline const EnrichedGrammar& client_server_enriched() {
  static const EnrichedGrammar e = enrich_grammar(client_server());
  return e;
}

inline const Rule& rule(const ConditionalGrammar& g, const std::string& name) {
  const Rule* r = g.find_rule(name);
  if (!r) throw Error(ErrorKind::DanglingReference, "test: no rule " + name);
  return *r;
}

// Graph literal: nodes as (name, type), edges as (name, src, tgt, type)
// with endpoints given by node name.
struct NodeSpec {
  std::string name;
  Index type = 0;
};
struct EdgeSpec {
  std::string name, src, tgt;
  Index type = 0;
};

inline Graph make_graph(std::initializer_list<NodeSpec> nodes, std::initializer_list<EdgeSpec> edges = {}) {
  Graph g;
  for (const NodeSpec& n : nodes) g.add_node(n.name, n.type);
  for (const EdgeSpec& e : edges) g.add_edge(e.name, g.find_node(e.src), g.find_node(e.tgt), e.type);
  return g;
}

// A type graph read as an instance of itself.
inline Graph as_instance(const Graph& tg) {
  Graph g;
  for (Index v = 0; v < tg.node_count(); ++v) g.add_node(tg.node(v).name, v);
  for (Index e = 0; e < tg.edge_count(); ++e) g.add_edge(tg.edge(e).name, tg.edge(e).src, tg.edge(e).tgt, e);
  return g;
}

inline std::vector<Morphism> all_morphisms(const Graph& a, const Graph& b, bool injective = false) {
  std::vector<Morphism> out;
  SearchOptions opt;
  opt.injective = injective;
  for_each_morphism(a, b, {}, [&](const Morphism& m) {
    out.push_back(m);
    return true;
  }, opt);
  return out;
}

// Every untyped graph (type 0 everywhere) with at most `max_nodes` nodes and
// at most `max_edges` edges, up to the order edges are listed in.
inline std::vector<Graph> small_graphs(std::size_t max_nodes, std::size_t max_edges) {
  std::vector<Graph> out;
  for (std::size_t n = 0; n <= max_nodes; ++n) {
    std::vector<std::pair<Index, Index>> slots;
    for (Index s = 0; s < n; ++s)
      for (Index t = 0; t < n; ++t) slots.emplace_back(s, t);
    std::function<void(Graph&, std::size_t, std::size_t)> grow = [&](Graph& g, std::size_t from, std::size_t left) {
      out.push_back(g);
      if (left == 0) return;
      for (std::size_t i = from; i < slots.size(); ++i) {
        Graph h = g;
        h.add_edge("e" + std::to_string(h.edge_count()), slots[i].first, slots[i].second);
        grow(h, i, left - 1);
      }
    };
    Graph g;
    for (std::size_t v = 0; v < n; ++v) g.add_node("v" + std::to_string(v));
    grow(g, 0, max_edges);
  }
  return out;
}

// For a cospan claimed to be the pushout of B ←f− A −g→ C: every cocone
// into `x` factors through it in exactly one way.
inline bool pushout_universal_against(const Graph& a, const Graph& b, const Graph& c, const Morphism& f,
                                      const Morphism& g, const Cospan& po, const Graph& x) {
  (void)a;  // only the legs f and g matter
  std::vector<Morphism> from_d = all_morphisms(po.object, x);
  for (const Morphism& u : all_morphisms(b, x))
    for (const Morphism& v : all_morphisms(c, x)) {
      if (compose(u, f) != compose(v, g)) continue;
      int mediating = 0;
      for (const Morphism& w : from_d)
        if (compose(w, po.left) == u && compose(w, po.right) == v) ++mediating;
      if (mediating != 1) return false;
    }
  return true;
}

// For a span claimed to be the pullback of B −f→ D ←g− C: every cone from
// `x` factors through it in exactly one way.
inline bool pullback_universal_against(const Graph& b, const Graph& c, const Morphism& f, const Morphism& g,
                                       const Span& pb, const Graph& x) {
  std::vector<Morphism> into_a = all_morphisms(x, pb.object);
  for (const Morphism& u : all_morphisms(x, b))
    for (const Morphism& v : all_morphisms(x, c)) {
      if (compose(f, u) != compose(g, v)) continue;
      int mediating = 0;
      for (const Morphism& w : into_a)
        if (compose(pb.left, w) == u && compose(pb.right, w) == v) ++mediating;
      if (mediating != 1) return false;
    }
  return true;
}

}  // namespace nftest
