#pragma once

// JSON for the objects the command line writes besides grammars: grammar
// morphisms, invariant formulas and transition systems.
//
// A morphism file names its type span either as "by_name" (the items of the
// source type graph that also occur in the target) or explicitly:
//
//   { "version": "nacforge/1",
//     "type_span": { "tg0": {...type graph...}, "left": {map}, "right": {map} },
//     "rules": { "source rule": "target rule", ... } }

#include <sstream>
#include <string>

#include "nacforge/attributed.hpp"
#include "nacforge/encoder.hpp"
#include "nacforge/explorer.hpp"
#include "nacforge/io.hpp"
#include "nacforge/morphism.hpp"

namespace nacforge {

inline Json morphism_to_json(const GrammarMorphism& f, const Graph& tg1, const Graph& tg2) {
  auto full_map = [](const Morphism& m, const Graph& src, const Graph& tgt) {
    Json nodes = Json::object(), edges = Json::object();
    for (Index i = 0; i < m.nodes.size(); ++i) nodes[src.node(i).name] = tgt.node(m.nodes[i]).name;
    for (Index i = 0; i < m.edges.size(); ++i) edges[src.edge(i).name] = tgt.edge(m.edges[i]).name;
    return Json{{"nodes", nodes}, {"edges", edges}};
  };
  Json j;
  j["version"] = "nacforge/1";
  j["type_span"] = {{"tg0", type_graph_to_json(f.span.tg0)},
                    {"left", full_map(f.span.left, f.span.tg0, tg1)},
                    {"right", full_map(f.span.right, f.span.tg0, tg2)}};
  j["rules"] = f.rule_map;
  return j;
}

inline GrammarMorphism parse_morphism(const Json& j, const ConditionalGrammar& g1, const ConditionalGrammar& g2) {
  try {
    GrammarMorphism f;
    const Json& span = detail::field(j, "type_span", "morphism");
    if (span.is_string()) {
      if (span != "by_name") throw Error(ErrorKind::SchemaError, "morphism: unknown type span " + span.dump());
      f.span = span_by_name(g1.type_graph, g2.type_graph);
    } else {
      f.span.tg0 = parse_type_graph(detail::field(span, "tg0", "type_span"));
      f.span.left = parse_map(&detail::field(span, "left", "type_span"), f.span.tg0, g1.type_graph, "type_span left");
      f.span.right = parse_map(&detail::field(span, "right", "type_span"), f.span.tg0, g2.type_graph, "type_span right");
      if (!is_morphism(f.span.tg0, g1.type_graph, f.span.left, false) || !is_injective(f.span.left))
        throw Error(ErrorKind::NonMonoEmbedding, "type_span: the left leg must be a mono");
      if (!is_morphism(f.span.tg0, g2.type_graph, f.span.right, false))
        throw Error(ErrorKind::SchemaError, "type_span: the right leg is not a graph morphism");
    }
    for (const auto& [from, to] : detail::field(j, "rules", "morphism").items()) {
      if (!g1.find_rule(from)) throw Error(ErrorKind::DanglingReference, "morphism: unknown source rule " + from);
      if (!g2.find_rule(to.get<std::string>()))
        throw Error(ErrorKind::DanglingReference, "morphism: unknown target rule " + to.get<std::string>());
      f.rule_map[from] = to.get<std::string>();
    }
    return f;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::SchemaError, e.what());
  }
}

inline Json invariant_to_json(const InvariantFormula& phi, const Graph& tg_bar) {
  Json clauses = Json::array();
  for (const InvariantClause& c : phi.clauses) {
    Json cj;
    cj["shape"] = c.shape_id;
    cj["border"] = graph_to_json(c.border, tg_bar);
    cj["body"] = graph_to_json(c.body, tg_bar);
    cj["complement"] = graph_to_json(c.complement, tg_bar);
    if (Json m = map_to_json(c.to_body, c.border, c.body); !m.is_null()) cj["to_body"] = m;
    if (Json m = map_to_json(c.to_complement, c.border, c.complement); !m.is_null()) cj["to_complement"] = m;
    clauses.push_back(cj);
  }
  return {{"version", "nacforge/1"},
          {"meaning", "for every occurrence of a border, exactly one of body and complement extends it"},
          {"clauses", clauses}};
}

namespace detail {

template <class State, class GraphJson>
Json lts_json(const BasicLts<State>& lts, GraphJson state_json) {
  Json states = Json::array(), transitions = Json::array();
  for (std::size_t s = 0; s < lts.states.size(); ++s)
    states.push_back({{"id", s}, {"depth", lts.depth[s]}, {"expanded", static_cast<bool>(lts.expanded[s])},
                      {"graph", state_json(lts.states[s])}});
  for (const Transition& t : lts.transitions)
    transitions.push_back(
        {{"from", t.from}, {"rule", t.rule}, {"family", t.family}, {"match", t.digest}, {"to", t.to}});
  return {{"version", "nacforge/1"},   {"initial", lts.initial},    {"bound_reached", lts.bound_reached},
          {"states", states},          {"transitions", transitions}};
}

}  // namespace detail

inline Json lts_to_json(const Lts& lts, const Graph& tg) {
  return detail::lts_json(lts, [&](const Graph& g) { return graph_to_json(g, tg); });
}

inline Json attributed_graph_to_json(const AttributedGraph& g, const Graph& tg) {
  Json j = graph_to_json(g.graph, tg);
  for (std::size_t i = 0; i < j["nodes"].size(); ++i)
    if (!g.node_attrs[i].empty()) j["nodes"][i]["attrs"] = g.node_attrs[i];
  for (std::size_t i = 0; i < j["edges"].size(); ++i)
    if (!g.edge_attrs[i].empty()) j["edges"][i]["attrs"] = g.edge_attrs[i];
  return j;
}

inline Json lts_to_json(const AttrLts& lts, const Graph& tg) {
  return detail::lts_json(lts, [&](const AttributedGraph& g) { return attributed_graph_to_json(g, tg); });
}

// States as points labelled by id, transitions labelled by rule name.
// Frontier states (not expanded) are drawn dashed.
template <class State>
std::string lts_to_dot(const BasicLts<State>& lts, const std::string& name = "LTS") {
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(name) << " {\n";
  for (std::size_t s = 0; s < lts.states.size(); ++s) {
    os << "  s" << s << " [label=\"" << s << "\"";
    if (s == lts.initial) os << " shape=doublecircle";
    if (!lts.expanded[s]) os << " style=dashed";
    os << "];\n";
  }
  for (const Transition& t : lts.transitions)
    os << "  s" << t.from << " -> s" << t.to << " [label=" << detail::dot_quote(t.rule) << "];\n";
  os << "}\n";
  return os.str();
}

}  // namespace nacforge
