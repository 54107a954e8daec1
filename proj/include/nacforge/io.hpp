#pragma once

// JSON grammar files and DOT export.
//
// A grammar file looks like
//
//   { "version": "nacforge/1", "safe": true,
//     "type_graph": { "nodes": [{"id": "C"}], "edges": [{"id": "e", "src": "C", "tgt": "C"}] },
//     "start": { "nodes": [{"id": "c", "type": "C"}], "edges": [] },
//     "rules": [ { "name": "r", "lhs": {...}, "interface": {...}, "rhs": {...},
//                  "l": {"nodes": {"k": "x"}, "edges": {}},      (optional)
//                  "nacs": [ {"id": "n1", "graph": {...}, "n": {...}} ] } ] }
//
// Embeddings l, r and n default to "same id": interface item x goes to the
// item called x. Rules produced by the encoder also carry "family", "note"
// and, for families, "core" (base lhs → member lhs, same default).

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "nacforge/grammar.hpp"
#include "nacforge/shapes.hpp"

namespace nacforge {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::SchemaError, where + ": missing field '" + key + "'");
  return j.at(key);
}

inline std::string text(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) throw Error(ErrorKind::SchemaError, where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline const Json& array_or_empty(const Json& j, const char* key, const std::string& where) {
  static const Json empty = Json::array();
  if (!j.contains(key)) return empty;
  const Json& v = j.at(key);
  if (!v.is_array()) throw Error(ErrorKind::SchemaError, where + ": field '" + key + "' must be an array");
  return v;
}

inline Index lookup_node(const Graph& g, const std::string& id, const std::string& where) {
  Index i = g.find_node(id);
  if (i == kNone) throw Error(ErrorKind::DanglingReference, where + ": unknown node '" + id + "'");
  return i;
}

inline Index lookup_edge(const Graph& g, const std::string& id, const std::string& where) {
  Index i = g.find_edge(id);
  if (i == kNone) throw Error(ErrorKind::DanglingReference, where + ": unknown edge '" + id + "'");
  return i;
}

inline void check_unique_ids(const Graph& g, const std::string& where) {
  std::map<std::string, int> n, e;
  for (const Node& x : g.nodes())
    if (n[x.name]++) throw Error(ErrorKind::SchemaError, where + ": duplicate node id '" + x.name + "'");
  for (const Edge& x : g.edges())
    if (e[x.name]++) throw Error(ErrorKind::SchemaError, where + ": duplicate edge id '" + x.name + "'");
}

}  // namespace detail

inline Graph parse_type_graph(const Json& j) {
  const std::string where = "type_graph";
  Graph tg;
  for (const Json& n : detail::array_or_empty(j, "nodes", where)) tg.add_node(detail::text(n, "id", where));
  detail::check_unique_ids(tg, where);
  for (const Json& e : detail::array_or_empty(j, "edges", where)) {
    std::string id = detail::text(e, "id", where);
    tg.add_edge(id, detail::lookup_node(tg, detail::text(e, "src", where + " edge " + id), where),
                detail::lookup_node(tg, detail::text(e, "tgt", where + " edge " + id), where));
  }
  detail::check_unique_ids(tg, where);
  return tg;
}

inline Graph parse_graph(const Json& j, const Graph& tg, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, where + ": graph must be an object");
  Graph g;
  for (const Json& n : detail::array_or_empty(j, "nodes", where)) {
    std::string id = detail::text(n, "id", where);
    std::string type = detail::text(n, "type", where + " node " + id);
    Index t = tg.find_node(type);
    if (t == kNone) throw Error(ErrorKind::SchemaError, where + ": node '" + id + "' has unknown type '" + type + "'");
    g.add_node(id, t);
  }
  detail::check_unique_ids(g, where);
  for (const Json& e : detail::array_or_empty(j, "edges", where)) {
    std::string id = detail::text(e, "id", where);
    std::string ctx = where + " edge " + id;
    std::string type = detail::text(e, "type", ctx);
    Index t = tg.find_edge(type);
    if (t == kNone) throw Error(ErrorKind::SchemaError, where + ": edge '" + id + "' has unknown type '" + type + "'");
    g.add_edge(id, detail::lookup_node(g, detail::text(e, "src", ctx), ctx),
               detail::lookup_node(g, detail::text(e, "tgt", ctx), ctx), t);
  }
  detail::check_unique_ids(g, where);
  check_typed(g, tg, where);
  return g;
}

// An embedding given as {"nodes": {from: to}, "edges": {from: to}}; items
// not listed map to the item with the same id.
inline Morphism parse_map(const Json* j, const Graph& src, const Graph& tgt, const std::string& where) {
  Morphism m;
  auto pick = [&](const char* kind, const std::string& id) -> std::string {
    if (j && j->contains(kind) && (*j)[kind].contains(id)) {
      const Json& v = (*j)[kind][id];
      if (!v.is_string()) throw Error(ErrorKind::SchemaError, where + ": map targets must be strings");
      return v.get<std::string>();
    }
    return id;
  };
  if (j && !j->is_object()) throw Error(ErrorKind::SchemaError, where + ": map must be an object");
  if (j)
    for (const char* kind : {"nodes", "edges"})
      if (j->contains(kind))
        for (auto it = (*j)[kind].begin(); it != (*j)[kind].end(); ++it) {
          bool ok = std::string(kind) == "nodes" ? src.find_node(it.key()) != kNone : src.find_edge(it.key()) != kNone;
          if (!ok) throw Error(ErrorKind::DanglingReference, where + ": map source '" + it.key() + "' is unknown");
        }
  for (const Node& n : src.nodes()) m.nodes.push_back(detail::lookup_node(tgt, pick("nodes", n.name), where));
  for (const Edge& e : src.edges()) m.edges.push_back(detail::lookup_edge(tgt, pick("edges", e.name), where));
  return m;
}

inline Rule parse_rule(const Json& j, const Graph& tg) {
  std::string name = detail::text(j, "name", "rule");
  Rule r;
  r.name = name;
  r.lhs = parse_graph(detail::field(j, "lhs", name), tg, name + " lhs");
  r.interface = parse_graph(detail::field(j, "interface", name), tg, name + " interface");
  r.rhs = parse_graph(detail::field(j, "rhs", name), tg, name + " rhs");
  r.l = parse_map(j.contains("l") ? &j.at("l") : nullptr, r.interface, r.lhs, name + " l");
  r.r = parse_map(j.contains("r") ? &j.at("r") : nullptr, r.interface, r.rhs, name + " r");
  if (!is_morphism(r.interface, r.lhs, r.l) || !is_injective(r.l))
    throw Error(ErrorKind::NonMonoEmbedding, name + ": l is not a mono");
  if (!is_morphism(r.interface, r.rhs, r.r) || !is_injective(r.r))
    throw Error(ErrorKind::NonMonoEmbedding, name + ": r is not a mono");
  for (const Json& c : detail::array_or_empty(j, "nacs", name)) {
    Constraint k;
    k.id = detail::text(c, "id", name + " nac");
    std::string where = name + " nac " + k.id;
    k.graph = parse_graph(detail::field(c, "graph", where), tg, where);
    k.n = parse_map(c.contains("n") ? &c.at("n") : nullptr, r.lhs, k.graph, where + " n");
    if (!is_morphism(r.lhs, k.graph, k.n) || !is_injective(k.n))
      throw Error(ErrorKind::NonMonoEmbedding, where + ": n is not a mono");
    if (auto pair = incomparable_factorisations(r.lhs, k))
      throw Error(ErrorKind::NonIncrementalNAC,
                  where + ": factorisations through " + pair->first + " and " + pair->second + " are incomparable");
    r.nacs.push_back(std::move(k));
  }
  if (j.contains("family")) r.family = detail::text(j, "family", name);
  if (j.contains("note")) r.note = detail::text(j, "note", name);
  return r;
}

// Fills in `core` for rules in families, mapping the smallest member's lhs
// into each member's lhs.
inline void resolve_cores(ConditionalGrammar& g, const std::map<std::string, Json>& core_maps) {
  for (const FamilyView& f : families(g)) {
    if (f.members.size() < 2) continue;
    const Rule& base = g.rules[f.members.back()];
    for (std::size_t idx : f.members) {
      Rule& r = g.rules[idx];
      auto it = core_maps.find(r.name);
      r.core = parse_map(it == core_maps.end() ? nullptr : &it->second, base.lhs, r.lhs, r.name + " core");
      if (!is_morphism(base.lhs, r.lhs, r.core) || !is_injective(r.core))
        throw Error(ErrorKind::NonMonoEmbedding, r.name + ": core is not a mono");
    }
  }
}

inline ConditionalGrammar parse_grammar(const Json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorKind::SchemaError, "grammar must be a JSON object");
    if (j.contains("version") && j.at("version") != "nacforge/1")
      throw Error(ErrorKind::SchemaError, "unsupported version " + j.at("version").dump());
    ConditionalGrammar g;
    g.safe = j.value("safe", true);
    g.type_graph = parse_type_graph(detail::field(j, "type_graph", "grammar"));
    g.start = parse_graph(detail::field(j, "start", "grammar"), g.type_graph, "start");
    std::map<std::string, Json> cores;
    for (const Json& r : detail::array_or_empty(j, "rules", "grammar")) {
      g.rules.push_back(parse_rule(r, g.type_graph));
      if (r.contains("core")) cores[g.rules.back().name] = r.at("core");
    }
    resolve_cores(g, cores);
    validate_grammar(g);
    return g;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::SchemaError, e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::SchemaError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, path + ": " + e.what());
  }
}

inline ConditionalGrammar load_grammar(const std::string& path) { return parse_grammar(read_json_file(path)); }

// ---------------------------------------------------------------------------

inline Json graph_to_json(const Graph& g, const Graph& tg) {
  Json nodes = Json::array(), edges = Json::array();
  for (const Node& n : g.nodes()) nodes.push_back({{"id", n.name}, {"type", tg.node(n.type).name}});
  for (const Edge& e : g.edges())
    edges.push_back({{"id", e.name}, {"type", tg.edge(e.type).name}, {"src", g.node(e.src).name},
                     {"tgt", g.node(e.tgt).name}});
  return {{"nodes", nodes}, {"edges", edges}};
}

inline Json type_graph_to_json(const Graph& tg) {
  Json nodes = Json::array(), edges = Json::array();
  for (const Node& n : tg.nodes()) nodes.push_back({{"id", n.name}});
  for (const Edge& e : tg.edges())
    edges.push_back({{"id", e.name}, {"src", tg.node(e.src).name}, {"tgt", tg.node(e.tgt).name}});
  return {{"nodes", nodes}, {"edges", edges}};
}

// Writes only the entries that differ from the same-id default; returns
// null when the default reproduces the map.
inline Json map_to_json(const Morphism& m, const Graph& src, const Graph& tgt) {
  Json nodes = Json::object(), edges = Json::object();
  for (Index i = 0; i < m.nodes.size(); ++i)
    if (src.node(i).name != tgt.node(m.nodes[i]).name) nodes[src.node(i).name] = tgt.node(m.nodes[i]).name;
  for (Index i = 0; i < m.edges.size(); ++i)
    if (src.edge(i).name != tgt.edge(m.edges[i]).name) edges[src.edge(i).name] = tgt.edge(m.edges[i]).name;
  if (nodes.empty() && edges.empty()) return nullptr;
  return {{"nodes", nodes}, {"edges", edges}};
}

inline Json rule_to_json(const Rule& r, const Graph& tg, const Rule* base = nullptr) {
  Json j;
  j["name"] = r.name;
  if (!r.family.empty()) j["family"] = r.family;
  if (!r.note.empty()) j["note"] = r.note;
  j["lhs"] = graph_to_json(r.lhs, tg);
  j["interface"] = graph_to_json(r.interface, tg);
  j["rhs"] = graph_to_json(r.rhs, tg);
  if (Json m = map_to_json(r.l, r.interface, r.lhs); !m.is_null()) j["l"] = m;
  if (Json m = map_to_json(r.r, r.interface, r.rhs); !m.is_null()) j["r"] = m;
  if (base && !r.core.nodes.empty())
    if (Json m = map_to_json(r.core, base->lhs, r.lhs); !m.is_null()) j["core"] = m;
  Json nacs = Json::array();
  for (const Constraint& c : r.nacs) {
    Json cj{{"id", c.id}, {"graph", graph_to_json(c.graph, tg)}};
    if (Json m = map_to_json(c.n, r.lhs, c.graph); !m.is_null()) cj["n"] = m;
    nacs.push_back(cj);
  }
  j["nacs"] = nacs;
  return j;
}

inline Json grammar_to_json(const ConditionalGrammar& g) {
  Json j;
  j["version"] = "nacforge/1";
  j["safe"] = g.safe;
  j["type_graph"] = type_graph_to_json(g.type_graph);
  j["start"] = graph_to_json(g.start, g.type_graph);
  Json rules = Json::array();
  std::map<std::string, const Rule*> base;
  for (const FamilyView& f : families(g))
    if (f.members.size() > 1) base[f.name] = &g.rules[f.members.back()];
  for (const Rule& r : g.rules) {
    auto it = base.find(r.family_name());
    rules.push_back(rule_to_json(r, g.type_graph, it == base.end() ? nullptr : it->second));
  }
  j["rules"] = rules;
  return j;
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::SchemaError, "cannot write " + path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// DOT

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string graph_to_dot(const Graph& g, const Graph& tg, const std::string& name = "G") {
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(name) << " {\n";
  for (Index v = 0; v < g.node_count(); ++v)
    os << "  n" << v << " [label=" << detail::dot_quote(g.node(v).name + ":" + tg.node(g.node(v).type).name) << "];\n";
  for (const Edge& e : g.edges())
    os << "  n" << e.src << " -> n" << e.tgt << " [label=" << detail::dot_quote(e.name + ":" + tg.edge(e.type).name)
       << "];\n";
  os << "}\n";
  return os.str();
}

// A rule drawn as one graph: black preserved, blue deleted, green created,
// red forbidden (one cluster per constraint).
inline std::string rule_to_dot(const Rule& r, const Graph& tg) {
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(r.name) << " {\n";
  ItemSet kept_l = image(r.l, r.lhs), kept_r = image(r.r, r.rhs);
  auto label = [&](const std::string& name, Index type) { return detail::dot_quote(name + ":" + tg.node(type).name); };
  for (Index v = 0; v < r.lhs.node_count(); ++v)
    os << "  l" << v << " [label=" << label(r.lhs.node(v).name, r.lhs.node(v).type)
       << " color=" << (kept_l.nodes[v] ? "black" : "blue") << "];\n";
  Morphism r_to_l;  // rhs node → lhs node for preserved nodes
  r_to_l.nodes.assign(r.rhs.node_count(), kNone);
  for (Index k = 0; k < r.r.nodes.size(); ++k) r_to_l.nodes[r.r.nodes[k]] = r.l.nodes[k];
  auto rnode = [&](Index v) { return r_to_l.nodes[v] != kNone ? "l" + std::to_string(r_to_l.nodes[v]) : "r" + std::to_string(v); };
  for (Index v = 0; v < r.rhs.node_count(); ++v)
    if (!kept_r.nodes[v])
      os << "  r" << v << " [label=" << label(r.rhs.node(v).name, r.rhs.node(v).type) << " color=green];\n";
  for (Index e = 0; e < r.lhs.edge_count(); ++e) {
    const Edge& ed = r.lhs.edge(e);
    os << "  l" << ed.src << " -> l" << ed.tgt << " [label=" << detail::dot_quote(ed.name)
       << " color=" << (kept_l.edges[e] ? "black" : "blue") << "];\n";
  }
  for (Index e = 0; e < r.rhs.edge_count(); ++e) {
    if (kept_r.edges[e]) continue;
    const Edge& ed = r.rhs.edge(e);
    os << "  " << rnode(ed.src) << " -> " << rnode(ed.tgt) << " [label=" << detail::dot_quote(ed.name)
       << " color=green];\n";
  }
  for (std::size_t c = 0; c < r.nacs.size(); ++c) {
    const Constraint& k = r.nacs[c];
    ItemSet from_l = image(k.n, k.graph);
    Morphism back = preimage_table(k.n, k.graph.node_count(), k.graph.edge_count());
    auto cnode = [&](Index v) {
      return from_l.nodes[v] ? "l" + std::to_string(back.nodes[v]) : "c" + std::to_string(c) + "_" + std::to_string(v);
    };
    os << "  subgraph " << detail::dot_quote("cluster_" + k.id) << " { label=" << detail::dot_quote(k.id) << ";\n";
    for (Index v = 0; v < k.graph.node_count(); ++v)
      if (!from_l.nodes[v])
        os << "    " << cnode(v) << " [label=" << label(k.graph.node(v).name, k.graph.node(v).type)
           << " color=red];\n";
    os << "  }\n";
    for (Index e = 0; e < k.graph.edge_count(); ++e) {
      if (from_l.edges[e]) continue;
      const Edge& ed = k.graph.edge(e);
      os << "  " << cnode(ed.src) << " -> " << cnode(ed.tgt) << " [label=" << detail::dot_quote(ed.name)
         << " color=red style=dashed];\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace nacforge
