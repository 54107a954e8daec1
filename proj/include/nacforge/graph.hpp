#pragma once

// Finite directed multigraphs whose items carry a type index into a type
// graph, and the morphisms between them.
//
// An untyped graph is a graph typed over the terminal graph (one node, one
// loop): every type index is 0. A type graph is itself such an untyped graph.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nacforge/error.hpp"

namespace nacforge {

using Index = std::uint32_t;
inline constexpr Index kNone = std::numeric_limits<Index>::max();

struct Node {
  std::string name;
  Index type = 0;
};

struct Edge {
  std::string name;
  Index src = 0;
  Index tgt = 0;
  Index type = 0;
};

class Graph {
 public:
  Index add_node(std::string name, Index type = 0) {
    nodes_.push_back(Node{std::move(name), type});
    return static_cast<Index>(nodes_.size() - 1);
  }

  Index add_edge(std::string name, Index src, Index tgt, Index type = 0) {
    if (src >= nodes_.size() || tgt >= nodes_.size())
      throw Error(ErrorKind::DanglingReference,
                  "edge '" + name + "' has an endpoint outside the graph");
    edges_.push_back(Edge{std::move(name), src, tgt, type});
    return static_cast<Index>(edges_.size() - 1);
  }

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }
  const Node& node(Index i) const { return nodes_[i]; }
  const Edge& edge(Index i) const { return edges_[i]; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t size() const { return nodes_.size() + edges_.size(); }
  bool empty() const { return nodes_.empty() && edges_.empty(); }

  Index find_node(std::string_view name) const {
    for (Index i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].name == name) return i;
    return kNone;
  }

  Index find_edge(std::string_view name) const {
    for (Index i = 0; i < edges_.size(); ++i)
      if (edges_[i].name == name) return i;
    return kNone;
  }

  void rename_node(Index i, std::string name) { nodes_[i].name = std::move(name); }
  void rename_edge(Index i, std::string name) { edges_[i].name = std::move(name); }
  void retype_node(Index i, Index type) { nodes_[i].type = type; }
  void retype_edge(Index i, Index type) { edges_[i].type = type; }

  friend bool operator==(const Graph& a, const Graph& b) {
    auto node_eq = [](const Node& x, const Node& y) { return x.name == y.name && x.type == y.type; };
    auto edge_eq = [](const Edge& x, const Edge& y) {
      return x.name == y.name && x.src == y.src && x.tgt == y.tgt && x.type == y.type;
    };
    return std::equal(a.nodes_.begin(), a.nodes_.end(), b.nodes_.begin(), b.nodes_.end(), node_eq) &&
           std::equal(a.edges_.begin(), a.edges_.end(), b.edges_.begin(), b.edges_.end(), edge_eq);
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

// A pair of index maps. Source and target graphs are not stored; every
// function taking a Morphism also takes the graphs it relates.
struct Morphism {
  std::vector<Index> nodes;
  std::vector<Index> edges;

  friend bool operator==(const Morphism&, const Morphism&) = default;
  friend auto operator<=>(const Morphism&, const Morphism&) = default;
};

inline Morphism identity(const Graph& g) {
  Morphism m;
  m.nodes.resize(g.node_count());
  m.edges.resize(g.edge_count());
  std::iota(m.nodes.begin(), m.nodes.end(), Index{0});
  std::iota(m.edges.begin(), m.edges.end(), Index{0});
  return m;
}

// g ∘ f : first f, then g.
inline Morphism compose(const Morphism& g, const Morphism& f) {
  Morphism m;
  m.nodes.reserve(f.nodes.size());
  m.edges.reserve(f.edges.size());
  for (Index x : f.nodes) m.nodes.push_back(g.nodes[x]);
  for (Index x : f.edges) m.edges.push_back(g.edges[x]);
  return m;
}

// The typing morphism G → TG read off the item types.
inline Morphism typing(const Graph& g) {
  Morphism m;
  for (const Node& n : g.nodes()) m.nodes.push_back(n.type);
  for (const Edge& e : g.edges()) m.edges.push_back(e.type);
  return m;
}

// Structure-preserving; when `typed`, also type-preserving.
inline bool is_morphism(const Graph& src, const Graph& tgt, const Morphism& m, bool typed = true) {
  if (m.nodes.size() != src.node_count() || m.edges.size() != src.edge_count()) return false;
  for (Index v = 0; v < src.node_count(); ++v) {
    if (m.nodes[v] >= tgt.node_count()) return false;
    if (typed && src.node(v).type != tgt.node(m.nodes[v]).type) return false;
  }
  for (Index e = 0; e < src.edge_count(); ++e) {
    Index img = m.edges[e];
    if (img >= tgt.edge_count()) return false;
    const Edge& a = src.edge(e);
    const Edge& b = tgt.edge(img);
    if (m.nodes[a.src] != b.src || m.nodes[a.tgt] != b.tgt) return false;
    if (typed && a.type != b.type) return false;
  }
  return true;
}

namespace detail {
inline bool injective(const std::vector<Index>& v) {
  std::vector<Index> s(v);
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) == s.end();
}
}  // namespace detail

inline bool is_injective(const Morphism& m) {
  return detail::injective(m.nodes) && detail::injective(m.edges);
}

inline bool is_iso(const Graph& src, const Graph& tgt, const Morphism& m) {
  return src.node_count() == tgt.node_count() && src.edge_count() == tgt.edge_count() &&
         is_morphism(src, tgt, m) && is_injective(m);
}

// Injective typing is what a safe grammar demands of every graph.
inline bool has_injective_typing(const Graph& g) { return is_injective(typing(g)); }

// Inverse of a mono on its image; kNone outside the image.
inline Morphism preimage_table(const Morphism& m, std::size_t tgt_nodes, std::size_t tgt_edges) {
  Morphism inv;
  inv.nodes.assign(tgt_nodes, kNone);
  inv.edges.assign(tgt_edges, kNone);
  for (Index i = 0; i < m.nodes.size(); ++i) inv.nodes[m.nodes[i]] = i;
  for (Index i = 0; i < m.edges.size(); ++i) inv.edges[m.edges[i]] = i;
  return inv;
}

// Maps items of `src` to the items of `tgt` with the same name. Throws
// when a name is missing; the result is not checked to be a morphism.
inline Morphism map_by_name(const Graph& src, const Graph& tgt) {
  Morphism m;
  for (const Node& n : src.nodes()) {
    Index i = tgt.find_node(n.name);
    if (i == kNone) throw Error(ErrorKind::DanglingReference, "no node named '" + n.name + "'");
    m.nodes.push_back(i);
  }
  for (const Edge& e : src.edges()) {
    Index i = tgt.find_edge(e.name);
    if (i == kNone) throw Error(ErrorKind::DanglingReference, "no edge named '" + e.name + "'");
    m.edges.push_back(i);
  }
  return m;
}

// Subgraph induced by a selection of nodes and edges. Selected edges must
// have selected endpoints. Returns the inclusion into `g` as well.
struct Subgraph {
  Graph graph;
  Morphism inclusion;
};

inline Subgraph select(const Graph& g, const std::vector<bool>& keep_nodes,
                       const std::vector<bool>& keep_edges) {
  Subgraph out;
  std::vector<Index> renum(g.node_count(), kNone);
  for (Index v = 0; v < g.node_count(); ++v) {
    if (!keep_nodes[v]) continue;
    renum[v] = out.graph.add_node(g.node(v).name, g.node(v).type);
    out.inclusion.nodes.push_back(v);
  }
  for (Index e = 0; e < g.edge_count(); ++e) {
    if (!keep_edges[e]) continue;
    const Edge& ed = g.edge(e);
    if (renum[ed.src] == kNone || renum[ed.tgt] == kNone)
      throw Error(ErrorKind::Internal, "selected edge '" + ed.name + "' lacks an endpoint");
    out.graph.add_edge(ed.name, renum[ed.src], renum[ed.tgt], ed.type);
    out.inclusion.edges.push_back(e);
  }
  return out;
}

// Image of a morphism as node/edge membership vectors over the target.
struct ItemSet {
  std::vector<bool> nodes;
  std::vector<bool> edges;
};

inline ItemSet image(const Morphism& m, const Graph& tgt) {
  ItemSet s{std::vector<bool>(tgt.node_count(), false), std::vector<bool>(tgt.edge_count(), false)};
  for (Index v : m.nodes) s.nodes[v] = true;
  for (Index e : m.edges) s.edges[e] = true;
  return s;
}

inline std::string describe(const Graph& g, const Graph* type_graph = nullptr) {
  std::ostringstream os;
  auto tname = [&](Index t, bool node) -> std::string {
    if (!type_graph) return std::to_string(t);
    return node ? type_graph->node(t).name : type_graph->edge(t).name;
  };
  os << "{";
  for (std::size_t i = 0; i < g.node_count(); ++i)
    os << (i ? ", " : "") << g.node(i).name << ":" << tname(g.node(i).type, true);
  os << " | ";
  for (std::size_t i = 0; i < g.edge_count(); ++i) {
    const Edge& e = g.edge(i);
    os << (i ? ", " : "") << e.name << ":" << tname(e.type, false) << "(" << g.node(e.src).name
       << "->" << g.node(e.tgt).name << ")";
  }
  os << "}";
  return os.str();
}

}  // namespace nacforge
