#pragma once

// Pushouts, pullbacks, pushout complements, initial pushouts and finite
// colimits of graphs. Results carry the morphisms of the universal cone or
// cocone; these double as provenance tables (which input item became which
// output item).

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <unordered_set>
#include <string>
#include <utility>
#include <vector>

#include "nacforge/graph.hpp"

namespace nacforge {

struct Cospan {
  Graph object;
  Morphism left;   // B → D
  Morphism right;  // C → D
};

struct Span {
  Graph object;
  Morphism left;   // A → B
  Morphism right;  // A → C
};

struct DiagramArrow {
  std::size_t from;
  std::size_t to;
  Morphism map;
};

struct Diagram {
  std::vector<Graph> objects;
  std::vector<DiagramArrow> arrows;
};

struct Colimit {
  Graph object;
  std::vector<Morphism> injections;
};

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  // The smaller index wins, so earlier diagram objects name the class.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent[b] = a;
    else parent[a] = b;
  }
};

inline std::string unique_name(std::set<std::string>& used, std::string name) {
  while (!used.insert(name).second) name += "'";
  return name;
}

}  // namespace detail

// Disjoint union of all objects quotiented by the equivalence generated by
// the arrows. Items are ordered by their first occurrence, so the first
// object's items come first and keep their names.
inline Colimit colimit(const Diagram& d) {
  std::vector<std::size_t> node_off{0}, edge_off{0};
  for (const Graph& g : d.objects) {
    node_off.push_back(node_off.back() + g.node_count());
    edge_off.push_back(edge_off.back() + g.edge_count());
  }
  detail::UnionFind un(node_off.back()), ue(edge_off.back());
  for (const DiagramArrow& a : d.arrows) {
    if (a.map.nodes.size() != d.objects[a.from].node_count() ||
        a.map.edges.size() != d.objects[a.from].edge_count())
      throw Error(ErrorKind::Internal, "colimit: arrow does not match its source object");
    for (Index i = 0; i < a.map.nodes.size(); ++i)
      un.unite(node_off[a.from] + i, node_off[a.to] + a.map.nodes[i]);
    for (Index i = 0; i < a.map.edges.size(); ++i)
      ue.unite(edge_off[a.from] + i, edge_off[a.to] + a.map.edges[i]);
  }

  Colimit out;
  std::set<std::string> used_nodes, used_edges;
  std::vector<Index> node_class(node_off.back(), kNone), edge_class(edge_off.back(), kNone);
  for (std::size_t o = 0; o < d.objects.size(); ++o) {
    const Graph& g = d.objects[o];
    for (Index v = 0; v < g.node_count(); ++v) {
      std::size_t root = un.find(node_off[o] + v);
      if (node_class[root] == kNone)
        node_class[root] = out.object.add_node(detail::unique_name(used_nodes, g.node(v).name), g.node(v).type);
      node_class[node_off[o] + v] = node_class[root];
    }
  }
  for (std::size_t o = 0; o < d.objects.size(); ++o) {
    const Graph& g = d.objects[o];
    for (Index e = 0; e < g.edge_count(); ++e) {
      std::size_t root = ue.find(edge_off[o] + e);
      if (edge_class[root] == kNone) {
        const Edge& ed = g.edge(e);
        edge_class[root] = out.object.add_edge(detail::unique_name(used_edges, ed.name),
                                               node_class[node_off[o] + ed.src],
                                               node_class[node_off[o] + ed.tgt], ed.type);
      }
      edge_class[edge_off[o] + e] = edge_class[root];
    }
  }
  for (std::size_t o = 0; o < d.objects.size(); ++o) {
    Morphism inj;
    for (Index v = 0; v < d.objects[o].node_count(); ++v) inj.nodes.push_back(node_class[node_off[o] + v]);
    for (Index e = 0; e < d.objects[o].edge_count(); ++e) inj.edges.push_back(edge_class[edge_off[o] + e]);
    out.injections.push_back(std::move(inj));
  }
  // Sanity: every arrow must commute with the injections on edge endpoints.
  for (std::size_t o = 0; o < d.objects.size(); ++o)
    if (!is_morphism(d.objects[o], out.object, out.injections[o], false))
      throw Error(ErrorKind::Internal, "colimit: diagram arrows are not graph morphisms");
  return out;
}

namespace detail {

// Pushout of two monos, built directly: B followed by the items of C
// outside g(A). Gives the same graph and injections as the general colimit;
// nullopt when B repeats a name, which the general path renames.
inline std::optional<Cospan> pushout_of_monos(const Graph& a, const Graph& b, const Graph& c, const Morphism& f,
                               const Morphism& g) {
  Cospan out;
  out.object = b;
  out.left = identity(b);
  std::unordered_set<std::string> used_nodes, used_edges;
  auto fresh = [](std::unordered_set<std::string>& used, std::string name) {
    while (!used.insert(name).second) name += "'";
    return name;
  };
  for (const Node& n : b.nodes())
    if (!used_nodes.insert(n.name).second) return std::nullopt;
  for (const Edge& e : b.edges())
    if (!used_edges.insert(e.name).second) return std::nullopt;
  out.right.nodes.assign(c.node_count(), kNone);
  out.right.edges.assign(c.edge_count(), kNone);
  for (Index x = 0; x < a.node_count(); ++x) out.right.nodes[g.nodes[x]] = f.nodes[x];
  for (Index x = 0; x < a.edge_count(); ++x) out.right.edges[g.edges[x]] = f.edges[x];
  for (Index v = 0; v < c.node_count(); ++v)
    if (out.right.nodes[v] == kNone)
      out.right.nodes[v] = out.object.add_node(fresh(used_nodes, c.node(v).name), c.node(v).type);
  for (Index e = 0; e < c.edge_count(); ++e)
    if (out.right.edges[e] == kNone) {
      const Edge& ed = c.edge(e);
      out.right.edges[e] = out.object.add_edge(fresh(used_edges, ed.name), out.right.nodes[ed.src],
                                               out.right.nodes[ed.tgt], ed.type);
    }
  return out;
}

}  // namespace detail

// Pushout of B ←f− A −g→ C. Names from B take priority over names from C.
inline Cospan pushout(const Graph& a, const Graph& b, const Graph& c, const Morphism& f,
                      const Morphism& g) {
  if (is_injective(f) && is_injective(g))
    if (auto direct = detail::pushout_of_monos(a, b, c, f, g)) return std::move(*direct);
  Diagram d;
  d.objects = {b, c, a};
  d.arrows = {{2, 0, f}, {2, 1, g}};
  Colimit col = colimit(d);
  return Cospan{std::move(col.object), std::move(col.injections[0]), std::move(col.injections[1])};
}

// Pullback of B −f→ D ←g− C: all pairs agreeing in D. Items are named after
// their B component.
inline Span pullback(const Graph& b, const Graph& c, const Morphism& f, const Morphism& g) {
  Span out;
  std::map<std::pair<Index, Index>, Index> node_of;
  std::set<std::string> used_nodes, used_edges;
  for (Index x = 0; x < b.node_count(); ++x)
    for (Index y = 0; y < c.node_count(); ++y)
      if (f.nodes[x] == g.nodes[y]) {
        node_of[{x, y}] = out.object.add_node(detail::unique_name(used_nodes, b.node(x).name), b.node(x).type);
        out.left.nodes.push_back(x);
        out.right.nodes.push_back(y);
      }
  for (Index x = 0; x < b.edge_count(); ++x)
    for (Index y = 0; y < c.edge_count(); ++y)
      if (f.edges[x] == g.edges[y]) {
        const Edge& ex = b.edge(x);
        const Edge& ey = c.edge(y);
        out.object.add_edge(detail::unique_name(used_edges, ex.name), node_of.at({ex.src, ey.src}),
                            node_of.at({ex.tgt, ey.tgt}), ex.type);
        out.left.edges.push_back(x);
        out.right.edges.push_back(y);
      }
  return out;
}

struct PushoutComplement {
  Graph object;   // D
  Morphism k;     // K → D
  Morphism g;     // D → G (an inclusion)
};

// Items of G outside m(L \ l(K)); nullopt when an edge of G that survives
// would lose an endpoint (dangling condition). l and m must be monos.
inline std::optional<PushoutComplement> try_pushout_complement(const Graph& k, const Graph& l_graph,
                                                               const Graph& g, const Morphism& l,
                                                               const Morphism& m) {
  ItemSet kept_in_l = image(l, l_graph);
  std::vector<bool> keep_n(g.node_count(), true), keep_e(g.edge_count(), true);
  for (Index v = 0; v < l_graph.node_count(); ++v)
    if (!kept_in_l.nodes[v]) keep_n[m.nodes[v]] = false;
  for (Index e = 0; e < l_graph.edge_count(); ++e)
    if (!kept_in_l.edges[e]) keep_e[m.edges[e]] = false;
  for (Index e = 0; e < g.edge_count(); ++e)
    if (keep_e[e] && (!keep_n[g.edge(e).src] || !keep_n[g.edge(e).tgt])) return std::nullopt;
  Subgraph d = select(g, keep_n, keep_e);
  Morphism back = preimage_table(d.inclusion, g.node_count(), g.edge_count());
  PushoutComplement out{std::move(d.graph), {}, std::move(d.inclusion)};
  Morphism ml = compose(m, l);
  out.k = compose(back, ml);
  (void)k;
  return out;
}

inline PushoutComplement pushout_complement(const Graph& k, const Graph& l_graph, const Graph& g,
                                            const Morphism& l, const Morphism& m) {
  auto pc = try_pushout_complement(k, l_graph, g, l, m);
  if (!pc) throw Error(ErrorKind::DanglingCondition, "deleting the match would leave dangling edges");
  return std::move(*pc);
}

struct InitialPushout {
  Graph border;            // L⁻
  Graph body;              // N⁻
  Morphism shape;          // L⁻ → N⁻
  Morphism border_to_lhs;  // L⁻ → L
  Morphism body_to_nac;    // N⁻ → N
};

// Body: the negative items of n plus the endpoints of negative edges.
// Border: the nodes of L whose images lie in the body.
inline InitialPushout initial_pushout(const Graph& l, const Graph& n_graph, const Morphism& n) {
  ItemSet in_l = image(n, n_graph);
  bool iso = std::all_of(in_l.nodes.begin(), in_l.nodes.end(), [](bool b) { return b; }) &&
             std::all_of(in_l.edges.begin(), in_l.edges.end(), [](bool b) { return b; });
  if (iso) throw Error(ErrorKind::IsoConstraint, "constraint adds nothing to the left-hand side");

  std::vector<bool> body_n(n_graph.node_count()), body_e(n_graph.edge_count());
  for (Index v = 0; v < n_graph.node_count(); ++v) body_n[v] = !in_l.nodes[v];
  for (Index e = 0; e < n_graph.edge_count(); ++e) {
    body_e[e] = !in_l.edges[e];
    if (body_e[e]) body_n[n_graph.edge(e).src] = body_n[n_graph.edge(e).tgt] = true;
  }
  InitialPushout ip;
  Subgraph body = select(n_graph, body_n, body_e);
  ip.body = std::move(body.graph);
  ip.body_to_nac = std::move(body.inclusion);
  Morphism body_pos = preimage_table(ip.body_to_nac, n_graph.node_count(), n_graph.edge_count());

  std::vector<bool> border_n(l.node_count(), false), border_e(l.edge_count(), false);
  for (Index v = 0; v < l.node_count(); ++v) border_n[v] = body_n[n.nodes[v]];
  Subgraph border = select(l, border_n, border_e);
  ip.border = std::move(border.graph);
  ip.border_to_lhs = std::move(border.inclusion);
  for (Index v : ip.border_to_lhs.nodes) ip.shape.nodes.push_back(body_pos.nodes[n.nodes[v]]);
  return ip;
}

// Given a pushout cospan of (f, g) and another cocone x: B → X, y: C → X,
// returns the mediating morphism D → X if it is well defined.
inline std::optional<Morphism> mediate(const Graph& d, const Cospan& po, const Morphism& x,
                                       const Morphism& y) {
  Morphism u;
  u.nodes.assign(d.node_count(), kNone);
  u.edges.assign(d.edge_count(), kNone);
  auto put = [](Index& slot, Index value) {
    if (slot != kNone && slot != value) return false;
    slot = value;
    return true;
  };
  for (Index i = 0; i < po.left.nodes.size(); ++i)
    if (!put(u.nodes[po.left.nodes[i]], x.nodes[i])) return std::nullopt;
  for (Index i = 0; i < po.right.nodes.size(); ++i)
    if (!put(u.nodes[po.right.nodes[i]], y.nodes[i])) return std::nullopt;
  for (Index i = 0; i < po.left.edges.size(); ++i)
    if (!put(u.edges[po.left.edges[i]], x.edges[i])) return std::nullopt;
  for (Index i = 0; i < po.right.edges.size(); ++i)
    if (!put(u.edges[po.right.edges[i]], y.edges[i])) return std::nullopt;
  return u;
}

// Is the square A −f→ B −g2→ D, A −g→ C −f2→ D a pushout?
inline bool is_pushout(const Graph& a, const Graph& b, const Graph& c, const Graph& d,
                       const Morphism& f, const Morphism& g, const Morphism& g2, const Morphism& f2) {
  if (compose(g2, f) != compose(f2, g)) return false;
  Cospan po = pushout(a, b, c, f, g);
  auto u = mediate(po.object, po, g2, f2);
  return u && is_iso(po.object, d, *u);
}

// The union of two subgraphs of a common graph, as a pushout over their
// intersection (the pullback of the two inclusions).
inline Cospan union_over(const Graph& b, const Graph& c, const Morphism& into_b_host,
                         const Morphism& into_c_host) {
  Span inter = pullback(b, c, into_b_host, into_c_host);
  return pushout(inter.object, b, c, inter.left, inter.right);
}

}  // namespace nacforge
