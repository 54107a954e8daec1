#pragma once

// Incrementality of constraints and the six shapes an incremental
// constraint over plain graphs can take.
//
//   IN   one border node, a new node with an edge into it
//   OUT  one border node, a new node with an edge out of it
//   E    two border nodes, a new edge between them
//   L    one border node, a new loop on it
//   N    no border, a new isolated node
//   NL   no border, a new node carrying a loop

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nacforge/constructions.hpp"
#include "nacforge/grammar.hpp"
#include "nacforge/iso.hpp"

namespace nacforge {

enum class ShapeKind { In, Out, E, Loop, Node, NodeLoop };

inline const char* to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::In: return "IN";
    case ShapeKind::Out: return "OUT";
    case ShapeKind::E: return "E";
    case ShapeKind::Loop: return "L";
    case ShapeKind::Node: return "N";
    case ShapeKind::NodeLoop: return "NL";
  }
  return "?";
}

struct TypedShape {
  std::string id;
  ShapeKind kind{};
  Graph border;     // L⁻, discrete
  Graph body;       // N⁻
  Morphism shape;   // L⁻ → N⁻
  std::vector<std::pair<std::string, std::string>> origins;  // (rule, constraint id)
  std::string key;  // typed-iso dedup key

  // The unique negative edge, for the kinds that have one.
  Index negative_edge() const { return body.edge_count() == 1 ? 0 : kNone; }
};

namespace detail {

// Intermediate subgraphs n(L) ⊆ X ⊆ N as bitmasks over the negative items
// (nodes first, then edges).
struct Intermediates {
  std::vector<Index> neg_nodes, neg_edges;
  std::vector<std::uint64_t> masks;
};

inline Intermediates intermediates(const Graph& n_graph, const Morphism& n) {
  Intermediates out;
  ItemSet in_l = image(n, n_graph);
  for (Index v = 0; v < n_graph.node_count(); ++v)
    if (!in_l.nodes[v]) out.neg_nodes.push_back(v);
  for (Index e = 0; e < n_graph.edge_count(); ++e)
    if (!in_l.edges[e]) out.neg_edges.push_back(e);
  const std::size_t k = out.neg_nodes.size() + out.neg_edges.size();
  if (k > 20) throw Error(ErrorKind::PreconditionViolated, "constraint too large for exhaustive incrementality check");
  std::vector<int> node_bit(n_graph.node_count(), -1);
  for (std::size_t i = 0; i < out.neg_nodes.size(); ++i) node_bit[out.neg_nodes[i]] = static_cast<int>(i);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    bool closed = true;
    for (std::size_t j = 0; j < out.neg_edges.size() && closed; ++j) {
      if (!(mask >> (out.neg_nodes.size() + j) & 1)) continue;
      const Edge& e = n_graph.edge(out.neg_edges[j]);
      for (Index end : {e.src, e.tgt})
        if (node_bit[end] >= 0 && !(mask >> node_bit[end] & 1)) closed = false;
    }
    if (closed) out.masks.push_back(mask);
  }
  return out;
}

}  // namespace detail

// Two intermediate subgraphs neither of which contains the other, if any.
// Each is reported as the list of negative item names it contains.
inline std::optional<std::pair<std::string, std::string>> incomparable_factorisations(const Graph& lhs,
                                                                                      const Constraint& c) {
  (void)lhs;
  detail::Intermediates im = detail::intermediates(c.graph, c.n);
  auto describe_mask = [&](std::uint64_t m) {
    std::string s = "{";
    bool first = true;
    for (std::size_t i = 0; i < im.neg_nodes.size(); ++i)
      if (m >> i & 1) {
        s += (first ? "" : ",") + c.graph.node(im.neg_nodes[i]).name;
        first = false;
      }
    for (std::size_t j = 0; j < im.neg_edges.size(); ++j)
      if (m >> (im.neg_nodes.size() + j) & 1) {
        s += (first ? "" : ",") + c.graph.edge(im.neg_edges[j]).name;
        first = false;
      }
    return s + "}";
  };
  for (std::size_t a = 0; a < im.masks.size(); ++a)
    for (std::size_t b = a + 1; b < im.masks.size(); ++b) {
      std::uint64_t x = im.masks[a], y = im.masks[b];
      if ((x & y) != x && (x & y) != y) return std::pair{describe_mask(x), describe_mask(y)};
    }
  return std::nullopt;
}

inline bool is_incremental(const Graph& lhs, const Constraint& c) {
  return !incomparable_factorisations(lhs, c).has_value();
}

inline TypedShape classify(const Graph& lhs, const Constraint& c) {
  InitialPushout ip = initial_pushout(lhs, c.graph, c.n);
  TypedShape s;
  const std::size_t nb = ip.border.node_count();
  const std::size_t neg_nodes = ip.body.node_count() - nb;
  const std::size_t neg_edges = ip.body.edge_count();
  std::vector<bool> is_border(ip.body.node_count(), false);
  for (Index v : ip.shape.nodes) is_border[v] = true;
  auto fail = [&]() {
    return Error(ErrorKind::UnclassifiableShape, "constraint " + c.id + " has no incremental shape");
  };
  if (neg_edges > 1 || neg_nodes > 1) throw fail();
  if (nb == 1 && neg_nodes == 1 && neg_edges == 1) {
    const Edge& e = ip.body.edge(0);
    if (e.src == e.tgt) throw fail();
    s.kind = is_border[e.tgt] ? ShapeKind::In : ShapeKind::Out;
  } else if (nb == 2 && neg_nodes == 0 && neg_edges == 1) {
    s.kind = ShapeKind::E;
  } else if (nb == 1 && neg_nodes == 0 && neg_edges == 1) {
    s.kind = ShapeKind::Loop;
  } else if (nb == 0 && neg_nodes == 1 && neg_edges == 0) {
    s.kind = ShapeKind::Node;
  } else if (nb == 0 && neg_nodes == 1 && neg_edges == 1) {
    s.kind = ShapeKind::NodeLoop;
  } else {
    throw fail();
  }
  std::vector<std::string> labels;
  for (Index v = 0; v < ip.body.node_count(); ++v)
    labels.push_back(std::to_string(ip.body.node(v).type) + (is_border[v] ? "*" : ""));
  s.key = std::string(to_string(s.kind)) + ":" + canonical_key(ip.body, labels);
  s.border = std::move(ip.border);
  s.body = std::move(ip.body);
  s.shape = std::move(ip.shape);
  return s;
}

// Distinct typed shapes of all constraints, ids s0, s1, ... in order of
// first appearance.
inline std::vector<TypedShape> shapes_of(const ConditionalGrammar& g) {
  std::vector<TypedShape> out;
  for (const Rule& r : g.rules)
    for (const Constraint& c : r.nacs) {
      TypedShape s = classify(r.lhs, c);
      auto it = std::find_if(out.begin(), out.end(), [&](const TypedShape& t) { return t.key == s.key; });
      if (it == out.end()) {
        s.id = "s" + std::to_string(out.size());
        s.origins.emplace_back(r.name, c.id);
        out.push_back(std::move(s));
      } else {
        it->origins.emplace_back(r.name, c.id);
      }
    }
  return out;
}

}  // namespace nacforge
