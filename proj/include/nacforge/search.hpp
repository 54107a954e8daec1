#pragma once

// Backtracking enumeration of typed graph morphisms pattern → host.
//
// Nodes are assigned before edges. Pre-assigned items (a partial morphism
// with kNone holes) are honoured, which is how extension questions such as
// NAC satisfaction ("does this match extend to N?") are asked.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "nacforge/graph.hpp"

namespace nacforge {

struct SearchOptions {
  bool injective = true;
  bool typed = true;
};

namespace detail {

class MorphismSearch {
 public:
  MorphismSearch(const Graph& p, const Graph& h, const Morphism& partial, SearchOptions opt)
      : p_(p), h_(h), opt_(opt) {
    cur_.nodes.assign(p.node_count(), kNone);
    cur_.edges.assign(p.edge_count(), kNone);
    if (!partial.nodes.empty()) cur_.nodes = partial.nodes;
    if (!partial.edges.empty()) cur_.edges = partial.edges;
    cur_.nodes.resize(p.node_count(), kNone);
    cur_.edges.resize(p.edge_count(), kNone);
    used_n_.assign(h.node_count(), 0);
    used_e_.assign(h.edge_count(), 0);
    for (Index e = 0; e < h.edge_count(); ++e)
      between_[{h.edge(e).src, h.edge(e).tgt}].push_back(e);
    out_deg_.assign(h.node_count(), 0);
    in_deg_.assign(h.node_count(), 0);
    for (const Edge& e : h.edges()) {
      ++out_deg_[e.src];
      ++in_deg_[e.tgt];
    }
    p_out_.assign(p.node_count(), 0);
    p_in_.assign(p.node_count(), 0);
    for (const Edge& e : p.edges()) {
      ++p_out_[e.src];
      ++p_in_[e.tgt];
    }
  }

  // Calls visit(m) for every morphism; visit returns false to stop.
  void run(const std::function<bool(const Morphism&)>& visit) {
    if (!check_fixed()) return;
    order_nodes();
    visit_ = &visit;
    stop_ = false;
    assign_node(0);
  }

 private:
  bool check_fixed() {
    for (Index v = 0; v < p_.node_count(); ++v) {
      Index t = cur_.nodes[v];
      if (t == kNone) continue;
      if (t >= h_.node_count()) return false;
      if (opt_.typed && p_.node(v).type != h_.node(t).type) return false;
      if (opt_.injective && used_n_[t]++) return false;
    }
    for (Index e = 0; e < p_.edge_count(); ++e) {
      Index t = cur_.edges[e];
      if (t == kNone) continue;
      if (t >= h_.edge_count()) return false;
      const Edge& pe = p_.edge(e);
      const Edge& he = h_.edge(t);
      if (opt_.typed && pe.type != he.type) return false;
      if (cur_.nodes[pe.src] != kNone && cur_.nodes[pe.src] != he.src) return false;
      if (cur_.nodes[pe.tgt] != kNone && cur_.nodes[pe.tgt] != he.tgt) return false;
      // A fixed edge pins its endpoints.
      for (auto [pv, hv] : {std::pair{pe.src, he.src}, std::pair{pe.tgt, he.tgt}}) {
        if (cur_.nodes[pv] == kNone) {
          if (opt_.typed && p_.node(pv).type != h_.node(hv).type) return false;
          if (opt_.injective && used_n_[hv]++) return false;
          cur_.nodes[pv] = hv;
        }
      }
      if (opt_.injective && used_e_[t]++) return false;
    }
    return true;
  }

  // Free nodes in decreasing connectivity to already-ordered nodes, ties
  // broken by degree and then index, so the search is deterministic.
  void order_nodes() {
    std::vector<bool> placed(p_.node_count(), false);
    for (Index v = 0; v < p_.node_count(); ++v) placed[v] = cur_.nodes[v] != kNone;
    std::vector<int> link(p_.node_count(), 0);
    for (const Edge& e : p_.edges()) {
      if (placed[e.src]) ++link[e.tgt];
      if (placed[e.tgt]) ++link[e.src];
    }
    for (;;) {
      Index best = kNone;
      for (Index v = 0; v < p_.node_count(); ++v) {
        if (placed[v]) continue;
        if (best == kNone || link[v] > link[best] ||
            (link[v] == link[best] && p_out_[v] + p_in_[v] > p_out_[best] + p_in_[best]))
          best = v;
      }
      if (best == kNone) break;
      placed[best] = true;
      order_.push_back(best);
      for (const Edge& e : p_.edges()) {
        if (e.src == best) ++link[e.tgt];
        if (e.tgt == best) ++link[e.src];
      }
    }
  }

  // Every pattern edge between assigned nodes must still have a candidate.
  bool edges_feasible(Index v) const {
    for (const Edge& e : p_.edges()) {
      if (e.src != v && e.tgt != v) continue;
      Index a = cur_.nodes[e.src], b = cur_.nodes[e.tgt];
      if (a == kNone || b == kNone) continue;
      auto it = between_.find({a, b});
      if (it == between_.end()) return false;
      bool any = false;
      for (Index he : it->second)
        if (!opt_.typed || h_.edge(he).type == e.type) {
          any = true;
          break;
        }
      if (!any) return false;
    }
    return true;
  }

  void assign_node(std::size_t k) {
    if (stop_) return;
    if (k == order_.size()) {
      assign_edge(0);
      return;
    }
    Index v = order_[k];
    for (Index c = 0; c < h_.node_count() && !stop_; ++c) {
      if (opt_.typed && h_.node(c).type != p_.node(v).type) continue;
      if (opt_.injective) {
        if (used_n_[c]) continue;
        if (out_deg_[c] < p_out_[v] || in_deg_[c] < p_in_[v]) continue;
      }
      cur_.nodes[v] = c;
      if (edges_feasible(v)) {
        if (opt_.injective) used_n_[c] = 1;
        assign_node(k + 1);
        if (opt_.injective) used_n_[c] = 0;
      }
      cur_.nodes[v] = kNone;
    }
  }

  void assign_edge(Index e) {
    if (stop_) return;
    // Edges pinned by the caller are already in place.
    while (e < p_.edge_count() && cur_.edges[e] != kNone) ++e;
    if (e == p_.edge_count()) {
      if (!(*visit_)(cur_)) stop_ = true;
      return;
    }
    const Edge& pe = p_.edge(e);
    auto it = between_.find({cur_.nodes[pe.src], cur_.nodes[pe.tgt]});
    if (it == between_.end()) return;
    for (Index c : it->second) {
      if (stop_) return;
      if (opt_.typed && h_.edge(c).type != pe.type) continue;
      if (opt_.injective && used_e_[c]) continue;
      cur_.edges[e] = c;
      if (opt_.injective) used_e_[c] = 1;
      assign_edge(e + 1);
      if (opt_.injective) used_e_[c] = 0;
      cur_.edges[e] = kNone;
    }
  }

  const Graph& p_;
  const Graph& h_;
  SearchOptions opt_;
  Morphism cur_;
  std::vector<int> used_n_, used_e_;
  std::map<std::pair<Index, Index>, std::vector<Index>> between_;
  std::vector<int> out_deg_, in_deg_, p_out_, p_in_;
  std::vector<Index> order_;
  const std::function<bool(const Morphism&)>* visit_ = nullptr;
  bool stop_ = false;
};

}  // namespace detail

// Enumerates morphisms pattern → host extending `partial` (empty vectors or
// kNone entries mean "unassigned"). `visit` returns false to stop early.
inline void for_each_morphism(const Graph& pattern, const Graph& host, const Morphism& partial,
                              const std::function<bool(const Morphism&)>& visit,
                              SearchOptions opt = {}) {
  detail::MorphismSearch s(pattern, host, partial, opt);
  s.run(visit);
}

inline std::optional<Morphism> find_morphism(const Graph& pattern, const Graph& host,
                                             const Morphism& partial = {}, SearchOptions opt = {}) {
  std::optional<Morphism> found;
  for_each_morphism(pattern, host, partial, [&](const Morphism& m) {
    found = m;
    return false;
  }, opt);
  return found;
}

// All monos, sorted so that callers see a canonical order independent of
// the internal search heuristics.
inline std::vector<Morphism> find_monos(const Graph& pattern, const Graph& host,
                                        const Morphism& partial = {}) {
  std::vector<Morphism> out;
  for_each_morphism(pattern, host, partial, [&](const Morphism& m) {
    out.push_back(m);
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

inline std::optional<Morphism> find_mono(const Graph& pattern, const Graph& host,
                                         const Morphism& partial = {}) {
  return find_morphism(pattern, host, partial);
}

// Partial morphism that pins pattern items through `via` (pattern ← shared)
// onto `target` (shared → host): the usual "extend m along n" setup.
inline Morphism pin_along(const Graph& pattern, const Morphism& via, const Morphism& target) {
  Morphism partial;
  partial.nodes.assign(pattern.node_count(), kNone);
  partial.edges.assign(pattern.edge_count(), kNone);
  for (Index i = 0; i < via.nodes.size(); ++i) partial.nodes[via.nodes[i]] = target.nodes[i];
  for (Index i = 0; i < via.edges.size(); ++i) partial.edges[via.edges[i]] = target.edges[i];
  return partial;
}

inline bool isomorphic_typed(const Graph& a, const Graph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  return find_mono(a, b).has_value();
}

}  // namespace nacforge
