#pragma once

// Isomorphism keys for typed graphs.
//
// Two keys are offered. safe_key is exact only for graphs with injective
// typing (every item is determined by its type), where it is just the
// sorted list of types. canonical_key works for any labelled multigraph:
// colour refinement followed by individualisation, keeping the smallest
// certificate over all leaves of the search tree.

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "nacforge/graph.hpp"

namespace nacforge {

inline std::string safe_key(const Graph& g) {
  std::vector<Index> n, e;
  for (const Node& x : g.nodes()) n.push_back(x.type);
  for (const Edge& x : g.edges()) e.push_back(x.type);
  std::sort(n.begin(), n.end());
  std::sort(e.begin(), e.end());
  std::ostringstream os;
  for (Index t : n) os << t << ',';
  os << '|';
  for (Index t : e) os << t << ',';
  return os.str();
}

namespace detail {

inline std::vector<int> rank_strings(const std::vector<std::string>& labels) {
  std::vector<std::string> sorted(labels);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> out;
  for (const auto& s : labels)
    out.push_back(static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), s) - sorted.begin()));
  return out;
}

class Canonizer {
 public:
  Canonizer(const Graph& g, std::vector<int> node_lab, std::vector<int> edge_lab)
      : g_(g), node_lab_(std::move(node_lab)), edge_lab_(std::move(edge_lab)), incident_(g.node_count()) {
    for (Index e = 0; e < g.edge_count(); ++e) {
      incident_[g.edge(e).src].push_back(e);
      if (g.edge(e).tgt != g.edge(e).src) incident_[g.edge(e).tgt].push_back(e);
    }
  }

  std::string run() {
    std::vector<int> colour = node_lab_;
    normalise(colour);
    refine(colour);
    search(colour);
    // Text form: node labels, then src:tgt:label triples after a bar.
    std::ostringstream os;
    std::size_t i = 0;
    for (; i < g_.node_count(); ++i) os << best_[i] << ' ';
    os << '|';
    for (; i < best_.size(); i += 3) os << best_[i] << ':' << best_[i + 1] << ':' << best_[i + 2] << ' ';
    return os.str();
  }

 private:
  // Renumber colours densely, preserving their order.
  static void normalise(std::vector<int>& c) {
    std::vector<int> s(c);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (int& x : c) x = static_cast<int>(std::lower_bound(s.begin(), s.end(), x) - s.begin());
  }

  static int count_colours(const std::vector<int>& c) {
    return c.empty() ? 0 : *std::max_element(c.begin(), c.end()) + 1;
  }

  // Split colour classes by neighbourhood signatures until stable. The new
  // colour orders first by old colour, so refinement never reorders cells.
  void refine(std::vector<int>& colour) const {
    const std::size_t n = g_.node_count();
    for (;;) {
      int before = count_colours(colour);
      std::vector<std::vector<int>> sig(n);
      for (std::size_t v = 0; v < n; ++v) sig[v].push_back(colour[v]);
      std::vector<std::vector<std::tuple<int, int, int>>> nb(n);
      for (Index e = 0; e < g_.edge_count(); ++e) {
        const Edge& ed = g_.edge(e);
        nb[ed.src].emplace_back(0, edge_lab_[e], colour[ed.tgt]);
        nb[ed.tgt].emplace_back(1, edge_lab_[e], colour[ed.src]);
      }
      for (std::size_t v = 0; v < n; ++v) {
        std::sort(nb[v].begin(), nb[v].end());
        for (auto [d, l, c] : nb[v]) {
          sig[v].push_back(d);
          sig[v].push_back(l);
          sig[v].push_back(c);
        }
      }
      std::vector<std::vector<int>> uniq(sig);
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (std::size_t v = 0; v < n; ++v)
        colour[v] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), sig[v]) - uniq.begin());
      if (count_colours(colour) == before) return;
    }
  }

  // Node labels in colour order, then the sorted edge triples.
  std::vector<int> certificate(const std::vector<int>& colour) const {
    std::vector<int> cert;
    cert.reserve(g_.node_count() + 3 * g_.edge_count());
    std::vector<std::size_t> order(g_.node_count());
    for (std::size_t v = 0; v < order.size(); ++v) order[colour[v]] = v;
    for (std::size_t i = 0; i < order.size(); ++i) cert.push_back(node_lab_[order[i]]);
    std::vector<std::tuple<int, int, int>> es;
    for (Index e = 0; e < g_.edge_count(); ++e)
      es.emplace_back(colour[g_.edge(e).src], colour[g_.edge(e).tgt], edge_lab_[e]);
    std::sort(es.begin(), es.end());
    for (auto [s, t, l] : es) {
      cert.push_back(s);
      cert.push_back(t);
      cert.push_back(l);
    }
    return cert;
  }

  // Whether swapping v and w maps the labelled graph onto itself. Only edges
  // at v or w can move.
  bool twins(Index v, Index w) const {
    if (node_lab_[v] != node_lab_[w]) return false;
    std::vector<std::tuple<Index, Index, int>> before, after;
    auto swap = [&](Index x) { return x == v ? w : x == w ? v : x; };
    for (Index x : {v, w})
      for (Index e : incident_[x]) {
        const Edge& ed = g_.edge(e);
        if (x == w && (ed.src == v || ed.tgt == v)) continue;  // already seen from v
        before.emplace_back(ed.src, ed.tgt, edge_lab_[e]);
        after.emplace_back(swap(ed.src), swap(ed.tgt), edge_lab_[e]);
      }
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    return before == after;
  }

  void search(const std::vector<int>& colour) {
    const int k = count_colours(colour);
    if (k == static_cast<int>(g_.node_count())) {
      std::vector<int> cert = certificate(colour);
      if (!found_ || cert < best_) best_ = std::move(cert);
      found_ = true;
      return;
    }
    // First non-singleton cell in colour order.
    std::vector<int> size(k, 0);
    for (int c : colour) ++size[c];
    int cell = 0;
    while (size[cell] == 1) ++cell;
    std::vector<Index> tried;
    for (std::size_t v = 0; v < colour.size(); ++v) {
      if (colour[v] != cell) continue;
      // A twin of a tried node leads to the same certificates: the swap is
      // an automorphism fixing every individualised node.
      if (std::any_of(tried.begin(), tried.end(), [&](Index u) { return twins(u, static_cast<Index>(v)); })) continue;
      tried.push_back(static_cast<Index>(v));
      // Individualise v: it keeps the cell's colour, the rest move up one.
      std::vector<int> next(colour.size());
      for (std::size_t w = 0; w < colour.size(); ++w)
        next[w] = 2 * colour[w] + ((colour[w] == cell && w != v) ? 1 : 0);
      normalise(next);
      refine(next);
      search(next);
    }
  }

  const Graph& g_;
  std::vector<int> node_lab_, edge_lab_;
  std::vector<std::vector<Index>> incident_;
  std::vector<int> best_;
  bool found_ = false;
};

}  // namespace detail

// Canonical key of a labelled graph. Labels default to type indices.
inline std::string canonical_key(const Graph& g, std::vector<std::string> node_labels = {},
                                 std::vector<std::string> edge_labels = {}) {
  if (node_labels.empty())
    for (const Node& n : g.nodes()) node_labels.push_back(std::to_string(n.type));
  if (edge_labels.empty())
    for (const Edge& e : g.edges()) edge_labels.push_back(std::to_string(e.type));
  // Labels are ranked jointly with their text so keys compare across graphs.
  std::ostringstream header;
  std::vector<std::string> nl_sorted(node_labels), el_sorted(edge_labels);
  std::sort(nl_sorted.begin(), nl_sorted.end());
  std::sort(el_sorted.begin(), el_sorted.end());
  nl_sorted.erase(std::unique(nl_sorted.begin(), nl_sorted.end()), nl_sorted.end());
  el_sorted.erase(std::unique(el_sorted.begin(), el_sorted.end()), el_sorted.end());
  for (const auto& s : nl_sorted) header << s << ';';
  header << '/';
  for (const auto& s : el_sorted) header << s << ';';
  header << '#';
  detail::Canonizer c(g, detail::rank_strings(node_labels), detail::rank_strings(edge_labels));
  return header.str() + c.run();
}

inline bool isomorphic(const Graph& a, const Graph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  return canonical_key(a) == canonical_key(b);
}

}  // namespace nacforge
