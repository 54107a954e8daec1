#pragma once

// A deliberately simple re-implementation of conditional DPO rewriting used
// only as a test oracle. It reads grammar files with nlohmann::json on its
// own, enumerates injective maps by brute force, and deduplicates states by
// exhaustive isomorphism search. Nothing here shares code with the library.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace oracle {

struct NGraph {
  std::vector<std::string> node_id, node_type;
  std::vector<std::string> edge_id, edge_type;
  std::vector<std::size_t> src, tgt;

  std::size_t find(const std::string& id) const {
    for (std::size_t i = 0; i < node_id.size(); ++i)
      if (node_id[i] == id) return i;
    throw std::runtime_error("oracle: unknown node " + id);
  }
};

inline NGraph read_graph(const nlohmann::json& j) {
  NGraph g;
  for (const auto& n : j.value("nodes", nlohmann::json::array())) {
    g.node_id.push_back(n.at("id"));
    g.node_type.push_back(n.at("type"));
  }
  for (const auto& e : j.value("edges", nlohmann::json::array())) {
    g.edge_id.push_back(e.at("id"));
    g.edge_type.push_back(e.at("type"));
    g.src.push_back(g.find(e.at("src")));
    g.tgt.push_back(g.find(e.at("tgt")));
  }
  return g;
}

struct NRule {
  std::string name, family;
  NGraph lhs, rhs;
  std::set<std::string> kept;  // item ids of the interface
  std::vector<NGraph> nacs;    // NAC graphs; L items share ids with N items
};

struct NGrammar {
  NGraph start;
  std::vector<NRule> rules;
};

inline NGrammar read_grammar(const nlohmann::json& doc) {
  NGrammar g;
  g.start = read_graph(doc.at("start"));
  for (const auto& r : doc.at("rules")) {
    NRule rule;
    rule.name = r.at("name");
    rule.family = r.value("family", rule.name);
    rule.lhs = read_graph(r.at("lhs"));
    rule.rhs = read_graph(r.at("rhs"));
    NGraph k = read_graph(r.at("interface"));
    for (auto& id : k.node_id) rule.kept.insert(id);
    for (auto& id : k.edge_id) rule.kept.insert(id);
    for (const auto& n : r.value("nacs", nlohmann::json::array()))
      rule.nacs.push_back(read_graph(n.at("graph")));
    g.rules.push_back(std::move(rule));
  }
  return g;
}

inline NGrammar load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("oracle: cannot open " + path);
  return read_grammar(nlohmann::json::parse(in));
}

// Injective map: node image per pattern node, edge image per pattern edge.
struct NMap {
  std::vector<std::size_t> nodes, edges;
};

// All injective, type-preserving maps P -> H that agree with `fixed`
// (pattern node id -> host node index). Pure brute force.
inline std::vector<NMap> all_maps(const NGraph& p, const NGraph& h,
                                  const std::map<std::string, std::size_t>& fixed_nodes = {},
                                  const std::map<std::string, std::size_t>& fixed_edges = {}) {
  std::vector<NMap> out;
  NMap cur;
  cur.nodes.assign(p.node_id.size(), 0);
  cur.edges.assign(p.edge_id.size(), 0);
  std::vector<bool> used_n(h.node_id.size(), false), used_e(h.edge_id.size(), false);

  auto edges_rec = [&](auto&& self, std::size_t i) -> void {
    if (i == p.edge_id.size()) {
      out.push_back(cur);
      return;
    }
    for (std::size_t c = 0; c < h.edge_id.size(); ++c) {
      if (used_e[c] || h.edge_type[c] != p.edge_type[i]) continue;
      if (h.src[c] != cur.nodes[p.src[i]] || h.tgt[c] != cur.nodes[p.tgt[i]]) continue;
      auto it = fixed_edges.find(p.edge_id[i]);
      if (it != fixed_edges.end() && it->second != c) continue;
      used_e[c] = true;
      cur.edges[i] = c;
      self(self, i + 1);
      used_e[c] = false;
    }
  };
  auto nodes_rec = [&](auto&& self, std::size_t i) -> void {
    if (i == p.node_id.size()) {
      edges_rec(edges_rec, 0);
      return;
    }
    for (std::size_t c = 0; c < h.node_id.size(); ++c) {
      if (used_n[c] || h.node_type[c] != p.node_type[i]) continue;
      auto it = fixed_nodes.find(p.node_id[i]);
      if (it != fixed_nodes.end() && it->second != c) continue;
      used_n[c] = true;
      cur.nodes[i] = c;
      self(self, i + 1);
      used_n[c] = false;
    }
  };
  nodes_rec(nodes_rec, 0);
  return out;
}

inline bool nac_ok(const NRule& r, const NMap& m, const NGraph& host) {
  for (const NGraph& n : r.nacs) {
    std::map<std::string, std::size_t> fn, fe;
    for (std::size_t i = 0; i < r.lhs.node_id.size(); ++i) fn[r.lhs.node_id[i]] = m.nodes[i];
    for (std::size_t i = 0; i < r.lhs.edge_id.size(); ++i) fe[r.lhs.edge_id[i]] = m.edges[i];
    if (!all_maps(n, host, fn, fe).empty()) return false;
  }
  return true;
}

// DPO step with safe naming (created items are named after their type).
inline std::optional<NGraph> fire(const NRule& r, const NMap& m, const NGraph& g) {
  std::vector<bool> del_n(g.node_id.size(), false), del_e(g.edge_id.size(), false);
  for (std::size_t i = 0; i < r.lhs.node_id.size(); ++i)
    if (!r.kept.count(r.lhs.node_id[i])) del_n[m.nodes[i]] = true;
  for (std::size_t i = 0; i < r.lhs.edge_id.size(); ++i)
    if (!r.kept.count(r.lhs.edge_id[i])) del_e[m.edges[i]] = true;
  for (std::size_t e = 0; e < g.edge_id.size(); ++e)
    if (!del_e[e] && (del_n[g.src[e]] || del_n[g.tgt[e]])) return std::nullopt;

  NGraph out;
  std::map<std::size_t, std::size_t> renum;
  for (std::size_t v = 0; v < g.node_id.size(); ++v) {
    if (del_n[v]) continue;
    renum[v] = out.node_id.size();
    out.node_id.push_back(g.node_id[v]);
    out.node_type.push_back(g.node_type[v]);
  }
  for (std::size_t e = 0; e < g.edge_id.size(); ++e) {
    if (del_e[e]) continue;
    out.edge_id.push_back(g.edge_id[e]);
    out.edge_type.push_back(g.edge_type[e]);
    out.src.push_back(renum[g.src[e]]);
    out.tgt.push_back(renum[g.tgt[e]]);
  }
  // Where does each rhs node live in the result?
  std::map<std::string, std::size_t> rhs_pos;
  for (std::size_t i = 0; i < r.rhs.node_id.size(); ++i) {
    const std::string& id = r.rhs.node_id[i];
    if (r.kept.count(id)) {
      rhs_pos[id] = renum[m.nodes[r.lhs.find(id)]];
    } else {
      rhs_pos[id] = out.node_id.size();
      out.node_id.push_back(r.rhs.node_type[i]);
      out.node_type.push_back(r.rhs.node_type[i]);
    }
  }
  for (std::size_t i = 0; i < r.rhs.edge_id.size(); ++i) {
    if (r.kept.count(r.rhs.edge_id[i])) continue;
    out.edge_id.push_back(r.rhs.edge_type[i]);
    out.edge_type.push_back(r.rhs.edge_type[i]);
    out.src.push_back(rhs_pos[r.rhs.node_id[r.rhs.src[i]]]);
    out.tgt.push_back(rhs_pos[r.rhs.node_id[r.rhs.tgt[i]]]);
  }
  return out;
}

// Exhaustive isomorphism test: try every bijection of nodes, then edges.
inline bool isomorphic(const NGraph& a, const NGraph& b) {
  if (a.node_id.size() != b.node_id.size() || a.edge_id.size() != b.edge_id.size()) return false;
  auto maps = all_maps(a, b);
  return !maps.empty();
}

struct NLts {
  std::vector<NGraph> states;
  std::size_t transitions = 0;
  std::set<std::tuple<std::size_t, std::string, std::size_t>> edges;
};

inline std::size_t intern(NLts& lts, const NGraph& g, bool& fresh) {
  for (std::size_t i = 0; i < lts.states.size(); ++i)
    if (isomorphic(lts.states[i], g)) {
      fresh = false;
      return i;
    }
  lts.states.push_back(g);
  fresh = true;
  return lts.states.size() - 1;
}

// Rules sharing a family: for every match of the family's smallest member,
// only the largest member whose match agrees on that smaller lhs fires.
inline NLts explore(const NGrammar& gr) {
  NLts lts;
  bool fresh = false;
  intern(lts, gr.start, fresh);
  std::map<std::string, std::vector<const NRule*>> families;
  std::vector<std::string> order;
  for (const NRule& r : gr.rules) {
    if (!families.count(r.family)) order.push_back(r.family);
    families[r.family].push_back(&r);
  }
  for (auto& [name, members] : families)
    std::stable_sort(members.begin(), members.end(), [](const NRule* x, const NRule* y) {
      return x->lhs.node_id.size() + x->lhs.edge_id.size() > y->lhs.node_id.size() + y->lhs.edge_id.size();
    });

  std::deque<std::size_t> todo{0};
  while (!todo.empty()) {
    std::size_t s = todo.front();
    todo.pop_front();
    const NGraph g = lts.states[s];
    for (const std::string& fam : order) {
      const auto& members = families[fam];
      const NRule* base = members.back();
      for (const NMap& m0 : all_maps(base->lhs, g)) {
        std::map<std::string, std::size_t> fn, fe;
        for (std::size_t i = 0; i < base->lhs.node_id.size(); ++i) fn[base->lhs.node_id[i]] = m0.nodes[i];
        for (std::size_t i = 0; i < base->lhs.edge_id.size(); ++i) fe[base->lhs.edge_id[i]] = m0.edges[i];
        for (const NRule* r : members) {
          auto ms = all_maps(r->lhs, g, fn, fe);
          if (ms.empty()) continue;
          const NMap& m = ms.front();
          if (nac_ok(*r, m, g)) {
            if (auto h = fire(*r, m, g)) {
              std::size_t t = intern(lts, *h, fresh);
              if (fresh) todo.push_back(t);
              ++lts.transitions;
              lts.edges.insert({s, fam, t});
            }
          }
          break;
        }
      }
    }
  }
  return lts;
}

}  // namespace oracle
