#pragma once

// Rules, constraints and conditional grammars.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "nacforge/graph.hpp"

namespace nacforge {

// A negative application condition n: L → N. The left-hand side L is the
// one of the rule owning the constraint.
struct Constraint {
  std::string id;
  Graph graph;  // N
  Morphism n;   // L → N
};

struct Rule {
  std::string name;
  Graph lhs, interface, rhs;
  Morphism l, r;  // K → L, K → R
  std::vector<Constraint> nacs;

  // Rule families. Members of one family share `family` (the name of the
  // rule they were derived from) and are stored largest first; `core` maps
  // the lhs of the family's smallest member into this member's lhs.
  std::string family;
  Morphism core;
  std::string note;

  const std::string& family_name() const { return family.empty() ? name : family; }
};

struct ConditionalGrammar {
  Graph type_graph;
  Graph start;
  std::vector<Rule> rules;
  bool safe = true;

  const Rule* find_rule(const std::string& name) const {
    for (const Rule& r : rules)
      if (r.name == name) return &r;
    return nullptr;
  }
};

// Checks that `g` is a well-typed instance of `tg`: type indices in range
// and edge endpoints typed by the endpoints of the edge type.
inline void check_typed(const Graph& g, const Graph& tg, const std::string& what) {
  for (const Node& n : g.nodes())
    if (n.type >= tg.node_count())
      throw Error(ErrorKind::SchemaError, what + ": node '" + n.name + "' has an unknown type");
  for (const Edge& e : g.edges()) {
    if (e.type >= tg.edge_count())
      throw Error(ErrorKind::SchemaError, what + ": edge '" + e.name + "' has an unknown type");
    const Edge& t = tg.edge(e.type);
    if (g.node(e.src).type != t.src || g.node(e.tgt).type != t.tgt)
      throw Error(ErrorKind::SchemaError,
                  what + ": edge '" + e.name + "' connects nodes whose types do not fit '" + t.name + "'");
  }
}

inline void validate_rule(const Rule& r, const Graph& tg, bool safe) {
  check_typed(r.lhs, tg, r.name + " lhs");
  check_typed(r.interface, tg, r.name + " interface");
  check_typed(r.rhs, tg, r.name + " rhs");
  if (!is_morphism(r.interface, r.lhs, r.l) || !is_injective(r.l))
    throw Error(ErrorKind::NonMonoEmbedding, r.name + ": interface → lhs is not a mono");
  if (!is_morphism(r.interface, r.rhs, r.r) || !is_injective(r.r))
    throw Error(ErrorKind::NonMonoEmbedding, r.name + ": interface → rhs is not a mono");
  for (const Constraint& c : r.nacs) {
    check_typed(c.graph, tg, r.name + " constraint " + c.id);
    if (!is_morphism(r.lhs, c.graph, c.n) || !is_injective(c.n))
      throw Error(ErrorKind::NonMonoEmbedding, r.name + ": constraint " + c.id + " is not a mono");
  }
  if (safe && !(has_injective_typing(r.lhs) && has_injective_typing(r.rhs)))
    throw Error(ErrorKind::SchemaError, r.name + ": rule graphs must be safely typed");
}

inline void validate_grammar(const ConditionalGrammar& g) {
  check_typed(g.start, g.type_graph, "start graph");
  if (g.safe && !has_injective_typing(g.start))
    throw Error(ErrorKind::SchemaError, "start graph is not safely typed");
  std::map<std::string, int> seen;
  for (const Rule& r : g.rules) {
    if (seen[r.name]++) throw Error(ErrorKind::SchemaError, "duplicate rule name '" + r.name + "'");
    validate_rule(r, g.type_graph, g.safe);
  }
}

// Family members grouped by family name, in order of first appearance.
struct FamilyView {
  std::string name;
  std::vector<std::size_t> members;  // indices into grammar.rules, largest first
};

inline std::vector<FamilyView> families(const ConditionalGrammar& g) {
  std::vector<FamilyView> out;
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < g.rules.size(); ++i) {
    const std::string& f = g.rules[i].family_name();
    auto it = at.find(f);
    if (it == at.end()) {
      at[f] = out.size();
      out.push_back({f, {i}});
    } else {
      out[it->second].members.push_back(i);
    }
  }
  for (FamilyView& fv : out)
    std::stable_sort(fv.members.begin(), fv.members.end(), [&](std::size_t a, std::size_t b) {
      return g.rules[a].lhs.size() > g.rules[b].lhs.size();
    });
  return out;
}

inline ConditionalGrammar drop_nacs(ConditionalGrammar g) {
  for (Rule& r : g.rules) r.nacs.clear();
  return g;
}

}  // namespace nacforge
