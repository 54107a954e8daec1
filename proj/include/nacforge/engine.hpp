#pragma once

// Double-pushout rewriting with negative application conditions.

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nacforge/constructions.hpp"
#include "nacforge/grammar.hpp"
#include "nacforge/search.hpp"

namespace nacforge {

// All six morphisms of the double-pushout diagram together with its graphs.
// The rule's own l and r complete the picture.
struct DerivationStep {
  std::string rule;
  Graph before;    // G
  Graph context;   // D
  Graph after;     // H
  Morphism match;      // L → G
  Morphism k;          // K → D
  Morphism g;          // D → G
  Morphism h;          // D → H
  Morphism comatch;    // R → H
};

struct ApplyOptions {
  bool safe = false;          // name created items after their type; reject duplicates
  const Graph* type_graph = nullptr;  // needed for safe naming
  std::size_t step = 0;       // used in fresh names outside safe mode
  bool check_nacs = true;
};

inline std::vector<Morphism> find_matches(const Rule& rule, const Graph& host) {
  return find_monos(rule.lhs, host);
}

// True iff no mono q: N → host with q ∘ n = match.
inline bool satisfies(const Morphism& match, const Constraint& c, const Graph& host) {
  Morphism partial = pin_along(c.graph, c.n, match);
  return !find_mono(c.graph, host, partial).has_value();
}

inline std::optional<std::string> violated_constraint(const Rule& rule, const Morphism& match,
                                                      const Graph& host) {
  for (const Constraint& c : rule.nacs)
    if (!satisfies(match, c, host)) return c.id;
  return std::nullopt;
}

// Sound check for n ⊨ n2 over a shared lhs L: a mono N → N2 commuting with
// both constraint morphisms means every occurrence of N2 yields one of N.
inline bool subsumes(const Graph& lhs, const Constraint& n, const Graph& lhs2, const Constraint& n2) {
  if (!(lhs == lhs2))
    throw Error(ErrorKind::PreconditionViolated, "subsumption compares constraints over the same lhs");
  Morphism partial = pin_along(n.graph, n.n, n2.n);
  return find_mono(n.graph, n2.graph, partial).has_value();
}

inline std::string match_digest(const Graph& pattern, const Graph& host, const Morphism& m) {
  std::vector<std::string> parts;
  for (Index i = 0; i < m.nodes.size(); ++i)
    parts.push_back("n:" + pattern.node(i).name + "->" + host.node(m.nodes[i]).name);
  for (Index i = 0; i < m.edges.size(); ++i)
    parts.push_back("e:" + pattern.edge(i).name + "->" + host.edge(m.edges[i]).name);
  std::sort(parts.begin(), parts.end());
  std::ostringstream os;
  for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? "," : "") << parts[i];
  return os.str();
}

namespace detail {

inline void name_created_items(Graph& h, const Cospan& po, const Rule& rule, const ApplyOptions& opt) {
  ItemSet from_context = image(po.left, h);
  for (Index i = 0; i < po.right.nodes.size(); ++i) {
    Index v = po.right.nodes[i];
    if (from_context.nodes[v]) continue;
    h.rename_node(v, opt.safe ? opt.type_graph->node(h.node(v).type).name
                              : rule.name + "#" + std::to_string(opt.step) + "#" + rule.rhs.node(i).name);
  }
  for (Index i = 0; i < po.right.edges.size(); ++i) {
    Index e = po.right.edges[i];
    if (from_context.edges[e]) continue;
    h.rename_edge(e, opt.safe ? opt.type_graph->edge(h.edge(e).type).name
                              : rule.name + "#" + std::to_string(opt.step) + "#" + rule.rhs.edge(i).name);
  }
}

}  // namespace detail

// Builds the DPO diagram; nullopt when a NAC is violated or the dangling
// condition fails. `why` receives the reason when given.
inline std::optional<DerivationStep> try_apply(const Rule& rule, const Morphism& match, const Graph& host,
                                               const ApplyOptions& opt = {}, std::string* why = nullptr) {
  if (opt.check_nacs)
    if (auto bad = violated_constraint(rule, match, host)) {
      if (why) *why = "NacViolated(" + *bad + ")";
      return std::nullopt;
    }
  auto pc = try_pushout_complement(rule.interface, rule.lhs, host, rule.l, match);
  if (!pc) {
    if (why) *why = "DanglingCondition";
    return std::nullopt;
  }
  Cospan po = pushout(rule.interface, pc->object, rule.rhs, pc->k, rule.r);
  if (opt.safe && !opt.type_graph) throw Error(ErrorKind::Internal, "safe application needs the type graph");
  detail::name_created_items(po.object, po, rule, opt);
  if (opt.safe && !has_injective_typing(po.object))
    throw Error(ErrorKind::UnsafeState, rule.name + " would create a second item of an existing type");
  DerivationStep s;
  s.rule = rule.name;
  s.before = host;
  s.match = match;
  s.context = std::move(pc->object);
  s.k = std::move(pc->k);
  s.g = std::move(pc->g);
  s.after = std::move(po.object);
  s.h = std::move(po.left);
  s.comatch = std::move(po.right);
  return s;
}

inline DerivationStep apply(const Rule& rule, const Morphism& match, const Graph& host,
                            const ApplyOptions& opt = {}) {
  if (!is_morphism(rule.lhs, host, match) || !is_injective(match))
    throw Error(ErrorKind::PreconditionViolated, "match of " + rule.name + " is not a mono");
  std::string why;
  auto s = try_apply(rule, match, host, opt, &why);
  if (!s) {
    if (why.rfind("NacViolated", 0) == 0) throw Error(ErrorKind::NacViolated, rule.name + ": " + why);
    throw Error(ErrorKind::DanglingCondition, rule.name + ": deleting the match leaves dangling edges");
  }
  return std::move(*s);
}

// The bottom span G ← D → H of a step, read as a rule.
inline Rule derived_rule(const DerivationStep& s) {
  Rule r;
  r.name = s.rule + "@derived";
  r.lhs = s.before;
  r.interface = s.context;
  r.rhs = s.after;
  r.l = s.g;
  r.r = s.h;
  return r;
}

// The result of swapping two consecutive steps, when they are independent.
struct IndependenceWitness {
  bool independent = false;
  std::string reason;
  std::optional<DerivationStep> first;   // p2 applied to G0
  std::optional<DerivationStep> second;  // p1 applied afterwards
};

inline IndependenceWitness check_sequential_independence(const Rule& p1, const DerivationStep& s1,
                                                         const Rule& p2, const DerivationStep& s2,
                                                         const ApplyOptions& opt = {}) {
  if (!(s1.after == s2.before))
    throw Error(ErrorKind::NotConsecutive, s1.rule + " and " + s2.rule + " are not consecutive");
  IndependenceWitness w;
  // j: L2 → D1 with h1 ∘ j = m2.
  Morphism h1_inv = preimage_table(s1.h, s1.after.node_count(), s1.after.edge_count());
  Morphism j = compose(h1_inv, s2.match);
  if (std::count(j.nodes.begin(), j.nodes.end(), kNone) || std::count(j.edges.begin(), j.edges.end(), kNone)) {
    w.reason = "the second step uses items created by the first";
    return w;
  }
  // i: R1 → D2 with g2 ∘ i = m1*.
  Morphism g2_inv = preimage_table(s2.g, s2.before.node_count(), s2.before.edge_count());
  Morphism i = compose(g2_inv, s1.comatch);
  if (std::count(i.nodes.begin(), i.nodes.end(), kNone) || std::count(i.edges.begin(), i.edges.end(), kNone)) {
    w.reason = "the second step deletes items produced or preserved by the first";
    return w;
  }
  Morphism m2_swapped = compose(s1.g, j);
  ApplyOptions o = opt;
  std::string why;
  auto t1 = try_apply(p2, m2_swapped, s1.before, o, &why);
  if (!t1) {
    w.reason = "the second rule is not applicable first: " + why;
    return w;
  }
  // p1's match transported into the intermediate graph of the swapped order.
  Morphism g_inv = preimage_table(t1->g, t1->before.node_count(), t1->before.edge_count());
  Morphism through = compose(g_inv, s1.match);
  if (std::count(through.nodes.begin(), through.nodes.end(), kNone) ||
      std::count(through.edges.begin(), through.edges.end(), kNone)) {
    w.reason = "the second rule deletes part of the first rule's match";
    return w;
  }
  Morphism m1_swapped = compose(t1->h, through);
  o.step = opt.step + 1;
  auto t2 = try_apply(p1, m1_swapped, t1->after, o, &why);
  if (!t2) {
    w.reason = "the first rule is not applicable after the second: " + why;
    return w;
  }
  w.independent = true;
  w.first = std::move(t1);
  w.second = std::move(t2);
  return w;
}

inline bool sequential_independent(const Rule& p1, const DerivationStep& s1, const Rule& p2,
                                   const DerivationStep& s2, const ApplyOptions& opt = {}) {
  return check_sequential_independence(p1, s1, p2, s2, opt).independent;
}

// One enabled transition under the family policy.
struct Enabled {
  std::size_t rule;  // index into grammar.rules
  DerivationStep step;
};

// Every transition from `host`. Single rules fire at every match whose
// application succeeds. For a family, each match of its smallest member is
// extended by the largest member that has a compatible match; that member
// alone is tried at that match, with no fallback.
inline std::vector<Enabled> enabled_steps(const ConditionalGrammar& g, const Graph& host,
                                          std::size_t step_index = 0, bool check_nacs = true) {
  std::vector<Enabled> out;
  ApplyOptions opt;
  opt.safe = g.safe;
  opt.type_graph = &g.type_graph;
  opt.step = step_index;
  opt.check_nacs = check_nacs;
  for (const FamilyView& fam : families(g)) {
    const Rule& base = g.rules[fam.members.back()];
    for (const Morphism& m0 : find_matches(base, host)) {
      for (std::size_t idx : fam.members) {
        const Rule& member = g.rules[idx];
        std::optional<Morphism> m = m0;
        if (fam.members.size() > 1) m = find_mono(member.lhs, host, pin_along(member.lhs, member.core, m0));
        if (!m) continue;
        if (auto s = try_apply(member, *m, host, opt)) out.push_back({idx, std::move(*s)});
        break;
      }
    }
  }
  return out;
}

}  // namespace nacforge
