#pragma once

// Morphisms between conditional grammars: a span of type graphs together
// with a map from source rules to target rules. Retyping along the span
// drops items whose type is outside the left leg and renames the remaining
// types along the right leg.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nacforge/constructions.hpp"
#include "nacforge/encoder.hpp"
#include "nacforge/engine.hpp"
#include "nacforge/iso.hpp"
#include "nacforge/search.hpp"

namespace nacforge {

// TG1 ← TG0 → TG2 with the left leg a mono.
struct TypeSpan {
  Graph tg0;
  Morphism left;
  Morphism right;
};

inline TypeSpan identity_span(const Graph& tg) { return {tg, identity(tg), identity(tg)}; }

// TG0 is the part of tg2 whose items occur in tg1 under the same names.
inline TypeSpan span_by_name(const Graph& tg1, const Graph& tg2) {
  std::vector<bool> kn(tg2.node_count()), ke(tg2.edge_count());
  for (Index v = 0; v < tg2.node_count(); ++v) kn[v] = tg1.find_node(tg2.node(v).name) != kNone;
  for (Index e = 0; e < tg2.edge_count(); ++e) {
    const Edge& ed = tg2.edge(e);
    Index t = tg1.find_edge(ed.name);
    ke[e] = t != kNone && kn[ed.src] && kn[ed.tgt] && tg1.node(tg1.edge(t).src).name == tg2.node(ed.src).name &&
            tg1.node(tg1.edge(t).tgt).name == tg2.node(ed.tgt).name;
  }
  Subgraph s = select(tg2, kn, ke);
  TypeSpan span{s.graph, map_by_name(s.graph, tg1), s.inclusion};
  return span;
}

struct Retyped {
  Graph graph;
  Morphism back;  // retyped graph → source graph (an inclusion)
};

inline Retyped retype(const TypeSpan& f, const Graph& g) {
  std::map<Index, Index> node_pre, edge_pre;
  for (Index i = 0; i < f.left.nodes.size(); ++i) node_pre[f.left.nodes[i]] = i;
  for (Index i = 0; i < f.left.edges.size(); ++i) edge_pre[f.left.edges[i]] = i;
  Retyped out;
  std::vector<Index> at(g.node_count(), kNone);
  for (Index v = 0; v < g.node_count(); ++v) {
    auto it = node_pre.find(g.node(v).type);
    if (it == node_pre.end()) continue;
    at[v] = out.graph.add_node(g.node(v).name, f.right.nodes[it->second]);
    out.back.nodes.push_back(v);
  }
  for (Index e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    auto it = edge_pre.find(ed.type);
    if (it == edge_pre.end()) continue;
    // The left leg is a morphism, so the endpoints of a kept edge are kept.
    out.graph.add_edge(ed.name, at[ed.src], at[ed.tgt], f.right.edges[it->second]);
    out.back.edges.push_back(e);
  }
  return out;
}

// The morphism between retyped graphs induced by m: a → b.
inline Morphism retype_morphism(const Retyped& a, const Retyped& b, const Graph& b_src, const Morphism& m) {
  Morphism inv = preimage_table(b.back, b_src.node_count(), b_src.edge_count());
  Morphism out;
  for (Index x : a.back.nodes) out.nodes.push_back(inv.nodes[m.nodes[x]]);
  for (Index x : a.back.edges) out.edges.push_back(inv.edges[m.edges[x]]);
  return out;
}

struct GrammarMorphism {
  TypeSpan span;
  std::map<std::string, std::string> rule_map;
  std::map<std::string, Morphism> witness;  // i_p: L of the target rule → retyped L of the source rule
};

struct MorphismReport {
  bool start_preserved = false;
  bool rules_ancestral = false;
  bool constraints_reflected = false;
  std::vector<std::string> problems;
  bool ok() const { return start_preserved && rules_ancestral && constraints_reflected; }
  int first_failed() const { return !start_preserved ? 1 : !rules_ancestral ? 2 : !constraints_reflected ? 3 : 0; }
};

namespace detail {

// Searches i: L' → f(L) such that applying the target rule at i yields the
// retyped source rule as derived rule, with isos commuting with the spans.
inline std::optional<Morphism> ancestor_witness(const Rule& src, const Rule& tgt, const TypeSpan& f) {
  Retyped l = retype(f, src.lhs), k = retype(f, src.interface), r = retype(f, src.rhs);
  Morphism fl = retype_morphism(k, l, src.lhs, src.l);
  Morphism fr = retype_morphism(k, r, src.rhs, src.r);
  Rule plain = tgt;
  plain.nacs.clear();
  ApplyOptions opt;
  opt.check_nacs = false;
  for (const Morphism& i : find_monos(tgt.lhs, l.graph)) {
    auto step = try_apply(plain, i, l.graph, opt);
    if (!step) continue;
    // φ: D → f(K) must satisfy f(l) ∘ φ = g; both are monos into f(L).
    if (step->context.node_count() != k.graph.node_count() || step->context.edge_count() != k.graph.edge_count())
      continue;
    Morphism fl_inv = preimage_table(fl, l.graph.node_count(), l.graph.edge_count());
    Morphism phi = compose(fl_inv, step->g);
    bool total = std::none_of(phi.nodes.begin(), phi.nodes.end(), [](Index x) { return x == kNone; }) &&
                 std::none_of(phi.edges.begin(), phi.edges.end(), [](Index x) { return x == kNone; });
    if (!total || !is_iso(step->context, k.graph, phi)) continue;
    // ψ: H → f(R) with ψ ∘ h = f(r) ∘ φ.
    if (step->after.node_count() != r.graph.node_count() || step->after.edge_count() != r.graph.edge_count()) continue;
    Morphism pinned = pin_along(step->after, step->h, compose(fr, phi));
    if (auto psi = find_mono(step->after, r.graph, pinned); psi && is_iso(step->after, r.graph, *psi)) return i;
  }
  return std::nullopt;
}

}  // namespace detail

inline MorphismReport check_morphism(GrammarMorphism& f, const ConditionalGrammar& g1, const ConditionalGrammar& g2) {
  MorphismReport rep;
  Retyped start = retype(f.span, g1.start);
  rep.start_preserved = isomorphic_typed(start.graph, g2.start);
  if (!rep.start_preserved) rep.problems.push_back("condition 1: retyped start graph differs from the target start graph");

  rep.rules_ancestral = true;
  rep.constraints_reflected = true;
  f.witness.clear();
  for (const Rule& p : g1.rules) {
    auto it = f.rule_map.find(p.name);
    const Rule* q = it == f.rule_map.end() ? nullptr : g2.find_rule(it->second);
    if (!q) {
      rep.rules_ancestral = false;
      rep.problems.push_back("condition 2: " + p.name + " is not mapped to a target rule");
      continue;
    }
    auto i = detail::ancestor_witness(p, *q, f.span);
    if (!i) {
      rep.rules_ancestral = false;
      rep.problems.push_back("condition 2: " + p.name + " is not derived from " + q->name);
      continue;
    }
    f.witness[p.name] = *i;
    // Condition 3 over the constraints pushed out along i_p. Their new items
    // are lifted back along the left leg to build h: L_p → N.
    Retyped l = retype(f.span, p.lhs);
    for (const Constraint& n2 : q->nacs) {
      Cospan po = pushout(q->lhs, l.graph, n2.graph, *i, n2.n);
      const Graph& fn = po.object;
      Graph n = p.lhs;
      Morphism h = identity(p.lhs);
      std::vector<Index> at(fn.node_count(), kNone);
      ItemSet from_l = image(po.left, fn);
      for (Index v = 0; v < l.graph.node_count(); ++v) at[po.left.nodes[v]] = l.back.nodes[v];
      bool liftable = true;
      auto lift_type = [&](Index t2, bool node) -> Index {
        const auto& right = node ? f.span.right.nodes : f.span.right.edges;
        const auto& left = node ? f.span.left.nodes : f.span.left.edges;
        Index found = kNone;
        for (Index x = 0; x < right.size(); ++x)
          if (right[x] == t2) {
            if (found != kNone) liftable = false;
            found = left[x];
          }
        if (found == kNone) liftable = false;
        return found;
      };
      for (Index v = 0; v < fn.node_count(); ++v)
        if (!from_l.nodes[v]) at[v] = n.add_node(fn.node(v).name + "'", lift_type(fn.node(v).type, true));
      for (Index e = 0; e < fn.edge_count() && liftable; ++e)
        if (!from_l.edges[e]) {
          const Edge& ed = fn.edge(e);
          n.add_edge(ed.name + "'", at[ed.src], at[ed.tgt], lift_type(ed.type, false));
        }
      if (!liftable) {
        rep.constraints_reflected = false;
        rep.problems.push_back("condition 3: " + p.name + ": constraint " + n2.id +
                               " cannot be lifted along a non-injective right leg");
        continue;
      }
      Constraint hc{"pushed(" + n2.id + ")", std::move(n), std::move(h)};
      bool reflected = std::any_of(p.nacs.begin(), p.nacs.end(),
                                   [&](const Constraint& c) { return subsumes(p.lhs, c, p.lhs, hc); });
      if (!reflected) {
        rep.constraints_reflected = false;
        rep.problems.push_back("condition 3: " + p.name + " has no constraint subsuming " + n2.id + " of " + q->name);
      }
    }
  }
  return rep;
}

inline void require_morphism(GrammarMorphism& f, const ConditionalGrammar& g1, const ConditionalGrammar& g2) {
  MorphismReport rep = check_morphism(f, g1, g2);
  if (!rep.ok())
    throw Error(ErrorKind::ConditionViolated,
                "(" + std::to_string(rep.first_failed()) + ") " + (rep.problems.empty() ? "" : rep.problems.front()));
}

// e: E(CG) → CG. The span is TG_bar ← TG → TG; each encoded rule maps to
// the rule it was derived from.
inline GrammarMorphism build_e(const ConditionalGrammar& cg, const EnrichedGrammar& ecg) {
  GrammarMorphism f;
  f.span = {cg.type_graph, ecg.etg.in_tg, identity(cg.type_graph)};
  for (const Rule& r : ecg.grammar.rules) f.rule_map[r.name] = r.family_name();
  return f;
}

// d: E(CG) → DE(CG): identities everywhere.
inline GrammarMorphism build_d(const ConditionalGrammar& ecg) {
  GrammarMorphism f;
  f.span = identity_span(ecg.type_graph);
  for (const Rule& r : ecg.rules) f.rule_map[r.name] = r.name;
  return f;
}

// Maps a derivation of the source grammar to the target grammar and re-runs
// every step there. Needs the witnesses filled in by check_morphism.
inline std::vector<DerivationStep> map_derivation(const GrammarMorphism& f, const ConditionalGrammar& g1,
                                                  const ConditionalGrammar& g2,
                                                  const std::vector<DerivationStep>& steps) {
  std::vector<DerivationStep> out;
  ApplyOptions opt;
  opt.safe = g2.safe;
  opt.type_graph = &g2.type_graph;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const DerivationStep& s = steps[k];
    auto fail = [&](const std::string& why) {
      return Error(ErrorKind::MappingFailed, "step " + std::to_string(k) + " (" + s.rule + "): " + why);
    };
    const Rule* p = g1.find_rule(s.rule);
    auto it = f.rule_map.find(s.rule);
    auto wit = f.witness.find(s.rule);
    if (!p || it == f.rule_map.end() || wit == f.witness.end()) throw fail("no image rule or witness");
    const Rule* q = g2.find_rule(it->second);
    if (!q) throw fail("image rule missing");
    Retyped host = retype(f.span, s.before), lhs = retype(f.span, p->lhs), after = retype(f.span, s.after);
    Morphism m = compose(retype_morphism(lhs, host, s.before, s.match), wit->second);
    Graph target = host.graph;
    if (k > 0) {
      // Continue from the previous image result so the steps chain exactly.
      auto iso = find_mono(host.graph, out.back().after);
      if (!iso || !is_iso(host.graph, out.back().after, *iso)) throw fail("image steps are not consecutive");
      m = compose(*iso, m);
      target = out.back().after;
    }
    opt.step = k;
    std::string why;
    auto t = try_apply(*q, m, target, opt, &why);
    if (!t) throw fail(why);
    if (!isomorphic_typed(t->after, after.graph)) throw fail("image result differs from the retyped result");
    out.push_back(std::move(*t));
  }
  return out;
}

}  // namespace nacforge
