#pragma once

// Encoding negative application conditions into graph structure.
//
// Every constraint shape contributes a copy of its negative items (the body
// complement) to an enriched type graph. A graph satisfies the
// complementation invariant when, for every occurrence of a shape border,
// exactly one of body and body complement is present. Rules are rewritten
// so that they consume the complement instead of checking the NAC, and so
// that they keep the invariant intact for the shapes of all other rules.
//
// The rewriting works in the safe setting: every graph involved embeds into
// the enriched type graph, so the morphisms between rule graphs and shape
// graphs are determined by the typing.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nacforge/constructions.hpp"
#include "nacforge/engine.hpp"
#include "nacforge/grammar.hpp"
#include "nacforge/iso.hpp"
#include "nacforge/search.hpp"
#include "nacforge/shapes.hpp"

namespace nacforge {

struct ShapeComplement {
  std::string shape_id;
  Graph complement;         // the body retyped onto its complement items
  Morphism body_to_tg_bar;  // body → enriched type graph (the colimit injection)
  std::map<std::string, std::string> table;  // type-graph item → complement item (negative items only)
};

struct EnrichedTypeGraph {
  Graph tg_bar;
  Morphism in_tg;  // TG → TG_bar; the identity on indices
  std::vector<TypedShape> shapes;
  std::vector<ShapeComplement> complements;  // parallel to shapes

  std::size_t shape_index(const std::string& key) const {
    for (std::size_t i = 0; i < shapes.size(); ++i)
      if (shapes[i].key == key) return i;
    throw Error(ErrorKind::Internal, "shape not in the enriched type graph");
  }
};

// Toggles for the individual steps that make rules invariant-preserving.
// All on by default; switching one off is how the mutation tests show that
// each step is needed.
struct EncoderOptions {
  bool compensate_body_deletion = true;
  bool compensate_body_creation = true;
  bool complete_border_creation = true;
  bool partial_border_variants = true;
  bool compensate_border_deletion = true;
};

inline bool is_complement_type(const EnrichedTypeGraph& etg, Index node_type) {
  return node_type >= etg.in_tg.nodes.size();
}

inline EnrichedTypeGraph enrich_type_graph(const ConditionalGrammar& g) {
  EnrichedTypeGraph etg;
  etg.shapes = shapes_of(g);
  Diagram d;
  d.objects.push_back(g.type_graph);
  for (const TypedShape& s : etg.shapes) {
    if (s.kind == ShapeKind::Node || s.kind == ShapeKind::NodeLoop)
      throw Error(ErrorKind::UnsupportedShape,
                  std::string("shape ") + to_string(s.kind) + " of " + s.origins.front().first +
                      " has an empty border and cannot be encoded");
    std::size_t border = d.objects.size();
    d.objects.push_back(s.border);
    d.objects.push_back(s.body);
    d.arrows.push_back({border, 0, typing(s.border)});
    d.arrows.push_back({border, border + 1, s.shape});
  }
  Colimit c = colimit(d);
  etg.tg_bar = std::move(c.object);
  etg.in_tg = c.injections[0];
  const Graph& tg = g.type_graph;
  for (std::size_t i = 0; i < etg.shapes.size(); ++i) {
    const TypedShape& s = etg.shapes[i];
    ShapeComplement sc;
    sc.shape_id = s.id;
    sc.body_to_tg_bar = c.injections[2 + 2 * i];
    sc.complement = s.body;
    ItemSet border = image(s.shape, s.body);
    for (Index v = 0; v < s.body.node_count(); ++v) {
      Index t = sc.body_to_tg_bar.nodes[v];
      sc.complement.retype_node(v, t);
      if (border.nodes[v]) continue;
      std::string name = "bar(" + tg.node(s.body.node(v).type).name + "," + s.id + ")";
      etg.tg_bar.rename_node(t, name);
      sc.table[tg.node(s.body.node(v).type).name] = name;
    }
    for (Index e = 0; e < s.body.edge_count(); ++e) {
      Index t = sc.body_to_tg_bar.edges[e];
      sc.complement.retype_edge(e, t);
      std::string name = "bar(" + tg.edge(s.body.edge(e).type).name + "," + s.id + ")";
      etg.tg_bar.rename_edge(t, name);
      sc.table[tg.edge(s.body.edge(e).type).name] = name;
    }
    for (Index v = 0; v < sc.complement.node_count(); ++v)
      sc.complement.rename_node(v, etg.tg_bar.node(sc.complement.node(v).type).name);
    for (Index e = 0; e < sc.complement.edge_count(); ++e)
      sc.complement.rename_edge(e, etg.tg_bar.edge(sc.complement.edge(e).type).name);
    etg.complements.push_back(std::move(sc));
  }
  return etg;
}

// ---------------------------------------------------------------------------
// The invariant

struct InvariantClause {
  std::string shape_id;
  Graph border;
  Graph body;        // typed over TG_bar through in_tg
  Morphism to_body;  // border → body
  Graph complement;
  Morphism to_complement;  // border → complement
};

struct InvariantFormula {
  std::vector<InvariantClause> clauses;
};

inline InvariantFormula invariant_formula(const EnrichedTypeGraph& etg) {
  InvariantFormula phi;
  for (std::size_t i = 0; i < etg.shapes.size(); ++i) {
    const TypedShape& s = etg.shapes[i];
    phi.clauses.push_back({s.id, s.border, s.body, s.shape, etg.complements[i].complement, s.shape});
  }
  return phi;
}

struct InvariantViolation {
  std::string shape_id;
  std::vector<std::string> border_nodes;  // host node names of the occurrence
  bool body_present = false;
  bool complement_present = false;
};

struct InvariantReport {
  std::vector<InvariantViolation> violations;
  bool ok() const { return violations.empty(); }
};

inline InvariantReport eval_invariant(const Graph& g, const InvariantFormula& phi) {
  InvariantReport rep;
  for (const InvariantClause& c : phi.clauses)
    for (const Morphism& occ : find_monos(c.border, g)) {
      bool body = find_mono(c.body, g, pin_along(c.body, c.to_body, occ)).has_value();
      bool comp = find_mono(c.complement, g, pin_along(c.complement, c.to_complement, occ)).has_value();
      if (body == comp) {
        InvariantViolation v{c.shape_id, {}, body, comp};
        for (Index x : occ.nodes) v.border_nodes.push_back(g.node(x).name);
        rep.violations.push_back(std::move(v));
      }
    }
  return rep;
}

namespace detail {

// Names every item after its type when that is unambiguous.
inline void name_by_type(Graph& g, const Graph& tg) {
  if (!has_injective_typing(g)) return;
  for (Index v = 0; v < g.node_count(); ++v) g.rename_node(v, tg.node(g.node(v).type).name);
  for (Index e = 0; e < g.edge_count(); ++e) g.rename_edge(e, tg.edge(g.edge(e).type).name);
}

}  // namespace detail

// Adds a complement copy for every border occurrence where neither body nor
// complement is present. On graphs typed over TG only the first test matters.
inline Graph invariant_closure(const Graph& g, const EnrichedTypeGraph& etg) {
  Diagram d;
  d.objects.push_back(g);
  for (std::size_t i = 0; i < etg.shapes.size(); ++i) {
    const TypedShape& s = etg.shapes[i];
    for (const Morphism& occ : find_monos(s.border, g)) {
      if (find_mono(s.body, g, pin_along(s.body, s.shape, occ))) continue;
      const Graph& comp = etg.complements[i].complement;
      if (find_mono(comp, g, pin_along(comp, s.shape, occ))) continue;
      std::size_t at = d.objects.size();
      d.objects.push_back(s.border);
      d.objects.push_back(etg.complements[i].complement);
      d.arrows.push_back({at, 0, occ});
      d.arrows.push_back({at, at + 1, s.shape});
    }
  }
  Colimit c = colimit(d);
  Graph out = std::move(c.object);
  // Complement items take their type's name, as created items do.
  for (Index v = static_cast<Index>(g.node_count()); v < out.node_count(); ++v)
    out.rename_node(v, etg.tg_bar.node(out.node(v).type).name);
  for (Index e = static_cast<Index>(g.edge_count()); e < out.edge_count(); ++e)
    out.rename_edge(e, etg.tg_bar.edge(out.edge(e).type).name);
  return out;
}

// Keeps the items typed over TG: the pullback along in_tg.
inline Graph restrict_to_tg(const Graph& g, const EnrichedTypeGraph& etg) {
  std::vector<bool> kn(g.node_count()), ke(g.edge_count());
  const std::size_t tn = etg.in_tg.nodes.size(), te = etg.in_tg.edges.size();
  for (Index v = 0; v < g.node_count(); ++v) kn[v] = g.node(v).type < tn;
  for (Index e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    ke[e] = ed.type < te && kn[ed.src] && kn[ed.tgt];
  }
  return select(g, kn, ke).graph;
}

// ---------------------------------------------------------------------------
// Rule rewriting

namespace detail {

// The morphism a → b determined by typing, when b contains every type of a.
// Both graphs must be safely typed.
inline std::optional<Morphism> embed(const Graph& a, const Graph& b) {
  std::map<Index, Index> nb, eb;
  for (Index v = 0; v < b.node_count(); ++v) nb[b.node(v).type] = v;
  for (Index e = 0; e < b.edge_count(); ++e) eb[b.edge(e).type] = e;
  Morphism m;
  for (const Node& n : a.nodes()) {
    auto it = nb.find(n.type);
    if (it == nb.end()) return std::nullopt;
    m.nodes.push_back(it->second);
  }
  for (const Edge& e : a.edges()) {
    auto it = eb.find(e.type);
    if (it == eb.end()) return std::nullopt;
    m.edges.push_back(it->second);
  }
  if (!is_morphism(a, b, m)) return std::nullopt;
  return m;
}

inline bool contains(const Graph& host, const Graph& part) { return embed(part, host).has_value(); }

inline Constraint lift(const Constraint& c, const Graph& l, const Graph& l2, const Morphism& f) {
  Cospan po = pushout(l, l2, c.graph, f, c.n);
  return Constraint{c.id, std::move(po.object), std::move(po.left)};
}

inline void lift_all(Rule& r, const Graph& new_lhs, const Morphism& f) {
  for (Constraint& c : r.nacs) c = lift(c, r.lhs, new_lhs, f);
}

inline void append_note(Rule& r, const std::string& s) { r.note += (r.note.empty() ? "" : "; ") + s; }

// Extends the lhs by `extra` glued along `glue: shared → extra`, with
// `shared` embedded in the lhs through the interface.
inline void extend_lhs(Rule& r, const Graph& shared, const Graph& extra, const Morphism& glue) {
  Morphism into = *embed(shared, r.lhs);
  Cospan po = pushout(shared, r.lhs, extra, into, glue);
  lift_all(r, po.object, po.left);
  r.l = compose(po.left, r.l);
  r.lhs = std::move(po.object);
}

inline void extend_rhs(Rule& r, const Graph& shared, const Graph& extra, const Morphism& glue) {
  Morphism into = *embed(shared, r.rhs);
  Cospan po = pushout(shared, r.rhs, extra, into, glue);
  r.r = compose(po.left, r.r);
  r.rhs = std::move(po.object);
}

// Aligns a constraint's current shape with its registered shape: returns
// the registered shape index and the map registered body → current body.
inline std::pair<std::size_t, Morphism> align(const EnrichedTypeGraph& etg, const TypedShape& cur) {
  std::size_t i = etg.shape_index(cur.key);
  const TypedShape& s = etg.shapes[i];
  ItemSet sb = image(s.shape, s.body), cb = image(cur.shape, cur.body);
  std::optional<Morphism> iso;
  for_each_morphism(s.body, cur.body, {}, [&](const Morphism& m) {
    for (Index v = 0; v < m.nodes.size(); ++v)
      if (sb.nodes[v] != cb.nodes[m.nodes[v]]) return true;
    iso = m;
    return false;
  });
  if (!iso) throw Error(ErrorKind::Internal, "constraint body is not typed over the original type graph");
  return {i, *iso};
}

}  // namespace detail

// Replaces every constraint check by consumption of the body complement,
// one constraint at a time in id order. Either the rule, applied to the
// complemented constraint graph, yields a derived rule that keeps the
// complement, or the lhs is extended to the complemented constraint graph
// so the complement is deleted.
inline Rule complement_rule(const Rule& p, const EnrichedTypeGraph& etg) {
  Rule cur = p;
  cur.nacs.clear();
  std::vector<Constraint> todo = p.nacs;
  std::stable_sort(todo.begin(), todo.end(), [](const Constraint& a, const Constraint& b) { return a.id < b.id; });
  std::vector<Constraint> done;
  while (!todo.empty()) {
    Constraint n = todo.front();
    todo.erase(todo.begin());
    TypedShape shape = classify(cur.lhs, n);
    InitialPushout ip = initial_pushout(cur.lhs, n.graph, n.n);
    auto [si, body_iso] = detail::align(etg, shape);
    const ShapeComplement& sc = etg.complements[si];
    // The complemented constraint graph: negative items move to their complements.
    Graph n_bar = n.graph;
    Morphism iso_inv = preimage_table(body_iso, ip.body.node_count(), ip.body.edge_count());
    ItemSet in_l = image(n.n, n.graph);
    for (Index v = 0; v < ip.body.node_count(); ++v) {
      Index x = ip.body_to_nac.nodes[v];
      if (!in_l.nodes[x]) n_bar.retype_node(x, sc.body_to_tg_bar.nodes[iso_inv.nodes[v]]);
    }
    for (Index e = 0; e < ip.body.edge_count(); ++e)
      n_bar.retype_edge(ip.body_to_nac.edges[e], sc.body_to_tg_bar.edges[iso_inv.edges[e]]);

    Rule plain = cur;
    plain.nacs.clear();
    ApplyOptions opt;
    opt.check_nacs = false;
    auto step = try_apply(plain, n.n, n_bar, opt);
    bool body_in_rhs = find_morphism(ip.body, cur.rhs, {}, {.injective = false}).has_value();
    const Graph old_lhs = cur.lhs;
    if (step && !body_in_rhs) {
      cur.lhs = std::move(step->before);
      cur.interface = std::move(step->context);
      cur.rhs = std::move(step->after);
      cur.l = std::move(step->g);
      cur.r = std::move(step->h);
      detail::append_note(cur, n.id + ": derived rule keeps the complement");
    } else {
      cur.l = compose(n.n, cur.l);
      cur.lhs = n_bar;
      detail::append_note(cur, n.id + ": complement deleted");
    }
    done.push_back(n);
    for (Constraint& c : todo) c = detail::lift(c, old_lhs, cur.lhs, n.n);
    for (Constraint& c : done) c = detail::lift(c, old_lhs, cur.lhs, n.n);
  }
  cur.nacs = std::move(done);
  return cur;
}

// A rule of the source grammar together with the encoded rules replacing
// it, largest lhs first. The last member is the base whose lhs embeds into
// every other member's lhs.
struct RuleFamily {
  std::string original_name;
  std::vector<Rule> members;
};

namespace detail {

struct ShapeRef {
  const TypedShape& shape;
  const ShapeComplement& comp;
};

inline bool deleted_or_created(const Rule& r, Index node_type) {
  auto has = [&](const Graph& g) {
    return std::any_of(g.nodes().begin(), g.nodes().end(), [&](const Node& n) { return n.type == node_type; });
  };
  return !has(r.interface) && (has(r.lhs) || has(r.rhs));
}

inline bool mentions(const Rule& r, Index node_type) {
  auto has = [&](const Graph& g) {
    return std::any_of(g.nodes().begin(), g.nodes().end(), [&](const Node& n) { return n.type == node_type; });
  };
  return has(r.lhs) || has(r.rhs);
}

// A node of the type graph added to all three graphs of the rule, preserved.
inline void add_preserved_node(Rule& r, Index type, const std::string& name) {
  Graph l2 = r.lhs;
  l2.add_node(name, type);
  Morphism inc = identity(r.lhs);
  lift_all(r, l2, inc);
  r.lhs = std::move(l2);
  Index k = r.interface.add_node(name, type);
  Index at_r = r.rhs.add_node(name, type);
  r.l.nodes.push_back(static_cast<Index>(r.lhs.node_count() - 1));
  r.r.nodes.push_back(at_r);
  (void)k;
}

// Steps that keep the invariant for shapes of other rules. Applied to a rule
// whose lhs already contains any partner nodes of its variant.
inline void compensate(Rule& r, const std::vector<ShapeRef>& others, const EncoderOptions& opt) {
  if (opt.compensate_body_deletion)
    for (const ShapeRef& s : others) {
      const Graph& border = s.shape.border;
      const Graph& body = s.shape.body;
      if (contains(r.lhs, body) && !contains(r.interface, body) && contains(r.interface, border) &&
          !contains(r.rhs, body) && !contains(r.rhs, s.comp.complement)) {
        extend_rhs(r, border, s.comp.complement, s.shape.shape);
        append_note(r, "creates complement of " + s.shape.id + " (body deleted)");
      }
    }
  if (opt.compensate_body_creation)
    for (const ShapeRef& s : others) {
      const Graph& border = s.shape.border;
      const Graph& body = s.shape.body;
      if (contains(r.rhs, body) && !contains(r.interface, body) && contains(r.interface, border) &&
          !contains(r.lhs, s.comp.complement)) {
        extend_lhs(r, border, s.comp.complement, s.shape.shape);
        append_note(r, "deletes complement of " + s.shape.id + " (body created)");
      }
    }
  if (opt.complete_border_creation)
    for (const ShapeRef& s : others) {
      const Graph& border = s.shape.border;
      if (contains(r.rhs, border) && !contains(r.interface, border) && !contains(r.rhs, s.shape.body) &&
          !contains(r.rhs, s.comp.complement)) {
        extend_rhs(r, border, s.comp.complement, s.shape.shape);
        append_note(r, "creates complement of " + s.shape.id + " (border created)");
      }
    }
  // A deleted border node takes its complement along; otherwise the
  // complement would dangle. When the body is absent from the lhs, the
  // invariant guarantees the complement is present at any match.
  if (opt.compensate_border_deletion)
    for (const ShapeRef& s : others) {
      const Graph& border = s.shape.border;
      if (contains(r.lhs, border) && !contains(r.interface, border) && !contains(r.lhs, s.shape.body) &&
          !contains(r.lhs, s.comp.complement)) {
        extend_lhs(r, border, s.comp.complement, s.shape.shape);
        append_note(r, "deletes complement of " + s.shape.id + " (border deleted)");
      }
    }
}

inline void name_rule_items(Rule& r, const Graph& tg) {
  name_by_type(r.lhs, tg);
  name_by_type(r.interface, tg);
  name_by_type(r.rhs, tg);
  for (Constraint& c : r.nacs) name_by_type(c.graph, tg);
}

}  // namespace detail

// Partner node types for the variants: for an E shape of another rule whose
// border the rule creates or deletes only in part, the other border node,
// when the rule does not mention it.
inline std::vector<Index> variant_partners(const Rule& r, const EnrichedTypeGraph& etg,
                                           const std::string& origin, const EncoderOptions& opt = {}) {
  std::set<Index> out;
  for (const TypedShape& s : etg.shapes) {
    if (s.kind != ShapeKind::E) continue;
    if (std::none_of(s.origins.begin(), s.origins.end(), [&](const auto& o) { return o.first != origin; })) continue;
    Index a = s.border.node(0).type, b = s.border.node(1).type;
    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
      if (!detail::deleted_or_created(r, x) || detail::mentions(r, y)) continue;
      bool created = std::any_of(r.rhs.nodes().begin(), r.rhs.nodes().end(),
                                 [&](const Node& n) { return n.type == x; });
      if (created ? opt.partial_border_variants : opt.compensate_border_deletion) out.insert(y);
    }
  }
  return {out.begin(), out.end()};
}

// Builds the family of invariant-preserving rules for a complemented rule.
// `origin` is the name of the source rule, used to tell its own shapes from
// those of other rules.
inline RuleFamily make_invariant_preserving(const Rule& p, const std::string& origin, const EnrichedTypeGraph& etg,
                                            const EncoderOptions& opt = {}) {
  std::vector<detail::ShapeRef> others;
  for (std::size_t i = 0; i < etg.shapes.size(); ++i) {
    const TypedShape& s = etg.shapes[i];
    if (std::any_of(s.origins.begin(), s.origins.end(), [&](const auto& o) { return o.first != origin; }))
      others.push_back({s, etg.complements[i]});
  }
  std::vector<Index> partners = variant_partners(p, etg, origin, opt);
  if (partners.size() > 16) throw Error(ErrorKind::PreconditionViolated, origin + ": too many variant partners");
  std::vector<Rule> members;
  for (std::uint32_t mask = 0; mask < (1u << partners.size()); ++mask) {
    Rule r = p;
    std::string added;
    for (std::size_t i = 0; i < partners.size(); ++i)
      if (mask >> i & 1) {
        const std::string& name = etg.tg_bar.node(partners[i]).name;
        detail::add_preserved_node(r, partners[i], name);
        added += (added.empty() ? "" : ",") + name;
      }
    if (!added.empty()) detail::append_note(r, "variant with " + added + " present");
    detail::compensate(r, others, opt);
    detail::name_rule_items(r, etg.tg_bar);
    members.push_back(std::move(r));
  }
  // The base (no partners) is built first; keep it for the core embeddings.
  const Graph base_lhs = members.front().lhs;
  std::vector<std::string> keys;
  for (const Rule& r : members) keys.push_back(canonical_key(r.lhs));
  std::vector<std::size_t> order(members.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (members[a].lhs.size() != members[b].lhs.size()) return members[a].lhs.size() > members[b].lhs.size();
    return keys[a] < keys[b];
  });
  RuleFamily fam;
  fam.original_name = origin;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    Rule r = std::move(members[order[rank]]);
    r.name = origin + "bar" + (rank ? "#" + std::to_string(rank) : "");
    r.family = origin;
    auto core = detail::embed(base_lhs, r.lhs);
    if (!core) throw Error(ErrorKind::Internal, origin + ": family base does not embed into a member");
    r.core = *core;
    fam.members.push_back(std::move(r));
  }
  return fam;
}

struct EnrichedGrammar {
  ConditionalGrammar grammar;  // E(CG)
  EnrichedTypeGraph etg;
  InvariantFormula phi;
  std::vector<RuleFamily> families;
};

inline EnrichedGrammar enrich_grammar(const ConditionalGrammar& g, const EncoderOptions& opt = {}) {
  if (!g.safe) throw Error(ErrorKind::PreconditionViolated, "the encoder needs a safe grammar");
  for (const Rule& r : g.rules)
    for (const Constraint& c : r.nacs)
      if (auto pair = incomparable_factorisations(r.lhs, c))
        throw Error(ErrorKind::NonIncrementalNAC,
                    r.name + ": constraint " + c.id + " factors incomparably through " + pair->first + " and " +
                        pair->second);
  EnrichedGrammar out;
  out.etg = enrich_type_graph(g);
  out.phi = invariant_formula(out.etg);
  out.grammar.type_graph = out.etg.tg_bar;
  out.grammar.start = invariant_closure(g.start, out.etg);
  out.grammar.safe = true;
  for (const Rule& p : g.rules) {
    Rule c = complement_rule(p, out.etg);
    RuleFamily fam = make_invariant_preserving(c, p.name, out.etg, opt);
    for (const Rule& m : fam.members) out.grammar.rules.push_back(m);
    out.families.push_back(std::move(fam));
  }
  return out;
}


}  // namespace nacforge
