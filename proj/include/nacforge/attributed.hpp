#pragma once

// Integer-attributed grammars and the counter-based encoding of their NACs.
//
// Attributes are 64-bit integers. Guards are conjunctions of comparisons
// between affine expressions over attributes of lhs items; `maj(r, ch)` is
// the only non-affine form and is evaluated as 2*ch.noVotes > r.noCurs - 1.
// Updates assign affine expressions, read in the state before the step, to
// attributes of rhs items. A multiobject is a preserved lhs node standing
// for every compatible copy in the host. Rules carrying multiobjects are
// schemata; `instantiate` unfolds them into plain instances.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "nacforge/engine.hpp"
#include "nacforge/explorer.hpp"
#include "nacforge/io.hpp"
#include "nacforge/iso.hpp"
#include "nacforge/search.hpp"
#include "nacforge/shapes.hpp"

namespace nacforge {

// ---------------------------------------------------------------------------
// Expressions

struct Expr {
  enum class Kind { Const, Read, Count, Add, Sub, Mul, Maj };
  Kind kind = Kind::Const;
  std::int64_t value = 0;
  std::string item;  // Read: item; Count: multiobject node; Maj: registry
  std::string attr;  // Read: attribute; Maj: challenge
  std::vector<Expr> args;

  static Expr constant(std::int64_t v) { return {Kind::Const, v, {}, {}, {}}; }
  static Expr read(std::string item, std::string attr) { return {Kind::Read, 0, std::move(item), std::move(attr), {}}; }
  static Expr count(std::string role) { return {Kind::Count, 0, std::move(role), {}, {}}; }
  static Expr binary(Kind k, Expr a, Expr b) { return {k, 0, {}, {}, {std::move(a), std::move(b)}}; }
};

inline Expr operator+(Expr a, Expr b) { return Expr::binary(Expr::Kind::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::binary(Expr::Kind::Sub, std::move(a), std::move(b)); }

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Comparison {
  Expr lhs;
  CmpOp op = CmpOp::Eq;
  Expr rhs;
};

// Majority with integer arithmetic only: votes > (curators - 1) / 2.
inline std::int64_t maj(std::int64_t no_votes, std::int64_t no_curs) { return 2 * no_votes > no_curs - 1 ? 1 : 0; }

namespace detail {

inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '#' || c == '~' || c == '@';
}

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : s_(text) {}

  Expr whole_expr() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

  Comparison whole_comparison() {
    Comparison c;
    c.lhs = expr();
    skip();
    static const std::pair<const char*, CmpOp> ops[] = {{"==", CmpOp::Eq}, {"!=", CmpOp::Ne}, {"<=", CmpOp::Le},
                                                       {">=", CmpOp::Ge}, {"<", CmpOp::Lt},  {">", CmpOp::Gt}};
    bool found = false;
    for (const auto& [tok, op] : ops)
      if (s_.substr(pos_).starts_with(tok)) {
        c.op = op;
        pos_ += std::string_view(tok).size();
        found = true;
        break;
      }
    if (!found) fail("expected a comparison operator");
    c.rhs = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return c;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorKind::SchemaError, "expression '" + std::string(s_) + "': " + why);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string ident() {
    skip();
    std::size_t b = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    if (b == pos_) fail("expected a name");
    return std::string(s_.substr(b, pos_ - b));
  }

  static bool is_constant(const Expr& e) {
    if (e.kind == Expr::Kind::Const) return true;
    if (e.kind == Expr::Kind::Add || e.kind == Expr::Kind::Sub || e.kind == Expr::Kind::Mul)
      return is_constant(e.args[0]) && is_constant(e.args[1]);
    return false;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (eat('+')) {
        e = e + term();
      } else if (eat('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    while (eat('*')) {
      Expr f = unary();
      if (!is_constant(e) && !is_constant(f)) fail("only products with a constant are allowed");
      e = Expr::binary(Expr::Kind::Mul, std::move(e), std::move(f));
    }
    return e;
  }

  Expr unary() {
    if (eat('-')) return Expr::constant(0) - unary();
    return primary();
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      std::int64_t v = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) v = v * 10 + (s_[pos_++] - '0');
      return Expr::constant(v);
    }
    if (eat('(')) {
      Expr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    std::string name = ident();
    if (name == "maj" && eat('(')) {
      Expr e{Expr::Kind::Maj, 0, ident(), {}, {}};
      if (!eat(',')) fail("maj takes two arguments");
      e.attr = ident();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (name == "count" && eat('(')) {
      Expr e = Expr::count(ident());
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (!eat('.')) fail("expected item.attribute after '" + name + "'");
    return Expr::read(name, ident());
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::ExprParser(text).whole_expr(); }
inline Comparison parse_comparison(std::string_view text) { return detail::ExprParser(text).whole_comparison(); }

inline std::string to_string(const Expr& e, int context = 0) {
  switch (e.kind) {
    case Expr::Kind::Const: return e.value < 0 ? "(0 - " + std::to_string(-e.value) + ")" : std::to_string(e.value);
    case Expr::Kind::Read: return e.item + "." + e.attr;
    case Expr::Kind::Count: return "count(" + e.item + ")";
    case Expr::Kind::Maj: return "maj(" + e.item + ", " + e.attr + ")";
    case Expr::Kind::Mul: return to_string(e.args[0], 2) + " * " + to_string(e.args[1], 2);
    case Expr::Kind::Add:
    case Expr::Kind::Sub: {
      std::string s = to_string(e.args[0], 1) + (e.kind == Expr::Kind::Add ? " + " : " - ") + to_string(e.args[1], 2);
      return context >= 2 ? "(" + s + ")" : s;
    }
  }
  return "?";
}

inline const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

inline std::string to_string(const Comparison& c) {
  return to_string(c.lhs) + " " + to_string(c.op) + " " + to_string(c.rhs);
}

using ReadFn = std::function<std::int64_t(const std::string& item, const std::string& attr)>;
using CountFn = std::function<std::int64_t(const std::string& role)>;

inline std::int64_t eval(const Expr& e, const ReadFn& read, const CountFn& count = {}) {
  switch (e.kind) {
    case Expr::Kind::Const: return e.value;
    case Expr::Kind::Read: return read(e.item, e.attr);
    case Expr::Kind::Count:
      if (!count) throw Error(ErrorKind::PreconditionViolated, "count(" + e.item + ") outside a rule instance");
      return count(e.item);
    case Expr::Kind::Maj: return maj(read(e.attr, "noVotes"), read(e.item, "noCurs"));
    case Expr::Kind::Add: return eval(e.args[0], read, count) + eval(e.args[1], read, count);
    case Expr::Kind::Sub: return eval(e.args[0], read, count) - eval(e.args[1], read, count);
    case Expr::Kind::Mul: return eval(e.args[0], read, count) * eval(e.args[1], read, count);
  }
  return 0;
}

inline bool holds(const Comparison& c, const ReadFn& read, const CountFn& count = {}) {
  std::int64_t a = eval(c.lhs, read, count), b = eval(c.rhs, read, count);
  switch (c.op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

inline bool eval_guard(const std::vector<Comparison>& guard, const ReadFn& read, const CountFn& count = {}) {
  return std::all_of(guard.begin(), guard.end(), [&](const Comparison& c) { return holds(c, read, count); });
}

namespace detail {

// Items read by an expression, with the attribute names.
inline void collect_reads(const Expr& e, std::set<std::pair<std::string, std::string>>& out) {
  if (e.kind == Expr::Kind::Read) out.emplace(e.item, e.attr);
  if (e.kind == Expr::Kind::Maj) {
    out.emplace(e.item, "noCurs");
    out.emplace(e.attr, "noVotes");
  }
  for (const Expr& a : e.args) collect_reads(a, out);
}

inline bool mentions_any(const Expr& e, const std::set<std::string>& items) {
  if ((e.kind == Expr::Kind::Read || e.kind == Expr::Kind::Maj) && items.count(e.item)) return true;
  if (e.kind == Expr::Kind::Maj && items.count(e.attr)) return true;
  return std::any_of(e.args.begin(), e.args.end(), [&](const Expr& a) { return mentions_any(a, items); });
}

// Renames items and replaces count(role) by constants.
inline Expr substitute(const Expr& e, const std::map<std::string, std::string>& names,
                       const std::map<std::string, std::int64_t>& counts) {
  Expr out = e;
  auto rename = [&](std::string& s) {
    if (auto it = names.find(s); it != names.end()) s = it->second;
  };
  if (e.kind == Expr::Kind::Read || e.kind == Expr::Kind::Maj) {
    rename(out.item);
    if (e.kind == Expr::Kind::Maj) rename(out.attr);
  }
  if (e.kind == Expr::Kind::Count)
    if (auto it = counts.find(e.item); it != counts.end()) return Expr::constant(it->second);
  for (Expr& a : out.args) a = substitute(a, names, counts);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Attributed graphs, rules and grammars

using AttrValues = std::map<std::string, std::int64_t>;

// Declared attribute names per node and edge type.
struct AttrDecls {
  std::vector<std::vector<std::string>> node, edge;

  const std::vector<std::string>& of(bool is_node, Index type) const {
    static const std::vector<std::string> none;
    const auto& v = is_node ? node : edge;
    return type < v.size() ? v[type] : none;
  }
  bool declared(bool is_node, Index type, const std::string& attr) const {
    const auto& a = of(is_node, type);
    return std::find(a.begin(), a.end(), attr) != a.end();
  }
};

struct AttributedGraph {
  Graph graph;
  std::vector<AttrValues> node_attrs, edge_attrs;
};

// Gives every declared attribute without a value the value 0.
inline AttributedGraph with_defaults(const Graph& g, const AttrDecls& d, std::vector<AttrValues> nodes = {},
                                     std::vector<AttrValues> edges = {}) {
  AttributedGraph out{g, std::move(nodes), std::move(edges)};
  out.node_attrs.resize(g.node_count());
  out.edge_attrs.resize(g.edge_count());
  for (Index v = 0; v < g.node_count(); ++v)
    for (const std::string& a : d.of(true, g.node(v).type)) out.node_attrs[v].try_emplace(a, 0);
  for (Index e = 0; e < g.edge_count(); ++e)
    for (const std::string& a : d.of(false, g.edge(e).type)) out.edge_attrs[e].try_emplace(a, 0);
  return out;
}

struct Update {
  std::string item;  // rhs item
  std::string attr;
  Expr value;        // read in the state before the step
};

struct AttrRule {
  Rule rule;
  std::vector<Comparison> guard;
  std::vector<Update> updates;
  std::vector<std::string> multiobjects;  // preserved lhs nodes standing for all compatible copies
};

struct AttributedGrammar {
  Graph type_graph;
  AttrDecls decls;
  AttributedGraph start;
  std::vector<AttrRule> rules;

  ConditionalGrammar skeleton() const {
    ConditionalGrammar g;
    g.type_graph = type_graph;
    g.start = start.graph;
    g.safe = false;
    for (const AttrRule& r : rules) g.rules.push_back(r.rule);
    return g;
  }
  const AttrRule* find_rule(const std::string& name) const {
    for (const AttrRule& r : rules)
      if (r.rule.name == name) return &r;
    return nullptr;
  }
};

namespace detail {

struct ItemRef {
  bool is_node = true;
  Index index = kNone;
};

inline std::optional<ItemRef> find_item(const Graph& g, const std::string& name) {
  if (Index v = g.find_node(name); v != kNone) return ItemRef{true, v};
  if (Index e = g.find_edge(name); e != kNone) return ItemRef{false, e};
  return std::nullopt;
}

inline Index item_type(const Graph& g, const ItemRef& r) {
  return r.is_node ? g.node(r.index).type : g.edge(r.index).type;
}

}  // namespace detail

// Guards and update reads refer to declared attributes of lhs items, update
// targets to declared attributes of rhs items, count() to multiobjects.
inline void validate_attr_rule(const AttrRule& r, const AttrDecls& d) {
  const Rule& p = r.rule;
  auto check_read = [&](const std::string& item, const std::string& attr) {
    auto ref = detail::find_item(p.lhs, item);
    if (!ref) throw Error(ErrorKind::DanglingReference, p.name + ": unknown lhs item '" + item + "'");
    if (!d.declared(ref->is_node, detail::item_type(p.lhs, *ref), attr))
      throw Error(ErrorKind::SchemaError, p.name + ": '" + item + "' has no attribute '" + attr + "'");
  };
  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    std::set<std::pair<std::string, std::string>> reads;
    detail::collect_reads(e, reads);
    for (const auto& [item, attr] : reads) check_read(item, attr);
    std::function<void(const Expr&)> counts = [&](const Expr& x) {
      if (x.kind == Expr::Kind::Count &&
          std::find(r.multiobjects.begin(), r.multiobjects.end(), x.item) == r.multiobjects.end())
        throw Error(ErrorKind::DanglingReference, p.name + ": count(" + x.item + ") names no multiobject");
      for (const Expr& a : x.args) counts(a);
    };
    counts(e);
  };
  for (const Comparison& c : r.guard) {
    walk(c.lhs);
    walk(c.rhs);
  }
  for (const Update& u : r.updates) {
    auto ref = detail::find_item(p.rhs, u.item);
    if (!ref) throw Error(ErrorKind::DanglingReference, p.name + ": unknown rhs item '" + u.item + "'");
    if (!d.declared(ref->is_node, detail::item_type(p.rhs, *ref), u.attr))
      throw Error(ErrorKind::SchemaError, p.name + ": '" + u.item + "' has no attribute '" + u.attr + "'");
    walk(u.value);
  }
  Morphism l_inv = preimage_table(p.l, p.lhs.node_count(), p.lhs.edge_count());
  for (const std::string& m : r.multiobjects) {
    Index v = p.lhs.find_node(m);
    if (v == kNone || l_inv.nodes[v] == kNone)
      throw Error(ErrorKind::SchemaError, p.name + ": multiobject '" + m + "' must be a preserved lhs node");
  }
  if (!r.multiobjects.empty() && !p.nacs.empty())
    throw Error(ErrorKind::PreconditionViolated, p.name + ": rules with multiobjects cannot carry NACs");
}

// ---------------------------------------------------------------------------
// JSON

inline AttributedGrammar parse_attributed_grammar(const Json& j) {
  try {
    AttributedGrammar g;
    ConditionalGrammar skel = parse_grammar(j);
    g.type_graph = skel.type_graph;
    const Json& tg = j.at("type_graph");
    g.decls.node.resize(g.type_graph.node_count());
    g.decls.edge.resize(g.type_graph.edge_count());
    auto attr_list = [](const Json& item) {
      std::vector<std::string> out;
      if (item.contains("attrs"))
        for (const Json& a : item.at("attrs")) out.push_back(a.get<std::string>());
      return out;
    };
    for (std::size_t i = 0; i < tg.at("nodes").size(); ++i) g.decls.node[i] = attr_list(tg.at("nodes")[i]);
    if (tg.contains("edges"))
      for (std::size_t i = 0; i < tg.at("edges").size(); ++i) g.decls.edge[i] = attr_list(tg.at("edges")[i]);

    const Json& sj = j.at("start");
    std::vector<AttrValues> nv(skel.start.node_count()), ev(skel.start.edge_count());
    auto values = [&](const Json& item, bool is_node, Index type, AttrValues& out) {
      if (!item.contains("attrs")) return;
      for (const auto& [k, v] : item.at("attrs").items()) {
        if (!g.decls.declared(is_node, type, k))
          throw Error(ErrorKind::SchemaError, "start: undeclared attribute '" + k + "'");
        out[k] = v.get<std::int64_t>();
      }
    };
    for (std::size_t i = 0; i < sj.at("nodes").size(); ++i) values(sj.at("nodes")[i], true, skel.start.node(i).type, nv[i]);
    if (sj.contains("edges"))
      for (std::size_t i = 0; i < sj.at("edges").size(); ++i)
        values(sj.at("edges")[i], false, skel.start.edge(i).type, ev[i]);
    g.start = with_defaults(skel.start, g.decls, std::move(nv), std::move(ev));

    const Json& rules = j.at("rules");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const Json& rj = rules[i];
      AttrRule r;
      r.rule = skel.rules[i];
      if (rj.contains("guard"))
        for (const Json& c : rj.at("guard")) r.guard.push_back(parse_comparison(c.get<std::string>()));
      if (rj.contains("updates"))
        for (const auto& [k, v] : rj.at("updates").items()) {
          auto dot = k.rfind('.');
          if (dot == std::string::npos) throw Error(ErrorKind::SchemaError, r.rule.name + ": bad update target '" + k + "'");
          r.updates.push_back({k.substr(0, dot), k.substr(dot + 1), parse_expr(v.get<std::string>())});
        }
      for (const char* key : {"multiobjects", "multiobject"})
        if (rj.contains(key))
          for (const Json& m : rj.at(key)) r.multiobjects.push_back(m.get<std::string>());
      validate_attr_rule(r, g.decls);
      g.rules.push_back(std::move(r));
    }
    return g;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::SchemaError, e.what());
  }
}

inline AttributedGrammar load_attributed_grammar(const std::string& path) {
  return parse_attributed_grammar(read_json_file(path));
}

inline bool is_attributed(const Json& j) {
  auto has_attrs = [](const Json& list) {
    return std::any_of(list.begin(), list.end(), [](const Json& x) { return x.contains("attrs"); });
  };
  if (!j.contains("type_graph")) return false;
  const Json& tg = j.at("type_graph");
  return (tg.contains("nodes") && has_attrs(tg.at("nodes"))) || (tg.contains("edges") && has_attrs(tg.at("edges")));
}

inline Json attributed_grammar_to_json(const AttributedGrammar& g) {
  Json j = grammar_to_json(g.skeleton());
  Json& tg = j["type_graph"];
  for (std::size_t i = 0; i < tg["nodes"].size(); ++i)
    if (!g.decls.of(true, i).empty()) tg["nodes"][i]["attrs"] = g.decls.of(true, i);
  for (std::size_t i = 0; i < tg["edges"].size(); ++i)
    if (!g.decls.of(false, i).empty()) tg["edges"][i]["attrs"] = g.decls.of(false, i);
  Json& sj = j["start"];
  for (std::size_t i = 0; i < sj["nodes"].size(); ++i)
    if (!g.start.node_attrs[i].empty()) sj["nodes"][i]["attrs"] = g.start.node_attrs[i];
  for (std::size_t i = 0; i < sj["edges"].size(); ++i)
    if (!g.start.edge_attrs[i].empty()) sj["edges"][i]["attrs"] = g.start.edge_attrs[i];
  for (std::size_t i = 0; i < g.rules.size(); ++i) {
    const AttrRule& r = g.rules[i];
    Json& rj = j["rules"][i];
    if (!r.guard.empty()) {
      rj["guard"] = Json::array();
      for (const Comparison& c : r.guard) rj["guard"].push_back(to_string(c));
    }
    if (!r.updates.empty()) {
      rj["updates"] = Json::object();
      for (const Update& u : r.updates) rj["updates"][u.item + "." + u.attr] = to_string(u.value);
    }
    if (!r.multiobjects.empty()) rj["multiobjects"] = r.multiobjects;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Application

// Reads attribute values of lhs items through a match.
inline ReadFn match_reader(const Graph& lhs, const Morphism& m, const AttributedGraph& host) {
  return [&lhs, &m, &host](const std::string& item, const std::string& attr) -> std::int64_t {
    auto ref = detail::find_item(lhs, item);
    if (!ref) throw Error(ErrorKind::DanglingReference, "unknown lhs item '" + item + "'");
    const AttrValues& vals = ref->is_node ? host.node_attrs[m.nodes[ref->index]] : host.edge_attrs[m.edges[ref->index]];
    auto it = vals.find(attr);
    if (it == vals.end()) throw Error(ErrorKind::SchemaError, "'" + item + "' has no attribute '" + attr + "'");
    return it->second;
  };
}

struct AttrStep {
  DerivationStep step;
  AttributedGraph after;
};

// One attributed DPO step; nullopt if the guard, a NAC or the dangling
// condition fails. Rules must be instances (no multiobjects).
inline std::optional<AttrStep> attr_apply(const AttrRule& r, const Morphism& m, const AttributedGraph& host,
                                          const AttrDecls& decls, ApplyOptions opt = {}) {
  if (!r.multiobjects.empty())
    throw Error(ErrorKind::PreconditionViolated, r.rule.name + ": instantiate multiobjects before applying");
  ReadFn read = match_reader(r.rule.lhs, m, host);
  if (!eval_guard(r.guard, read)) return std::nullopt;
  if (opt.check_nacs && violated_constraint(r.rule, m, host.graph)) return std::nullopt;
  opt.check_nacs = false;
  opt.safe = false;
  auto s = try_apply(r.rule, m, host.graph, opt);
  if (!s) return std::nullopt;
  std::vector<std::int64_t> values;
  for (const Update& u : r.updates) values.push_back(eval(u.value, read));
  AttrStep out{std::move(*s), {}};
  const DerivationStep& st = out.step;
  std::vector<AttrValues> nv(st.after.node_count()), ev(st.after.edge_count());
  for (Index d = 0; d < st.h.nodes.size(); ++d) nv[st.h.nodes[d]] = host.node_attrs[st.g.nodes[d]];
  for (Index d = 0; d < st.h.edges.size(); ++d) ev[st.h.edges[d]] = host.edge_attrs[st.g.edges[d]];
  out.after = with_defaults(st.after, decls, std::move(nv), std::move(ev));
  for (std::size_t i = 0; i < r.updates.size(); ++i) {
    const Update& u = r.updates[i];
    auto ref = detail::find_item(r.rule.rhs, u.item);
    if (!ref) throw Error(ErrorKind::DanglingReference, r.rule.name + ": unknown rhs item '" + u.item + "'");
    AttrValues& target = ref->is_node ? out.after.node_attrs[st.comatch.nodes[ref->index]]
                                      : out.after.edge_attrs[st.comatch.edges[ref->index]];
    target[u.attr] = values[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multiobject expansion

namespace detail {

// Copies g with the items in `role` removed and replicated `copies[c]` times
// for each role group. `base` maps kept items; `copy` maps (group, copy,
// item) to the new item.
struct Replicated {
  Graph graph;
  Morphism base;  // old → new for non-role items, kNone for role items
  std::map<std::tuple<std::size_t, std::size_t, bool, Index>, Index> copy;
};

inline Replicated replicate(const Graph& g, const std::vector<std::vector<bool>>& role_nodes,
                            const std::vector<std::size_t>& copies) {
  Replicated out;
  const std::size_t groups = role_nodes.size();
  auto group_of_node = [&](Index v) -> std::size_t {
    for (std::size_t k = 0; k < groups; ++k)
      if (role_nodes[k][v]) return k;
    return groups;
  };
  auto group_of_edge = [&](Index e) -> std::size_t {
    std::size_t a = group_of_node(g.edge(e).src), b = group_of_node(g.edge(e).tgt);
    if (a != groups && b != groups && a != b)
      throw Error(ErrorKind::PreconditionViolated, "edge '" + g.edge(e).name + "' joins two multiobjects");
    return a != groups ? a : b;
  };
  out.base.nodes.assign(g.node_count(), kNone);
  out.base.edges.assign(g.edge_count(), kNone);
  for (Index v = 0; v < g.node_count(); ++v)
    if (group_of_node(v) == groups) out.base.nodes[v] = out.graph.add_node(g.node(v).name, g.node(v).type);
  for (Index e = 0; e < g.edge_count(); ++e)
    if (group_of_edge(e) == groups)
      out.base.edges[e] = out.graph.add_edge(g.edge(e).name, out.base.nodes[g.edge(e).src],
                                             out.base.nodes[g.edge(e).tgt], g.edge(e).type);
  for (std::size_t k = 0; k < groups; ++k)
    for (std::size_t c = 0; c < copies[k]; ++c) {
      const std::string suffix = "#" + std::to_string(c + 1);
      for (Index v = 0; v < g.node_count(); ++v)
        if (role_nodes[k][v]) out.copy[{k, c, true, v}] = out.graph.add_node(g.node(v).name + suffix, g.node(v).type);
      for (Index e = 0; e < g.edge_count(); ++e)
        if (group_of_edge(e) == k) {
          const Edge& ed = g.edge(e);
          auto end = [&](Index v) { return role_nodes[k][v] ? out.copy.at({k, c, true, v}) : out.base.nodes[v]; };
          out.copy[{k, c, false, e}] = out.graph.add_edge(ed.name + suffix, end(ed.src), end(ed.tgt), ed.type);
        }
    }
  return out;
}

inline Morphism replicate_map(const Graph& src, const Replicated& a, const Replicated& b, const Morphism& m) {
  Morphism out;
  out.nodes.assign(a.graph.node_count(), kNone);
  out.edges.assign(a.graph.edge_count(), kNone);
  for (Index v = 0; v < src.node_count(); ++v)
    if (a.base.nodes[v] != kNone) out.nodes[a.base.nodes[v]] = b.base.nodes[m.nodes[v]];
  for (Index e = 0; e < src.edge_count(); ++e)
    if (a.base.edges[e] != kNone) out.edges[a.base.edges[e]] = b.base.edges[m.edges[e]];
  for (const auto& [key, idx] : a.copy) {
    auto [k, c, is_node, item] = key;
    (is_node ? out.nodes : out.edges)[idx] =
        b.copy.at({k, c, is_node, is_node ? m.nodes[item] : m.edges[item]});
  }
  return out;
}

}  // namespace detail

// The instance of a schema with copies[i] copies of multiobject i. The
// instance belongs to the schema's family; its core embeds the instance
// without copies.
inline AttrRule instantiate(const AttrRule& r, const std::vector<std::size_t>& copies) {
  if (copies.size() != r.multiobjects.size())
    throw Error(ErrorKind::PreconditionViolated, r.rule.name + ": wrong number of copy counts");
  if (r.multiobjects.empty()) return r;
  const Rule& p = r.rule;
  const std::size_t groups = r.multiobjects.size();
  Morphism l_inv = preimage_table(p.l, p.lhs.node_count(), p.lhs.edge_count());
  std::vector<std::vector<bool>> in_l(groups, std::vector<bool>(p.lhs.node_count())),
      in_k(groups, std::vector<bool>(p.interface.node_count())), in_r(groups, std::vector<bool>(p.rhs.node_count()));
  for (std::size_t k = 0; k < groups; ++k) {
    Index v = p.lhs.find_node(r.multiobjects[k]);
    Index kv = l_inv.nodes[v];
    in_l[k][v] = true;
    in_k[k][kv] = true;
    in_r[k][p.r.nodes[kv]] = true;
  }
  detail::Replicated L = detail::replicate(p.lhs, in_l, copies), K = detail::replicate(p.interface, in_k, copies),
                     R = detail::replicate(p.rhs, in_r, copies);
  AttrRule out;
  Rule& q = out.rule;
  q.lhs = L.graph;
  q.interface = K.graph;
  q.rhs = R.graph;
  q.l = detail::replicate_map(p.interface, K, L, p.l);
  q.r = detail::replicate_map(p.interface, K, R, p.r);
  std::string suffix;
  std::map<std::string, std::int64_t> counts;
  for (std::size_t k = 0; k < groups; ++k) {
    suffix += (k ? "," : "") + std::to_string(copies[k]);
    counts[r.multiobjects[k]] = static_cast<std::int64_t>(copies[k]);
  }
  q.name = p.name + "[" + suffix + "]";
  q.family = p.family_name();
  q.note = p.note;
  // Non-role lhs items come first and in the same order in every instance.
  std::size_t base_nodes = 0, base_edges = 0;
  for (Index x : L.base.nodes) base_nodes += x != kNone;
  for (Index x : L.base.edges) base_edges += x != kNone;
  q.core.nodes.resize(base_nodes);
  q.core.edges.resize(base_edges);
  std::iota(q.core.nodes.begin(), q.core.nodes.end(), Index{0});
  std::iota(q.core.edges.begin(), q.core.edges.end(), Index{0});

  // Names of role items per group: the role node and its incident edges,
  // across the three graphs.
  std::vector<std::set<std::string>> role_names(groups);
  auto collect = [&](const Graph& g, const std::vector<std::vector<bool>>& role) {
    for (std::size_t k = 0; k < groups; ++k) {
      for (Index v = 0; v < g.node_count(); ++v)
        if (role[k][v]) role_names[k].insert(g.node(v).name);
      for (const Edge& e : g.edges())
        if (role[k][e.src] || role[k][e.tgt]) role_names[k].insert(e.name);
    }
  };
  collect(p.lhs, in_l);
  collect(p.interface, in_k);
  collect(p.rhs, in_r);
  auto group_of = [&](const std::set<std::string>& names) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < groups; ++k)
      for (const std::string& n : names)
        if (role_names[k].count(n)) return k;
    return std::nullopt;
  };
  auto copy_names = [&](std::size_t k, std::size_t c) {
    std::map<std::string, std::string> m;
    for (const std::string& n : role_names[k]) m[n] = n + "#" + std::to_string(c + 1);
    return m;
  };
  for (const Comparison& c : r.guard) {
    std::set<std::pair<std::string, std::string>> reads;
    detail::collect_reads(c.lhs, reads);
    detail::collect_reads(c.rhs, reads);
    std::set<std::string> items;
    for (const auto& rd : reads) items.insert(rd.first);
    auto k = group_of(items);
    if (!k) {
      out.guard.push_back({detail::substitute(c.lhs, {}, counts), c.op, detail::substitute(c.rhs, {}, counts)});
      continue;
    }
    for (std::size_t i = 0; i < copies[*k]; ++i) {
      auto names = copy_names(*k, i);
      out.guard.push_back({detail::substitute(c.lhs, names, counts), c.op, detail::substitute(c.rhs, names, counts)});
    }
  }
  for (const Update& u : r.updates) {
    std::set<std::pair<std::string, std::string>> reads;
    detail::collect_reads(u.value, reads);
    std::set<std::string> items{u.item};
    for (const auto& rd : reads) items.insert(rd.first);
    auto k = group_of(items);
    if (!k) {
      out.updates.push_back({u.item, u.attr, detail::substitute(u.value, {}, counts)});
      continue;
    }
    for (std::size_t i = 0; i < copies[*k]; ++i) {
      auto names = copy_names(*k, i);
      std::string target = names.count(u.item) ? names.at(u.item) : u.item;
      out.updates.push_back({target, u.attr, detail::substitute(u.value, names, counts)});
    }
  }
  return out;
}

// Instances with 0..k_max copies of every multiobject.
inline std::vector<AttrRule> expand_multiobjects(const AttrRule& r, std::size_t k_max) {
  std::vector<AttrRule> out;
  std::vector<std::size_t> copies(r.multiobjects.size(), 0);
  for (;;) {
    out.push_back(instantiate(r, copies));
    std::size_t i = 0;
    while (i < copies.size() && copies[i] == k_max) copies[i++] = 0;
    if (i == copies.size()) break;
    ++copies[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exploration

inline std::string attr_key(const AttributedGraph& g) {
  auto label = [](Index type, const AttrValues& vals) {
    std::string s = std::to_string(type);
    for (const auto& [k, v] : vals) s += "|" + k + "=" + std::to_string(v);
    return s;
  };
  std::vector<std::string> nl, el;
  for (Index v = 0; v < g.graph.node_count(); ++v) nl.push_back(label(g.graph.node(v).type, g.node_attrs[v]));
  for (Index e = 0; e < g.graph.edge_count(); ++e) el.push_back(label(g.graph.edge(e).type, g.edge_attrs[e]));
  return canonical_key(g.graph, nl, el);
}

using AttrLts = BasicLts<AttributedGraph>;

struct AttrExploreOptions : ExploreOptions {
  std::optional<std::size_t> k_max;  // default: start-graph count of the multiobject's type
};

// Successor computation with rule instances prepared once. For a schema,
// each match of its copy-free instance is extended by as many copies as the
// host allows; that instance alone is tried, as amalgamation demands.
class AttrStepper {
 public:
  AttrStepper(const AttributedGrammar& g, const AttrExploreOptions& opt) : g_(g), opt_(opt) {
    for (const AttrRule& r : g.rules) {
      Prepared p;
      p.schema = &r;
      for (const std::string& m : r.multiobjects) {
        Index type = r.rule.lhs.node(r.rule.lhs.find_node(m)).type;
        std::size_t start_count = 0;
        for (const Node& n : g.start.graph.nodes()) start_count += n.type == type;
        p.k_max.push_back(opt.k_max.value_or(start_count));
      }
      if (r.multiobjects.empty()) {
        p.instances.push_back({{}, r});
      } else {
        std::vector<std::vector<std::size_t>> tuples{{}};
        for (std::size_t k : p.k_max) {
          std::vector<std::vector<std::size_t>> next;
          for (const auto& t : tuples)
            for (std::size_t c = 0; c <= k; ++c) {
              auto u = t;
              u.push_back(c);
              next.push_back(std::move(u));
            }
          tuples = std::move(next);
        }
        // Largest total first, ties in lexicographic order.
        std::stable_sort(tuples.begin(), tuples.end(), [](const auto& a, const auto& b) {
          std::size_t sa = 0, sb = 0;
          for (auto x : a) sa += x;
          for (auto x : b) sb += x;
          return sa > sb;
        });
        for (const auto& t : tuples) p.instances.push_back({t, instantiate(r, t)});
        for (std::size_t k = 0; k < p.k_max.size(); ++k) {
          std::vector<std::size_t> over(p.k_max.size(), 0);
          over[k] = p.k_max[k] + 1;
          p.overflow.push_back(instantiate(r, over));
        }
      }
      rules_.push_back(std::move(p));
    }
  }

  std::vector<Successor<AttributedGraph>> operator()(const AttributedGraph& host, std::size_t depth) const {
    std::vector<Successor<AttributedGraph>> out;
    ApplyOptions aopt;
    aopt.step = depth;
    aopt.check_nacs = opt_.check_nacs;
    for (const Prepared& p : rules_) {
      const AttrRule& base = p.instances.back().rule;
      for (const Morphism& m0 : find_matches(base.rule, host.graph)) {
        for (const auto& [copies, inst] : p.instances) {
          std::optional<Morphism> m = m0;
          if (!copies.empty()) m = find_mono(inst.rule.lhs, host.graph, pin_along(inst.rule.lhs, inst.rule.core, m0));
          if (!m) continue;
          for (std::size_t k = 0; k < copies.size(); ++k)
            if (copies[k] == p.k_max[k] &&
                find_mono(p.overflow[k].rule.lhs, host.graph,
                          pin_along(p.overflow[k].rule.lhs, p.overflow[k].rule.core, m0)))
              throw Error(ErrorKind::BoundExceeded, p.schema->rule.name + ": more than " +
                                                        std::to_string(p.k_max[k]) + " copies of " +
                                                        p.schema->multiobjects[k] + " would be needed");
          if (auto s = attr_apply(inst, *m, host, g_.decls, aopt))
            out.push_back({std::move(s->after), inst.rule.name, p.schema->rule.family_name(),
                           match_digest(base.rule.lhs, host.graph, m0)});
          break;
        }
      }
    }
    return out;
  }

 private:
  struct Instance {
    std::vector<std::size_t> copies;
    AttrRule rule;
  };
  struct Prepared {
    const AttrRule* schema = nullptr;
    std::vector<std::size_t> k_max;
    std::vector<Instance> instances;  // largest first; the copy-free one last
    std::vector<AttrRule> overflow;   // one more copy than allowed, per multiobject
  };
  const AttributedGrammar& g_;
  AttrExploreOptions opt_;
  std::vector<Prepared> rules_;
};

inline AttrLts explore_attributed(const AttributedGrammar& g, const AttrExploreOptions& opt = {}) {
  AttrStepper step(g, opt);
  return detail::bfs(g.start, attr_key, step, opt);
}

// ---------------------------------------------------------------------------
// Counter encoding

struct CounterInvariant {
  enum class Kind {
    Parallel,   // every border pair carries exactly one complement edge; its n counts parallel edges
    Incident,   // a node attribute counts the IN or OUT occurrences at the node
    Complements // a node attribute counts the complement edges at the node
  };
  Kind kind = Kind::Parallel;
  Index edge_type = kNone;        // the forbidden edge type
  Index complement_type = kNone;  // its complement (Parallel, Complements)
  Index node_type = kNone;        // node carrying the attribute (Incident, Complements)
  Index src_type = kNone, tgt_type = kNone;  // endpoint types of the forbidden edges
  bool at_target = false;         // the node is the target end of the edges
  std::string attr;
  std::string text;
};

// How the encoded rule reads one original NAC.
struct NacCounter {
  std::string rule, nac;
  ShapeKind kind = ShapeKind::E;
  Index edge_type = kNone;
  Index src = kNone, tgt = kNone;  // E: border nodes of the original lhs
  Index node = kNone;              // IN/OUT: border node of the original lhs
  std::string attr;                // IN/OUT: attribute on `node`
};

struct CounterEncoding {
  AttributedGrammar grammar;
  std::vector<CounterInvariant> invariants;
  std::vector<NacCounter> nac_counters;
  std::size_t original_node_types = 0, original_edge_types = 0;
  AttrDecls original_decls;
  std::vector<std::string> log;  // how each multiobject and attribute came about
};

namespace detail {

inline std::string capitalised(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// Editable copy of a rule span with the bookkeeping the encoding needs.
struct SpanBuilder {
  Graph L, K, R;
  Morphism l, r;

  Index k_of_l_node(Index v) const {
    for (Index i = 0; i < l.nodes.size(); ++i)
      if (l.nodes[i] == v) return i;
    return kNone;
  }
  Index r_of_l_node(Index v) const {
    Index k = k_of_l_node(v);
    return k == kNone ? kNone : r.nodes[k];
  }
  Index l_of_r_node(Index v) const {
    for (Index i = 0; i < r.nodes.size(); ++i)
      if (r.nodes[i] == v) return l.nodes[i];
    return kNone;
  }
  bool deleted_edge(Index e) const { return std::find(l.edges.begin(), l.edges.end(), e) == l.edges.end(); }
  bool created_edge(Index e) const { return std::find(r.edges.begin(), r.edges.end(), e) == r.edges.end(); }
  bool created_node(Index v) const { return std::find(r.nodes.begin(), r.nodes.end(), v) == r.nodes.end(); }

  std::string fresh(const std::string& want) const {
    std::string s = want;
    for (int i = 2; detail::find_item(L, s) || detail::find_item(R, s) || detail::find_item(K, s); ++i)
      s = want + "_" + std::to_string(i);
    return s;
  }

  // Preserved node; returns its lhs index.
  Index add_preserved_node(const std::string& name, Index type) {
    Index a = L.add_node(name, type), b = K.add_node(name, type), c = R.add_node(name, type);
    l.nodes.push_back(a);
    r.nodes.push_back(c);
    (void)b;
    return a;
  }
  // Preserved edge between preserved lhs nodes.
  Index add_preserved_edge(const std::string& name, Index type, Index src_l, Index tgt_l) {
    Index ks = k_of_l_node(src_l), kt = k_of_l_node(tgt_l);
    Index a = L.add_edge(name, src_l, tgt_l, type);
    K.add_edge(name, ks, kt, type);
    Index c = R.add_edge(name, r.nodes[ks], r.nodes[kt], type);
    l.edges.push_back(a);
    r.edges.push_back(c);
    return a;
  }
};

inline Index find_edge_between(const Graph& g, Index type, Index src, Index tgt) {
  for (Index e = 0; e < g.edge_count(); ++e)
    if (g.edge(e).type == type && g.edge(e).src == src && g.edge(e).tgt == tgt) return e;
  return kNone;
}

inline std::size_t count_edges_between(const Graph& g, Index type, Index src, Index tgt,
                                       const std::function<bool(Index)>& keep) {
  std::size_t n = 0;
  for (Index e = 0; e < g.edge_count(); ++e)
    if (g.edge(e).type == type && g.edge(e).src == src && g.edge(e).tgt == tgt && keep(e)) ++n;
  return n;
}

}  // namespace detail

// Replaces every NAC by counters: complement edge types with a counter `n`
// for shape E, a counter attribute on the border node for IN and OUT, and
// complement counters on border nodes that rules create or delete while
// the other border node ranges over many instances (multiobjects).
inline CounterEncoding encode_counters(const AttributedGrammar& g) {
  CounterEncoding enc;
  enc.original_node_types = g.type_graph.node_count();
  enc.original_edge_types = g.type_graph.edge_count();
  enc.original_decls = g.decls;
  AttributedGrammar& out = enc.grammar;
  out.type_graph = g.type_graph;
  out.decls = g.decls;
  out.decls.node.resize(g.type_graph.node_count());
  out.decls.edge.resize(g.type_graph.edge_count());
  const Graph& tg = g.type_graph;
  for (const AttrRule& r : g.rules)
    if (!r.multiobjects.empty())
      throw Error(ErrorKind::PreconditionViolated, r.rule.name + ": counter encoding expects rules without multiobjects");

  // Shapes of all NACs.
  std::map<Index, Index> complement_of;                     // edge type → complement edge type
  std::map<std::pair<Index, bool>, std::string> incident;   // (edge type, at target) → attribute
  struct Use {
    std::size_t rule, nac;
    ShapeKind kind;
    Index edge_type, src, tgt, node;
  };
  std::vector<Use> uses;
  for (std::size_t ri = 0; ri < g.rules.size(); ++ri) {
    const Rule& p = g.rules[ri].rule;
    // Constraints are visited by id so new types are numbered the same
    // whatever order a rule lists them in.
    std::vector<std::size_t> by_id(p.nacs.size());
    std::iota(by_id.begin(), by_id.end(), std::size_t{0});
    std::sort(by_id.begin(), by_id.end(), [&](std::size_t x, std::size_t y) { return p.nacs[x].id < p.nacs[y].id; });
    for (std::size_t ni : by_id) {
      const Constraint& c = p.nacs[ni];
      if (!is_incremental(p.lhs, c))
        throw Error(ErrorKind::NonIncrementalNAC, p.name + ": constraint " + c.id + " is not incremental");
      TypedShape s = classify(p.lhs, c);
      if (s.kind != ShapeKind::E && s.kind != ShapeKind::In && s.kind != ShapeKind::Out)
        throw Error(ErrorKind::UnsupportedShape, p.name + ": constraint " + c.id + " has shape " + to_string(s.kind));
      InitialPushout ip = initial_pushout(p.lhs, c.graph, c.n);
      auto to_lhs = [&](Index body_node) {
        for (Index i = 0; i < ip.shape.nodes.size(); ++i)
          if (ip.shape.nodes[i] == body_node) return ip.border_to_lhs.nodes[i];
        return kNone;
      };
      const Edge& e = ip.body.edge(0);
      Use u{ri, ni, s.kind, e.type, to_lhs(e.src), to_lhs(e.tgt), kNone};
      if (s.kind != ShapeKind::E) {
        // The counter sees every incident edge, so it cannot tell the
        // forbidden one apart from edges of nodes the rule already matches.
        Index body_type = s.kind == ShapeKind::In ? tg.edge(e.type).src : tg.edge(e.type).tgt;
        for (const Node& n : p.lhs.nodes())
          if (n.type == body_type)
            throw Error(ErrorKind::UnsupportedShape, p.name + ": constraint " + c.id + " counts " +
                                                         tg.edge(e.type).name + " edges but the lhs already has a " +
                                                         tg.node(body_type).name);
      }
      if (s.kind == ShapeKind::E) {
        if (!complement_of.count(e.type)) {
          const Edge& te = tg.edge(e.type);
          Index bar = out.type_graph.add_edge("bar(" + te.name + ")", te.src, te.tgt);
          out.decls.edge.push_back({"n"});
          complement_of[e.type] = bar;
          enc.invariants.push_back({CounterInvariant::Kind::Parallel, e.type, bar, kNone, te.src, te.tgt, false, "n",
                                    "every " + tg.node(te.src).name + "/" + tg.node(te.tgt).name +
                                        " pair carries one bar(" + te.name + ") whose n counts parallel " + te.name +
                                        " edges"});
          enc.log.push_back("bar(" + te.name + "): complement edge type with counter n");
        }
      } else {
        const bool at_target = s.kind == ShapeKind::In;
        u.node = at_target ? u.tgt : u.src;
        auto key = std::pair{e.type, at_target};
        if (!incident.count(key)) {
          Index nt = at_target ? tg.edge(e.type).tgt : tg.edge(e.type).src;
          std::string attr = "no" + detail::capitalised(tg.edge(e.type).name);
          if (out.decls.declared(true, nt, attr)) attr += at_target ? "In" : "Out";
          out.decls.node[nt].push_back(attr);
          incident[key] = attr;
          enc.invariants.push_back({CounterInvariant::Kind::Incident, e.type, kNone, nt, tg.edge(e.type).src,
                                    tg.edge(e.type).tgt, at_target, attr,
                                    tg.node(nt).name + "." + attr + " counts " + (at_target ? "incoming " : "outgoing ") +
                                        tg.edge(e.type).name + " edges"});
          enc.log.push_back(tg.node(nt).name + "." + attr + ": counts " + to_string(s.kind) + " occurrences");
        }
      }
      uses.push_back(u);
    }
  }

  // Node types that some rule creates or deletes, and fixed populations.
  std::vector<bool> changing(tg.node_count(), false);
  for (const AttrRule& ar : g.rules) {
    const Rule& p = ar.rule;
    ItemSet kept = image(p.l, p.lhs), made = image(p.r, p.rhs);
    for (Index v = 0; v < p.lhs.node_count(); ++v)
      if (!kept.nodes[v]) changing[p.lhs.node(v).type] = true;
    for (Index v = 0; v < p.rhs.node_count(); ++v)
      if (!made.nodes[v]) changing[p.rhs.node(v).type] = true;
  }
  std::vector<std::size_t> population(tg.node_count(), 0);
  for (const Node& n : g.start.graph.nodes()) ++population[n.type];
  // A partner type is a singleton when exactly one instance exists forever.
  auto singleton = [&](Index type) { return !changing[type] && population[type] == 1; };
  auto absent = [&](Index type) { return !changing[type] && population[type] == 0; };

  // Complement counters on changing border nodes whose partner needs copies.
  std::map<std::pair<Index, bool>, std::string> bar_attr;  // (edge type, counter on target end) → attribute
  for (const auto& [t, bar] : complement_of)
    for (bool at_target : {false, true}) {
      Index v = at_target ? tg.edge(t).tgt : tg.edge(t).src;
      Index u = at_target ? tg.edge(t).src : tg.edge(t).tgt;
      if (!changing[v] || singleton(u) || absent(u)) continue;
      std::string attr = "no" + detail::capitalised(tg.edge(t).name) + "Bar";
      if (out.decls.declared(true, v, attr)) attr += at_target ? "In" : "Out";
      out.decls.node[v].push_back(attr);
      bar_attr[{t, at_target}] = attr;
      enc.invariants.push_back({CounterInvariant::Kind::Complements, t, bar, v, tg.edge(t).src, tg.edge(t).tgt, at_target, attr,
                                tg.node(v).name + "." + attr + " counts the bar(" + tg.edge(t).name + ") edges at it"});
      enc.log.push_back(tg.node(v).name + "." + attr + ": " + tg.node(v).name +
                        " is created or deleted and " + tg.node(u).name + " has many instances");
    }

  // Rules.
  for (std::size_t ri = 0; ri < g.rules.size(); ++ri) {
    const AttrRule& src = g.rules[ri];
    const Rule& p = src.rule;
    detail::SpanBuilder b{p.lhs, p.interface, p.rhs, p.l, p.r};
    AttrRule q;
    q.guard = src.guard;
    q.updates = src.updates;
    std::map<std::pair<std::string, std::string>, Expr> delta;  // (item, attr) → increment expression
    auto add_delta = [&](const std::string& item, const std::string& attr, std::int64_t d) {
      auto key = std::pair{item, attr};
      auto it = delta.find(key);
      if (it == delta.end()) {
        delta.emplace(key, Expr::constant(d));
      } else {
        it->second = it->second + Expr::constant(d);
      }
    };
    // A preserved complement edge between lhs nodes, reused when present.
    auto complement_between = [&](Index t, Index x, Index y) {
      Index bar = complement_of.at(t);
      Index e = detail::find_edge_between(b.L, bar, x, y);
      if (e != kNone) return e;
      std::string name = b.fresh(b.L.node(x).name + "~" + tg.edge(t).name + "~" + b.L.node(y).name);
      if (b.k_of_l_node(x) != kNone && b.k_of_l_node(y) != kNone) return b.add_preserved_edge(name, bar, x, y);
      return b.L.add_edge(name, x, y, bar);  // deleted along with an endpoint
    };

    // NACs become guards on counters.
    for (const Use& u : uses) {
      if (u.rule != ri) continue;
      NacCounter nc{p.name, p.nacs[u.nac].id, u.kind, u.edge_type, u.src, u.tgt, u.node, {}};
      if (u.kind == ShapeKind::E) {
        // Parallel edges the rule matches itself are allowed; one more is not.
        std::size_t inside = detail::count_edges_between(p.lhs, u.edge_type, u.src, u.tgt, [](Index) { return true; });
        Index e = complement_between(u.edge_type, u.src, u.tgt);
        q.guard.push_back({Expr::read(b.L.edge(e).name, "n"), CmpOp::Eq,
                           Expr::constant(static_cast<std::int64_t>(inside))});
      } else {
        nc.attr = incident.at({u.edge_type, u.kind == ShapeKind::In});
        q.guard.push_back({Expr::read(b.L.node(u.node).name, nc.attr), CmpOp::Eq, Expr::constant(0)});
      }
      enc.nac_counters.push_back(nc);
    }

    // Deleted and created edges adjust the counters of preserved ends.
    const std::size_t l_edges = b.L.edge_count(), r_edges = b.R.edge_count();
    for (Index e = 0; e < l_edges; ++e) {
      const Edge ed = b.L.edge(e);
      if (ed.type >= tg.edge_count() || !b.deleted_edge(e)) continue;
      bool keep_src = b.k_of_l_node(ed.src) != kNone, keep_tgt = b.k_of_l_node(ed.tgt) != kNone;
      if (complement_of.count(ed.type) && keep_src && keep_tgt)
        add_delta(b.L.edge(complement_between(ed.type, ed.src, ed.tgt)).name, "n", -1);
      for (bool at_target : {false, true})
        if (auto it = incident.find({ed.type, at_target}); it != incident.end())
          if (at_target ? keep_tgt : keep_src) add_delta(b.L.node(at_target ? ed.tgt : ed.src).name, it->second, -1);
    }
    for (Index e = 0; e < r_edges; ++e) {
      const Edge ed = b.R.edge(e);
      if (ed.type >= tg.edge_count() || !b.created_edge(e)) continue;
      Index ls = b.l_of_r_node(ed.src), lt = b.l_of_r_node(ed.tgt);
      if (complement_of.count(ed.type) && ls != kNone && lt != kNone)
        add_delta(b.L.edge(complement_between(ed.type, ls, lt)).name, "n", +1);
      for (bool at_target : {false, true})
        if (auto it = incident.find({ed.type, at_target}); it != incident.end()) {
          Index end = at_target ? ed.tgt : ed.src;
          if (!b.created_node(end)) add_delta(b.R.node(end).name, it->second, +1);
        }
    }

    // Created border nodes start their incident counters at the number of
    // edges created with them.
    const std::size_t r_nodes = b.R.node_count();
    for (Index v = 0; v < r_nodes; ++v) {
      if (!b.created_node(v)) continue;
      for (const auto& [key, attr] : incident) {
        auto [t, at_target] = key;
        Index nt = at_target ? tg.edge(t).tgt : tg.edge(t).src;
        if (b.R.node(v).type != nt) continue;
        std::int64_t n = 0;
        for (Index e = 0; e < r_edges; ++e)
          if (b.R.edge(e).type == t && (at_target ? b.R.edge(e).tgt : b.R.edge(e).src) == v) ++n;
        q.updates.push_back({b.R.node(v).name, attr, Expr::constant(n)});
      }
    }

    // Border nodes created or deleted take their complement edges with them.
    std::map<std::pair<Index, Index>, Index> role_node;  // (border node, partner type) → multiobject lhs node
    std::map<Index, Index> singleton_node;               // partner type → lhs node
    auto partner_nodes = [&](const Graph& g2, Index type, Index except) {
      std::vector<Index> out2;
      for (Index x = 0; x < g2.node_count(); ++x)
        if (g2.node(x).type == type && x != except) out2.push_back(x);
      return out2;
    };
    std::set<std::tuple<Index, Index, Index>> done_r, done_l;  // (type, src, tgt) of complement edges handled
    auto handle_border = [&](Index v, bool created) {
      const Graph& side = created ? b.R : b.L;
      for (const auto& [t, bar] : complement_of)
        for (bool v_is_tgt : {false, true}) {
          Index vt = v_is_tgt ? tg.edge(t).tgt : tg.edge(t).src;
          Index ut = v_is_tgt ? tg.edge(t).src : tg.edge(t).tgt;
          if (side.node(v).type != vt || absent(ut)) continue;
          auto explicit_partners = partner_nodes(side, ut, v);
          if (explicit_partners.empty() && singleton(ut)) {
            if (!singleton_node.count(ut)) {
              Index x = b.add_preserved_node(b.fresh("the" + tg.node(ut).name), ut);
              singleton_node[ut] = x;
              enc.log.push_back(p.name + ": adds the single " + tg.node(ut).name + " to reach its complement edges");
            }
            Index x = singleton_node[ut];
            explicit_partners.push_back(created ? b.r_of_l_node(x) : x);
          }
          std::int64_t explicit_count = 0;
          for (Index w : explicit_partners) {
            if (role_node.count({v, ut}) && w == (created ? b.r_of_l_node(role_node[{v, ut}]) : role_node[{v, ut}]))
              continue;
            Index s = v_is_tgt ? w : v, d = v_is_tgt ? v : w;
            auto& done = created ? done_r : done_l;
            if (!done.insert({t, s, d}).second) {
              ++explicit_count;
              continue;
            }
            ++explicit_count;
            std::string name = b.fresh(side.node(s).name + "~" + tg.edge(t).name + "~" + side.node(d).name);
            if (created) {
              Index e = b.R.add_edge(name, s, d, bar);
              std::size_t n = detail::count_edges_between(b.R, t, s, d, [&](Index x) { return b.created_edge(x); });
              q.updates.push_back({b.R.edge(e).name, "n", Expr::constant(static_cast<std::int64_t>(n))});
            } else {
              Index e = detail::find_edge_between(b.L, bar, s, d);
              if (e == kNone) e = b.L.add_edge(name, s, d, bar);
              std::size_t n = detail::count_edges_between(b.L, t, s, d, [&](Index x) { return b.deleted_edge(x); });
              q.guard.push_back({Expr::read(b.L.edge(e).name, "n"), CmpOp::Eq,
                                 Expr::constant(static_cast<std::int64_t>(n))});
            }
          }
          auto attr_it = bar_attr.find({t, v_is_tgt});
          if (attr_it == bar_attr.end()) continue;
          // The remaining partners are all other instances: a multiobject.
          if (!role_node.count({v, ut})) {
            Index x = b.add_preserved_node(b.fresh("each" + tg.node(ut).name), ut);
            role_node[{v, ut}] = x;
            q.multiobjects.push_back(b.L.node(x).name);
            enc.log.push_back(p.name + ": multiobject " + b.L.node(x).name + " because it " +
                              (created ? "creates " : "deletes ") + tg.node(vt).name + " and " + tg.node(ut).name +
                              " has many instances");
          }
          Index x_l = role_node[{v, ut}];
          Index x = created ? b.r_of_l_node(x_l) : x_l;
          Index s = v_is_tgt ? x : v, d = v_is_tgt ? v : x;
          std::string name = b.fresh(side.node(s).name + "~" + tg.edge(t).name + "~" + side.node(d).name);
          Expr copies = Expr::count(b.L.node(x_l).name) + Expr::constant(explicit_count);
          if (created) {
            Index e = b.R.add_edge(name, s, d, bar);
            q.updates.push_back({b.R.edge(e).name, "n", Expr::constant(0)});
            q.updates.push_back({side.node(v).name, attr_it->second, copies});
          } else {
            Index e = b.L.add_edge(name, s, d, bar);
            q.guard.push_back({Expr::read(b.L.edge(e).name, "n"), CmpOp::Eq, Expr::constant(0)});
            q.guard.push_back({Expr::read(side.node(v).name, attr_it->second), CmpOp::Eq, copies});
          }
        }
    };
    const std::size_t l_nodes0 = b.L.node_count();
    for (Index v = 0; v < l_nodes0; ++v)
      if (b.k_of_l_node(v) == kNone) handle_border(v, false);
    for (Index v = 0; v < r_nodes; ++v)
      if (b.created_node(v)) handle_border(v, true);

    for (auto& [key, d] : delta)
      q.updates.push_back({key.first, key.second, Expr::read(key.first, key.second) + d});
    q.rule = p;
    q.rule.lhs = b.L;
    q.rule.interface = b.K;
    q.rule.rhs = b.R;
    q.rule.l = b.l;
    q.rule.r = b.r;
    q.rule.nacs.clear();
    q.rule.note = "counters";
    validate_attr_rule(q, out.decls);
    out.rules.push_back(std::move(q));
  }

  // Start graph: complement edges for every border pair and counters that
  // satisfy every invariant.
  Graph s = g.start.graph;
  std::vector<AttrValues> nv = g.start.node_attrs, ev = g.start.edge_attrs;
  for (const auto& [t, bar] : complement_of) {
    const Edge& te = tg.edge(t);
    for (Index a = 0; a < g.start.graph.node_count(); ++a)
      for (Index c = 0; c < g.start.graph.node_count(); ++c) {
        if (a == c || g.start.graph.node(a).type != te.src || g.start.graph.node(c).type != te.tgt) continue;
        std::size_t n = detail::count_edges_between(g.start.graph, t, a, c, [](Index) { return true; });
        s.add_edge(g.start.graph.node(a).name + "~" + te.name + "~" + g.start.graph.node(c).name, a, c, bar);
        ev.push_back({{"n", static_cast<std::int64_t>(n)}});
      }
  }
  for (const auto& [key, attr] : incident) {
    auto [t, at_target] = key;
    for (Index v = 0; v < s.node_count(); ++v) {
      if (s.node(v).type != (at_target ? tg.edge(t).tgt : tg.edge(t).src)) continue;
      std::int64_t n = 0;
      for (Index e = 0; e < s.edge_count(); ++e)
        if (s.edge(e).type == t && (at_target ? s.edge(e).tgt : s.edge(e).src) == v) ++n;
      nv[v][attr] = n;
    }
  }
  for (const auto& [key, attr] : bar_attr) {
    auto [t, at_target] = key;
    Index bar = complement_of.at(t);
    for (Index v = 0; v < s.node_count(); ++v) {
      if (s.node(v).type != (at_target ? tg.edge(t).tgt : tg.edge(t).src)) continue;
      std::int64_t n = 0;
      for (Index e = 0; e < s.edge_count(); ++e)
        if (s.edge(e).type == bar && (at_target ? s.edge(e).tgt : s.edge(e).src) == v) ++n;
      nv[v][attr] = n;
    }
  }
  out.start = with_defaults(s, out.decls, std::move(nv), std::move(ev));
  return enc;
}

// ---------------------------------------------------------------------------
// Checks

struct CounterReport {
  std::size_t states = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline std::vector<std::string> counter_violations(const AttributedGraph& g, const CounterInvariant& inv) {
  std::vector<std::string> out;
  const Graph& s = g.graph;
  auto value = [](const AttrValues& vals, const std::string& a) -> std::optional<std::int64_t> {
    auto it = vals.find(a);
    if (it == vals.end()) return std::nullopt;
    return it->second;
  };
  switch (inv.kind) {
    case CounterInvariant::Kind::Parallel: {
      for (Index a = 0; a < s.node_count(); ++a)
        for (Index c = 0; c < s.node_count(); ++c) {
          if (a == c || s.node(a).type != inv.src_type || s.node(c).type != inv.tgt_type) continue;
          std::vector<Index> bars;
          std::int64_t real = 0;
          for (Index e = 0; e < s.edge_count(); ++e) {
            if (s.edge(e).src != a || s.edge(e).tgt != c) continue;
            if (s.edge(e).type == inv.complement_type) bars.push_back(e);
            if (s.edge(e).type == inv.edge_type) ++real;
          }
          std::string where = s.node(a).name + "->" + s.node(c).name;
          if (bars.size() != 1) {
            out.push_back(inv.text + ": " + where + " has " + std::to_string(bars.size()) + " complement edges");
            continue;
          }
          auto n = value(g.edge_attrs[bars[0]], "n");
          if (!n || *n != real)
            out.push_back(inv.text + ": " + where + " n=" + (n ? std::to_string(*n) : "?") + " but " +
                          std::to_string(real) + " edges");
        }
      break;
    }
    case CounterInvariant::Kind::Incident:
    case CounterInvariant::Kind::Complements: {
      Index counted = inv.kind == CounterInvariant::Kind::Incident ? inv.edge_type : inv.complement_type;
      for (Index v = 0; v < s.node_count(); ++v) {
        if (s.node(v).type != inv.node_type) continue;
        std::int64_t real = 0;
        for (const Edge& e : s.edges())
          if (e.type == counted && (inv.at_target ? e.tgt : e.src) == v) ++real;
        auto n = value(g.node_attrs[v], inv.attr);
        if (!n || *n != real)
          out.push_back(inv.text + ": " + s.node(v).name + "." + inv.attr + "=" + (n ? std::to_string(*n) : "?") +
                        " but " + std::to_string(real) + " edges");
      }
      break;
    }
  }
  return out;
}

inline CounterReport check_counter_invariants(const AttrLts& lts, const std::vector<CounterInvariant>& invs) {
  CounterReport rep;
  rep.states = lts.states.size();
  for (std::size_t i = 0; i < lts.states.size(); ++i)
    for (const CounterInvariant& inv : invs)
      for (std::string& v : counter_violations(lts.states[i], inv))
        rep.violations.push_back("state " + std::to_string(i) + ": " + v);
  return rep;
}

// Removes complement edges and counter attributes.
inline AttributedGraph erase_counters(const AttributedGraph& g, const CounterEncoding& enc) {
  AttributedGraph out;
  std::vector<Index> at(g.graph.node_count());
  for (Index v = 0; v < g.graph.node_count(); ++v) {
    at[v] = out.graph.add_node(g.graph.node(v).name, g.graph.node(v).type);
    AttrValues vals;
    for (const std::string& a : enc.original_decls.of(true, g.graph.node(v).type)) vals[a] = g.node_attrs[v].at(a);
    out.node_attrs.push_back(std::move(vals));
  }
  for (Index e = 0; e < g.graph.edge_count(); ++e) {
    const Edge& ed = g.graph.edge(e);
    if (ed.type >= enc.original_edge_types) continue;
    out.graph.add_edge(ed.name, at[ed.src], at[ed.tgt], ed.type);
    AttrValues vals;
    for (const std::string& a : enc.original_decls.of(false, ed.type)) vals[a] = g.edge_attrs[e].at(a);
    out.edge_attrs.push_back(std::move(vals));
  }
  return out;
}

// At every state: an original NAC is violated at a match exactly when the
// counter that replaced it is non-zero.
inline CounterReport check_pointwise_agreement(const AttributedGrammar& original, const CounterEncoding& enc,
                                               const AttrLts& encoded) {
  CounterReport rep;
  rep.states = encoded.states.size();
  const Graph& tg = enc.grammar.type_graph;
  for (std::size_t si = 0; si < encoded.states.size(); ++si) {
    const AttributedGraph& full = encoded.states[si];
    AttributedGraph plain = erase_counters(full, enc);
    for (const NacCounter& nc : enc.nac_counters) {
      const AttrRule* r = original.find_rule(nc.rule);
      const Constraint* c = nullptr;
      for (const Constraint& x : r->rule.nacs)
        if (x.id == nc.nac) c = &x;
      for (const Morphism& m : find_matches(r->rule, plain.graph)) {
        bool violated = !satisfies(m, *c, plain.graph);
        std::int64_t counter = 0;
        if (nc.kind == ShapeKind::E) {
          Index bar = tg.find_edge("bar(" + tg.edge(nc.edge_type).name + ")");
          Index e = detail::find_edge_between(full.graph, bar, m.nodes[nc.src], m.nodes[nc.tgt]);
          if (e == kNone) {
            rep.violations.push_back("state " + std::to_string(si) + ": " + nc.rule + "/" + nc.nac +
                                     ": no complement edge at the match");
            continue;
          }
          counter = full.edge_attrs[e].at("n");
        } else {
          counter = full.node_attrs[m.nodes[nc.node]].at(nc.attr);
        }
        if (violated != (counter != 0))
          rep.violations.push_back("state " + std::to_string(si) + ": " + nc.rule + "/" + nc.nac + " at " +
                                   match_digest(r->rule.lhs, plain.graph, m) + ": NAC " +
                                   (violated ? "violated" : "satisfied") + " but counter " + std::to_string(counter));
      }
    }
  }
  return rep;
}

// Every attribute named `attr` is at least zero in every state.
inline CounterReport check_non_negative(const AttrLts& lts, const std::string& attr) {
  CounterReport rep;
  rep.states = lts.states.size();
  for (std::size_t i = 0; i < lts.states.size(); ++i)
    for (Index v = 0; v < lts.states[i].graph.node_count(); ++v)
      if (auto it = lts.states[i].node_attrs[v].find(attr); it != lts.states[i].node_attrs[v].end() && it->second < 0)
        rep.violations.push_back("state " + std::to_string(i) + ": " + lts.states[i].graph.node(v).name + "." + attr +
                                 " = " + std::to_string(it->second));
  return rep;
}

// Whether the NAC of `rule` has at most one occurrence per match in every
// state explored up to `bound` steps: false is definite, true holds at the
// bound only.
inline bool has_unique_occurrences(const AttributedGrammar& g, const std::string& rule, const std::string& nac,
                                   std::size_t bound) {
  const AttrRule* r = g.find_rule(rule);
  if (!r) throw Error(ErrorKind::DanglingReference, "unknown rule " + rule);
  const Constraint* c = nullptr;
  for (const Constraint& x : r->rule.nacs)
    if (x.id == nac) c = &x;
  if (!c) throw Error(ErrorKind::DanglingReference, rule + ": unknown constraint " + nac);
  AttrExploreOptions opt;
  opt.max_steps = bound;
  AttrLts lts = explore_attributed(g, opt);
  for (const AttributedGraph& s : lts.states)
    for (const Morphism& m : find_matches(r->rule, s.graph))
      if (find_monos(c->graph, s.graph, pin_along(c->graph, c->n, m)).size() > 1) return false;
  return true;
}

// Bounded comparison of two attributed grammars whose type graphs agree by
// name on the part that `a` declares; states of `b` are projected onto that
// part and onto the attributes `a` declares before comparing.
inline EquivCheck check_attributed_equiv(const AttributedGrammar& a, const AttributedGrammar& b,
                                         const AttrExploreOptions& opt) {
  AttrLts la = explore_attributed(a, opt);
  AttrLts lb = explore_attributed(b, opt);
  TypeSpan span = span_by_name(b.type_graph, a.type_graph);
  auto project = [&](const AttributedGraph& s) {
    Retyped r = retype(span, s.graph);
    AttributedGraph out{r.graph, {}, {}};
    for (Index i = 0; i < r.graph.node_count(); ++i) {
      AttrValues vals;
      for (const std::string& k : a.decls.of(true, r.graph.node(i).type))
        if (auto it = s.node_attrs[r.back.nodes[i]].find(k); it != s.node_attrs[r.back.nodes[i]].end())
          vals[k] = it->second;
      out.node_attrs.push_back(std::move(vals));
    }
    for (Index i = 0; i < r.graph.edge_count(); ++i) {
      AttrValues vals;
      for (const std::string& k : a.decls.of(false, r.graph.edge(i).type))
        if (auto it = s.edge_attrs[r.back.edges[i]].find(k); it != s.edge_attrs[r.back.edges[i]].end())
          vals[k] = it->second;
      out.edge_attrs.push_back(std::move(vals));
    }
    return attr_key(out);
  };
  return check_correspondence(la, lb, project, [](const Transition& t) { return t.family; });
}

// Bounded agreement of an attributed grammar and its counter encoding.
struct CounterEquivReport {
  EquivCheck equiv;
  CounterReport invariants, pointwise, non_negative;
  std::size_t original_states = 0, encoded_states = 0;
  bool ok() const { return equiv.ok() && invariants.ok() && pointwise.ok() && non_negative.ok(); }
};

inline CounterEquivReport check_counter_encoding(const AttributedGrammar& original, const CounterEncoding& enc,
                                                 const AttrExploreOptions& opt) {
  CounterEquivReport rep;
  AttrLts a = explore_attributed(original, opt);
  AttrLts b = explore_attributed(enc.grammar, opt);
  rep.original_states = a.states.size();
  rep.encoded_states = b.states.size();
  rep.equiv = check_correspondence(
      a, b, [&](const AttributedGraph& s) { return attr_key(erase_counters(s, enc)); },
      [](const Transition& t) { return t.family; });
  rep.invariants = check_counter_invariants(b, enc.invariants);
  rep.pointwise = check_pointwise_agreement(original, enc, b);
  rep.non_negative = check_non_negative(b, "rwds");
  CounterReport orig_nn = check_non_negative(a, "rwds");
  rep.non_negative.violations.insert(rep.non_negative.violations.end(), orig_nn.violations.begin(),
                                     orig_nn.violations.end());
  return rep;
}

}  // namespace nacforge
