// nacforge: command-line front end.
//
// Exit status: 0 when every check passes, 1 when a check fails, 2 for usage
// errors and for grammars or flags the library rejects.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nacforge/attributed.hpp"
#include "nacforge/encoder.hpp"
#include "nacforge/explorer.hpp"
#include "nacforge/io.hpp"
#include "nacforge/morphism.hpp"
#include "nacforge/serialize.hpp"
#include "nacforge/shapes.hpp"
#include "nacforge/verify.hpp"

namespace fs = std::filesystem;
using namespace nacforge;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

// Attributed grammars are bounded by default: their counters usually grow
// without limit.
constexpr std::size_t kDefaultAttributedDepth = 12;

struct Common {
  bool json = false;
  bool timings = false;
  std::optional<std::size_t> max_steps;
  std::optional<std::size_t> k_max;
};

void add_json(CLI::App* cmd, Common& c) { cmd->add_flag("--json", c.json, "Print a JSON report instead of text"); }

void add_bounds(CLI::App* cmd, Common& c) {
  cmd->add_option("--max-steps", c.max_steps, "Exploration depth bound (derivation length)");
  cmd->add_option("--k-max", c.k_max, "Largest number of multiobject copies to instantiate");
}

ExploreOptions explore_options(const Common& c) {
  ExploreOptions o;
  if (c.max_steps) o.max_steps = *c.max_steps;
  return o;
}

AttrExploreOptions attr_options(const Common& c) {
  AttrExploreOptions o;
  o.max_steps = c.max_steps.value_or(kDefaultAttributedDepth);
  o.k_max = c.k_max;
  return o;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::SchemaError, "cannot write " + path);
  out << text;
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

std::string file_safe(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return out;
}

std::string describe_body(const TypedShape& s, const Graph& tg) {
  auto node = [&](Index v) { return s.body.node(v).name + ":" + tg.node(s.body.node(v).type).name; };
  std::string out;
  for (const Edge& e : s.body.edges()) {
    if (!out.empty()) out += ", ";
    out += node(e.src) + " -" + tg.edge(e.type).name + "-> " + node(e.tgt);
  }
  return out.empty() ? node(0) : out;
}

std::string describe_border(const TypedShape& s, const Graph& tg) {
  std::string out;
  for (Index v = 0; v < s.border.node_count(); ++v)
    out += (v ? ", " : "") + s.border.node(v).name + ":" + tg.node(s.border.node(v).type).name;
  return out.empty() ? "-" : out;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path, const Common& c) {
  Json raw = read_json_file(path);
  Json rep;
  if (is_attributed(raw)) {
    AttributedGrammar g = parse_attributed_grammar(raw);
    std::size_t nacs = 0, mos = 0;
    for (const AttrRule& r : g.rules) {
      nacs += r.rule.nacs.size();
      mos += r.multiobjects.size();
    }
    rep = {{"file", path},
           {"attributed", true},
           {"safe", false},
           {"node_types", g.type_graph.node_count()},
           {"edge_types", g.type_graph.edge_count()},
           {"start_nodes", g.start.graph.node_count()},
           {"start_edges", g.start.graph.edge_count()},
           {"rules", g.rules.size()},
           {"constraints", nacs},
           {"multiobjects", mos}};
  } else {
    ConditionalGrammar g = parse_grammar(raw);
    std::size_t nacs = 0;
    for (const Rule& r : g.rules) {
      nacs += r.nacs.size();
      for (const Constraint& k : r.nacs)
        if (auto pair = incomparable_factorisations(r.lhs, k))
          throw Error(ErrorKind::NonIncrementalNAC, r.name + ": constraint " + k.id + " factors incomparably through " +
                                                        pair->first + " and " + pair->second);
    }
    rep = {{"file", path},
           {"attributed", false},
           {"safe", g.safe},
           {"node_types", g.type_graph.node_count()},
           {"edge_types", g.type_graph.edge_count()},
           {"start_nodes", g.start.node_count()},
           {"start_edges", g.start.edge_count()},
           {"rules", g.rules.size()},
           {"constraints", nacs}};
  }
  if (c.json) {
    rep["ok"] = true;
    print_json(rep);
    return kPass;
  }
  std::cout << path << ": ok\n"
            << "  type graph:  " << rep["node_types"] << " node types, " << rep["edge_types"] << " edge types\n"
            << "  start graph: " << rep["start_nodes"] << " nodes, " << rep["start_edges"] << " edges\n"
            << "  rules:       " << rep["rules"] << " with " << rep["constraints"] << " constraints\n"
            << "  mode:        " << (rep["safe"].get<bool>() ? "safe" : "unsafe")
            << (rep["attributed"].get<bool>() ? ", attributed" : "") << "\n";
  if (rep.contains("multiobjects")) std::cout << "  multiobjects: " << rep["multiobjects"] << "\n";
  if (!rep["attributed"].get<bool>()) std::cout << "  constraints are incremental\n";
  return kPass;
}

int cmd_shapes(const std::string& path, const Common& c) {
  Json raw = read_json_file(path);
  ConditionalGrammar g = is_attributed(raw) ? parse_attributed_grammar(raw).skeleton() : parse_grammar(raw);
  std::vector<TypedShape> shapes = shapes_of(g);
  std::map<std::string, int> counts;
  Json rows = Json::array();
  std::vector<std::vector<std::string>> table{{"rule", "constraint", "shape", "kind", "border", "body"}};
  for (const Rule& r : g.rules)
    for (const Constraint& k : r.nacs) {
      TypedShape s = classify(r.lhs, k);
      auto it = std::find_if(shapes.begin(), shapes.end(), [&](const TypedShape& t) { return t.key == s.key; });
      ++counts[to_string(s.kind)];
      std::vector<std::string> row{r.name, k.id, it->id, to_string(s.kind), describe_border(s, g.type_graph),
                                   describe_body(s, g.type_graph)};
      rows.push_back({{"rule", row[0]}, {"constraint", row[1]}, {"shape", row[2]}, {"kind", row[3]},
                      {"border", row[4]}, {"body", row[5]}});
      table.push_back(std::move(row));
    }
  if (c.json) {
    print_json({{"file", path}, {"constraints", rows}, {"kinds", counts}, {"distinct_shapes", shapes.size()}});
    return kPass;
  }
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i)
      std::cout << (i ? "  " : "") << (i + 1 < row.size() ? std::string(row[i]).append(width[i] - row[i].size(), ' ')
                                                           : row[i]);
    std::cout << "\n";
  }
  std::cout << "\nkinds:";
  for (const auto& [k, n] : counts) std::cout << " " << k << ":" << n;
  std::cout << "\ndistinct shapes: " << shapes.size() << "\n";
  return kPass;
}

struct EncodeArgs {
  std::string input, output, invariant, dot_dir, morphism;
  bool drop = false, counters = false;
};

int encode_counters_cmd(const EncodeArgs& a, const Common& c) {
  if (a.drop || !a.invariant.empty() || !a.morphism.empty())
    throw CLI::ValidationError("--drop-nacs, --emit-invariant and --emit-morphism apply to safe grammars only");
  AttributedGrammar g = load_attributed_grammar(a.input);
  CounterEncoding enc = encode_counters(g);
  Json out = attributed_grammar_to_json(enc.grammar);
  if (!a.dot_dir.empty()) {
    fs::create_directories(a.dot_dir);
    write_text((fs::path(a.dot_dir) / "type_graph.dot").string(), graph_to_dot(enc.grammar.type_graph,
                                                                               enc.grammar.type_graph, "TG"));
    for (const AttrRule& r : enc.grammar.rules)
      write_text((fs::path(a.dot_dir) / (file_safe(r.rule.name) + ".dot")).string(),
                 rule_to_dot(r.rule, enc.grammar.type_graph));
  }
  if (a.output.empty()) {
    print_json(out);
    return kPass;
  }
  write_json_file(a.output, out);
  Json invs = Json::array();
  for (const CounterInvariant& i : enc.invariants) invs.push_back(i.text);
  if (c.json) {
    print_json({{"output", a.output}, {"rules", enc.grammar.rules.size()}, {"invariants", invs}, {"log", enc.log}});
    return kPass;
  }
  std::cout << "wrote " << a.output << ": " << enc.grammar.rules.size() << " rules, "
            << enc.grammar.type_graph.node_count() << " node types, " << enc.grammar.type_graph.edge_count()
            << " edge types\ncounter invariants:\n";
  for (const CounterInvariant& i : enc.invariants) std::cout << "  " << i.text << "\n";
  std::cout << "encoding steps:\n";
  for (const std::string& s : enc.log) std::cout << "  " << s << "\n";
  return kPass;
}

int cmd_encode(const EncodeArgs& a, const Common& c) {
  Json raw = read_json_file(a.input);
  if (a.counters || is_attributed(raw)) return encode_counters_cmd(a, c);
  if (a.drop && !a.morphism.empty())
    throw CLI::ValidationError("--emit-morphism writes e from the enriched grammar; leave out --drop-nacs");
  ConditionalGrammar cg = parse_grammar(raw);
  EnrichedGrammar e = enrich_grammar(cg);
  ConditionalGrammar result = a.drop ? drop_nacs(e.grammar) : e.grammar;
  Json out = grammar_to_json(result);
  if (!a.invariant.empty()) write_json_file(a.invariant, invariant_to_json(e.phi, e.etg.tg_bar));
  if (!a.morphism.empty()) write_json_file(a.morphism, morphism_to_json(build_e(cg, e), e.grammar.type_graph,
                                                                        cg.type_graph));
  if (!a.dot_dir.empty()) {
    fs::create_directories(a.dot_dir);
    write_text((fs::path(a.dot_dir) / "type_graph.dot").string(), graph_to_dot(e.etg.tg_bar, e.etg.tg_bar, "TG"));
    write_text((fs::path(a.dot_dir) / "start.dot").string(), graph_to_dot(result.start, e.etg.tg_bar, "start"));
    for (const Rule& r : result.rules)
      write_text((fs::path(a.dot_dir) / (file_safe(r.name) + ".dot")).string(), rule_to_dot(r, e.etg.tg_bar));
  }
  if (a.output.empty()) {
    print_json(out);
    return kPass;
  }
  write_json_file(a.output, out);
  Json fams = Json::array();
  for (const RuleFamily& f : e.families) fams.push_back({{"rule", f.original_name}, {"members", f.members.size()}});
  if (c.json) {
    print_json({{"output", a.output},
                {"node_types", e.etg.tg_bar.node_count()},
                {"edge_types", e.etg.tg_bar.edge_count()},
                {"rules", result.rules.size()},
                {"nacs_dropped", a.drop},
                {"families", fams}});
    return kPass;
  }
  std::cout << "wrote " << a.output << ": " << e.etg.tg_bar.node_count() << " node types, "
            << e.etg.tg_bar.edge_count() << " edge types, " << result.rules.size() << " rules"
            << (a.drop ? ", constraints dropped" : "") << "\nfamilies:\n";
  for (const RuleFamily& f : e.families) std::cout << "  " << f.original_name << ": " << f.members.size() << "\n";
  return kPass;
}

struct ExploreArgs {
  std::string input, lts_out, dot_out;
};

template <class State>
int report_lts(const BasicLts<State>& lts, const ExploreArgs& a, const Common& c, const Json& lts_json) {
  if (!a.lts_out.empty()) write_json_file(a.lts_out, lts_json);
  if (!a.dot_out.empty()) write_text(a.dot_out, lts_to_dot(lts));
  std::size_t frontier = std::count(lts.expanded.begin(), lts.expanded.end(), false);
  if (c.json) {
    print_json({{"file", a.input},
                {"states", lts.states.size()},
                {"transitions", lts.transitions.size()},
                {"bound_reached", lts.bound_reached},
                {"frontier", frontier}});
    return kPass;
  }
  std::cout << "states:      " << lts.states.size() << "\ntransitions: " << lts.transitions.size()
            << "\nbound:       " << (lts.bound_reached ? "reached (" + std::to_string(frontier) + " frontier states)"
                                                       : "not reached, state space complete")
            << "\n";
  return kPass;
}

int cmd_explore(const ExploreArgs& a, const Common& c) {
  Json raw = read_json_file(a.input);
  if (is_attributed(raw)) {
    AttributedGrammar g = parse_attributed_grammar(raw);
    AttrLts lts = explore_attributed(g, attr_options(c));
    return report_lts(lts, a, c, a.lts_out.empty() ? Json() : lts_to_json(lts, g.type_graph));
  }
  ConditionalGrammar g = parse_grammar(raw);
  Lts lts = explore(g, explore_options(c));
  return report_lts(lts, a, c, a.lts_out.empty() ? Json() : lts_to_json(lts, g.type_graph));
}

int cmd_verify(const std::string& path, const Common& c) {
  Json raw = read_json_file(path);
  VerifyReport rep = is_attributed(raw) ? verify_attributed(parse_attributed_grammar(raw), attr_options(c))
                                        : verify_grammar(parse_grammar(raw), explore_options(c));
  if (c.json) {
    Json j = rep.to_json();
    if (!c.timings)
      for (Json& line : j["checks"]) line.erase("seconds");
    print_json(j);
    return rep.ok() ? kPass : kFail;
  }
  std::size_t w = 0;
  for (const CheckLine& l : rep.checks) w = std::max(w, l.name.size());
  for (const CheckLine& l : rep.checks) {
    std::cout << (l.ok ? "PASS  " : "FAIL  ") << l.name << std::string(w - l.name.size() + 2, ' ') << l.detail;
    if (c.timings) std::cout << " (" << std::fixed << std::setprecision(3) << l.seconds << " s)";
    std::cout << "\n";
  }
  if (!rep.notes.empty()) {
    std::cout << "\nNOTES\n";
    for (const std::string& n : rep.notes) std::cout << "  " << n << "\n";
  }
  if (!rep.findings.empty()) {
    std::cout << "\nFINDINGS (reported, not failures)\n";
    for (const std::string& f : rep.findings) std::cout << "  " << f << "\n";
  }
  std::cout << "\nresult: " << (rep.ok() ? "pass" : "fail") << "\n";
  return rep.ok() ? kPass : kFail;
}

int cmd_check_morphism(const std::string& src, const std::string& tgt, const std::string& file, const Common& c) {
  ConditionalGrammar g1 = load_grammar(src), g2 = load_grammar(tgt);
  GrammarMorphism f = parse_morphism(read_json_file(file), g1, g2);
  MorphismReport m = check_morphism(f, g1, g2);
  if (c.json) {
    print_json({{"ok", m.ok()},
                {"start_preserved", m.start_preserved},
                {"rules_ancestral", m.rules_ancestral},
                {"constraints_reflected", m.constraints_reflected},
                {"problems", m.problems}});
    return m.ok() ? kPass : kFail;
  }
  auto mark = [](bool b) { return b ? "PASS  " : "FAIL  "; };
  std::cout << mark(m.start_preserved) << "1 start graph preserved\n"
            << mark(m.rules_ancestral) << "2 every rule maps to an ancestor rule\n"
            << mark(m.constraints_reflected) << "3 constraints are reflected\n";
  for (const std::string& p : m.problems) std::cout << "  " << p << "\n";
  std::cout << "\nresult: " << (m.ok() ? "grammar morphism" : "not a grammar morphism") << "\n";
  return m.ok() ? kPass : kFail;
}

int cmd_equiv(const std::string& a, const std::string& b, const Common& c) {
  Json ja = read_json_file(a), jb = read_json_file(b);
  EquivCheck r;
  if (is_attributed(ja) || is_attributed(jb))
    r = check_attributed_equiv(parse_attributed_grammar(ja), parse_attributed_grammar(jb), attr_options(c));
  else
    r = check_equiv(parse_grammar(ja), parse_grammar(jb), explore_options(c));
  if (c.json) {
    print_json({{"ok", r.ok()},
                {"bisimilar", r.fixpoint_bisimilar},
                {"functional_forth", r.functional_forth},
                {"functional_back", r.functional_back},
                {"states", {r.states_a, r.states_b}},
                {"transitions", {r.transitions_a, r.transitions_b}},
                {"problems", r.problems},
                {"counterexample", r.counterexample}});
    return r.ok() ? kPass : kFail;
  }
  std::cout << a << ": " << r.states_a << " states, " << r.transitions_a << " transitions\n"
            << b << ": " << r.states_b << " states, " << r.transitions_b << " transitions\n"
            << "forth: " << (r.functional_forth ? "ok" : "fails") << "\nback:  "
            << (r.functional_back ? "ok" : "fails") << "\n";
  for (const std::string& p : r.problems) std::cout << "  " << p << "\n";
  if (!r.counterexample.empty()) {
    std::cout << "distinguishing path:";
    for (const std::string& s : r.counterexample) std::cout << " " << s;
    std::cout << "\n";
  }
  std::cout << "\nresult: " << (r.ok() ? "bisimilar" : "not bisimilar") << "\n";
  return r.ok() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nacforge: encode negative application conditions of graph grammars and check the encoding"};
  app.require_subcommand(1);
  Common common;
  std::string in1, in2, in3;
  EncodeArgs enc;
  ExploreArgs exp;

  auto* validate = app.add_subcommand("validate", "Parse and validate a grammar file");
  validate->add_option("grammar", in1)->required();
  add_json(validate, common);

  auto* shapes = app.add_subcommand("shapes", "Classify the shape of every constraint");
  shapes->add_option("grammar", in1)->required();
  add_json(shapes, common);

  auto* encode = app.add_subcommand("encode", "Write the enriched (or counter-encoded) grammar");
  encode->add_option("grammar", enc.input)->required();
  encode->add_option("-o,--output", enc.output, "Output grammar file (default: standard output)");
  encode->add_flag("--drop-nacs", enc.drop, "Drop the constraints of the enriched grammar");
  encode->add_option("--emit-invariant", enc.invariant, "Write the complementation invariant as JSON");
  encode->add_option("--emit-morphism", enc.morphism, "Write the morphism from the enriched grammar to the input");
  encode->add_option("--dot", enc.dot_dir, "Directory for DOT drawings of the type graph and rules");
  encode->add_flag("--counters", enc.counters, "Counter encoding (implied for attributed grammars)");
  add_json(encode, common);

  auto* explore_cmd = app.add_subcommand("explore", "Explore the reachable transition system");
  explore_cmd->add_option("grammar", exp.input)->required();
  explore_cmd->add_option("--lts", exp.lts_out, "Write the transition system as JSON");
  explore_cmd->add_option("--dot", exp.dot_out, "Write the transition system as DOT");
  add_bounds(explore_cmd, common);
  add_json(explore_cmd, common);

  auto* verify = app.add_subcommand("verify", "Encode the grammar and run every correctness check");
  verify->add_option("grammar", in1)->required();
  verify->add_flag("--timings", common.timings, "Show the time each check took");
  add_bounds(verify, common);
  add_json(verify, common);

  auto* morph = app.add_subcommand("check-morphism", "Check a grammar morphism between two grammars");
  morph->add_option("source", in1)->required();
  morph->add_option("target", in2)->required();
  morph->add_option("morphism", in3)->required();
  add_json(morph, common);

  auto* equiv = app.add_subcommand("equiv", "Compare the transition systems of two grammars");
  equiv->add_option("grammar", in1)->required();
  equiv->add_option("other", in2)->required();
  add_bounds(equiv, common);
  add_json(equiv, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate) return cmd_validate(in1, common);
    if (*shapes) return cmd_shapes(in1, common);
    if (*encode) return cmd_encode(enc, common);
    if (*explore_cmd) return cmd_explore(exp, common);
    if (*verify) return cmd_verify(in1, common);
    if (*morph) return cmd_check_morphism(in1, in2, in3, common);
    if (*equiv) return cmd_equiv(in1, in2, common);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
