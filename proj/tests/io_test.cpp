#include <gtest/gtest.h>

#include <filesystem>

#include "nacforge/serialize.hpp"
#include "support.hpp"

using namespace nacforge;
using nftest::client_server;
using nftest::client_server_enriched;

namespace {

ErrorKind load_error(const Json& j) {
  try {
    parse_grammar(j);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

Json corpus_json() { return read_json_file(nftest::corpus("clientserver.json")); }

bool same_grammar(const ConditionalGrammar& a, const ConditionalGrammar& b) {
  // Type graphs are compared as written; the item types a colimit leaves on
  // them carry no meaning.
  if (type_graph_to_json(a.type_graph) != type_graph_to_json(b.type_graph) || !(a.start == b.start) ||
      a.rules.size() != b.rules.size())
    return false;
  for (std::size_t i = 0; i < a.rules.size(); ++i) {
    const Rule &x = a.rules[i], &y = b.rules[i];
    if (x.name != y.name || x.family != y.family || !(x.lhs == y.lhs) || !(x.interface == y.interface) ||
        !(x.rhs == y.rhs) || x.l != y.l || x.r != y.r || x.nacs.size() != y.nacs.size())
      return false;
    for (std::size_t k = 0; k < x.nacs.size(); ++k)
      if (x.nacs[k].id != y.nacs[k].id || !(x.nacs[k].graph == y.nacs[k].graph) || x.nacs[k].n != y.nacs[k].n)
        return false;
    // Singleton families need no core and none is written.
    if (!y.core.nodes.empty() && x.core != y.core) return false;
  }
  return true;
}

}  // namespace

TEST(GrammarJson, CorpusRoundTrip) {
  ConditionalGrammar again = parse_grammar(grammar_to_json(client_server()));
  EXPECT_TRUE(same_grammar(client_server(), again));
}

TEST(GrammarJson, EnrichedRoundTripKeepsFamilies) {
  const ConditionalGrammar& e = client_server_enriched().grammar;
  ConditionalGrammar again = parse_grammar(grammar_to_json(e));
  EXPECT_TRUE(same_grammar(e, again));
  EXPECT_EQ(families(again).size(), 8u);
}

TEST(GrammarJson, FileRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "nacforge_io_test.json";
  write_json_file(path.string(), grammar_to_json(client_server()));
  EXPECT_TRUE(same_grammar(client_server(), load_grammar(path.string())));
  std::filesystem::remove(path);
}

TEST(GrammarJson, AttributedRoundTrip) {
  AttributedGrammar g = load_attributed_grammar(nftest::corpus("tcr.json"));
  AttributedGrammar again = parse_attributed_grammar(attributed_grammar_to_json(g));
  EXPECT_EQ(again.rules.size(), g.rules.size());
  EXPECT_EQ(attr_key(again.start), attr_key(g.start));
  for (std::size_t i = 0; i < g.rules.size(); ++i) {
    EXPECT_EQ(again.rules[i].guard.size(), g.rules[i].guard.size());
    EXPECT_EQ(again.rules[i].updates.size(), g.rules[i].updates.size());
  }
}

TEST(GrammarJson, MissingFile) {
  try {
    load_grammar("/nonexistent/grammar.json");
    FAIL() << "expected SchemaError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SchemaError);
  }
}

TEST(GrammarErrors, MissingStart) {
  Json j = corpus_json();
  j.erase("start");
  EXPECT_EQ(load_error(j), ErrorKind::SchemaError);
}

TEST(GrammarErrors, EdgeToUnknownNode) {
  Json j = corpus_json();
  j["start"]["edges"].push_back({{"id", "x"}, {"type", "in12"}, {"src", "C1"}, {"tgt", "M9"}});
  EXPECT_EQ(load_error(j), ErrorKind::DanglingReference);
}

TEST(GrammarErrors, UnknownType) {
  Json j = corpus_json();
  j["start"]["nodes"].push_back({{"id", "Z"}, {"type", "Nope"}});
  EXPECT_EQ(load_error(j), ErrorKind::SchemaError);
}

TEST(GrammarErrors, IllTypedEdge) {
  Json j = corpus_json();
  j["start"]["edges"].push_back({{"id", "x"}, {"type", "in12"}, {"src", "C2"}, {"tgt", "C1"}});
  EXPECT_EQ(load_error(j), ErrorKind::SchemaError);
}

TEST(GrammarErrors, DuplicateNodeId) {
  Json j = corpus_json();
  j["start"]["nodes"].push_back({{"id", "C1"}, {"type", "C2"}});
  EXPECT_EQ(load_error(j), ErrorKind::SchemaError);
}

TEST(GrammarErrors, UnsafeStartGraph) {
  Json j = corpus_json();
  j["start"]["nodes"].push_back({{"id", "C1b"}, {"type", "C1"}});
  EXPECT_EQ(load_error(j), ErrorKind::SchemaError);
}

TEST(GrammarErrors, NonInjectiveInterface) {
  Json j = corpus_json();
  Json& r = j["rules"][0];
  r["lhs"]["nodes"] = Json::array({{{"id", "C1"}, {"type", "C1"}}});
  r["interface"]["nodes"] = Json::array({{{"id", "a"}, {"type", "C1"}}, {{"id", "b"}, {"type", "C1"}}});
  r["l"] = {{"nodes", {{"a", "C1"}, {"b", "C1"}}}};
  r["rhs"] = r["lhs"];
  r["r"] = r["l"];
  j["safe"] = false;
  EXPECT_EQ(load_error(j), ErrorKind::NonMonoEmbedding);
}

TEST(GrammarErrors, NonIncrementalConstraint) {
  Json j = corpus_json();
  Json& g = j["rules"][0]["nacs"][0]["graph"];
  g["nodes"].push_back({{"id", "S2"}, {"type", "S2"}});
  g["edges"].push_back({{"id", "by2"}, {"type", "by2"}, {"src", "M2"}, {"tgt", "S2"}});
  EXPECT_EQ(load_error(j), ErrorKind::NonIncrementalNAC);
}

TEST(GrammarErrors, UnsupportedVersion) {
  Json j = corpus_json();
  j["version"] = "nacforge/9";
  EXPECT_EQ(load_error(j), ErrorKind::SchemaError);
}

TEST(GrammarErrors, DuplicateRuleName) {
  Json j = corpus_json();
  j["rules"].push_back(j["rules"][0]);
  EXPECT_EQ(load_error(j), ErrorKind::SchemaError);
}

TEST(MorphismJson, RoundTrip) {
  const EnrichedGrammar& e = client_server_enriched();
  GrammarMorphism f = build_e(client_server(), e);
  Json j = morphism_to_json(f, e.grammar.type_graph, client_server().type_graph);
  GrammarMorphism g = parse_morphism(j, e.grammar, client_server());
  EXPECT_EQ(g.rule_map, f.rule_map);
  EXPECT_EQ(g.span.tg0, f.span.tg0);
  EXPECT_EQ(g.span.left, f.span.left);
  EXPECT_EQ(g.span.right, f.span.right);
  EXPECT_TRUE(check_morphism(g, e.grammar, client_server()).ok());
}

TEST(MorphismJson, ByNameSpan) {
  Json j = {{"version", "nacforge/1"}, {"type_span", "by_name"}, {"rules", Json::object()}};
  const EnrichedGrammar& e = client_server_enriched();
  GrammarMorphism f = parse_morphism(j, e.grammar, client_server());
  EXPECT_EQ(f.span.tg0, client_server().type_graph);
  EXPECT_TRUE(f.rule_map.empty());
}

TEST(MorphismJson, UnknownRuleIsDangling) {
  Json j = {{"type_span", "by_name"}, {"rules", {{"no-such-rule", "pc(C1)"}}}};
  try {
    parse_morphism(j, client_server(), client_server());
    FAIL() << "expected DanglingReference";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingReference);
  }
}

TEST(MorphismJson, UnknownSpanKeyword) {
  Json j = {{"type_span", "by_magic"}, {"rules", Json::object()}};
  EXPECT_THROW(parse_morphism(j, client_server(), client_server()), Error);
}

TEST(InvariantJson, OneClausePerShape) {
  const EnrichedGrammar& e = client_server_enriched();
  Json j = invariant_to_json(e.phi, e.etg.tg_bar);
  ASSERT_EQ(j["clauses"].size(), 8u);
  EXPECT_EQ(j["clauses"][0]["shape"], "s0");
  EXPECT_EQ(j["clauses"][0]["complement"]["nodes"].size(), 2u);
}

TEST(LtsJson, StatesAndTransitions) {
  Lts l = explore(client_server());
  Json j = lts_to_json(l, client_server().type_graph);
  EXPECT_EQ(j["states"].size(), 20u);
  EXPECT_EQ(j["transitions"].size(), 30u);
  EXPECT_EQ(j["initial"], l.initial);
  EXPECT_FALSE(j["bound_reached"].get<bool>());
}

TEST(Dot, LtsMarksInitialAndFrontier) {
  ExploreOptions o;
  o.max_steps = 1;
  std::string dot = lts_to_dot(explore(client_server(), o));
  EXPECT_NE(dot.find("doublecircle"), std::string::npos);
  EXPECT_NE(dot.find("style=dashed"), std::string::npos);
  EXPECT_NE(dot.find("\"pc(C1)\""), std::string::npos);
}

TEST(Dot, QuotesNames) {
  EXPECT_EQ(detail::dot_quote("a\"b"), "\"a\\\"b\"");
  std::string dot = graph_to_dot(client_server().start, client_server().type_graph);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
}
