#include <gtest/gtest.h>

#include "nacforge/engine.hpp"
#include "nacforge/morphism.hpp"
#include "support.hpp"

using namespace nacforge;
using nftest::client_server;
using nftest::client_server_enriched;

namespace {

GrammarMorphism identity_morphism(const ConditionalGrammar& g) {
  GrammarMorphism f;
  f.span = identity_span(g.type_graph);
  for (const Rule& r : g.rules) f.rule_map[r.name] = r.name;
  return f;
}

// Fires the first enabled step `n` times.
std::vector<DerivationStep> first_steps(const ConditionalGrammar& g, std::size_t n) {
  std::vector<DerivationStep> out;
  Graph cur = g.start;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Enabled> en = enabled_steps(g, cur, k);
    if (en.empty()) break;
    out.push_back(en.front().step);
    cur = out.back().after;
  }
  return out;
}

}  // namespace

TEST(Retype, DropsComplementItems) {
  const EnrichedGrammar& e = client_server_enriched();
  GrammarMorphism f = build_e(client_server(), e);
  Retyped r = retype(f.span, e.grammar.start);
  EXPECT_TRUE(isomorphic_typed(r.graph, client_server().start));
  EXPECT_EQ(r.back.nodes.size(), 3u);
  EXPECT_TRUE(is_morphism(r.graph, e.grammar.start, r.back, false));
}

TEST(Retype, SpanByNameKeepsSharedItems) {
  const Graph& tg = client_server().type_graph;
  const Graph& tg_bar = client_server_enriched().etg.tg_bar;
  TypeSpan s = span_by_name(tg_bar, tg);
  EXPECT_EQ(s.tg0, tg);
  EXPECT_TRUE(is_injective(s.left));
  EXPECT_TRUE(is_morphism(s.tg0, tg_bar, s.left, false));
}

TEST(CheckMorphism, EncodingIsAMorphism) {
  const EnrichedGrammar& e = client_server_enriched();
  GrammarMorphism f = build_e(client_server(), e);
  MorphismReport rep = check_morphism(f, e.grammar, client_server());
  EXPECT_TRUE(rep.ok()) << (rep.problems.empty() ? "" : rep.problems.front());
  EXPECT_EQ(f.witness.size(), e.grammar.rules.size());
}

TEST(CheckMorphism, DroppingConstraintsIsAMorphism) {
  const EnrichedGrammar& e = client_server_enriched();
  GrammarMorphism f = build_d(e.grammar);
  MorphismReport rep = check_morphism(f, e.grammar, drop_nacs(e.grammar));
  EXPECT_TRUE(rep.ok()) << (rep.problems.empty() ? "" : rep.problems.front());
}

TEST(CheckMorphism, IdentityIsAMorphism) {
  GrammarMorphism f = identity_morphism(client_server());
  EXPECT_TRUE(check_morphism(f, client_server(), client_server()).ok());
}

TEST(CheckMorphism, WrongStartGraphFailsConditionOne) {
  ConditionalGrammar g2 = client_server();
  g2.start.add_node("extra", g2.type_graph.find_node("S1"));
  GrammarMorphism f = identity_morphism(client_server());
  MorphismReport rep = check_morphism(f, client_server(), g2);
  EXPECT_FALSE(rep.start_preserved);
  EXPECT_EQ(rep.first_failed(), 1);
}

TEST(CheckMorphism, SwappedRuleFailsConditionTwo) {
  const EnrichedGrammar& e = client_server_enriched();
  GrammarMorphism f = build_e(client_server(), e);
  f.rule_map["pc(C1)bar"] = "pc(C2)";
  MorphismReport rep = check_morphism(f, e.grammar, client_server());
  EXPECT_TRUE(rep.start_preserved);
  EXPECT_FALSE(rep.rules_ancestral);
  EXPECT_EQ(rep.first_failed(), 2);
  ASSERT_FALSE(rep.problems.empty());
  EXPECT_NE(rep.problems.front().find("pc(C1)bar"), std::string::npos);
}

TEST(CheckMorphism, UnmappedRuleFailsConditionTwo) {
  GrammarMorphism f = identity_morphism(client_server());
  f.rule_map.erase("sm(S1)");
  EXPECT_EQ(check_morphism(f, client_server(), client_server()).first_failed(), 2);
}

TEST(CheckMorphism, AddingConstraintsFailsConditionThree) {
  // Target constraints must be reflected by the source; the NAC-free
  // grammar has none to reflect them with.
  ConditionalGrammar plain = drop_nacs(client_server());
  GrammarMorphism f = identity_morphism(plain);
  MorphismReport rep = check_morphism(f, plain, client_server());
  EXPECT_TRUE(rep.start_preserved);
  EXPECT_TRUE(rep.rules_ancestral);
  EXPECT_FALSE(rep.constraints_reflected);
  EXPECT_EQ(rep.first_failed(), 3);
}

TEST(CheckMorphism, RequireThrowsConditionViolated) {
  ConditionalGrammar plain = drop_nacs(client_server());
  GrammarMorphism f = identity_morphism(plain);
  try {
    require_morphism(f, plain, client_server());
    FAIL() << "expected ConditionViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConditionViolated);
  }
}

TEST(MapDerivation, EnrichedRunMapsToSourceRun) {
  const EnrichedGrammar& e = client_server_enriched();
  GrammarMorphism f = build_e(client_server(), e);
  ASSERT_TRUE(check_morphism(f, e.grammar, client_server()).ok());
  std::vector<DerivationStep> run = first_steps(e.grammar, 5);
  ASSERT_EQ(run.size(), 5u);
  std::vector<DerivationStep> image = map_derivation(f, e.grammar, client_server(), run);
  ASSERT_EQ(image.size(), run.size());
  for (std::size_t k = 0; k < run.size(); ++k) {
    EXPECT_EQ(image[k].rule, f.rule_map.at(run[k].rule));
    EXPECT_TRUE(isomorphic_typed(image[k].after, restrict_to_tg(run[k].after, e.etg)));
  }
}

TEST(MapDerivation, NeedsWitnesses) {
  const EnrichedGrammar& e = client_server_enriched();
  GrammarMorphism f = build_e(client_server(), e);  // witnesses not computed
  std::vector<DerivationStep> run = first_steps(e.grammar, 1);
  try {
    map_derivation(f, e.grammar, client_server(), run);
    FAIL() << "expected MappingFailed";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::MappingFailed);
  }
}
