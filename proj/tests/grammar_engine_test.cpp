#include <gtest/gtest.h>

#include "nacforge/engine.hpp"
#include "nacforge/explorer.hpp"
#include "nacforge/iso.hpp"
#include "oracle/naive_safe.hpp"
#include "support.hpp"

using namespace nacforge;
using nftest::client_server;
using nftest::make_graph;
using nftest::rule;

namespace {

ApplyOptions safe_options(const ConditionalGrammar& g) {
  ApplyOptions o;
  o.safe = true;
  o.type_graph = &g.type_graph;
  return o;
}

// Applies `name` at its only match.
DerivationStep fire(const ConditionalGrammar& g, const std::string& name, const Graph& host) {
  const Rule& r = rule(g, name);
  std::vector<Morphism> ms = find_matches(r, host);
  if (ms.size() != 1) throw Error(ErrorKind::Internal, "test: " + name + " has " + std::to_string(ms.size()) + " matches");
  return apply(r, ms[0], host, safe_options(g));
}

Rule identity_rule(const Graph& l) {
  Rule r;
  r.name = "id";
  r.lhs = r.interface = r.rhs = l;
  r.l = r.r = identity(l);
  return r;
}

}  // namespace

TEST(FindMatches, PromotionHasOneMatchInStartGraph) {
  EXPECT_EQ(find_matches(rule(client_server(), "pc(C1)"), client_server().start).size(), 1u);
}

TEST(FindMatches, EmptyLhsMatchesOnce) {
  Rule r = identity_rule(Graph{});
  EXPECT_EQ(find_matches(r, client_server().start).size(), 1u);
  EXPECT_EQ(find_matches(r, Graph{}).size(), 1u);
}

TEST(FindMatches, JoinNeedsAMeeting) {
  EXPECT_TRUE(find_matches(rule(client_server(), "jm(C3,M1)"), client_server().start).empty());
}

TEST(FindMatches, AgreesWithBruteForceOnReachableStates) {
  const ConditionalGrammar& cs = client_server();
  Lts lts = explore(cs);
  for (const Graph& s : lts.states) {
    oracle::NGraph host = oracle::read_graph(graph_to_json(s, cs.type_graph));
    for (const Rule& r : cs.rules) {
      oracle::NGraph lhs = oracle::read_graph(graph_to_json(r.lhs, cs.type_graph));
      ASSERT_EQ(find_matches(r, s).size(), oracle::all_maps(lhs, host).size()) << r.name;
    }
  }
}

TEST(Satisfies, PromotionAllowedInitially) {
  const Rule& pc = rule(client_server(), "pc(C1)");
  Morphism m = find_matches(pc, client_server().start).at(0);
  EXPECT_TRUE(satisfies(m, pc.nacs.at(0), client_server().start));
}

TEST(Satisfies, ForbiddenNodeOfAbsentType) {
  Graph l = make_graph({{"a", 0}});
  Constraint c{"extra", make_graph({{"a", 0}, {"b", 1}}), Morphism{{0}, {}}};
  Graph host = make_graph({{"x", 0}, {"y", 0}});
  EXPECT_TRUE(satisfies(Morphism{{0}, {}}, c, host));
}

TEST(Satisfies, SecondJoinViolatesItsConstraint) {
  const ConditionalGrammar& cs = client_server();
  Graph g = fire(cs, "pc(C2)", cs.start).after;
  g = fire(cs, "sm(S2)", g).after;
  g = fire(cs, "jm(C1,M2)", g).after;
  const Rule& jm = rule(cs, "jm(C1,M2)");
  Morphism m = find_matches(jm, g).at(0);
  EXPECT_FALSE(satisfies(m, jm.nacs.at(0), g));

  // Brute force agrees.
  oracle::NGrammar og = oracle::read_grammar(grammar_to_json(cs));
  const oracle::NRule* ojm = nullptr;
  for (const auto& r : og.rules)
    if (r.name == "jm(C1,M2)") ojm = &r;
  ASSERT_NE(ojm, nullptr);
  oracle::NGraph host = oracle::read_graph(graph_to_json(g, cs.type_graph));
  auto maps = oracle::all_maps(ojm->lhs, host);
  ASSERT_EQ(maps.size(), 1u);
  EXPECT_FALSE(oracle::nac_ok(*ojm, maps[0], host));
}

TEST(Satisfies, AgreesWithBruteForceEverywhere) {
  const ConditionalGrammar& cs = client_server();
  oracle::NGrammar og = oracle::read_grammar(grammar_to_json(cs));
  for (const Graph& s : explore(cs).states) {
    oracle::NGraph host = oracle::read_graph(graph_to_json(s, cs.type_graph));
    for (std::size_t i = 0; i < cs.rules.size(); ++i) {
      std::vector<Morphism> ours = find_matches(cs.rules[i], s);
      auto theirs = oracle::all_maps(og.rules[i].lhs, host);
      ASSERT_EQ(ours.size(), theirs.size());
      // At most one match per rule in a safe grammar, so the two lists align.
      for (std::size_t k = 0; k < ours.size(); ++k)
        EXPECT_EQ(!violated_constraint(cs.rules[i], ours[k], s).has_value(), oracle::nac_ok(og.rules[i], theirs[k], host))
            << cs.rules[i].name;
    }
  }
}

TEST(Subsumes, Reflexive) {
  const Rule& pc = rule(client_server(), "pc(C1)");
  EXPECT_TRUE(subsumes(pc.lhs, pc.nacs[0], pc.lhs, pc.nacs[0]));
}

TEST(Subsumes, FactorisationThroughLargerConstraint) {
  Graph l = make_graph({{"a"}});
  Constraint small{"edge", make_graph({{"a"}, {"b"}}, {{"e", "a", "b"}}), Morphism{{0}, {}}};
  Constraint big{"path", make_graph({{"a"}, {"b"}, {"c"}}, {{"e", "a", "b"}, {"f", "b", "c"}}), Morphism{{0}, {}}};
  EXPECT_TRUE(subsumes(l, small, l, big));
  EXPECT_FALSE(subsumes(l, big, l, small));
}

TEST(Subsumes, DifferentLeftHandSidesAreRejected) {
  const Rule& pc = rule(client_server(), "pc(C1)");
  const Rule& jm = rule(client_server(), "jm(C1,M2)");
  try {
    subsumes(pc.lhs, pc.nacs[0], jm.lhs, jm.nacs[0]);
    FAIL() << "expected PreconditionViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PreconditionViolated);
  }
}

TEST(Apply, PromotionCreatesServer) {
  const ConditionalGrammar& cs = client_server();
  DerivationStep s = fire(cs, "pc(C1)", cs.start);
  EXPECT_NE(s.after.find_node("S1"), kNone);
  EXPECT_EQ(s.after.find_node("C1"), kNone);
  EXPECT_EQ(s.after.node_count(), 3u);
  // Both squares of the witness are pushouts.
  const Rule& r = rule(cs, "pc(C1)");
  EXPECT_TRUE(is_pushout(r.interface, r.lhs, s.context, s.before, r.l, s.k, s.match, s.g));
  EXPECT_TRUE(is_pushout(r.interface, r.rhs, s.context, s.after, r.r, s.k, s.comatch, s.h));
}

TEST(Apply, SecondMeetingOfSameServerIsForbidden) {
  const ConditionalGrammar& cs = client_server();
  Graph g = fire(cs, "pc(C1)", cs.start).after;
  g = fire(cs, "sm(S1)", g).after;
  const Rule& sm = rule(cs, "sm(S1)");
  Morphism m = find_matches(sm, g).at(0);
  try {
    apply(sm, m, g, safe_options(cs));
    FAIL() << "expected NacViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NacViolated);
  }
}

TEST(Apply, IdentityRuleChangesNothing) {
  const Graph& g0 = client_server().start;
  Rule id = identity_rule(make_graph({{"C1", 0}}));
  DerivationStep s = apply(id, find_matches(id, g0).at(0), g0);
  EXPECT_TRUE(isomorphic(s.after, g0));
}

TEST(Apply, NonInjectiveMatchIsRejected) {
  Rule id = identity_rule(make_graph({{"a"}, {"b"}}));
  Graph host = make_graph({{"x"}});
  EXPECT_THROW(apply(id, Morphism{{0, 0}, {}}, host), Error);
}

TEST(Apply, DanglingDeletionFails) {
  Rule del;
  del.name = "del";
  del.lhs = make_graph({{"a"}});
  del.l = del.r = Morphism{};
  Graph host = make_graph({{"x"}, {"y"}}, {{"e", "x", "y"}});
  try {
    apply(del, Morphism{{0}, {}}, host);
    FAIL() << "expected DanglingCondition";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingCondition);
  }
}

TEST(Apply, FreshNamesOutsideSafeMode) {
  Rule add;
  add.name = "add";
  add.rhs = make_graph({{"n"}});
  add.l = add.r = Morphism{};
  ApplyOptions o;
  o.step = 7;
  DerivationStep s = apply(add, Morphism{}, Graph{}, o);
  EXPECT_EQ(s.after.node(0).name, "add#7#n");
}

TEST(DerivedRule, IdentityStepGivesIdentitySpan) {
  const Graph& g0 = client_server().start;
  Rule id = identity_rule(make_graph({{"C1", 0}}));
  Rule d = derived_rule(apply(id, find_matches(id, g0).at(0), g0));
  EXPECT_TRUE(is_iso(d.interface, d.lhs, d.l));
  EXPECT_TRUE(is_iso(d.interface, d.rhs, d.r));
}

TEST(DerivedRule, PromotionHasHostAsLhs) {
  const ConditionalGrammar& cs = client_server();
  DerivationStep s = fire(cs, "pc(C1)", cs.start);
  Rule d = derived_rule(s);
  EXPECT_EQ(d.lhs, cs.start);
  EXPECT_EQ(d.rhs, s.after);
  // Applying the derived rule at the identity reproduces the step.
  DerivationStep again = apply(d, identity(d.lhs), cs.start);
  EXPECT_TRUE(isomorphic(again.after, s.after));
}

TEST(Independence, TwoPromotionsCommute) {
  const ConditionalGrammar& cs = client_server();
  DerivationStep s1 = fire(cs, "pc(C1)", cs.start);
  DerivationStep s2 = fire(cs, "pc(C2)", s1.after);
  IndependenceWitness w =
      check_sequential_independence(rule(cs, "pc(C1)"), s1, rule(cs, "pc(C2)"), s2, safe_options(cs));
  ASSERT_TRUE(w.independent) << w.reason;
  EXPECT_TRUE(isomorphic(w.second->after, s2.after));
}

TEST(Independence, JoinDependsOnMeeting) {
  const ConditionalGrammar& cs = client_server();
  Graph g = fire(cs, "pc(C1)", cs.start).after;
  DerivationStep s1 = fire(cs, "sm(S1)", g);
  DerivationStep s2 = fire(cs, "jm(C2,M1)", s1.after);
  EXPECT_FALSE(sequential_independent(rule(cs, "sm(S1)"), s1, rule(cs, "jm(C2,M1)"), s2, safe_options(cs)));
}

TEST(Independence, IdentityStepIsIndependent) {
  const ConditionalGrammar& cs = client_server();
  Rule id = identity_rule(make_graph({{"C3", cs.type_graph.find_node("C3")}}));
  DerivationStep s1 = apply(id, find_matches(id, cs.start).at(0), cs.start, safe_options(cs));
  DerivationStep s2 = fire(cs, "pc(C1)", s1.after);
  EXPECT_TRUE(sequential_independent(id, s1, rule(cs, "pc(C1)"), s2, safe_options(cs)));
}

TEST(Independence, JoinBlocksLaterPromotion) {
  // pc(C1) forbids C1 from being in a meeting, so it is no longer enabled
  // once jm(C1,M2) has fired.
  const ConditionalGrammar& cs = client_server();
  Graph g = fire(cs, "pc(C2)", cs.start).after;
  g = fire(cs, "sm(S2)", g).after;
  DerivationStep s1 = fire(cs, "jm(C1,M2)", g);
  const Rule& pc = rule(cs, "pc(C1)");
  Morphism m = find_matches(pc, s1.after).at(0);
  EXPECT_TRUE(violated_constraint(pc, m, s1.after).has_value());
}

TEST(Independence, NotConsecutive) {
  const ConditionalGrammar& cs = client_server();
  DerivationStep s1 = fire(cs, "pc(C1)", cs.start);
  DerivationStep s2 = fire(cs, "pc(C2)", cs.start);
  try {
    check_sequential_independence(rule(cs, "pc(C1)"), s1, rule(cs, "pc(C2)"), s2);
    FAIL() << "expected NotConsecutive";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotConsecutive);
  }
}

TEST(Enabled, StartGraphEnablesTheTwoPromotions) {
  std::vector<Enabled> steps = enabled_steps(client_server(), client_server().start);
  std::set<std::string> names;
  for (const Enabled& e : steps) names.insert(e.step.rule);
  EXPECT_EQ(names, (std::set<std::string>{"pc(C1)", "pc(C2)"}));
  EXPECT_EQ(steps.size(), 2u);
}
