#include <gtest/gtest.h>

#include "nacforge/constructions.hpp"
#include "nacforge/iso.hpp"
#include "nacforge/morphism.hpp"
#include "support.hpp"

using namespace nacforge;
using nftest::make_graph;

namespace {

Morphism maps(std::vector<Index> nodes, std::vector<Index> edges = {}) { return {std::move(nodes), std::move(edges)}; }

}  // namespace

TEST(Graph, EdgeEndpointMustExist) {
  Graph g;
  g.add_node("v");
  EXPECT_THROW(g.add_edge("e", 0, 3), Error);
  try {
    g.add_edge("e", 5, 0);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingReference);
  }
}

TEST(Graph, MorphismChecksSourcesAndTargets) {
  Graph a = make_graph({{"x"}, {"y"}}, {{"e", "x", "y"}});
  Graph b = make_graph({{"p"}, {"q"}}, {{"f", "p", "q"}});
  EXPECT_TRUE(is_morphism(a, b, maps({0, 1}, {0})));
  EXPECT_FALSE(is_morphism(a, b, maps({1, 0}, {0})));
  EXPECT_TRUE(is_iso(a, b, maps({0, 1}, {0})));
}

TEST(Graph, TypedMorphismPreservesTypes) {
  Graph a = make_graph({{"x", 0}});
  Graph b = make_graph({{"p", 1}, {"q", 0}});
  EXPECT_FALSE(is_morphism(a, b, maps({0})));
  EXPECT_TRUE(is_morphism(a, b, maps({1})));
  EXPECT_TRUE(is_morphism(a, b, maps({0}), false));
}

TEST(Graph, ComposeAppliesRightArgumentFirst) {
  Morphism f = maps({1, 0});
  Morphism g = maps({2, 3});
  EXPECT_EQ(compose(g, f), maps({3, 2}));
  Graph a = make_graph({{"x"}, {"y"}});
  EXPECT_EQ(compose(identity(a), f), f);
}

TEST(Pushout, CoproductOfTwoNodes) {
  Graph a, b = make_graph({{"u"}}), c = make_graph({{"v"}});
  Cospan po = pushout(a, b, c, {}, {});
  EXPECT_EQ(po.object.node_count(), 2u);
  EXPECT_TRUE(is_injective(po.left));
  EXPECT_TRUE(is_injective(po.right));
  EXPECT_NE(po.left.nodes[0], po.right.nodes[0]);
}

TEST(Pushout, IdentitySpanGivesIsos) {
  Graph a = make_graph({{"x"}, {"y"}}, {{"e", "x", "y"}});
  Cospan po = pushout(a, a, a, identity(a), identity(a));
  EXPECT_TRUE(is_iso(a, po.object, po.left));
  EXPECT_TRUE(is_iso(a, po.object, po.right));
}

TEST(Pushout, LoopGluedToSecondNode) {
  Graph a = make_graph({{"v"}});
  Graph b = make_graph({{"v"}}, {{"loop", "v", "v"}});
  Graph c = make_graph({{"v"}, {"w"}});
  Morphism f = maps({0}), g = maps({0});
  Cospan po = pushout(a, b, c, f, g);
  ASSERT_EQ(po.object.node_count(), 2u);
  ASSERT_EQ(po.object.edge_count(), 1u);
  const Edge& loop = po.object.edge(0);
  EXPECT_EQ(loop.src, loop.tgt);
  EXPECT_EQ(loop.src, po.left.nodes[0]);
  EXPECT_EQ(po.right.nodes[0], po.left.nodes[0]);
  EXPECT_NE(po.right.nodes[1], po.left.nodes[0]);
  // Against every graph with at most three nodes and two edges.
  for (const Graph& x : nftest::small_graphs(3, 2))
    ASSERT_TRUE(nftest::pushout_universal_against(a, b, c, f, g, po, x)) << describe(x);
}

TEST(Pushout, NonInjectiveLegsQuotient) {
  // Two nodes of A sent to one node of B: their images in C get identified.
  Graph a = make_graph({{"x"}, {"y"}});
  Graph b = make_graph({{"z"}});
  Graph c = make_graph({{"x"}, {"y"}}, {{"e", "x", "y"}});
  Morphism f = maps({0, 0}), g = maps({0, 1});
  Cospan po = pushout(a, b, c, f, g);
  EXPECT_EQ(po.object.node_count(), 1u);
  EXPECT_EQ(po.object.edge_count(), 1u);
  for (const Graph& x : nftest::small_graphs(2, 2)) ASSERT_TRUE(nftest::pushout_universal_against(a, b, c, f, g, po, x));
}

TEST(Pushout, FastPathAgreesWithColimit) {
  Graph a = make_graph({{"v"}, {"w"}});
  Graph b = make_graph({{"v"}, {"w"}, {"x"}}, {{"e", "v", "x"}});
  Graph c = make_graph({{"v"}, {"w"}, {"y"}}, {{"e", "w", "y"}});
  Morphism f = maps({0, 1}), g = maps({0, 1});
  auto fast = detail::pushout_of_monos(a, b, c, f, g);
  ASSERT_TRUE(fast);
  Diagram d;
  d.objects = {b, c, a};
  d.arrows = {{2, 0, f}, {2, 1, g}};
  Colimit col = colimit(d);
  EXPECT_EQ(fast->object, col.object);
  EXPECT_EQ(fast->left, col.injections[0]);
  EXPECT_EQ(fast->right, col.injections[1]);
}

TEST(PushoutComplement, NothingDeletedKeepsHost) {
  Graph l = make_graph({{"v"}});
  Graph g = make_graph({{"v"}, {"w"}}, {{"e", "v", "w"}});
  PushoutComplement pc = pushout_complement(l, l, g, identity(l), maps({0}));
  EXPECT_TRUE(isomorphic(pc.object, g));
  EXPECT_TRUE(is_iso(pc.object, g, pc.g));
}

TEST(PushoutComplement, DanglingEdgeIsRejected) {
  Graph k, l = make_graph({{"v"}});
  Graph g = make_graph({{"v"}, {"w"}}, {{"e", "v", "w"}});
  try {
    pushout_complement(k, l, g, {}, maps({0}));
    FAIL() << "expected DanglingCondition";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DanglingCondition);
  }
}

TEST(PushoutComplement, ReconstructsHostByPushout) {
  Graph l = make_graph({{"a"}, {"b"}}, {{"e", "a", "b"}});
  Graph k = make_graph({{"a"}, {"b"}});
  Graph g = make_graph({{"a"}, {"b"}, {"c"}}, {{"e", "a", "b"}, {"f", "b", "c"}});
  Morphism l_map = maps({0, 1}), m = maps({0, 1}, {0});
  PushoutComplement pc = pushout_complement(k, l, g, l_map, m);
  EXPECT_EQ(pc.object.edge_count(), 1u);
  EXPECT_TRUE(is_pushout(k, l, pc.object, g, l_map, pc.k, m, pc.g));
}

TEST(PushoutComplement, PromotionOfFirstClient) {
  const ConditionalGrammar& cs = nftest::client_server();
  const Rule& pc = nftest::rule(cs, "pc(C1)");
  std::vector<Morphism> ms = find_monos(pc.lhs, cs.start);
  ASSERT_EQ(ms.size(), 1u);
  PushoutComplement d = pushout_complement(pc.interface, pc.lhs, cs.start, pc.l, ms[0]);
  // The rule deletes the client it promotes, so D is G0 without :C1.
  EXPECT_EQ(d.object.node_count(), 2u);
  EXPECT_EQ(d.object.find_node("C1"), kNone);
  EXPECT_NE(d.object.find_node("C2"), kNone);
}

TEST(Pullback, IdentitiesGiveTheGraph) {
  Graph b = make_graph({{"x"}, {"y"}}, {{"e", "x", "y"}});
  Span pb = pullback(b, b, identity(b), identity(b));
  EXPECT_TRUE(is_iso(pb.object, b, pb.left));
  EXPECT_EQ(pb.left, identity(b));
  EXPECT_EQ(pb.right, identity(b));
}

TEST(Pullback, DisjointImagesGiveEmpty) {
  Graph d = make_graph({{"p"}, {"q"}});
  Graph b = make_graph({{"x"}}), c = make_graph({{"y"}});
  Span pb = pullback(b, c, maps({0}), maps({1}));
  EXPECT_TRUE(pb.object.empty());
}

TEST(Pullback, UniversalOnSmallCospan) {
  Graph b = make_graph({{"x"}, {"y"}}, {{"e", "x", "y"}});
  Graph c = make_graph({{"u"}}, {{"l", "u", "u"}});
  Graph d = make_graph({{"p"}}, {{"l", "p", "p"}});
  Morphism f = maps({0, 0}, {0}), g = maps({0}, {0});
  Span pb = pullback(b, c, f, g);
  EXPECT_EQ(compose(f, pb.left), compose(g, pb.right));
  for (const Graph& x : nftest::small_graphs(2, 2))
    ASSERT_TRUE(nftest::pullback_universal_against(b, c, f, g, pb, x)) << describe(x);
}

TEST(Pullback, EnrichedStartGraphRestrictsToOriginal) {
  const ConditionalGrammar& cs = nftest::client_server();
  const EnrichedGrammar& e = nftest::client_server_enriched();
  Graph tg_inst = nftest::as_instance(cs.type_graph);
  Span pb = pullback(tg_inst, e.grammar.start, e.etg.in_tg, typing(e.grammar.start));
  EXPECT_EQ(pb.object.node_count(), 3u);
  EXPECT_EQ(pb.object.edge_count(), 0u);
  EXPECT_TRUE(isomorphic(pb.object, cs.start));
}

TEST(InitialPushout, OutShapeOfPromotion) {
  const Rule& pc = nftest::rule(nftest::client_server(), "pc(C1)");
  const Constraint& c = pc.nacs.at(0);
  InitialPushout ip = initial_pushout(pc.lhs, c.graph, c.n);
  ASSERT_EQ(ip.border.node_count(), 1u);
  EXPECT_EQ(ip.border.node(0).name, "C1");
  EXPECT_EQ(ip.body.node_count(), 2u);
  EXPECT_EQ(ip.body.edge_count(), 1u);
  EXPECT_EQ(ip.body.edge(0).name, "in12");
  EXPECT_TRUE(is_pushout(ip.border, pc.lhs, ip.body, c.graph, ip.border_to_lhs, ip.shape, c.n, ip.body_to_nac));
}

TEST(InitialPushout, EShapeOfJoin) {
  const Rule& jm = nftest::rule(nftest::client_server(), "jm(C1,M2)");
  const Constraint& c = jm.nacs.at(0);
  InitialPushout ip = initial_pushout(jm.lhs, c.graph, c.n);
  EXPECT_EQ(ip.border.node_count(), 2u);
  EXPECT_EQ(ip.body.node_count(), 2u);
  EXPECT_EQ(ip.body.edge_count(), 1u);
  EXPECT_TRUE(is_pushout(ip.border, jm.lhs, ip.body, c.graph, ip.border_to_lhs, ip.shape, c.n, ip.body_to_nac));
}

TEST(InitialPushout, IsolatedNodeHasEmptyBorder) {
  Graph l = make_graph({{"a"}});
  Graph n = make_graph({{"a"}, {"b"}});
  InitialPushout ip = initial_pushout(l, n, maps({0}));
  EXPECT_TRUE(ip.border.empty());
  EXPECT_EQ(ip.body.node_count(), 1u);
  EXPECT_EQ(ip.body.node(0).name, "b");
}

TEST(InitialPushout, IsoConstraintIsRejected) {
  Graph l = make_graph({{"a"}});
  try {
    initial_pushout(l, l, identity(l));
    FAIL() << "expected IsoConstraint";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IsoConstraint);
  }
}

TEST(Colimit, SingleObjectIsItself) {
  Diagram d;
  d.objects = {make_graph({{"x"}, {"y"}}, {{"e", "x", "y"}})};
  Colimit c = colimit(d);
  EXPECT_EQ(c.object, d.objects[0]);
  EXPECT_EQ(c.injections[0], identity(d.objects[0]));
}

TEST(Colimit, SpanAgreesWithPushout) {
  Graph a = make_graph({{"v"}});
  Graph b = make_graph({{"v"}}, {{"loop", "v", "v"}});
  Graph c = make_graph({{"v"}, {"w"}});
  Diagram d;
  d.objects = {b, c, a};
  d.arrows = {{2, 0, maps({0})}, {2, 1, maps({0})}};
  Colimit col = colimit(d);
  Cospan po = pushout(a, b, c, maps({0}), maps({0}));
  EXPECT_TRUE(isomorphic(col.object, po.object));
}

TEST(Colimit, EnrichedTypeGraphOfClientServer) {
  const EnrichedGrammar& e = nftest::client_server_enriched();
  EXPECT_EQ(e.etg.tg_bar.node_count(), 11u);
  EXPECT_EQ(e.etg.tg_bar.edge_count(), 14u);
  EXPECT_TRUE(is_injective(e.etg.in_tg));
}

TEST(Canonical, IsomorphicGraphsShareKeys) {
  Graph a = make_graph({{"x"}, {"y"}, {"z"}}, {{"e", "x", "y"}, {"f", "y", "z"}});
  Graph b = make_graph({{"p"}, {"q"}, {"r"}}, {{"f", "q", "r"}, {"e", "p", "q"}});
  Graph c = make_graph({{"p"}, {"q"}, {"r"}}, {{"f", "q", "r"}, {"e", "q", "p"}});
  EXPECT_EQ(canonical_key(a), canonical_key(b));
  EXPECT_NE(canonical_key(a), canonical_key(c));
  EXPECT_TRUE(isomorphic(a, b));
  EXPECT_FALSE(isomorphic(a, c));
}

TEST(Canonical, SafeKeyIsTheTypingImage) {
  Graph a = make_graph({{"C1", 0}, {"S1", 6}});
  Graph b = make_graph({{"S1", 6}, {"C1", 0}});
  Graph c = make_graph({{"C1", 0}, {"S2", 5}});
  EXPECT_EQ(safe_key(a), safe_key(b));
  EXPECT_NE(safe_key(a), safe_key(c));
}

TEST(Canonical, AgreesWithBacktrackingIsoOnCorpusGraphs) {
  const EnrichedGrammar& e = nftest::client_server_enriched();
  std::vector<Graph> graphs{nftest::client_server().start, e.grammar.start, e.etg.tg_bar};
  for (const Rule& r : e.grammar.rules) {
    graphs.push_back(r.lhs);
    graphs.push_back(r.rhs);
  }
  for (const Graph& x : graphs)
    for (const Graph& y : graphs) {
      bool by_key = canonical_key(x) == canonical_key(y);
      ASSERT_EQ(by_key, isomorphic_typed(x, y)) << describe(x) << " vs " << describe(y);
    }
}
