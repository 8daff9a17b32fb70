#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "tkgx/patterns.hpp"

namespace tkgx {
namespace {

using Edge = oracle::Edge;
constexpr auto SO = MetaEdgeType::kSO;
constexpr auto OO = MetaEdgeType::kOO;
constexpr auto SS = MetaEdgeType::kSS;
constexpr auto FWD = MetaEdgeType::kForward;
constexpr auto BWD = MetaEdgeType::kBackward;
constexpr auto MEAN = MetaEdgeType::kMeantime;

TEST(PositionType, ObjectThenSubjectIsSO) {
  EXPECT_EQ(position_type(Role::kObject, Role::kSubject), SO);
  EXPECT_EQ(position_type(Role::kSubject, Role::kObject), MetaEdgeType::kOS);
  EXPECT_EQ(position_type(Role::kSubject, Role::kSubject), SS);
  EXPECT_EQ(position_type(Role::kObject, Role::kObject), OO);
}

TEST(MetaEdgeType, NamesRoundTrip) {
  for (int i = 0; i < 7; ++i) {
    const auto t = static_cast<MetaEdgeType>(i);
    EXPECT_EQ(meta_edge_type_from_string(to_string(t)), t);
  }
  EXPECT_THROW(meta_edge_type_from_string("sideways"), DataError);
  EXPECT_EQ(meta_type_index(MEAN), 2);
  EXPECT_TRUE(is_position_type(OO));
  EXPECT_FALSE(is_position_type(FWD));
}

TEST(Rppg, ChainGivesSubjectAfterObjectEdge) {
  const std::vector<Quadruple> q = {{1, 1, 2, 0}, {2, 2, 3, 4}};
  const auto edges = oracle::edges_of(build_rppg(q));
  EXPECT_TRUE(edges.count({1, SO, 2}));
  EXPECT_EQ(edges.size(), 2u);  // plus the reverse (r2, o_s, r1)
}

TEST(Rppg, EmptyInput) {
  const auto g = build_rppg(std::vector<Quadruple>{});
  EXPECT_TRUE(g.nodes().empty());
  EXPECT_TRUE(g.edges().empty());
}

TEST(Rppg, SameRelationFromDistinctFactsIsKept) {
  const std::vector<Quadruple> q = {{0, 5, 1, 0}, {0, 5, 2, 0}};
  EXPECT_EQ(oracle::edges_of(build_rppg(q)), (std::set<Edge>{{5, SS, 5}}));
  // A single fact never pairs with itself, even as a self-loop.
  EXPECT_TRUE(build_rppg(std::vector<Quadruple>{{3, 1, 3, 0}}).edges().empty());
}

TEST(Tspg, EarlierToLaterIsForward) {
  const std::vector<Quadruple> q = {{0, 1, 1, 1}, {1, 2, 2, 5}};
  EXPECT_EQ(oracle::edges_of(build_tspg(q)), (std::set<Edge>{{1, FWD, 2}, {2, BWD, 1}}));
}

TEST(Tspg, EqualTimesAreMeantimeBothWays) {
  const std::vector<Quadruple> q = {{0, 1, 1, 3}, {0, 2, 2, 3}};
  EXPECT_EQ(oracle::edges_of(build_tspg(q)), (std::set<Edge>{{1, MEAN, 2}, {2, MEAN, 1}}));
}

TEST(Tspg, FactsWithoutSharedEntityAreNotPaired) {
  const std::vector<Quadruple> q = {{0, 1, 1, 1}, {2, 2, 3, 5}};
  EXPECT_TRUE(build_tspg(q).edges().empty());
  EXPECT_EQ(build_tspg(q).nodes(), (std::vector<RelationId>{1, 2}));
}

TEST(PatternGraphs, MatchBruteForceOnRandomGraphs) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(1, 200), ents(2, 40), rels(1, 20), times(1, 15);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = testing::random_quads(static_cast<std::size_t>(size(rng)), ents(rng), rels(rng), times(rng), rng);
    const auto rppg = build_rppg(q);
    const auto tspg = build_tspg(q);
    ASSERT_EQ(oracle::edges_of(rppg), oracle::rppg_edges(q)) << "trial " << trial;
    ASSERT_EQ(oracle::edges_of(tspg), oracle::tspg_edges(q)) << "trial " << trial;

    for (const auto& x : q) {
      EXPECT_TRUE(rppg.has_node(x.r));
      EXPECT_TRUE(tspg.has_node(x.r));
    }
    for (const auto& e : tspg.edges()) {
      if (e.type == FWD) EXPECT_TRUE(std::binary_search(tspg.edges().begin(), tspg.edges().end(), PatternEdge{e.dst, BWD, e.src}));
    }
    // in_edges is the in-projection of edges.
    std::size_t total = 0;
    for (RelationId r : rppg.nodes()) {
      for (const auto& in : rppg.in_edges(r))
        EXPECT_TRUE(std::binary_search(rppg.edges().begin(), rppg.edges().end(), PatternEdge{in.src, in.type, r}));
      total += rppg.in_edges(r).size();
    }
    EXPECT_EQ(total, rppg.edges().size());
    // Pure: rebuilding gives the same graph.
    EXPECT_EQ(build_rppg(q).edges(), rppg.edges());
  }
}

TEST(PatternGraph, DeduplicatesAndCounts) {
  const PatternGraph g({1, 2}, {{1, SO, 2}, {1, SO, 2}, {2, OO, 1}});
  EXPECT_EQ(g.edges().size(), 2u);
  const auto counts = g.type_counts();
  EXPECT_EQ(counts[static_cast<int>(SO)], 1u);
  EXPECT_EQ(counts[static_cast<int>(OO)], 1u);
  EXPECT_TRUE(g.in_edges(7).empty());
}

TEST(PatternGraph, WritesEdgeList) {
  const PatternGraph g({0, 1}, {{0, FWD, 1}});
  std::ostringstream ids, labels;
  write_pattern_edges(ids, g);
  EXPECT_EQ(ids.str(), "0\tforward\t1\n");
  const Vocabulary v({"visit", "host"});
  write_pattern_edges(labels, g, &v);
  EXPECT_EQ(labels.str(), "visit\tforward\thost\n");
}

MetaTypeEmbeddings random_meta(std::mt19937_64& rng, int dp = 3, int dt = 2) {
  return {testing::random_matrix(4, dp, rng), testing::random_matrix(3, dt, rng)};
}

TEST(RelationFeature, PositionMeanCountsEachSourceOnce) {
  std::mt19937_64 rng(1);
  const auto emb = random_meta(rng);
  const PatternGraph g({0, 1, 2, 3}, {{1, SO, 0}, {2, SO, 0}, {3, OO, 0}});
  const Eigen::VectorXd expect = (2.0 * emb.position.row(1) + emb.position.row(3)).transpose() / 3.0;
  EXPECT_LT((relation_position_feature(g, 0, emb) - expect).norm(), 1e-12);
}

TEST(RelationFeature, SingleEdgeAndNoEdges) {
  std::mt19937_64 rng(2);
  const auto emb = random_meta(rng);
  const PatternGraph g({0, 1, 2}, {{1, SS, 0}});
  EXPECT_EQ(relation_position_feature(g, 0, emb), emb.position.row(0).transpose());
  EXPECT_EQ(relation_position_feature(g, 2, emb), Eigen::VectorXd::Zero(3));
  const PatternGraph t({0, 1}, {{0, FWD, 1}, {0, BWD, 1}});
  const Eigen::VectorXd expect = (emb.time.row(0) + emb.time.row(1)).transpose() / 2.0;
  EXPECT_LT((relation_time_feature(t, 1, emb) - expect).norm(), 1e-12);
  EXPECT_EQ(relation_time_feature(t, 0, emb), Eigen::VectorXd::Zero(2));
}

TEST(RelationFeature, Concatenates) {
  Eigen::VectorXd g(2), q(1), expect(3);
  g << 1, 2;
  q << 3;
  expect << 1, 2, 3;
  EXPECT_EQ(relation_feature(g, q), expect);
  EXPECT_EQ(relation_feature(Eigen::VectorXd::Zero(64), Eigen::VectorXd::Zero(64)).size(), 128);
}

TEST(RelationFeature, MatchesResummationOnRandomGraphs) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = testing::random_quads(80, 20, 10, 8, rng);
    const auto emb = random_meta(rng, 4, 4);
    const auto rppg = build_rppg(q), tspg = build_tspg(q);
    const auto pe = oracle::rppg_edges(q), te = oracle::tspg_edges(q);
    for (RelationId r : rppg.nodes()) {
      EXPECT_LT((relation_position_feature(rppg, r, emb) - oracle::mean_in_type_rows(pe, r, emb.position, true))
                    .cwiseAbs().maxCoeff(), 1e-6);
      EXPECT_LT((relation_time_feature(tspg, r, emb) - oracle::mean_in_type_rows(te, r, emb.time, false))
                    .cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(RelationFeature, InvariantUnderTypeRelabeling) {
  std::mt19937_64 rng(4);
  const auto q = testing::random_quads(60, 12, 6, 5, rng);
  const auto g = build_rppg(q);
  const auto emb = random_meta(rng);
  std::array<int, 4> perm = {0, 1, 2, 3};
  do {
    std::vector<PatternEdge> relabeled;
    for (const auto& e : g.edges())
      relabeled.push_back({e.src, static_cast<MetaEdgeType>(perm[static_cast<std::size_t>(e.type)]), e.dst});
    MetaTypeEmbeddings moved = emb;
    for (int m = 0; m < 4; ++m) moved.position.row(perm[static_cast<std::size_t>(m)]) = emb.position.row(m);
    const PatternGraph h(g.nodes(), relabeled);
    for (RelationId r : g.nodes())
      EXPECT_LT((relation_position_feature(h, r, moved) - relation_position_feature(g, r, emb)).norm(), 1e-12);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace
}  // namespace tkgx
