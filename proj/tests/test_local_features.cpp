#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <numeric>

#include "ggeval/generators.hpp"
#include "ggeval/local_features.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace ggeval {
namespace {

const Graph kPath3(3, {{0, 1}, {1, 2}});
const Graph kTriangle(3, {{0, 1}, {1, 2}, {0, 2}});

std::uint64_t Choose4(std::uint64_t n) { return n < 4 ? 0 : n * (n - 1) * (n - 2) * (n - 3) / 24; }

TEST(Degrees, Examples) {
  EXPECT_EQ(Degrees(kPath3), (std::vector<int>{1, 2, 1}));
  EXPECT_EQ(Degrees(Graph(4, {})), (std::vector<int>{0, 0, 0, 0}));
  std::vector<int> d = Degrees(GenerateCyclePair(5, 8));
  EXPECT_EQ(std::count(d.begin(), d.end(), 2), 11);
  EXPECT_EQ(std::count(d.begin(), d.end(), 3), 2);
}

TEST(ClusteringCoefficient, Examples) {
  for (NodeId v = 0; v < 3; ++v) EXPECT_EQ(ClusteringCoefficient(kTriangle, v), 1.0);
  const Graph c = GenerateCyclePair(6, 7);
  for (NodeId v = 0; v < c.num_nodes(); ++v) EXPECT_EQ(ClusteringCoefficient(c, v), 0.0);
  EXPECT_EQ(ClusteringCoefficient(kPath3, 0), 0.0);
}

TEST(ClusteringCoefficient, MatchesOracleOnRandomGraphs) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = oracle::RandomGraph(rng, 8, 8);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      EXPECT_DOUBLE_EQ(ClusteringCoefficient(g, v), oracle::ClusteringCoefficient(g, v));
    }
  }
}

TEST(FourNodeClustering, DegenerateNodes) {
  EXPECT_EQ(FourNodeClustering(Graph(1, {}), 0), 0.0);
  EXPECT_EQ(FourNodeClustering(kPath3, 0), 0.0);
}

TEST(FourNodeClustering, FourCycleIsOneThird) {
  const Graph c4 = GenerateCycle(4);
  for (NodeId v = 0; v < 4; ++v) {
    EXPECT_DOUBLE_EQ(FourNodeClustering(c4, v), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(oracle::FourNodeClustering(c4, v), 1.0 / 3.0);
  }
}

TEST(FourNodeClustering, MatchesOracleOnRandomGraphs) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Graph g = oracle::RandomGraph(rng, 2, 12);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      EXPECT_NEAR(FourNodeClustering(g, v), oracle::FourNodeClustering(g, v), 1e-12);
      EXPECT_DOUBLE_EQ(ClusteringCoefficient(g, v), oracle::ClusteringCoefficient(g, v));
    }
  }
}

TEST(FourNodePattern, MaskTableCoversAllClasses) {
  std::vector<int> seen(kNumFourNodePatterns, 0);
  for (unsigned mask = 0; mask < 64; ++mask) ++seen[static_cast<int>(ClassifyFourNodeMask(mask))];
  // Number of labelled graphs on 4 vertices per isomorphism class.
  const std::vector<int> expected = {1, 6, 3, 12, 4, 4, 6, 3, 12, 12, 1};
  EXPECT_EQ(seen, expected);
  std::string letters;
  for (std::size_t i = 0; i < kNumFourNodePatterns; ++i) {
    letters += PatternLetter(static_cast<FourNodePattern>(i));
  }
  EXPECT_EQ(letters, "abcdefghijk");
}

TEST(OrbitCensus, CompleteGraph) {
  const OrbitCensus c = OrbitCensus4(GenerateErdosRenyi(4, 1.0, 0));
  EXPECT_EQ(c[FourNodePattern::kComplete], 1u);
  EXPECT_EQ(c.total(), 1u);
}

TEST(OrbitCensus, SmallGraphsAreEmpty) {
  EXPECT_EQ(OrbitCensus4(kTriangle).total(), 0u);
}

TEST(OrbitCensus, CyclePairsAgree) {
  EXPECT_EQ(OrbitCensus4(GenerateCyclePair(5, 8)), OrbitCensus4(GenerateCyclePair(6, 7)));
}

TEST(OrbitCensus, MatchesOracleAndIsRelabelInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const Graph g = oracle::RandomGraph(rng, 9, 9);
    const OrbitCensus c = OrbitCensus4(g);
    const auto expected = oracle::Census(g);
    for (std::size_t i = 0; i < kNumFourNodePatterns; ++i) EXPECT_EQ(c.counts[i], expected[i]);
    EXPECT_EQ(c.total(), Choose4(9));
    std::vector<NodeId> perm(g.num_nodes());
    std::iota(perm.begin(), perm.end(), 0);
    rng.Shuffle(perm);
    EXPECT_EQ(OrbitCensus4(g.Relabel(perm)), c);
  }
}

TEST(OrbitCensus, RejectsLargeGraphs) {
  EXPECT_ERROR_CODE(OrbitCensus4(Graph(kMaxCensusNodes + 1, {})), ErrorCode::kInvalidArgument);
}

TEST(WL, IsomorphicTrianglesIndistinguishable) {
  EXPECT_FALSE(WLDistinguish(kTriangle, Graph(3, {{2, 0}, {0, 1}, {1, 2}}), 5));
}

TEST(WL, CyclePairsSeparated) {
  EXPECT_TRUE(WLDistinguish(GenerateCyclePair(5, 8), GenerateCyclePair(6, 7), 13));
}

TEST(WL, SixCycleVersusTwoTriangles) {
  const Graph c6 = GenerateCycle(6);
  const Graph two = GenerateDisjointCycles(3, 2);
  EXPECT_FALSE(WLDistinguish(c6, two, 10));
  EXPECT_EQ(ClusteringCoefficient(c6, 0), 0.0);
  EXPECT_EQ(ClusteringCoefficient(two, 0), 1.0);
}

TEST(WL, DegreeHistogramSeparatesAtIterationZero) {
  EXPECT_EQ(WLFirstSeparation(kPath3, kTriangle, 3), std::optional<int>(0));
}

TEST(WL, RejectsNonPositiveIterations) {
  EXPECT_ERROR_CODE(WLRefine(kPath3, 0), ErrorCode::kInvalidArgument);
}

TEST(WL, RefinementIsMonotone) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = oracle::RandomGraph(rng, 3, 20);
    const auto colorings = WLRefine(g, 10);
    for (std::size_t t = 1; t < colorings.size(); ++t) {
      const auto& prev = colorings[t - 1].colors;
      const auto& next = colorings[t].colors;
      // Same color at t implies same color at t - 1.
      for (NodeId u = 0; u < g.num_nodes(); ++u)
        for (NodeId v = 0; v < g.num_nodes(); ++v)
          if (next[u] == next[v]) EXPECT_EQ(prev[u], prev[v]);
      EXPECT_GE(colorings[t].histogram.size(), colorings[t - 1].histogram.size());
    }
  }
}

TEST(WLKernel, SelfSimilarityPositiveAndIsomorphismInvariant) {
  const Graph g = GenerateCyclePair(5, 7);
  std::vector<NodeId> perm(g.num_nodes());
  std::iota(perm.rbegin(), perm.rend(), 0);
  const Graph h = g.Relabel(perm);
  EXPECT_GT(WLSubtreeKernel(g, g), 0.0);
  EXPECT_EQ(WLSubtreeKernel(g, g), WLSubtreeKernel(g, h));
  EXPECT_EQ(WLSubtreeKernel(h, h), WLSubtreeKernel(g, h));
}

TEST(WLKernel, DepthZeroIsDegreeHistogramProduct) {
  // Path has degrees {1,1,2}, triangle {2,2,2}: one shared color, 1 * 3.
  EXPECT_EQ(WLSubtreeKernel(kPath3, kTriangle, 0), 3.0);
  EXPECT_ERROR_CODE(WLSubtreeKernel(kPath3, kTriangle, -1), ErrorCode::kInvalidArgument);
}

double MinEigenRatio(const Matrix& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  return solver.eigenvalues().minCoeff() / std::max(1.0, gram.trace());
}

TEST(WLKernel, SmallGramIsPsd) {
  const std::vector<Graph> graphs = {kTriangle, kPath3, GenerateCycle(6)};
  const Matrix gram = WLKernelGram(graphs);
  EXPECT_GE(MinEigenRatio(gram), -1e-8);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(gram(i, i), WLSubtreeKernel(graphs[i], graphs[i]));
}

TEST(WLKernel, RandomGramsArePsd) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Graph> graphs;
    for (int i = 0; i < 15; ++i) graphs.push_back(oracle::RandomGraph(rng, 3, 15));
    const Matrix gram = WLKernelGram(graphs);
    EXPECT_GE(MinEigenRatio(gram), -1e-8);
    EXPECT_DOUBLE_EQ(gram(0, 1), WLSubtreeKernel(graphs[0], graphs[1]));
  }
}

TEST(StructuralFeatures, Configs) {
  const Graph g = GenerateCyclePair(5, 6);
  const Matrix none = StructuralFeatures(g, FeatureConfig::kNone);
  EXPECT_EQ(none.cols(), 1);
  EXPECT_TRUE((none.array() == 1.0).all());

  const Matrix deg = StructuralFeatures(kPath3, FeatureConfig::kDegree);
  Matrix expected(3, 2);
  expected << 1, 1, 1, 2, 1, 1;
  EXPECT_EQ(deg, expected);

  const Matrix full = StructuralFeatures(kTriangle, FeatureConfig::kDegreeClustering);
  ASSERT_EQ(full.cols(), 4);
  for (NodeId v = 0; v < 3; ++v) {
    EXPECT_EQ(full(v, 0), 1.0);
    EXPECT_EQ(full(v, 1), 2.0);
    EXPECT_EQ(full(v, 2), 1.0);
    EXPECT_DOUBLE_EQ(full(v, 3), oracle::FourNodeClustering(kTriangle, v));
  }
}

TEST(StructuralFeatures, ConfigNames) {
  for (FeatureConfig c : {FeatureConfig::kNone, FeatureConfig::kDegree,
                          FeatureConfig::kDegreeClustering}) {
    EXPECT_EQ(ParseFeatureConfig(FeatureConfigName(c)), c);
    EXPECT_EQ(StructuralFeatures(kPath3, c).cols(), FeatureConfigWidth(c));
  }
  EXPECT_ERROR_CODE(ParseFeatureConfig("orbits"), ErrorCode::kInvalidArgument);
}

TEST(Degrees, SumIsTwiceEdges) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = oracle::RandomGraph(rng, 1, 30);
    const auto d = Degrees(g);
    EXPECT_EQ(std::accumulate(d.begin(), d.end(), std::size_t{0}), 2 * g.num_edges());
  }
}

}  // namespace
}  // namespace ggeval
