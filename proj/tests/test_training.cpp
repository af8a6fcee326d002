#include <gtest/gtest.h>

#include <cmath>

#include "ggeval/generators.hpp"
#include "ggeval/training.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace ggeval {
namespace {

const Graph kTriangle(3, {{0, 1}, {1, 2}, {0, 2}});

TEST(Augment, ZeroNodeDropIsIdentity) {
  const Graph g = GenerateErdosRenyi(15, 0.3, 1);
  Rng rng(1);
  EXPECT_EQ(Augment(g, Augmentation::NodeDrop(0.0), rng), g);
}

TEST(Augment, FullEdgeDropKeepsNodes) {
  const Graph g = GenerateErdosRenyi(15, 0.3, 1);
  Rng rng(2);
  const Graph v = Augment(g, Augmentation::EdgeDrop(1.0), rng);
  EXPECT_EQ(v.num_nodes(), 15);
  EXPECT_EQ(v.num_edges(), 0u);
}

TEST(Augment, FullNodeDropFallsBackToInput) {
  Rng rng(3);
  EXPECT_EQ(Augment(kTriangle, Augmentation::NodeDrop(1.0), rng), kTriangle);
}

TEST(Augment, WalkOnTriangleIsInducedSubgraph) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Graph v = Augment(kTriangle, Augmentation::SubgraphWalk(10), rng);
    EXPECT_GE(v.num_nodes(), 1);
    EXPECT_LE(v.num_nodes(), 3);
    // Any induced subgraph of a triangle is complete.
    EXPECT_EQ(v.num_edges(), static_cast<std::size_t>(v.num_nodes() * (v.num_nodes() - 1) / 2));
  }
}

TEST(Augment, WalkVisitsConnectedSubgraph) {
  const Graph g = GenerateCommunity(40, 0.3, 0.05, 4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Graph v = Augment(g, Augmentation::SubgraphWalk(10), rng);
    EXPECT_LE(v.num_nodes(), 11);
    EXPECT_GE(v.num_edges() + 1, static_cast<std::size_t>(v.num_nodes()));
  }
}

TEST(Augment, NodeDropCarriesFeatures) {
  Matrix x(5, 1);
  x << 0, 1, 2, 3, 4;
  const Graph g(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, x);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Graph v = Augment(g, Augmentation::NodeDrop(0.5), rng);
    ASSERT_TRUE(v.node_features().has_value());
    const Matrix& f = *v.node_features();
    for (Eigen::Index i = 1; i < f.rows(); ++i) EXPECT_LT(f(i - 1, 0), f(i, 0));
    for (const auto& [a, b] : v.edges()) {
      EXPECT_TRUE(g.has_edge(static_cast<NodeId>(f(a, 0)), static_cast<NodeId>(f(b, 0))));
    }
  }
}

TEST(Augment, AttributeMaskAndEdgeAdd) {
  const Graph g(6, {{0, 1}, {2, 3}}, Matrix::Ones(6, 2));
  Rng rng(5);
  const Graph masked = Augment(g, Augmentation::AttributeMask(1.0), rng);
  EXPECT_TRUE(masked.node_features()->isZero());
  EXPECT_EQ(masked.edges(), g.edges());
  const Graph added = Augment(g, Augmentation::EdgeAdd(1.0), rng);
  EXPECT_EQ(added.num_edges(), 4u);
  for (const Edge& e : g.edges()) EXPECT_TRUE(added.has_edge(e.first, e.second));
}

TEST(NtXent, ClosedFormOrthogonalPair) {
  const Matrix z = Matrix::Identity(2, 2);
  const NtXentResult r = NtXentLoss(z, z, 1.0);
  EXPECT_NEAR(r.loss, std::log(1.0 + 2.0 / std::exp(1.0)), 1e-12);
}

TEST(NtXent, ScaleInvariantAndSymmetric) {
  Rng rng(6);
  const Matrix z1 = oracle::RandomPoints(rng, 5, 4);
  const Matrix z2 = oracle::RandomPoints(rng, 5, 4);
  const double base = NtXentLoss(z1, z2, 0.2).loss;
  EXPECT_GE(base, 0.0);
  EXPECT_NEAR(NtXentLoss(5.0 * z1, 5.0 * z2, 0.2).loss, base, 1e-12);
  EXPECT_NEAR(NtXentLoss(z2, z1, 0.2).loss, base, 1e-12);
}

TEST(NtXent, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix z1 = oracle::RandomPoints(rng, 4, 8);
    Matrix z2 = oracle::RandomPoints(rng, 4, 8);
    const NtXentResult r = NtXentLoss(z1, z2, 0.5);
    for (Matrix* z : {&z1, &z2}) {
      const Matrix& g = z == &z1 ? r.grad_z1 : r.grad_z2;
      for (Eigen::Index i = 0; i < z->rows(); ++i)
        for (Eigen::Index j = 0; j < z->cols(); ++j) {
          const double fd = oracle::CentralDifference(
              *z, i, j, [&] { return NtXentLoss(z1, z2, 0.5).loss; }, 1e-6);
          EXPECT_NEAR(g(i, j), fd, 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
  }
}

TEST(NtXent, RejectsSinglePair) {
  EXPECT_ERROR_CODE(NtXentLoss(Matrix::Ones(1, 3), Matrix::Ones(1, 3), 0.2),
                    ErrorCode::kDegenerateBatch);
}

ContrastiveViews TinyViews(std::uint64_t seed, const EncoderConfig& config, int count) {
  Rng rng(seed);
  std::vector<Graph> graphs;
  for (int i = 0; i < count; ++i) {
    graphs.push_back(AttachEncoderInput(oracle::RandomGraph(rng, 4, 10), config));
  }
  std::vector<const Graph*> ptrs;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    ptrs.push_back(&graphs[i]);
    index.push_back(i);
  }
  TrainConfig tc;
  return SampleViews(ptrs, index, tc.EnabledAugmentations(), seed, 0, 0);
}

TEST(Gradients, MatchFiniteDifferences) {
  EncoderConfig config;
  config.num_layers = 2;
  config.hidden = 4;
  config.features = FeatureConfig::kDegreeClustering;
  const NtXentObjective loss(0.5);
  const ContrastiveViews views = TinyViews(8, config, 4);
  EncoderParams params = InitEncoder(config, 8);
  ProjectionHead head = InitProjectionHead(config.embedding_dim(), 9);
  const GradientResult grads = ComputeGradients(params, head, views, loss);
  EXPECT_NEAR(grads.loss, ComputeLoss(params, head, views, loss), 1e-10);
  auto f = [&] { return ComputeLoss(params, head, views, loss); };
  const auto tensors = TrainableTensors(params);
  double worst = 0.0;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    for (Eigen::Index i = 0; i < tensors[t]->rows(); ++i)
      for (Eigen::Index j = 0; j < tensors[t]->cols(); ++j) {
        const double fd = oracle::CentralDifference(*tensors[t], i, j, f, 1e-5);
        const double g = grads.encoder[t](i, j);
        worst = std::max(worst, std::abs(g - fd) / std::max(1e-3, std::abs(fd) + std::abs(g)));
      }
  }
  const auto head_tensors = TrainableTensors(head);
  for (std::size_t t = 0; t < head_tensors.size(); ++t) {
    for (Eigen::Index i = 0; i < head_tensors[t]->rows(); ++i)
      for (Eigen::Index j = 0; j < head_tensors[t]->cols(); ++j) {
        const double fd = oracle::CentralDifference(*head_tensors[t], i, j, f, 1e-5);
        const double g = grads.head[t](i, j);
        worst = std::max(worst, std::abs(g - fd) / std::max(1e-3, std::abs(fd) + std::abs(g)));
      }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Gradients, ReluGateZeroesUpstream) {
  EncoderConfig config;
  config.num_layers = 2;
  config.hidden = 4;
  EncoderParams params = InitEncoder(config, 3);
  GinLayer& last = params.layers.back();
  last.linears.back().weight.setZero();
  last.linears.back().bias.setConstant(-1.0);
  const ProjectionHead head = InitProjectionHead(config.embedding_dim(), 4);
  const GradientResult grads =
      ComputeGradients(params, head, TinyViews(3, config, 4), NtXentObjective(0.2));
  // Tensor order: layer 0 (2 linears x 2, 1 norm x 2), then layer 1.
  for (std::size_t t = 6; t < 12; ++t) EXPECT_TRUE(grads.encoder[t].isZero()) << t;
  EXPECT_FALSE(grads.encoder[0].isZero());
}

TEST(Gradients, SingleGraphBatchRejected) {
  EncoderConfig config;
  config.hidden = 4;
  const EncoderParams params = InitEncoder(config, 1);
  const ProjectionHead head = InitProjectionHead(config.embedding_dim(), 1);
  EXPECT_ERROR_CODE(ComputeGradients(params, head, TinyViews(1, config, 1), NtXentObjective(0.2)),
                    ErrorCode::kDegenerateBatch);
}

GraphSet Lobsters(std::uint64_t seed, std::size_t n) {
  return GenerateDataset(Recipe::kLobster, n, seed);
}

TEST(Train, TwoEpochsLowerLossOnFixedViews) {
  // Epoch means are dominated by augmentation noise at this size, so the loss
  // is compared on one fixed set of held-out views before and after training.
  EncoderConfig config;
  config.hidden = 8;
  const NtXentObjective loss(TrainConfig{}.temperature);
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GraphSet set = Lobsters(seed, 20);
    TrainConfig tc;
    tc.seed = seed;
    tc.epochs = 0;
    const TrainResult before = TrainGraphCL(set, config, tc);
    tc.epochs = 2;
    const TrainResult after = TrainGraphCL(set, config, tc);
    ASSERT_EQ(after.epoch_loss.size(), 2u);
    EXPECT_TRUE(before.epoch_loss.empty());

    std::vector<Graph> attached;
    for (const Graph& g : set.graphs) attached.push_back(AttachEncoderInput(g, config));
    std::vector<const Graph*> ptrs;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < attached.size(); ++i) {
      ptrs.push_back(&attached[i]);
      index.push_back(i);
    }
    const ContrastiveViews views =
        SampleViews(ptrs, index, tc.EnabledAugmentations(), seed + 1000, 0, 0);
    decreased += ComputeLoss(after.params, after.head, views, loss) <
                 ComputeLoss(before.params, before.head, views, loss);
  }
  EXPECT_GE(decreased, 8);
}

TEST(Train, DeterministicAndBounded) {
  EncoderConfig config;
  config.hidden = 8;
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 8;
  tc.seed = 4;
  tc.check_bound_each_step = true;
  const GraphSet set = Lobsters(4, 20);
  const TrainResult a = TrainGraphCL(set, config, tc);
  const TrainResult b = TrainGraphCL(set, config, tc);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  EXPECT_EQ(a.steps, 9u);
  EXPECT_LE(MaxSpectralNorm(a.params), 1.0 + 1e-6);
  for (double l : a.epoch_loss) EXPECT_TRUE(std::isfinite(l));
}

TEST(Train, AblationsRun) {
  EncoderConfig config;
  config.hidden = 8;
  TrainConfig tc;
  tc.epochs = 2;
  const GraphSet set = Lobsters(5, 12);
  const TrainConfig no_lip = WithoutLipschitz(tc);
  EXPECT_FALSE(no_lip.lipschitz_enabled);
  const TrainConfig no_sub = WithoutSubgraphs(tc);
  EXPECT_FALSE(no_sub.subgraph_enabled);
  EXPECT_DOUBLE_EQ(no_sub.node_drop_p, tc.node_drop_p / 2.0);
  EXPECT_DOUBLE_EQ(no_sub.edge_drop_p, tc.edge_drop_p / 2.0);
  EXPECT_EQ(no_sub.EnabledAugmentations().size(), 2u);
  EXPECT_EQ(tc.EnabledAugmentations().size(), 3u);
  EXPECT_EQ(TrainGraphCL(set, config, no_lip).epoch_loss.size(), 2u);
  EXPECT_EQ(TrainGraphCL(set, config, no_sub).epoch_loss.size(), 2u);
}

TEST(Train, ConfigValidation) {
  TrainConfig tc;
  tc.temperature = 0.0;
  EXPECT_ERROR_CODE(tc.Validate(), ErrorCode::kInvalidArgument);
  tc = TrainConfig{};
  tc.batch_size = 1;
  EXPECT_ERROR_CODE(tc.Validate(), ErrorCode::kInvalidArgument);
  EncoderConfig config;
  EXPECT_ANY_THROW(TrainGraphCL(GraphSet{"one", {kTriangle}}, config, TrainConfig{}));
}

}  // namespace
}  // namespace ggeval
