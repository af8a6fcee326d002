#pragma once

#include <cstdint>
#include <string_view>

#include "ggeval/graph.hpp"
#include "ggeval/rng.hpp"

namespace ggeval {

/// G(n, p): each of the C(n, 2) pairs is present independently with
/// probability p.
Graph GenerateErdosRenyi(NodeId n, double p, Rng& rng);
Graph GenerateErdosRenyi(NodeId n, double p, std::uint64_t seed);

/// Two disjoint G(n/2, p) blocks joined by round(inter_frac * n) distinct
/// uniformly chosen cross-block edges.
Graph GenerateCommunity(NodeId num_nodes, double p, double inter_frac, Rng& rng);
Graph GenerateCommunity(NodeId num_nodes, double p, double inter_frac, std::uint64_t seed);

/// rows x cols 4-neighbor lattice; node (r, c) has index r * cols + c.
Graph GenerateGrid(int rows, int cols);

struct LobsterOptions {
  double expected_backbone = 80.0;
  double p1 = 0.7;
  double p2 = 0.7;
  NodeId min_nodes = 10;
  NodeId max_nodes = 100;
  int max_attempts = 100000;
};

struct Lobster {
  Graph graph;
  NodeId backbone_length = 0;  // backbone is the path 0 - 1 - ... - length-1
};

/// Random lobster: a path backbone of length uniform in
/// [0, 2 * expected_backbone], then for each backbone node a geometric number
/// of pendants (continue with probability p1), each of which gets a geometric
/// number of its own pendants (probability p2). Samples are redrawn until the
/// node count falls in [min_nodes, max_nodes].
Lobster GenerateLobsterWithBackbone(const LobsterOptions& options, Rng& rng);
Graph GenerateLobster(const LobsterOptions& options, std::uint64_t seed);

/// Cycle of size a and cycle of size b joined by one bridge edge between node 0
/// of the first cycle and node a (node 0 of the second cycle).
Graph GenerateCyclePair(int a, int b);

/// Cycle on n nodes, and k disjoint copies of a cycle on n nodes.
Graph GenerateCycle(int n);
Graph GenerateDisjointCycles(int n, int copies);

enum class Recipe { kLobster, kGrid, kCommunity };

std::string_view RecipeName(Recipe recipe);
Recipe ParseRecipe(std::string_view name);

struct DatasetOptions {
  // Node-count range; zero means the recipe default.
  NodeId min_nodes = 0;
  NodeId max_nodes = 0;
  double community_p = 0.3;
  double community_inter_frac = 0.05;
  int grid_min_side = 10;
  int grid_max_side = 20;
  LobsterOptions lobster;
};

/// Default set size for a recipe (lobster 100, grid 100, community 500).
std::size_t DefaultDatasetSize(Recipe recipe);

/// Graph i is drawn from the stream Rng(seed, {i}), so datasets are
/// reproducible and any prefix is independent of `count`.
GraphSet GenerateDataset(Recipe recipe, std::size_t count, std::uint64_t seed,
                         const DatasetOptions& options = {});

}  // namespace ggeval
