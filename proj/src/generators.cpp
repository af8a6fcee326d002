#include "ggeval/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ggeval/error.hpp"

namespace ggeval {

namespace {

void CheckProbability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

void AppendErdosRenyi(NodeId offset, NodeId n, double p, Rng& rng, std::vector<Edge>& edges) {
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.Bernoulli(p)) edges.push_back({offset + u, offset + v});
    }
  }
}

}  // namespace

Graph GenerateErdosRenyi(NodeId n, double p, Rng& rng) {
  CheckProbability(p, "edge probability");
  std::vector<Edge> edges;
  AppendErdosRenyi(0, n, p, rng, edges);
  return Graph(n, std::move(edges));
}

Graph GenerateErdosRenyi(NodeId n, double p, std::uint64_t seed) {
  Rng rng(seed);
  return GenerateErdosRenyi(n, p, rng);
}

Graph GenerateCommunity(NodeId num_nodes, double p, double inter_frac, Rng& rng) {
  CheckProbability(p, "community edge probability");
  if (num_nodes < 0 || num_nodes % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "community graphs need an even node count");
  }
  if (inter_frac < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "inter-community fraction must be >= 0");
  }
  const NodeId half = num_nodes / 2;
  const auto wanted = static_cast<std::uint64_t>(std::llround(inter_frac * num_nodes));
  const auto available = static_cast<std::uint64_t>(half) * static_cast<std::uint64_t>(half);
  if (wanted > available) {
    throw Error(ErrorCode::kInfeasibleInterEdges,
                std::to_string(wanted) + " cross edges requested, only " +
                    std::to_string(available) + " possible");
  }

  std::vector<Edge> edges;
  AppendErdosRenyi(0, half, p, rng, edges);
  AppendErdosRenyi(half, half, p, rng, edges);

  std::set<Edge> cross;
  if (wanted * 2 <= available) {
    while (cross.size() < wanted) {
      const auto u = static_cast<NodeId>(rng.UniformInt(static_cast<std::uint64_t>(half)));
      const auto v = static_cast<NodeId>(rng.UniformInt(static_cast<std::uint64_t>(half)));
      cross.insert({u, half + v});
    }
  } else {
    std::vector<Edge> all;
    all.reserve(available);
    for (NodeId u = 0; u < half; ++u) {
      for (NodeId v = 0; v < half; ++v) all.push_back({u, half + v});
    }
    rng.Shuffle(all);
    cross.insert(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(wanted));
  }
  edges.insert(edges.end(), cross.begin(), cross.end());
  return Graph(num_nodes, std::move(edges));
}

Graph GenerateCommunity(NodeId num_nodes, double p, double inter_frac, std::uint64_t seed) {
  Rng rng(seed);
  return GenerateCommunity(num_nodes, p, inter_frac, rng);
}

Graph GenerateGrid(int rows, int cols) {
  if (rows < 0 || cols < 0) throw Error(ErrorCode::kInvalidArgument, "negative grid size");
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const NodeId v = r * cols + c;
      if (c + 1 < cols) edges.push_back({v, v + 1});
      if (r + 1 < rows) edges.push_back({v, v + cols});
    }
  }
  return Graph(rows * cols, std::move(edges));
}

Lobster GenerateLobsterWithBackbone(const LobsterOptions& options, Rng& rng) {
  CheckProbability(options.p1, "lobster p1");
  CheckProbability(options.p2, "lobster p2");
  // p == 1 would never stop adding pendants.
  if (options.p1 >= 1.0 || options.p2 >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "lobster branching probabilities must be < 1");
  }
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    const auto backbone =
        static_cast<NodeId>(2.0 * rng.Uniform() * options.expected_backbone + 0.5);
    std::vector<Edge> edges;
    for (NodeId v = 0; v + 1 < backbone; ++v) edges.push_back({v, v + 1});
    NodeId next = backbone;
    bool too_big = backbone > options.max_nodes;
    for (NodeId b = 0; b < backbone && !too_big; ++b) {
      while (rng.Bernoulli(options.p1)) {
        const NodeId leaf = next++;
        edges.push_back({b, leaf});
        while (rng.Bernoulli(options.p2)) edges.push_back({leaf, next++});
      }
      too_big = next > options.max_nodes;
    }
    if (too_big || next < options.min_nodes) continue;
    return {Graph(next, std::move(edges)), backbone};
  }
  throw Error(ErrorCode::kInvalidArgument, "lobster sampling did not hit the node range");
}

Graph GenerateLobster(const LobsterOptions& options, std::uint64_t seed) {
  Rng rng(seed);
  return GenerateLobsterWithBackbone(options, rng).graph;
}

Graph GenerateCyclePair(int a, int b) {
  if (a < 3 || b < 3) throw Error(ErrorCode::kInvalidArgument, "cycles need >= 3 nodes");
  std::vector<Edge> edges;
  for (int i = 0; i < a; ++i) edges.push_back({i, (i + 1) % a});
  for (int i = 0; i < b; ++i) edges.push_back({a + i, a + (i + 1) % b});
  edges.push_back({0, a});
  return Graph(a + b, std::move(edges));
}

Graph GenerateCycle(int n) { return GenerateDisjointCycles(n, 1); }

Graph GenerateDisjointCycles(int n, int copies) {
  if (n < 3) throw Error(ErrorCode::kInvalidArgument, "cycles need >= 3 nodes");
  std::vector<Edge> edges;
  for (int k = 0; k < copies; ++k) {
    for (int i = 0; i < n; ++i) edges.push_back({k * n + i, k * n + (i + 1) % n});
  }
  return Graph(n * copies, std::move(edges));
}

std::string_view RecipeName(Recipe recipe) {
  switch (recipe) {
    case Recipe::kLobster: return "lobster";
    case Recipe::kGrid: return "grid";
    case Recipe::kCommunity: return "community";
  }
  return "community";
}

Recipe ParseRecipe(std::string_view name) {
  if (name == "lobster") return Recipe::kLobster;
  if (name == "grid") return Recipe::kGrid;
  if (name == "community") return Recipe::kCommunity;
  throw Error(ErrorCode::kInvalidArgument, "unknown recipe '" + std::string(name) + "'");
}

std::size_t DefaultDatasetSize(Recipe recipe) {
  return recipe == Recipe::kCommunity ? 500 : 100;
}

GraphSet GenerateDataset(Recipe recipe, std::size_t count, std::uint64_t seed,
                         const DatasetOptions& options) {
  GraphSet set{std::string(RecipeName(recipe)), {}};
  set.graphs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, {i});
    switch (recipe) {
      case Recipe::kCommunity: {
        const NodeId lo = options.min_nodes > 0 ? options.min_nodes : 60;
        const NodeId hi = options.max_nodes > 0 ? options.max_nodes : 160;
        const auto half = static_cast<NodeId>(rng.UniformRange((lo + 1) / 2, hi / 2));
        set.graphs.push_back(GenerateCommunity(2 * half, options.community_p,
                                               options.community_inter_frac, rng));
        break;
      }
      case Recipe::kGrid: {
        const NodeId lo = options.min_nodes > 0 ? options.min_nodes : 100;
        const NodeId hi = options.max_nodes > 0 ? options.max_nodes : 400;
        int rows = 0;
        int cols = 0;
        for (int attempt = 0;; ++attempt) {
          if (attempt > 100000) {
            throw Error(ErrorCode::kInvalidArgument, "grid side range cannot hit node range");
          }
          rows = static_cast<int>(rng.UniformRange(options.grid_min_side, options.grid_max_side));
          cols = static_cast<int>(rng.UniformRange(options.grid_min_side, options.grid_max_side));
          if (rows * cols >= lo && rows * cols <= hi) break;
        }
        set.graphs.push_back(GenerateGrid(rows, cols));
        break;
      }
      case Recipe::kLobster: {
        LobsterOptions lobster = options.lobster;
        if (options.min_nodes > 0) lobster.min_nodes = options.min_nodes;
        if (options.max_nodes > 0) lobster.max_nodes = options.max_nodes;
        set.graphs.push_back(GenerateLobsterWithBackbone(lobster, rng).graph);
        break;
      }
    }
  }
  return set;
}

}  // namespace ggeval
