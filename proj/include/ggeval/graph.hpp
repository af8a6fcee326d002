#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ggeval {

using NodeId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected simple graph with optional node and edge feature matrices.
///
/// Construction canonicalizes the edge list: every pair is stored as
/// (min, max), duplicates are removed and the list is sorted
/// lexicographically. Self-loops and out-of-range endpoints throw instead of
/// being dropped. Instances are immutable afterwards, so sharing across threads
/// is safe.
class Graph {
 public:
  Graph() = default;
  Graph(NodeId num_nodes, std::vector<Edge> edges,
        std::optional<Matrix> node_features = std::nullopt,
        std::optional<Matrix> edge_features = std::nullopt);

  NodeId num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Sorted neighbor list of v; symmetric by construction.
  const std::vector<NodeId>& neighbors(NodeId v) const { return adjacency_[v]; }
  const std::vector<std::vector<NodeId>>& adjacency() const { return adjacency_; }
  std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
  bool has_edge(NodeId u, NodeId v) const;

  const std::optional<Matrix>& node_features() const { return node_features_; }
  const std::optional<Matrix>& edge_features() const { return edge_features_; }

  /// Subgraph induced by `keep` (ascending or not); nodes are re-indexed in the
  /// order given. Node feature rows follow their nodes.
  Graph InducedSubgraph(const std::vector<NodeId>& keep) const;

  /// Same graph with node v renamed to perm[v].
  Graph Relabel(const std::vector<NodeId>& perm) const;

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  NodeId num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::optional<Matrix> node_features_;
  std::optional<Matrix> edge_features_;
};

/// Validates a raw edge list and returns the canonical graph on it.
Graph Canonicalize(NodeId num_nodes, const std::vector<Edge>& edges);

/// Per-node sorted neighbor lists.
std::vector<std::vector<NodeId>> Adjacency(const Graph& g);

struct GraphSet {
  std::string name;
  std::vector<Graph> graphs;

  std::size_t size() const { return graphs.size(); }
  bool empty() const { return graphs.empty(); }
  const Graph& operator[](std::size_t i) const { return graphs[i]; }
};

/// Throws InvariantViolation when the set is empty; metric and benchmark
/// entry points call this.
void RequireNonEmpty(const GraphSet& set, const char* what);

}  // namespace ggeval
