#include "ggeval/graph.hpp"

#include <algorithm>
#include <numeric>

#include "ggeval/error.hpp"

namespace ggeval {

Graph::Graph(NodeId num_nodes, std::vector<Edge> edges,
             std::optional<Matrix> node_features,
             std::optional<Matrix> edge_features)
    : num_nodes_(num_nodes) {
  if (num_nodes < 0) {
    throw Error(ErrorCode::kInvariantViolation, "negative node count");
  }
  if (edge_features && edge_features->rows() != static_cast<Eigen::Index>(edges.size())) {
    throw Error(ErrorCode::kInvariantViolation,
                "edge feature rows (" + std::to_string(edge_features->rows()) +
                    ") != edge count (" + std::to_string(edges.size()) + ")");
  }
  if (node_features && node_features->rows() != num_nodes) {
    throw Error(ErrorCode::kInvariantViolation,
                "node feature rows (" + std::to_string(node_features->rows()) +
                    ") != node count (" + std::to_string(num_nodes) + ")");
  }

  // Keep the original index so edge feature rows can follow the sort; on
  // duplicates the first occurrence wins.
  std::vector<std::pair<Edge, std::size_t>> keyed;
  keyed.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw Error(ErrorCode::kEndpointOutOfRange,
                  "edge (" + std::to_string(u) + "," + std::to_string(v) +
                      ") outside [0," + std::to_string(num_nodes) + ")");
    }
    if (u == v) {
      throw Error(ErrorCode::kSelfLoop, "self-loop on node " + std::to_string(u));
    }
    keyed.push_back({{std::min(u, v), std::max(u, v)}, i});
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  keyed.erase(std::unique(keyed.begin(), keyed.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              keyed.end());

  edges_.reserve(keyed.size());
  for (const auto& [e, _] : keyed) edges_.push_back(e);
  if (edge_features) {
    Matrix reordered(static_cast<Eigen::Index>(keyed.size()), edge_features->cols());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      reordered.row(static_cast<Eigen::Index>(i)) =
          edge_features->row(static_cast<Eigen::Index>(keyed[i].second));
    }
    edge_features_ = std::move(reordered);
  }
  node_features_ = std::move(node_features);

  adjacency_.assign(static_cast<std::size_t>(num_nodes), {});
  for (auto [u, v] : edges_) {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u < 0 || v < 0 || u >= num_nodes_ || v >= num_nodes_) return false;
  const auto& list = adjacency_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

Graph Graph::InducedSubgraph(const std::vector<NodeId>& keep) const {
  std::vector<NodeId> remap(static_cast<std::size_t>(num_nodes_), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) remap[keep[i]] = static_cast<NodeId>(i);

  std::vector<Edge> sub_edges;
  std::vector<Eigen::Index> kept_rows;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    auto [u, v] = edges_[i];
    if (remap[u] >= 0 && remap[v] >= 0) {
      sub_edges.push_back({remap[u], remap[v]});
      kept_rows.push_back(static_cast<Eigen::Index>(i));
    }
  }
  std::optional<Matrix> x;
  if (node_features_) {
    Matrix m(static_cast<Eigen::Index>(keep.size()), node_features_->cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      m.row(static_cast<Eigen::Index>(i)) = node_features_->row(keep[i]);
    }
    x = std::move(m);
  }
  std::optional<Matrix> e;
  if (edge_features_) {
    Matrix m(static_cast<Eigen::Index>(kept_rows.size()), edge_features_->cols());
    for (std::size_t i = 0; i < kept_rows.size(); ++i) {
      m.row(static_cast<Eigen::Index>(i)) = edge_features_->row(kept_rows[i]);
    }
    e = std::move(m);
  }
  return Graph(static_cast<NodeId>(keep.size()), std::move(sub_edges), std::move(x),
               std::move(e));
}

Graph Graph::Relabel(const std::vector<NodeId>& perm) const {
  std::vector<NodeId> inverse(perm.size());
  for (std::size_t v = 0; v < perm.size(); ++v) inverse[perm[v]] = static_cast<NodeId>(v);
  std::vector<Edge> relabeled;
  relabeled.reserve(edges_.size());
  for (auto [u, v] : edges_) relabeled.push_back({perm[u], perm[v]});
  std::optional<Matrix> x;
  if (node_features_) {
    Matrix m(node_features_->rows(), node_features_->cols());
    for (NodeId v = 0; v < num_nodes_; ++v) m.row(v) = node_features_->row(inverse[v]);
    x = std::move(m);
  }
  // Edge features would need the new sort order; only node-level data is kept.
  return Graph(num_nodes_, std::move(relabeled), std::move(x));
}

bool operator==(const Graph& a, const Graph& b) {
  if (a.num_nodes_ != b.num_nodes_ || a.edges_ != b.edges_) return false;
  auto same = [](const std::optional<Matrix>& x, const std::optional<Matrix>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->rows() == y->rows() && x->cols() == y->cols() && *x == *y;
  };
  return same(a.node_features_, b.node_features_) && same(a.edge_features_, b.edge_features_);
}

Graph Canonicalize(NodeId num_nodes, const std::vector<Edge>& edges) {
  return Graph(num_nodes, edges);
}

std::vector<std::vector<NodeId>> Adjacency(const Graph& g) { return g.adjacency(); }

void RequireNonEmpty(const GraphSet& set, const char* what) {
  if (set.empty()) {
    throw Error(ErrorCode::kInvariantViolation,
                std::string(what) + ": graph set '" + set.name + "' is empty");
  }
}

}  // namespace ggeval
