#include "ggeval/local_features.hpp"

#include <algorithm>
#include <numeric>

#include "ggeval/error.hpp"

namespace ggeval {

namespace {

std::size_t CountCommon(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

constexpr std::array<std::pair<int, int>, 6> kPairs = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

unsigned MaskOf(std::initializer_list<std::pair<int, int>> edges) {
  unsigned mask = 0;
  for (auto [u, v] : edges) {
    for (std::size_t i = 0; i < kPairs.size(); ++i) {
      if (kPairs[i] == std::pair{std::min(u, v), std::max(u, v)}) mask |= 1u << i;
    }
  }
  return mask;
}

unsigned CanonicalMask(unsigned mask) {
  std::array<int, 4> perm = {0, 1, 2, 3};
  unsigned best = 64;
  do {
    unsigned permuted = 0;
    for (std::size_t i = 0; i < kPairs.size(); ++i) {
      if (!(mask & (1u << i))) continue;
      int u = perm[kPairs[i].first];
      int v = perm[kPairs[i].second];
      permuted |= MaskOf({{u, v}});
    }
    best = std::min(best, permuted);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Lookup from raw 6-bit mask to pattern, built by canonicalizing one
// representative per class.
const std::array<FourNodePattern, 64>& PatternTable() {
  static const std::array<FourNodePattern, 64> table = [] {
    const std::array<std::pair<FourNodePattern, unsigned>, kNumFourNodePatterns> reps = {{
        {FourNodePattern::kComplete, 0x3f},
        {FourNodePattern::kDiamond, MaskOf({{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}})},
        {FourNodePattern::kCycle, MaskOf({{0, 1}, {1, 2}, {2, 3}, {0, 3}})},
        {FourNodePattern::kPaw, MaskOf({{0, 1}, {1, 2}, {0, 2}, {2, 3}})},
        {FourNodePattern::kTriangleIsolated, MaskOf({{0, 1}, {1, 2}, {0, 2}})},
        {FourNodePattern::kClaw, MaskOf({{0, 1}, {0, 2}, {0, 3}})},
        {FourNodePattern::kSingleEdge, MaskOf({{0, 1}})},
        {FourNodePattern::kTwoEdges, MaskOf({{0, 1}, {2, 3}})},
        {FourNodePattern::kPathIsolated, MaskOf({{0, 1}, {1, 2}})},
        {FourNodePattern::kPath, MaskOf({{0, 1}, {1, 2}, {2, 3}})},
        {FourNodePattern::kEmpty, 0},
    }};
    std::array<FourNodePattern, 64> t{};
    std::array<bool, 64> seen{};
    for (unsigned mask = 0; mask < 64; ++mask) {
      const unsigned canon = CanonicalMask(mask);
      for (auto [pattern, rep] : reps) {
        if (CanonicalMask(rep) == canon) {
          t[mask] = pattern;
          seen[mask] = true;
        }
      }
    }
    for (bool s : seen) {
      if (!s) throw Error(ErrorCode::kInvariantViolation, "incomplete 4-node pattern table");
    }
    return t;
  }();
  return table;
}

std::map<int, int> HistogramOf(const std::vector<int>& colors) {
  std::map<int, int> hist;
  for (int c : colors) ++hist[c];
  return hist;
}

double HistogramDot(const std::map<int, int>& a, const std::map<int, int>& b) {
  double dot = 0.0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      dot += static_cast<double>(i->second) * static_cast<double>(j->second);
      ++i;
      ++j;
    }
  }
  return dot;
}

}  // namespace

std::vector<int> Degrees(const Graph& g) {
  std::vector<int> deg(static_cast<std::size_t>(g.num_nodes()));
  for (NodeId v = 0; v < g.num_nodes(); ++v) deg[v] = static_cast<int>(g.degree(v));
  return deg;
}

double ClusteringCoefficient(const Graph& g, NodeId v) {
  const auto& nbrs = g.neighbors(v);
  const std::size_t k = nbrs.size();
  if (k < 2) return 0.0;
  std::size_t closed = 0;
  for (NodeId u : nbrs) closed += CountCommon(nbrs, g.neighbors(u));
  // Each triangle through v is seen from both of its other corners.
  return static_cast<double>(closed) / static_cast<double>(k * (k - 1));
}

double FourNodeClustering(const Graph& g, NodeId v) {
  const auto& nbrs = g.neighbors(v);
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
      const NodeId u = nbrs[i];
      const NodeId w = nbrs[j];
      // v is always a common neighbor of u and w.
      const double q = static_cast<double>(CountCommon(g.neighbors(u), g.neighbors(w))) - 1.0;
      const double linked = g.has_edge(u, w) ? 1.0 : 0.0;
      numerator += q;
      denominator += static_cast<double>(g.degree(u) + g.degree(w)) - q - 2.0 * linked;
    }
  }
  if (denominator == 0.0) return 0.0;
  return numerator / denominator;
}

char PatternLetter(FourNodePattern p) { return static_cast<char>('a' + static_cast<int>(p)); }

FourNodePattern ClassifyFourNodeMask(unsigned mask) { return PatternTable()[mask & 63u]; }

std::uint64_t OrbitCensus::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

OrbitCensus OrbitCensus4(const Graph& g) {
  const NodeId n = g.num_nodes();
  if (n > kMaxCensusNodes) {
    throw Error(ErrorCode::kInvalidArgument,
                "orbit census limited to " + std::to_string(kMaxCensusNodes) +
                    " nodes, got " + std::to_string(n));
  }
  std::vector<unsigned char> adj(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  for (auto [u, v] : g.edges()) {
    adj[static_cast<std::size_t>(u) * n + v] = 1;
    adj[static_cast<std::size_t>(v) * n + u] = 1;
  }
  auto linked = [&](NodeId a, NodeId b) -> unsigned {
    return adj[static_cast<std::size_t>(a) * n + b];
  };
  const auto& table = PatternTable();
  OrbitCensus census;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      const unsigned ab = linked(a, b);
      for (NodeId c = b + 1; c < n; ++c) {
        const unsigned abc = ab | linked(a, c) << 1 | linked(b, c) << 3;
        for (NodeId d = c + 1; d < n; ++d) {
          const unsigned mask = abc | linked(a, d) << 2 | linked(b, d) << 4 | linked(c, d) << 5;
          ++census.counts[static_cast<std::size_t>(table[mask])];
        }
      }
    }
  }
  return census;
}

WLRefinement::WLRefinement(std::vector<const Graph*> graphs) : graphs_(std::move(graphs)) {
  std::vector<int> seen;
  for (const Graph* g : graphs_) {
    std::vector<int> deg = Degrees(*g);
    seen.insert(seen.end(), deg.begin(), deg.end());
    colors_.push_back(std::move(deg));
  }
  std::sort(seen.begin(), seen.end());
  num_classes_ = static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

bool WLRefinement::Step() {
  std::map<std::vector<int>, int> dictionary;
  std::vector<std::vector<int>> next(colors_.size());
  std::vector<int> signature;
  for (std::size_t gi = 0; gi < graphs_.size(); ++gi) {
    const Graph& g = *graphs_[gi];
    const auto& current = colors_[gi];
    next[gi].resize(current.size());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      signature.clear();
      signature.push_back(current[v]);
      for (NodeId u : g.neighbors(v)) signature.push_back(current[u]);
      std::sort(signature.begin() + 1, signature.end());
      auto [it, inserted] =
          dictionary.try_emplace(signature, static_cast<int>(dictionary.size()));
      next[gi][v] = it->second;
    }
  }
  colors_ = std::move(next);
  ++iteration_;
  const bool split = dictionary.size() > num_classes_;
  num_classes_ = dictionary.size();
  return split;
}

std::map<int, int> WLRefinement::Histogram(std::size_t graph) const {
  return HistogramOf(colors_[graph]);
}

std::vector<WLColoring> WLRefine(const Graph& g, int max_iter) {
  if (max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "max_iter must be >= 1");
  WLRefinement refinement({&g});
  std::vector<WLColoring> history;
  history.push_back({0, refinement.colors(0), refinement.Histogram(0)});
  for (int t = 1; t <= max_iter; ++t) {
    const bool split = refinement.Step();
    history.push_back({t, refinement.colors(0), refinement.Histogram(0)});
    if (!split) break;
  }
  return history;
}

std::optional<int> WLFirstSeparation(const Graph& g1, const Graph& g2, int max_iter) {
  if (max_iter < 1) throw Error(ErrorCode::kInvalidArgument, "max_iter must be >= 1");
  WLRefinement refinement({&g1, &g2});
  if (refinement.Histogram(0) != refinement.Histogram(1)) return 0;
  for (int t = 1; t <= max_iter; ++t) {
    const bool split = refinement.Step();
    if (refinement.Histogram(0) != refinement.Histogram(1)) return t;
    if (!split) break;
  }
  return std::nullopt;
}

bool WLDistinguish(const Graph& g1, const Graph& g2, int max_iter) {
  return WLFirstSeparation(g1, g2, max_iter).has_value();
}

double WLSubtreeKernel(const Graph& g1, const Graph& g2, int h) {
  return WLKernelGram({g1, g2}, h)(0, 1);
}

Matrix WLKernelGram(const std::vector<Graph>& graphs, int h) {
  if (h < 0) throw Error(ErrorCode::kInvalidArgument, "WL kernel depth must be >= 0");
  std::vector<const Graph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const Graph& g : graphs) ptrs.push_back(&g);
  WLRefinement refinement(ptrs);
  const auto n = static_cast<Eigen::Index>(graphs.size());
  Matrix gram = Matrix::Zero(n, n);
  std::vector<std::map<int, int>> hist(graphs.size());
  for (int t = 0; t <= h; ++t) {
    if (t > 0) refinement.Step();
    for (std::size_t i = 0; i < graphs.size(); ++i) hist[i] = refinement.Histogram(i);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const double dot = HistogramDot(hist[i], hist[j]);
        gram(i, j) += dot;
        if (i != j) gram(j, i) += dot;
      }
    }
  }
  return gram;
}

std::string_view FeatureConfigName(FeatureConfig config) {
  switch (config) {
    case FeatureConfig::kNone: return "none";
    case FeatureConfig::kDegree: return "degree";
    case FeatureConfig::kDegreeClustering: return "degree+clustering";
  }
  return "none";
}

FeatureConfig ParseFeatureConfig(std::string_view name) {
  if (name == "none") return FeatureConfig::kNone;
  if (name == "degree") return FeatureConfig::kDegree;
  if (name == "degree+clustering" || name == "clustering") {
    return FeatureConfig::kDegreeClustering;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown feature config '" + std::string(name) + "'");
}

int FeatureConfigWidth(FeatureConfig config) {
  switch (config) {
    case FeatureConfig::kNone: return 1;
    case FeatureConfig::kDegree: return 2;
    case FeatureConfig::kDegreeClustering: return 4;
  }
  return 1;
}

Matrix StructuralFeatures(const Graph& g, FeatureConfig config) {
  const NodeId n = g.num_nodes();
  Matrix x(n, FeatureConfigWidth(config));
  for (NodeId v = 0; v < n; ++v) {
    x(v, 0) = 1.0;
    if (config == FeatureConfig::kNone) continue;
    x(v, 1) = static_cast<double>(g.degree(v));
    if (config == FeatureConfig::kDegreeClustering) {
      x(v, 2) = ClusteringCoefficient(g, v);
      x(v, 3) = FourNodeClustering(g, v);
    }
  }
  return x;
}

}  // namespace ggeval
