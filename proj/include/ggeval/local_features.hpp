#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "ggeval/graph.hpp"

namespace ggeval {

std::vector<int> Degrees(const Graph& g);

/// Triangle density around v: closed neighbor pairs over C(deg(v), 2).
/// Zero when deg(v) < 2.
double ClusteringCoefficient(const Graph& g, NodeId v);

/// Four-node (square) clustering coefficient of v:
///
///   C4(v) = sum_{u<w in N(v)} q_v(u,w)
///         / sum_{u<w in N(v)} [deg(u) + deg(w) - q_v(u,w) - 2*[u ~ w]]
///
/// where q_v(u,w) counts common neighbors of u and w other than v. Zero when
/// the denominator vanishes (deg(v) < 2 included).
double FourNodeClustering(const Graph& g, NodeId v);

/// The eleven isomorphism classes of 4-node graphs, lettered a..k.
enum class FourNodePattern : std::uint8_t {
  kComplete = 0,      // a: K4
  kDiamond,           // b: K4 minus an edge
  kCycle,             // c: C4
  kPaw,               // d: triangle with a pendant
  kTriangleIsolated,  // e: triangle plus an isolated node
  kClaw,              // f: star K1,3
  kSingleEdge,        // g: one edge plus two isolated nodes
  kTwoEdges,          // h: two disjoint edges
  kPathIsolated,      // i: 2-edge path plus an isolated node
  kPath,              // j: 3-edge path P4
  kEmpty,             // k: no edges
};
inline constexpr std::size_t kNumFourNodePatterns = 11;
char PatternLetter(FourNodePattern p);

/// Pattern of the induced subgraph whose edges are encoded in `mask`, bit i
/// set for pair i in the order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
FourNodePattern ClassifyFourNodeMask(unsigned mask);

struct OrbitCensus {
  std::array<std::uint64_t, kNumFourNodePatterns> counts{};

  std::uint64_t operator[](FourNodePattern p) const {
    return counts[static_cast<std::size_t>(p)];
  }
  std::uint64_t total() const;
  friend bool operator==(const OrbitCensus&, const OrbitCensus&) = default;
};

/// Largest graph accepted by OrbitCensus4; the census enumerates every
/// 4-subset directly.
inline constexpr NodeId kMaxCensusNodes = 60;

/// Counts every 4-node induced subgraph by pattern. Counts sum to C(n, 4).
/// Throws InvalidArgument above kMaxCensusNodes.
OrbitCensus OrbitCensus4(const Graph& g);

struct WLColoring {
  int iteration = 0;
  std::vector<int> colors;
  std::map<int, int> histogram;
};

/// Joint 1-WL color refinement over several graphs sharing one label
/// dictionary, so colors are comparable across graphs. Initial colors are
/// node degrees; each step relabels (own color, sorted neighbor colors)
/// through an injective per-iteration dictionary.
class WLRefinement {
 public:
  explicit WLRefinement(std::vector<const Graph*> graphs);

  /// Performs one refinement step. Returns false when the joint partition did
  /// not split further (a fixed point); colors are still advanced.
  bool Step();

  int iteration() const { return iteration_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<int>& colors(std::size_t graph) const { return colors_[graph]; }
  std::map<int, int> Histogram(std::size_t graph) const;

 private:
  std::vector<const Graph*> graphs_;
  std::vector<std::vector<int>> colors_;
  std::size_t num_classes_ = 0;
  int iteration_ = 0;
};

/// Colorings of g at iterations 0..T, where T = max_iter or the first
/// iteration at which the partition stops splitting.
std::vector<WLColoring> WLRefine(const Graph& g, int max_iter);

/// First iteration (0-based; 0 = degree histogram) at which the joint color
/// histograms of g1 and g2 differ, or nullopt if they agree through max_iter
/// or a fixed point.
std::optional<int> WLFirstSeparation(const Graph& g1, const Graph& g2, int max_iter);
bool WLDistinguish(const Graph& g1, const Graph& g2, int max_iter);

inline constexpr int kDefaultWLDepth = 3;

/// WL subtree kernel: sum over iterations 0..h of color histogram dot
/// products.
double WLSubtreeKernel(const Graph& g1, const Graph& g2, int h = kDefaultWLDepth);

/// Kernel Gram matrix over a collection (one joint refinement).
Matrix WLKernelGram(const std::vector<Graph>& graphs, int h = kDefaultWLDepth);

enum class FeatureConfig { kNone, kDegree, kDegreeClustering };

std::string_view FeatureConfigName(FeatureConfig config);
FeatureConfig ParseFeatureConfig(std::string_view name);
int FeatureConfigWidth(FeatureConfig config);

/// Node feature matrix: [1] for none, [1, deg] for degree, and
/// [1, deg, C3, C4] for degree+clustering.
Matrix StructuralFeatures(const Graph& g, FeatureConfig config);

}  // namespace ggeval
