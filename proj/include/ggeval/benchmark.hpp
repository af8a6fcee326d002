#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ggeval/encoder.hpp"
#include "ggeval/graph.hpp"
#include "ggeval/metrics.hpp"
#include "ggeval/rng.hpp"

namespace ggeval {

enum class PerturbationKind { kMixRandom, kRewire, kModeCollapse, kModeDrop };

std::string_view PerturbationName(PerturbationKind kind);
/// Accepts mix-random, rewire, mode-collapse, mode-drop.
PerturbationKind ParsePerturbation(std::string_view name);

/// Replaces round(r * |set|) uniformly chosen graphs with Erdos-Renyi graphs
/// of the same node count and edge density |E| / C(n, 2). The choice and the
/// replacements depend only on the seed, so higher ratios replace a superset
/// of the graphs replaced at lower ratios.
GraphSet PerturbMixRandom(const GraphSet& set, double r, std::uint64_t seed);

/// Rewires each edge with probability r: one endpoint (uniform) stays, the
/// other moves to a uniform node that is neither the stable node nor already
/// adjacent to it. Edges without a legal target stay put.
Graph RewireEdges(const Graph& g, double r, Rng& rng);
GraphSet PerturbRewire(const GraphSet& set, double r, std::uint64_t seed);

struct Clustering {
  std::vector<int> assignment;      // cluster id per graph
  std::vector<std::size_t> medoids;  // graph index per cluster id
  int num_clusters() const { return static_cast<int>(medoids.size()); }
};

/// Complete-linkage agglomerative clustering on the kernel distance
/// sqrt(k_ii + k_jj - 2 k_ij). Clusters are numbered by their smallest member;
/// the medoid maximizes the mean kernel similarity to the other members.
/// Ties resolve toward lower indices. Throws InvariantViolation for a Gram
/// matrix that is not positive semidefinite.
Clustering ClusterFromGram(const Matrix& gram, int num_clusters);
/// ClusterFromGram on the WL subtree kernel of depth h.
Clustering ClusterWL(const GraphSet& set, int num_clusters, int h = 3);

/// Members of round(r * C) uniformly chosen clusters replaced by their medoid.
GraphSet PerturbModeCollapse(const GraphSet& set, const Clustering& clusters, double r,
                             std::uint64_t seed);
/// Members of round(r * C) uniformly chosen clusters removed, then survivors
/// resampled uniformly with replacement back to |set|. Throws
/// AllClustersSelected when nothing survives.
GraphSet PerturbModeDrop(const GraphSet& set, const Clustering& clusters, double r,
                         std::uint64_t seed);

struct SpearmanResult {
  double rho = 0.0;
  bool zero_variance = false;  // rho forced to 0
};

/// Ranks with ties sharing their mean rank (1-based).
std::vector<double> AverageRanks(const std::vector<double>& values);
/// Pearson correlation of average ranks. Needs equal lengths >= 3.
SpearmanResult Spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// +1 for metrics expected to grow with the perturbation (fd, mmd_*), -1 for
/// those expected to shrink. Reported correlations are multiplied by this so
/// +1 is ideal everywhere.
int MetricOrientation(std::string_view metric);

enum class SigmaPolicy {
  kReference,  // median heuristic at r = 0, reused for every step of a seed
  kPerStep,    // median heuristic recomputed at every step
};

struct BenchmarkConfig {
  PerturbationKind kind = PerturbationKind::kMixRandom;
  double step = 0.01;
  int num_clusters = 10;
  int wl_depth = 3;
  MetricSettings metrics;
  SigmaPolicy sigma_policy = SigmaPolicy::kReference;
  NormMode norm_mode = NormMode::kJoint;

  nlohmann::json ToJson() const;
};

/// Perturbation ratios visited: 0, step, ..., 1 for the ratio kinds; j / C for
/// the mode kinds (mode drop stops at (C - 1) / C).
std::vector<double> RatioGrid(const BenchmarkConfig& config);

struct CurvePoint {
  double r = 0.0;
  MetricReport report;
};

struct BenchmarkCurve {
  std::uint64_t seed = 0;
  std::vector<CurvePoint> points;
  std::map<std::string, double> spearman;  // oriented
  std::map<std::string, bool> zero_variance;
  bool complete = true;
  std::string error;  // set when the curve stopped early
};

/// Applies `kind` at ratio r. `clusters` is required for the mode kinds.
GraphSet Perturb(const GraphSet& set, const BenchmarkConfig& config, double r,
                 std::uint64_t seed, const Clustering* clusters);

/// One curve. Errors during a step end the curve there (complete = false);
/// the correlations cover the points recorded so far.
BenchmarkCurve RunBenchmarkSeed(const GraphSet& reference, const EncoderParams& params,
                                const BenchmarkConfig& config, std::uint64_t seed,
                                const Clustering* clusters = nullptr);

using ParamsForSeed = std::function<EncoderParams(std::uint64_t seed)>;

/// Runs every seed (up to `threads` at once); results in seed order.
std::vector<BenchmarkCurve> RunBenchmark(const GraphSet& reference, const ParamsForSeed& params,
                                         const BenchmarkConfig& config,
                                         const std::vector<std::uint64_t>& seeds, int threads = 1);

/// Recomputes the oriented correlations of a curve from its points.
void ScoreCurve(BenchmarkCurve& curve, const std::vector<std::string>& metrics);

struct RhoSummary {
  double mean = 0.0;
  double median = 0.0;
  std::vector<double> per_seed;
  int zero_variance = 0;
};
std::map<std::string, RhoSummary> SummarizeCurves(const std::vector<BenchmarkCurve>& curves,
                                                  const std::vector<std::string>& metrics);

/// Columns: seed, r, the metric report fields.
std::string CurvesCsv(const std::vector<BenchmarkCurve>& curves);
nlohmann::json SummaryJson(const std::vector<BenchmarkCurve>& curves,
                           const std::vector<std::string>& metrics);

/// Self-contained SVG: one panel per metric, one line per seed plus the mean.
std::string CurvesSvg(const std::vector<BenchmarkCurve>& curves,
                      const std::vector<std::string>& metrics, const std::string& title = "");

}  // namespace ggeval
