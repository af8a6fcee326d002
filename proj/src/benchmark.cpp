#include "ggeval/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

#include "ggeval/csv.hpp"
#include "ggeval/error.hpp"
#include "ggeval/generators.hpp"
#include "ggeval/local_features.hpp"

namespace ggeval {

namespace {

// Stream tags for the per-seed random streams.
constexpr std::uint64_t kMixOrderStream = 0x11;
constexpr std::uint64_t kMixGraphStream = 0x12;
constexpr std::uint64_t kRewireStream = 0x21;
constexpr std::uint64_t kClusterOrderStream = 0x31;
constexpr std::uint64_t kResampleStream = 0x32;

void RequireRatio(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "perturbation ratio outside [0, 1]");
  }
}

std::size_t RoundedCount(double r, std::size_t total) {
  return static_cast<std::size_t>(std::llround(r * static_cast<double>(total)));
}

std::vector<bool> ChosenClusters(const Clustering& clusters, double r, std::uint64_t seed) {
  const auto count = static_cast<std::size_t>(clusters.num_clusters());
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, {kClusterOrderStream});
  rng.Shuffle(order);
  std::vector<bool> chosen(count, false);
  const std::size_t take = RoundedCount(r, count);
  for (std::size_t i = 0; i < take; ++i) chosen[order[i]] = true;
  return chosen;
}

void RequireClustering(const GraphSet& set, const Clustering& clusters) {
  if (clusters.assignment.size() != set.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "clustering does not match the set size");
  }
  for (int id : clusters.assignment) {
    if (id < 0 || id >= clusters.num_clusters()) {
      throw Error(ErrorCode::kInvariantViolation, "cluster id out of range");
    }
  }
}

std::string XmlEscape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string Compact(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace

std::string_view PerturbationName(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kMixRandom: return "mix-random";
    case PerturbationKind::kRewire: return "rewire";
    case PerturbationKind::kModeCollapse: return "mode-collapse";
    case PerturbationKind::kModeDrop: return "mode-drop";
  }
  return "unknown";
}

PerturbationKind ParsePerturbation(std::string_view name) {
  for (PerturbationKind k : {PerturbationKind::kMixRandom, PerturbationKind::kRewire,
                             PerturbationKind::kModeCollapse, PerturbationKind::kModeDrop}) {
    if (name == PerturbationName(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown perturbation: " + std::string(name));
}

GraphSet PerturbMixRandom(const GraphSet& set, double r, std::uint64_t seed) {
  RequireRatio(r);
  GraphSet out = set;
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), 0);
  Rng(seed, {kMixOrderStream}).Shuffle(order);
  const std::size_t replace = RoundedCount(r, set.size());
  for (std::size_t t = 0; t < replace; ++t) {
    const std::size_t i = order[t];
    const Graph& g = set[i];
    const double n = g.num_nodes();
    const double pairs = n * (n - 1.0) / 2.0;
    const double p = pairs > 0.0 ? static_cast<double>(g.num_edges()) / pairs : 0.0;
    Rng rng(seed, {kMixGraphStream, i});
    out.graphs[i] = GenerateErdosRenyi(g.num_nodes(), p, rng);
  }
  return out;
}

Graph RewireEdges(const Graph& g, double r, Rng& rng) {
  RequireRatio(r);
  const NodeId n = g.num_nodes();
  std::vector<std::set<NodeId>> adjacent(static_cast<std::size_t>(n));
  for (const Edge& e : g.edges()) {
    adjacent[e.first].insert(e.second);
    adjacent[e.second].insert(e.first);
  }
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) {
    if (!rng.Bernoulli(r)) continue;
    const bool keep_first = rng.Bernoulli(0.5);
    const NodeId stable = keep_first ? e.first : e.second;
    const NodeId moving = keep_first ? e.second : e.first;
    const auto& taken = adjacent[stable];
    const std::uint64_t free = static_cast<std::uint64_t>(n) - 1 - taken.size();
    if (free == 0) continue;
    std::uint64_t pick = rng.UniformInt(free);
    NodeId target = -1;
    for (NodeId w = 0; w < n; ++w) {
      if (w == stable || taken.count(w)) continue;
      if (pick-- == 0) {
        target = w;
        break;
      }
    }
    adjacent[stable].erase(moving);
    adjacent[moving].erase(stable);
    adjacent[stable].insert(target);
    adjacent[target].insert(stable);
    e = {stable, target};
  }
  // Edge feature rows travel with their (possibly moved) edge.
  return Graph(n, std::move(edges), g.node_features(), g.edge_features());
}

GraphSet PerturbRewire(const GraphSet& set, double r, std::uint64_t seed) {
  RequireRatio(r);
  GraphSet out = set;
  if (r == 0.0) return out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    Rng rng(seed, {kRewireStream, i});
    out.graphs[i] = RewireEdges(set[i], r, rng);
  }
  return out;
}

Clustering ClusterFromGram(const Matrix& gram, int num_clusters) {
  const Eigen::Index n = gram.rows();
  if (gram.cols() != n) throw Error(ErrorCode::kDimensionMismatch, "Gram matrix must be square");
  if (num_clusters < 1 || num_clusters > n) {
    throw Error(ErrorCode::kInvalidArgument, "num_clusters must be in [1, " + std::to_string(n) + "]");
  }
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  const Matrix sym = 0.5 * (gram + gram.transpose());
  if ((gram - sym).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::kInvariantViolation, "kernel Gram matrix is not symmetric");
  }
  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_eig < -1e-9 * scale * static_cast<double>(n)) {
    throw Error(ErrorCode::kInvariantViolation,
                "kernel Gram matrix is not positive semidefinite (min eigenvalue " +
                    std::to_string(min_eig) + ")");
  }

  Matrix linkage(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      linkage(i, j) = std::sqrt(std::max(0.0, sym(i, i) + sym(j, j) - 2.0 * sym(i, j)));
    }
  }
  // Active clusters keyed by their smallest member, kept in ascending order.
  std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), 0);
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) members[i] = {i};

  while (static_cast<int>(active.size()) > num_clusters) {
    std::size_t best_a = 0;
    std::size_t best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double d = linkage(active[a], active[b]);
        if (d < best) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    }
    const Eigen::Index keep = active[best_a];
    const Eigen::Index gone = active[best_b];
    for (Eigen::Index other : active) {
      const double merged = std::max(linkage(keep, other), linkage(gone, other));
      linkage(keep, other) = merged;
      linkage(other, keep) = merged;
    }
    auto& into = members[keep];
    into.insert(into.end(), members[gone].begin(), members[gone].end());
    std::sort(into.begin(), into.end());
    members[gone].clear();
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
  }

  Clustering out;
  out.assignment.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t c = 0; c < active.size(); ++c) {
    const auto& group = members[active[c]];
    std::size_t medoid = static_cast<std::size_t>(group.front());
    double best_mean = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i : group) {
      out.assignment[static_cast<std::size_t>(i)] = static_cast<int>(c);
      if (group.size() == 1) break;
      double total = 0.0;
      for (Eigen::Index j : group) {
        if (j != i) total += sym(i, j);
      }
      const double mean = total / static_cast<double>(group.size() - 1);
      if (mean > best_mean) {
        best_mean = mean;
        medoid = static_cast<std::size_t>(i);
      }
    }
    out.medoids.push_back(medoid);
  }
  return out;
}

Clustering ClusterWL(const GraphSet& set, int num_clusters, int h) {
  RequireNonEmpty(set, "ClusterWL");
  return ClusterFromGram(WLKernelGram(set.graphs, h), num_clusters);
}

GraphSet PerturbModeCollapse(const GraphSet& set, const Clustering& clusters, double r,
                             std::uint64_t seed) {
  RequireRatio(r);
  RequireClustering(set, clusters);
  const std::vector<bool> chosen = ChosenClusters(clusters, r, seed);
  GraphSet out = set;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const int c = clusters.assignment[i];
    if (chosen[static_cast<std::size_t>(c)]) out.graphs[i] = set[clusters.medoids[c]];
  }
  return out;
}

GraphSet PerturbModeDrop(const GraphSet& set, const Clustering& clusters, double r,
                         std::uint64_t seed) {
  RequireRatio(r);
  RequireClustering(set, clusters);
  const std::vector<bool> chosen = ChosenClusters(clusters, r, seed);
  GraphSet out{set.name, {}};
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!chosen[static_cast<std::size_t>(clusters.assignment[i])]) out.graphs.push_back(set[i]);
  }
  if (out.graphs.empty()) {
    throw Error(ErrorCode::kAllClustersSelected, "mode drop at r=" + std::to_string(r) +
                                                     " leaves no graphs to resample");
  }
  const std::size_t survivors = out.graphs.size();
  Rng rng(seed, {kResampleStream});
  while (out.graphs.size() < set.size()) {
    out.graphs.push_back(out.graphs[rng.UniformInt(survivors)]);
  }
  return out;
}

std::vector<double> AverageRanks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult Spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::kDimensionMismatch, "spearman lengths differ");
  if (xs.size() < 3) throw Error(ErrorCode::kInvalidArgument, "spearman needs at least 3 points");
  for (double v : ys) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "spearman of non-finite value");
  }
  const std::vector<double> rx = AverageRanks(xs);
  const std::vector<double> ry = AverageRanks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

int MetricOrientation(std::string_view metric) {
  static const std::set<std::string_view> kGrowing = {"fd", "mmd_linear", "mmd_rbf", "mmd_poly"};
  static const std::set<std::string_view> kShrinking = {"precision", "recall", "density",
                                                        "coverage",  "f1_pr",  "f1_dc"};
  if (kGrowing.count(metric)) return 1;
  if (kShrinking.count(metric)) return -1;
  throw Error(ErrorCode::kInvalidArgument, "no orientation for metric " + std::string(metric));
}

nlohmann::json BenchmarkConfig::ToJson() const {
  return {{"kind", std::string(PerturbationName(kind))},
          {"step", step},
          {"num_clusters", num_clusters},
          {"wl_depth", wl_depth},
          {"k", metrics.k},
          {"rbf_sigma", metrics.rbf_sigma ? nlohmann::json(*metrics.rbf_sigma) : nlohmann::json()},
          {"polynomial", metrics.polynomial},
          {"polynomial_degree", metrics.polynomial_degree},
          {"mmd_estimator",
           metrics.estimator == MmdEstimator::kUnbiased ? "unbiased" : "squared-count"},
          {"sigma_policy", sigma_policy == SigmaPolicy::kReference ? "reference" : "per-step"},
          {"norm_mode", norm_mode == NormMode::kJoint     ? "joint"
                        : norm_mode == NormMode::kBatch ? "batch"
                                                        : "running"}};
}

std::vector<double> RatioGrid(const BenchmarkConfig& config) {
  std::vector<double> grid;
  if (config.kind == PerturbationKind::kModeCollapse || config.kind == PerturbationKind::kModeDrop) {
    if (config.num_clusters < 2) {
      throw Error(ErrorCode::kInvalidArgument, "mode experiments need at least 2 clusters");
    }
    const int last = config.kind == PerturbationKind::kModeDrop ? config.num_clusters - 1
                                                                : config.num_clusters;
    for (int j = 0; j <= last; ++j) {
      grid.push_back(static_cast<double>(j) / static_cast<double>(config.num_clusters));
    }
    return grid;
  }
  if (!(config.step > 0.0 && config.step <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step must be in (0, 1]");
  }
  const long long count = std::llround(1.0 / config.step);
  if (std::abs(static_cast<double>(count) * config.step - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "step must divide [0, 1] evenly");
  }
  for (long long i = 0; i <= count; ++i) {
    grid.push_back(static_cast<double>(i) / static_cast<double>(count));
  }
  return grid;
}

GraphSet Perturb(const GraphSet& set, const BenchmarkConfig& config, double r,
                 std::uint64_t seed, const Clustering* clusters) {
  switch (config.kind) {
    case PerturbationKind::kMixRandom: return PerturbMixRandom(set, r, seed);
    case PerturbationKind::kRewire: return PerturbRewire(set, r, seed);
    case PerturbationKind::kModeCollapse:
    case PerturbationKind::kModeDrop:
      if (!clusters) throw Error(ErrorCode::kInvalidArgument, "mode perturbations need a clustering");
      return config.kind == PerturbationKind::kModeCollapse
                 ? PerturbModeCollapse(set, *clusters, r, seed)
                 : PerturbModeDrop(set, *clusters, r, seed);
  }
  return set;
}

void ScoreCurve(BenchmarkCurve& curve, const std::vector<std::string>& metrics) {
  curve.spearman.clear();
  curve.zero_variance.clear();
  std::vector<double> rs;
  for (const CurvePoint& p : curve.points) rs.push_back(p.r);
  for (const std::string& name : metrics) {
    if (curve.points.size() < 3) {
      curve.spearman[name] = 0.0;
      curve.zero_variance[name] = true;
      continue;
    }
    std::vector<double> values;
    for (const CurvePoint& p : curve.points) values.push_back(MetricValue(p.report, name));
    const SpearmanResult s = Spearman(rs, values);
    curve.spearman[name] = MetricOrientation(name) * s.rho;
    curve.zero_variance[name] = s.zero_variance;
  }
}

BenchmarkCurve RunBenchmarkSeed(const GraphSet& reference, const EncoderParams& params,
                                const BenchmarkConfig& config, std::uint64_t seed,
                                const Clustering* clusters) {
  RequireNonEmpty(reference, "benchmark reference");
  const std::vector<double> grid = RatioGrid(config);
  std::optional<Clustering> local;
  const bool mode = config.kind == PerturbationKind::kModeCollapse ||
                    config.kind == PerturbationKind::kModeDrop;
  if (mode && !clusters) {
    local = ClusterWL(reference, config.num_clusters, config.wl_depth);
    clusters = &*local;
  }

  BenchmarkCurve curve;
  curve.seed = seed;
  MetricSettings settings = config.metrics;
  for (double r : grid) {
    try {
      const GraphSet perturbed = Perturb(reference, config, r, seed, clusters);
      const auto [real, fake] = EmbedJoint(params, reference, perturbed, config.norm_mode);
      if (!settings.rbf_sigma && config.sigma_policy == SigmaPolicy::kReference) {
        settings.rbf_sigma = MedianHeuristicSigma(real);
      }
      curve.points.push_back({r, Evaluate(real, fake, settings)});
    } catch (const Error& e) {
      curve.complete = false;
      curve.error = "r=" + FormatDouble(r) + ": " + e.what();
      break;
    }
  }
  ScoreCurve(curve, MetricNames(settings.polynomial));
  return curve;
}

std::vector<BenchmarkCurve> RunBenchmark(const GraphSet& reference, const ParamsForSeed& params,
                                         const BenchmarkConfig& config,
                                         const std::vector<std::uint64_t>& seeds, int threads) {
  RequireNonEmpty(reference, "benchmark reference");
  std::optional<Clustering> clusters;
  if (config.kind == PerturbationKind::kModeCollapse || config.kind == PerturbationKind::kModeDrop) {
    clusters = ClusterWL(reference, config.num_clusters, config.wl_depth);
  }
  const Clustering* shared = clusters ? &*clusters : nullptr;
  auto run = [&](std::uint64_t seed) {
    return RunBenchmarkSeed(reference, params(seed), config, seed, shared);
  };

  std::vector<BenchmarkCurve> curves;
  curves.reserve(seeds.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, threads));
  for (std::size_t begin = 0; begin < seeds.size(); begin += width) {
    const std::size_t end = std::min(seeds.size(), begin + width);
    if (width == 1) {
      curves.push_back(run(seeds[begin]));
      continue;
    }
    std::vector<std::future<BenchmarkCurve>> pending;
    for (std::size_t i = begin; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, run, seeds[i]));
    }
    for (auto& f : pending) curves.push_back(f.get());
  }
  return curves;
}

std::map<std::string, RhoSummary> SummarizeCurves(const std::vector<BenchmarkCurve>& curves,
                                                  const std::vector<std::string>& metrics) {
  std::map<std::string, RhoSummary> out;
  for (const std::string& name : metrics) {
    RhoSummary s;
    for (const BenchmarkCurve& c : curves) {
      const auto it = c.spearman.find(name);
      if (it == c.spearman.end()) continue;
      s.per_seed.push_back(it->second);
      const auto zv = c.zero_variance.find(name);
      if (zv != c.zero_variance.end() && zv->second) ++s.zero_variance;
    }
    if (!s.per_seed.empty()) {
      s.mean = std::accumulate(s.per_seed.begin(), s.per_seed.end(), 0.0) /
               static_cast<double>(s.per_seed.size());
      std::vector<double> sorted = s.per_seed;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t mid = sorted.size() / 2;
      s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    }
    out[name] = std::move(s);
  }
  return out;
}

std::string CurvesCsv(const std::vector<BenchmarkCurve>& curves) {
  bool poly = false;
  for (const auto& c : curves) {
    for (const auto& p : c.points) poly = poly || p.report.mmd_poly.has_value();
  }
  std::string out = "seed,r";
  for (const std::string& name : MetricNames(poly)) out += "," + name;
  out += ",k,rbf_sigma\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out += std::to_string(c.seed) + "," + FormatDouble(p.r);
      for (const std::string& name : MetricNames(poly)) {
        out += ",";
        out += (name == "mmd_poly" && !p.report.mmd_poly) ? "" : FormatDouble(MetricValue(p.report, name));
      }
      out += "," + std::to_string(p.report.k) + "," + FormatDouble(p.report.rbf_sigma) + "\n";
    }
  }
  return out;
}

nlohmann::json SummaryJson(const std::vector<BenchmarkCurve>& curves,
                           const std::vector<std::string>& metrics) {
  nlohmann::json j;
  nlohmann::json per_metric = nlohmann::json::object();
  for (const auto& [name, s] : SummarizeCurves(curves, metrics)) {
    per_metric[name] = {{"mean", s.mean},
                        {"median", s.median},
                        {"per_seed", s.per_seed},
                        {"zero_variance_seeds", s.zero_variance}};
  }
  j["rho"] = per_metric;
  std::vector<std::uint64_t> seeds;
  bool complete = true;
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& c : curves) {
    seeds.push_back(c.seed);
    complete = complete && c.complete;
    if (!c.complete) errors.push_back({{"seed", c.seed}, {"error", c.error}});
  }
  j["seeds"] = seeds;
  j["complete"] = complete;
  if (!errors.empty()) j["errors"] = errors;
  return j;
}

std::string CurvesSvg(const std::vector<BenchmarkCurve>& curves,
                      const std::vector<std::string>& metrics, const std::string& title) {
  constexpr int kCols = 3;
  constexpr double kPanelW = 300.0;
  constexpr double kPanelH = 210.0;
  constexpr double kPad = 40.0;
  constexpr double kTop = 36.0;
  const int rows = static_cast<int>((metrics.size() + kCols - 1) / kCols);
  const double width = kCols * kPanelW;
  const double height = kTop + rows * kPanelH;
  const auto summary = SummarizeCurves(curves, metrics);
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << XmlEscape(title) << "</text>\n";

  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const std::string& name = metrics[m];
    const double ox = static_cast<double>(m % kCols) * kPanelW;
    const double oy = kTop + static_cast<double>(m / kCols) * kPanelH;
    const double x0 = ox + kPad;
    const double x1 = ox + kPanelW - 12.0;
    const double y0 = oy + kPanelH - 30.0;  // bottom
    const double y1 = oy + 24.0;            // top

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::size_t longest = 0;
    for (const auto& c : curves) {
      longest = std::max(longest, c.points.size());
      for (const auto& p : c.points) {
        const double v = MetricValue(p.report, name);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    auto px = [&](double r) { return x0 + r * (x1 - x0); };
    auto py = [&](double v) { return y0 - (v - lo) / (hi - lo) * (y0 - y1); };

    const auto it = summary.find(name);
    const double rho = it != summary.end() ? it->second.mean : 0.0;
    svg << "<text x=\"" << ox + kPanelW / 2 << "\" y=\"" << oy + 16
        << "\" text-anchor=\"middle\" font-size=\"12\">" << XmlEscape(name)
        << " (mean rho " << Fixed(rho, 3) << ")</text>\n";
    svg << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\""
        << y0 - y1 << "\" fill=\"none\" stroke=\"#999\"/>\n";
    svg << "<text x=\"" << x0 - 4 << "\" y=\"" << y1 + 4
        << "\" text-anchor=\"end\" font-size=\"9\">" << Compact(hi) << "</text>\n";
    svg << "<text x=\"" << x0 - 4 << "\" y=\"" << y0
        << "\" text-anchor=\"end\" font-size=\"9\">" << Compact(lo) << "</text>\n";
    for (double tick : {0.0, 0.5, 1.0}) {
      svg << "<text x=\"" << px(tick) << "\" y=\"" << y0 + 12
          << "\" text-anchor=\"middle\" font-size=\"9\">" << Fixed(tick, 1) << "</text>\n";
    }
    svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << y0 + 24
        << "\" text-anchor=\"middle\" font-size=\"9\">r</text>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
      if (curves[c].points.empty()) continue;
      svg << "<polyline fill=\"none\" stroke=\"" << kPalette[c % 10]
          << "\" stroke-opacity=\"0.45\" stroke-width=\"1\" points=\"";
      for (const auto& p : curves[c].points) {
        svg << px(p.r) << "," << py(MetricValue(p.report, name)) << " ";
      }
      svg << "\"/>\n";
    }
    // Mean over the seeds that reached each step.
    svg << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < longest; ++i) {
      double total = 0.0;
      int count = 0;
      double r = 0.0;
      for (const auto& c : curves) {
        if (i < c.points.size()) {
          total += MetricValue(c.points[i].report, name);
          r = c.points[i].r;
          ++count;
        }
      }
      if (count) svg << px(r) << "," << py(total / count) << " ";
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ggeval
