#include "ggeval/distinguishability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ggeval/error.hpp"
#include "ggeval/generators.hpp"
#include "ggeval/local_features.hpp"

namespace ggeval {

namespace {

template <typename T>
std::string Join(const std::vector<T>& values) {
  std::ostringstream s;
  for (std::size_t i = 0; i < values.size(); ++i) s << (i ? " " : "") << values[i];
  return s.str();
}

std::vector<double> SortedClustering(const Graph& g) {
  std::vector<double> out;
  for (NodeId v = 0; v < g.num_nodes(); ++v) out.push_back(ClusteringCoefficient(g, v));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> SortedFourNodeClustering(const Graph& g) {
  std::vector<double> out;
  for (NodeId v = 0; v < g.num_nodes(); ++v) out.push_back(FourNodeClustering(g, v));
  std::sort(out.begin(), out.end());
  return out;
}

template <typename T>
StatisticCheck CompareMultisets(std::string name, const std::vector<T>& x, const std::vector<T>& y) {
  StatisticCheck check{std::move(name), x == y, ""};
  if (!check.equal) check.detail = "[" + Join(x) + "] vs [" + Join(y) + "]";
  return check;
}

}  // namespace

std::string CyclePairQuad::ToString() const {
  return std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + "," +
         std::to_string(d);
}

void RequireCyclePairHypothesis(const CyclePairQuad& q) {
  if (!(4 < q.a && q.a < q.c && q.c < q.d && q.d < q.b)) {
    throw Error(ErrorCode::kHypothesisViolation,
                "need 4 < a < c < d < b, got (" + q.ToString() + ")");
  }
  if (q.a + q.b != q.c + q.d) {
    throw Error(ErrorCode::kHypothesisViolation,
                "need a + b = c + d, got (" + q.ToString() + ")");
  }
}

bool LocalEquivalenceReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const StatisticCheck& c) { return c.equal; });
}

LocalEquivalenceReport VerifyLocalEquivalence(const CyclePairQuad& q) {
  RequireCyclePairHypothesis(q);
  const Graph g1 = GenerateCyclePair(q.a, q.b);
  const Graph g2 = GenerateCyclePair(q.c, q.d);
  LocalEquivalenceReport report;
  report.quad = q;

  std::vector<int> deg1 = Degrees(g1);
  std::vector<int> deg2 = Degrees(g2);
  std::sort(deg1.begin(), deg1.end());
  std::sort(deg2.begin(), deg2.end());
  report.checks.push_back(CompareMultisets("degree multiset", deg1, deg2));

  const std::vector<double> c1 = SortedClustering(g1);
  const std::vector<double> c2 = SortedClustering(g2);
  StatisticCheck clustering = CompareMultisets("clustering coefficient", c1, c2);
  const bool all_zero = std::all_of(c1.begin(), c1.end(), [](double v) { return v == 0.0; }) &&
                        std::all_of(c2.begin(), c2.end(), [](double v) { return v == 0.0; });
  if (!all_zero) {
    clustering.equal = false;
    if (clustering.detail.empty()) clustering.detail = "nonzero clustering coefficient";
  }
  report.checks.push_back(clustering);

  report.checks.push_back(CompareMultisets("4-node clustering", SortedFourNodeClustering(g1),
                                           SortedFourNodeClustering(g2)));

  const OrbitCensus o1 = OrbitCensus4(g1);
  const OrbitCensus o2 = OrbitCensus4(g2);
  StatisticCheck census{"4-node census", o1 == o2, ""};
  for (std::size_t i = 0; i < kNumFourNodePatterns && !census.equal; ++i) {
    if (o1.counts[i] != o2.counts[i]) {
      census.detail = std::string("pattern ") +
                      PatternLetter(static_cast<FourNodePattern>(i)) + ": " +
                      std::to_string(o1.counts[i]) + " vs " + std::to_string(o2.counts[i]);
      break;
    }
  }
  report.checks.push_back(census);
  return report;
}

WLSeparationReport VerifyWLSeparation(const Graph& g1, const Graph& g2, int max_iter) {
  WLSeparationReport report;
  report.max_iter = max_iter;
  report.iteration = WLFirstSeparation(g1, g2, max_iter);
  report.separated = report.iteration.has_value();
  return report;
}

WLSeparationReport VerifyWLSeparation(const CyclePairQuad& q) {
  RequireCyclePairHypothesis(q);
  return VerifyWLSeparation(GenerateCyclePair(q.a, q.b), GenerateCyclePair(q.c, q.d), q.a + q.b);
}

GnnComparison CompareUnderRandomEncoders(const Graph& g1, const Graph& g2,
                                         const EncoderConfig& config, int inits,
                                         std::uint64_t seed) {
  if (inits < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one initialization");
  const GraphSet first{"first", {g1}};
  const GraphSet second{"second", {g2}};
  GnnComparison out;
  for (int i = 0; i < inits; ++i) {
    const EncoderParams params =
        InitEncoder(config, Rng::DeriveSeed(seed, {static_cast<std::uint64_t>(i)}));
    const auto [e1, e2] = EmbedJoint(params, first, second);
    const double diff = (e1 - e2).cwiseAbs().maxCoeff();
    out.per_init.push_back(diff);
    out.max_difference = std::max(out.max_difference, diff);
  }
  out.local_metrics_differ = SortedClustering(g1) != SortedClustering(g2);
  return out;
}

bool VerifyGnnCeiling(const Graph& g1, const Graph& g2, const EncoderConfig& config, int inits,
                      std::uint64_t seed, double tolerance) {
  const GnnComparison c = CompareUnderRandomEncoders(g1, g2, config, inits, seed);
  return c.max_difference < tolerance && c.local_metrics_differ;
}

CyclePairReport VerifyCyclePairs(const CyclePairQuad& q) {
  return {VerifyLocalEquivalence(q), VerifyWLSeparation(q)};
}

std::string FormatCyclePairTable(const std::vector<CyclePairReport>& reports) {
  std::ostringstream out;
  out << "quad        degrees  clustering  c4     census  wl_sep  iter  result\n";
  for (const CyclePairReport& r : reports) {
    auto mark = [&](const std::string& name) {
      for (const auto& c : r.local.checks) {
        if (c.statistic == name) return c.equal ? "equal" : "DIFF";
      }
      return "n/a";
    };
    std::string quad = r.local.quad.ToString();
    quad.resize(std::max<std::size_t>(quad.size(), 11), ' ');
    char line[160];
    std::snprintf(line, sizeof(line), "%s %-8s %-11s %-6s %-7s %-7s %-5s %s\n", quad.c_str(),
                  mark("degree multiset"), mark("clustering coefficient"),
                  mark("4-node clustering"), mark("4-node census"),
                  r.wl.separated ? "yes" : "no",
                  r.wl.iteration ? std::to_string(*r.wl.iteration).c_str() : "-",
                  r.passed() ? "PASS" : "FAIL");
    out << line;
    for (const auto& c : r.local.checks) {
      if (!c.equal) out << "  " << c.statistic << ": " << c.detail << "\n";
    }
  }
  return out.str();
}

}  // namespace ggeval
