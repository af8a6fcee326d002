#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ggeval/encoder.hpp"
#include "ggeval/graph.hpp"

namespace ggeval {

/// Parameters (a, b, c, d) of a pair of cycle pairs C_{a,b} and C_{c,d}.
struct CyclePairQuad {
  int a = 0;
  int b = 0;
  int c = 0;
  int d = 0;

  std::string ToString() const;
};

/// Throws HypothesisViolation unless 4 < a < c < d < b and a + b = c + d.
void RequireCyclePairHypothesis(const CyclePairQuad& q);

struct StatisticCheck {
  std::string statistic;
  bool equal = false;
  std::string detail;  // first difference when unequal
};

struct LocalEquivalenceReport {
  CyclePairQuad quad;
  std::vector<StatisticCheck> checks;
  bool passed() const;
};

/// Compares C_{a,b} and C_{c,d} on local statistics: degree multisets,
/// clustering coefficients (which must also all be zero), four-node
/// clustering coefficients, and the full 4-node census, all exactly.
LocalEquivalenceReport VerifyLocalEquivalence(const CyclePairQuad& q);

struct WLSeparationReport {
  bool separated = false;
  std::optional<int> iteration;  // first iteration whose histograms differ
  int max_iter = 0;
};

/// Runs joint 1-WL refinement on C_{a,b} and C_{c,d} for up to a + b rounds.
WLSeparationReport VerifyWLSeparation(const CyclePairQuad& q);
WLSeparationReport VerifyWLSeparation(const Graph& g1, const Graph& g2, int max_iter);

struct GnnComparison {
  std::vector<double> per_init;  // max |embedding difference| per init
  double max_difference = 0.0;
  bool local_metrics_differ = false;  // clustering coefficient multisets
};

/// Embeds g1 and g2 jointly under `inits` random encoders (seeds derived from
/// `seed`) and records the largest embedding difference of each.
GnnComparison CompareUnderRandomEncoders(const Graph& g1, const Graph& g2,
                                         const EncoderConfig& config, int inits = 20,
                                         std::uint64_t seed = 0);

/// True when every init gives embeddings within `tolerance` while the
/// clustering coefficients still tell the graphs apart.
bool VerifyGnnCeiling(const Graph& g1, const Graph& g2, const EncoderConfig& config,
                      int inits = 20, std::uint64_t seed = 0, double tolerance = 1e-7);

struct CyclePairReport {
  LocalEquivalenceReport local;
  WLSeparationReport wl;
  bool passed() const { return local.passed() && wl.separated; }
};

/// Local equivalence together with WL separation for one quadruple.
CyclePairReport VerifyCyclePairs(const CyclePairQuad& q);

/// Plain-text pass/fail table, one row per quadruple.
std::string FormatCyclePairTable(const std::vector<CyclePairReport>& reports);

}  // namespace ggeval
