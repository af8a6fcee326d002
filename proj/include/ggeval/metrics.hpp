#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ggeval/graph.hpp"

namespace ggeval {

// Every function takes the reference (real) embeddings first and the
// generated embeddings second; rows are samples.

struct FrechetDiagnostics {
  double clamped = 0.0;  // total magnitude of negative eigenvalues set to 0
  double raw = 0.0;      // value before flooring at 0
};

/// ||mu_t - mu_g||^2 + Tr(C_t + C_g - 2 (C_t C_g)^{1/2}), sample covariances.
/// The trace of the root is taken as sum sqrt(eig(sqrt(C_t) C_g sqrt(C_t))).
double FrechetDistance(const Matrix& real, const Matrix& fake,
                       FrechetDiagnostics* diagnostics = nullptr);

/// Distance from each row to its k-th nearest other row.
Vector KnnRadii(const Matrix& points, int k);

/// Euclidean distances, rows of a against rows of b.
Matrix PairwiseDistances(const Matrix& a, const Matrix& b);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};
PrecisionRecall ComputePrecisionRecall(const Matrix& real, const Matrix& fake, int k);

struct DensityCoverage {
  double density = 0.0;
  double coverage = 0.0;
};
DensityCoverage ComputeDensityCoverage(const Matrix& real, const Matrix& fake, int k);

enum class KernelKind { kLinear, kRbf, kPolynomial };

struct Kernel {
  KernelKind kind = KernelKind::kLinear;
  double sigma = 1.0;  // kRbf: exp(-|x - y|^2 / (2 sigma^2))
  int degree = 3;      // kPolynomial: (x.y + 1)^degree

  static Kernel Linear() { return {KernelKind::kLinear, 1.0, 3}; }
  static Kernel Rbf(double sigma) { return {KernelKind::kRbf, sigma, 3}; }
  static Kernel Polynomial(int degree) { return {KernelKind::kPolynomial, 1.0, degree}; }
};

Matrix KernelMatrix(const Matrix& a, const Matrix& b, const Kernel& kernel);

enum class MmdEstimator {
  kUnbiased,      // within-set i != j sums over M(M-1), N(N-1)
  kSquaredCount,  // within-set i != j sums over M^2, N^2
};

/// Squared MMD; throws DegenerateSet when either set has fewer than 2 rows.
double Mmd(const Matrix& real, const Matrix& fake, const Kernel& kernel,
           MmdEstimator estimator = MmdEstimator::kUnbiased);

/// Median of all pairwise distances within the pooled rows of a and b.
double MedianHeuristicSigma(const Matrix& a, const Matrix& b);
/// Median pairwise distance among the rows of one set (1 when all coincide).
double MedianHeuristicSigma(const Matrix& points);

/// Harmonic mean, 0 when both arguments are 0.
double F1(double x, double y);

struct MetricSettings {
  int k = 5;
  std::optional<double> rbf_sigma;  // median heuristic when unset
  bool polynomial = false;
  int polynomial_degree = 3;
  MmdEstimator estimator = MmdEstimator::kUnbiased;
};

struct MetricReport {
  double precision = 0.0;
  double recall = 0.0;
  double density = 0.0;
  double coverage = 0.0;
  double f1_pr = 0.0;
  double f1_dc = 0.0;
  double fd = 0.0;
  double mmd_linear = 0.0;
  double mmd_rbf = 0.0;
  std::optional<double> mmd_poly;
  int k = 5;
  double rbf_sigma = 1.0;

  nlohmann::json ToJson() const;
  static MetricReport FromJson(const nlohmann::json& j);
};

/// Names of the scalar metric fields in report order (mmd_poly last, only
/// when requested).
std::vector<std::string> MetricNames(bool with_polynomial = false);
/// Value of a metric by name; throws InvalidArgument for unknown names.
double MetricValue(const MetricReport& report, const std::string& name);

MetricReport Evaluate(const Matrix& real, const Matrix& fake, const MetricSettings& settings = {});

}  // namespace ggeval
