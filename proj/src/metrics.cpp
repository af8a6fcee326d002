#include "ggeval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ggeval/error.hpp"
#include "ggeval/linalg.hpp"

namespace ggeval {

namespace {

void RequireSameDim(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding dimensions differ: " +
                                                   std::to_string(a.cols()) + " vs " +
                                                   std::to_string(b.cols()));
  }
}

void RequireMoreRowsThanK(const Matrix& m, int k, const char* which) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (m.rows() <= k) {
    throw Error(ErrorCode::kKTooLarge, std::string(which) + " set has " +
                                           std::to_string(m.rows()) + " rows, need more than k=" +
                                           std::to_string(k));
  }
}

Matrix Covariance(const Matrix& x) {
  const Matrix centered = x.rowwise() - x.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

// Fraction of rows of `query` lying inside at least one ball (center row of
// `centers`, radius radii[i]).
double FractionInsideAnyBall(const Matrix& query_to_centers, const Vector& radii) {
  if (query_to_centers.rows() == 0) return 0.0;
  Eigen::Index inside = 0;
  for (Eigen::Index q = 0; q < query_to_centers.rows(); ++q) {
    for (Eigen::Index c = 0; c < query_to_centers.cols(); ++c) {
      if (query_to_centers(q, c) <= radii(c)) {
        ++inside;
        break;
      }
    }
  }
  return static_cast<double>(inside) / static_cast<double>(query_to_centers.rows());
}

}  // namespace

double FrechetDistance(const Matrix& real, const Matrix& fake, FrechetDiagnostics* diagnostics) {
  RequireSameDim(real, fake);
  if (real.rows() < 2 || fake.rows() < 2) {
    throw Error(ErrorCode::kTooFewRows, "Frechet distance needs at least 2 rows per set");
  }
  const Vector mean_diff = (real.colwise().mean() - fake.colwise().mean()).transpose();
  const Matrix c_real = Covariance(real);
  const Matrix c_fake = Covariance(fake);
  const Matrix root = PsdSqrt(c_real);
  Matrix s = root * c_fake * root;
  s = 0.5 * (s + s.transpose());
  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly).eigenvalues();
  double trace_root = 0.0;
  double clamped = 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (eig(i) > 0.0) {
      trace_root += std::sqrt(eig(i));
    } else {
      clamped += -eig(i);
    }
  }
  const double raw = mean_diff.squaredNorm() + c_real.trace() + c_fake.trace() - 2.0 * trace_root;
  if (diagnostics) {
    diagnostics->clamped = clamped;
    diagnostics->raw = raw;
  }
  return std::max(raw, 0.0);
}

Matrix PairwiseDistances(const Matrix& a, const Matrix& b) {
  RequireSameDim(a, b);
  Matrix d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).norm();
  }
  return d;
}

Vector KnnRadii(const Matrix& points, int k) {
  RequireMoreRowsThanK(points, k, "point");
  const Matrix d = PairwiseDistances(points, points);
  Vector radii(points.rows());
  std::vector<double> others;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    others.clear();
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
      if (j != i) others.push_back(d(i, j));
    }
    std::nth_element(others.begin(), others.begin() + (k - 1), others.end());
    radii(i) = others[static_cast<std::size_t>(k - 1)];
  }
  return radii;
}

PrecisionRecall ComputePrecisionRecall(const Matrix& real, const Matrix& fake, int k) {
  RequireSameDim(real, fake);
  RequireMoreRowsThanK(real, k, "reference");
  RequireMoreRowsThanK(fake, k, "generated");
  const Vector real_radii = KnnRadii(real, k);
  const Vector fake_radii = KnnRadii(fake, k);
  const Matrix fake_to_real = PairwiseDistances(fake, real);
  PrecisionRecall out;
  out.precision = FractionInsideAnyBall(fake_to_real, real_radii);
  out.recall = FractionInsideAnyBall(fake_to_real.transpose(), fake_radii);
  return out;
}

DensityCoverage ComputeDensityCoverage(const Matrix& real, const Matrix& fake, int k) {
  RequireSameDim(real, fake);
  RequireMoreRowsThanK(real, k, "reference");
  RequireMoreRowsThanK(fake, k, "generated");
  const Vector radii = KnnRadii(real, k);
  const Matrix real_to_fake = PairwiseDistances(real, fake);
  double hits = 0.0;
  Eigen::Index covered = 0;
  for (Eigen::Index i = 0; i < real.rows(); ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < fake.rows(); ++j) {
      if (real_to_fake(i, j) <= radii(i)) {
        hits += 1.0;
        any = true;
      }
    }
    if (any) ++covered;
  }
  DensityCoverage out;
  out.density = hits / (static_cast<double>(k) * static_cast<double>(fake.rows()));
  out.coverage = static_cast<double>(covered) / static_cast<double>(real.rows());
  return out;
}

Matrix KernelMatrix(const Matrix& a, const Matrix& b, const Kernel& kernel) {
  RequireSameDim(a, b);
  switch (kernel.kind) {
    case KernelKind::kLinear:
      return a * b.transpose();
    case KernelKind::kPolynomial:
      return (a * b.transpose()).array().unaryExpr([&](double v) {
        return std::pow(v + 1.0, kernel.degree);
      });
    case KernelKind::kRbf: {
      if (!(kernel.sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "RBF sigma must be positive");
      const Matrix d = PairwiseDistances(a, b);
      const double denom = 2.0 * kernel.sigma * kernel.sigma;
      return (-d.array().square() / denom).exp();
    }
  }
  return {};
}

double Mmd(const Matrix& real, const Matrix& fake, const Kernel& kernel, MmdEstimator estimator) {
  RequireSameDim(real, fake);
  if (real.rows() < 2 || fake.rows() < 2) {
    throw Error(ErrorCode::kDegenerateSet, "MMD needs at least 2 samples per set");
  }
  const auto m = static_cast<double>(real.rows());
  const auto n = static_cast<double>(fake.rows());
  const Matrix kxx = KernelMatrix(real, real, kernel);
  const Matrix kyy = KernelMatrix(fake, fake, kernel);
  const Matrix kxy = KernelMatrix(real, fake, kernel);
  const double off_x = kxx.sum() - kxx.trace();
  const double off_y = kyy.sum() - kyy.trace();
  const double within_x = estimator == MmdEstimator::kUnbiased ? m * (m - 1.0) : m * m;
  const double within_y = estimator == MmdEstimator::kUnbiased ? n * (n - 1.0) : n * n;
  return off_x / within_x + off_y / within_y - 2.0 * kxy.sum() / (m * n);
}

double MedianHeuristicSigma(const Matrix& a, const Matrix& b) {
  RequireSameDim(a, b);
  Matrix pooled(a.rows() + b.rows(), a.cols());
  pooled << a, b;
  return MedianHeuristicSigma(pooled);
}

double MedianHeuristicSigma(const Matrix& points) {
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(points.rows() * (points.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      distances.push_back((points.row(i) - points.row(j)).norm());
    }
  }
  if (distances.empty()) return 1.0;
  const std::size_t mid = distances.size() / 2;
  std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(mid),
                   distances.end());
  double median = distances[mid];
  if (distances.size() % 2 == 0) {
    const double lower = *std::max_element(distances.begin(),
                                           distances.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (median + lower);
  }
  // All points coincide: any bandwidth gives the same MMD.
  return median > 0.0 ? median : 1.0;
}

double F1(double x, double y) {
  if (x + y <= 0.0) return 0.0;
  return 2.0 * x * y / (x + y);
}

nlohmann::json MetricReport::ToJson() const {
  nlohmann::json j = {{"precision", precision}, {"recall", recall},   {"density", density},
                      {"coverage", coverage},   {"f1_pr", f1_pr},     {"f1_dc", f1_dc},
                      {"fd", fd},               {"mmd_linear", mmd_linear},
                      {"mmd_rbf", mmd_rbf},     {"k", k},             {"rbf_sigma", rbf_sigma}};
  if (mmd_poly) j["mmd_poly"] = *mmd_poly;
  return j;
}

MetricReport MetricReport::FromJson(const nlohmann::json& j) {
  MetricReport r;
  try {
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.density = j.at("density").get<double>();
    r.coverage = j.at("coverage").get<double>();
    r.f1_pr = j.at("f1_pr").get<double>();
    r.f1_dc = j.at("f1_dc").get<double>();
    r.fd = j.at("fd").get<double>();
    r.mmd_linear = j.at("mmd_linear").get<double>();
    r.mmd_rbf = j.at("mmd_rbf").get<double>();
    r.k = j.at("k").get<int>();
    r.rbf_sigma = j.at("rbf_sigma").get<double>();
    if (j.contains("mmd_poly")) r.mmd_poly = j.at("mmd_poly").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("metric report: ") + e.what());
  }
  return r;
}

std::vector<std::string> MetricNames(bool with_polynomial) {
  std::vector<std::string> names = {"precision", "recall", "density",    "coverage", "f1_pr",
                                    "f1_dc",     "fd",     "mmd_linear", "mmd_rbf"};
  if (with_polynomial) names.push_back("mmd_poly");
  return names;
}

double MetricValue(const MetricReport& report, const std::string& name) {
  if (name == "precision") return report.precision;
  if (name == "recall") return report.recall;
  if (name == "density") return report.density;
  if (name == "coverage") return report.coverage;
  if (name == "f1_pr") return report.f1_pr;
  if (name == "f1_dc") return report.f1_dc;
  if (name == "fd") return report.fd;
  if (name == "mmd_linear") return report.mmd_linear;
  if (name == "mmd_rbf") return report.mmd_rbf;
  if (name == "mmd_poly") {
    if (!report.mmd_poly) throw Error(ErrorCode::kInvalidArgument, "report has no mmd_poly");
    return *report.mmd_poly;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric: " + name);
}

MetricReport Evaluate(const Matrix& real, const Matrix& fake, const MetricSettings& settings) {
  RequireSameDim(real, fake);
  MetricReport r;
  r.k = settings.k;
  const PrecisionRecall pr = ComputePrecisionRecall(real, fake, settings.k);
  const DensityCoverage dc = ComputeDensityCoverage(real, fake, settings.k);
  r.precision = pr.precision;
  r.recall = pr.recall;
  r.density = dc.density;
  r.coverage = dc.coverage;
  r.f1_pr = F1(pr.precision, pr.recall);
  r.f1_dc = F1(dc.density, dc.coverage);
  r.fd = FrechetDistance(real, fake);
  r.rbf_sigma = settings.rbf_sigma ? *settings.rbf_sigma : MedianHeuristicSigma(real, fake);
  r.mmd_linear = Mmd(real, fake, Kernel::Linear(), settings.estimator);
  r.mmd_rbf = Mmd(real, fake, Kernel::Rbf(r.rbf_sigma), settings.estimator);
  if (settings.polynomial) {
    r.mmd_poly = Mmd(real, fake, Kernel::Polynomial(settings.polynomial_degree), settings.estimator);
  }
  return r;
}

}  // namespace ggeval
