#include "ggeval/linalg.hpp"

#include <cmath>

#include "ggeval/error.hpp"

namespace ggeval {

double SpectralNorm(const Matrix& w) {
  if (w.size() == 0) return 0.0;
  if (!w.allFinite()) throw Error(ErrorCode::kInvalidArgument, "spectral norm of non-finite matrix");
  // Work on the smaller Gram matrix.
  const Matrix gram = w.rows() >= w.cols() ? Matrix(w.transpose() * w) : Matrix(w * w.transpose());
  const double scale = gram.norm();
  if (scale == 0.0) return 0.0;

  Matrix power = gram / scale;
  for (int s = 0; s < 40; ++s) {
    Matrix next = power * power;
    const double norm = next.norm();
    if (norm == 0.0) break;
    power = next / norm;
  }
  Eigen::Index best = 0;
  power.colwise().norm().maxCoeff(&best);
  Vector v = power.col(best);
  if (v.norm() == 0.0) v = Vector::Ones(gram.cols());
  v.normalize();
  for (int it = 0; it < 8; ++it) {
    Vector next = gram * v;
    const double norm = next.norm();
    if (norm == 0.0) break;
    v = next / norm;
  }
  const double rayleigh = v.dot(gram * v);
  return std::sqrt(std::max(rayleigh, 0.0));
}

Matrix RandomOrthogonal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const Eigen::Index tall = std::max(rows, cols);
  const Eigen::Index narrow = std::min(rows, cols);
  Matrix gaussian(tall, narrow);
  for (Eigen::Index c = 0; c < narrow; ++c) {
    for (Eigen::Index r = 0; r < tall; ++r) gaussian(r, c) = rng.Normal();
  }
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  Matrix q = qr.householderQ() * Matrix::Identity(tall, narrow);
  const Matrix r = qr.matrixQR().topRows(narrow).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < narrow; ++c) {
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  }
  if (rows < cols) return q.transpose();
  return q;
}

Matrix PsdSqrt(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric);
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace ggeval
