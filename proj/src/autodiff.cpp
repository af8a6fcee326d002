#include "ggeval/autodiff.hpp"

#include "ggeval/error.hpp"

namespace ggeval {

Tape::Var Tape::Push(Matrix value, bool needs_grad,
                     std::function<void(Tape&, const Matrix&)> backward) {
  nodes_.push_back({std::move(value), Matrix(), needs_grad, std::move(backward)});
  return static_cast<Var>(nodes_.size() - 1);
}

void Tape::Accumulate(Var v, const Matrix& g) {
  Node& node = nodes_[v];
  if (!node.needs_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

Tape::Var Tape::Parameter(Matrix value) { return Push(std::move(value), true, nullptr); }

Tape::Var Tape::Constant(Matrix value) { return Push(std::move(value), false, nullptr); }

Tape::Var Tape::MatMul(Var a, Var b) {
  if (value(a).cols() != value(b).rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "MatMul inner dimensions differ");
  }
  Matrix out = value(a) * value(b);
  const bool needs = NeedsGrad(a) || NeedsGrad(b);
  return Push(std::move(out), needs, [a, b](Tape& t, const Matrix& g) {
    if (t.NeedsGrad(a)) t.Accumulate(a, g * t.value(b).transpose());
    if (t.NeedsGrad(b)) t.Accumulate(b, t.value(a).transpose() * g);
  });
}

Tape::Var Tape::AddRowBias(Var x, Var bias) {
  if (value(bias).rows() != 1 || value(bias).cols() != value(x).cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "bias must be 1 x cols");
  }
  Matrix out = value(x).rowwise() + value(bias).row(0);
  const bool needs = NeedsGrad(x) || NeedsGrad(bias);
  return Push(std::move(out), needs, [x, bias](Tape& t, const Matrix& g) {
    if (t.NeedsGrad(x)) t.Accumulate(x, g);
    if (t.NeedsGrad(bias)) t.Accumulate(bias, g.colwise().sum());
  });
}

Tape::Var Tape::Relu(Var x) {
  Matrix out = value(x).cwiseMax(0.0);
  return Push(std::move(out), NeedsGrad(x), [x](Tape& t, const Matrix& g) {
    const Matrix& in = t.value(x);
    t.Accumulate(x, Matrix((in.array() > 0.0).cast<double>() * g.array()));
  });
}

Tape::Var Tape::SparseLeftMultiply(const SparseMatrix& propagation, Var h) {
  Matrix out = propagation * value(h);
  // The operator is copied so the tape owns everything it needs.
  return Push(std::move(out), NeedsGrad(h),
              [h, op = SparseMatrix(propagation)](Tape& t, const Matrix& g) {
                t.Accumulate(h, op.transpose() * g);
              });
}

Tape::Var Tape::BatchNorm(Var x, Var gamma, Var beta, double eps, NormStatistics* stats) {
  const Matrix& in = value(x);
  const auto rows = static_cast<double>(in.rows());
  if (in.rows() == 0) throw Error(ErrorCode::kDegenerateBatch, "batch norm over zero rows");
  const Eigen::RowVectorXd mean = in.colwise().mean();
  const Matrix centered = in.rowwise() - mean;
  const Eigen::RowVectorXd var = centered.array().square().colwise().sum() / rows;
  const Eigen::RowVectorXd inv_std = (var.array() + eps).rsqrt();
  Matrix normalized = centered.array().rowwise() * inv_std.array();
  Matrix out = (normalized.array().rowwise() * value(gamma).row(0).array()).rowwise() +
               value(beta).row(0).array();
  if (stats) {
    stats->mean = mean;
    stats->variance = var;
  }
  const bool needs = NeedsGrad(x) || NeedsGrad(gamma) || NeedsGrad(beta);
  return Push(std::move(out), needs,
              [x, gamma, beta, normalized, inv_std](Tape& t, const Matrix& g) {
                if (t.NeedsGrad(beta)) t.Accumulate(beta, g.colwise().sum());
                if (t.NeedsGrad(gamma)) {
                  t.Accumulate(gamma, (g.array() * normalized.array()).colwise().sum().matrix());
                }
                if (t.NeedsGrad(x)) {
                  const auto n = static_cast<double>(g.rows());
                  const Matrix g_hat = g.array().rowwise() * t.value(gamma).row(0).array();
                  const Eigen::RowVectorXd mean_g = g_hat.colwise().mean();
                  const Eigen::RowVectorXd mean_gx =
                      (g_hat.array() * normalized.array()).colwise().sum() / n;
                  Matrix dx = ((g_hat.rowwise() - mean_g).array() -
                               normalized.array().rowwise() * mean_gx.array())
                                  .rowwise() *
                              inv_std.array();
                  t.Accumulate(x, dx);
                }
              });
}

Tape::Var Tape::FixedNorm(Var x, const Matrix& mean, const Matrix& variance, Var gamma,
                          Var beta, double eps) {
  const Eigen::RowVectorXd inv_std = (variance.row(0).array() + eps).rsqrt();
  Matrix normalized = (value(x).rowwise() - mean.row(0)).array().rowwise() * inv_std.array();
  Matrix out = (normalized.array().rowwise() * value(gamma).row(0).array()).rowwise() +
               value(beta).row(0).array();
  const bool needs = NeedsGrad(x) || NeedsGrad(gamma) || NeedsGrad(beta);
  return Push(std::move(out), needs,
              [x, gamma, beta, normalized, inv_std](Tape& t, const Matrix& g) {
                if (t.NeedsGrad(beta)) t.Accumulate(beta, g.colwise().sum());
                if (t.NeedsGrad(gamma)) {
                  t.Accumulate(gamma, (g.array() * normalized.array()).colwise().sum().matrix());
                }
                if (t.NeedsGrad(x)) {
                  Matrix dx = (g.array().rowwise() * t.value(gamma).row(0).array()).rowwise() *
                              inv_std.array();
                  t.Accumulate(x, dx);
                }
              });
}

Tape::Var Tape::SegmentSum(Var h, const std::vector<Eigen::Index>& offsets) {
  const Matrix& in = value(h);
  const auto segments = static_cast<Eigen::Index>(offsets.size()) - 1;
  Matrix out = Matrix::Zero(segments, in.cols());
  for (Eigen::Index s = 0; s < segments; ++s) {
    const Eigen::Index begin = offsets[s];
    const Eigen::Index count = offsets[s + 1] - begin;
    if (count > 0) out.row(s) = in.middleRows(begin, count).colwise().sum();
  }
  return Push(std::move(out), NeedsGrad(h), [h, offsets](Tape& t, const Matrix& g) {
    Matrix dh(t.value(h).rows(), g.cols());
    for (Eigen::Index s = 0; s + 1 < static_cast<Eigen::Index>(offsets.size()); ++s) {
      for (Eigen::Index r = offsets[s]; r < offsets[s + 1]; ++r) dh.row(r) = g.row(s);
    }
    t.Accumulate(h, dh);
  });
}

Tape::Var Tape::ConcatCols(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "ConcatCols of nothing");
  const Eigen::Index rows = value(parts.front()).rows();
  Eigen::Index cols = 0;
  bool needs = false;
  for (Var p : parts) {
    if (value(p).rows() != rows) throw Error(ErrorCode::kDimensionMismatch, "ConcatCols rows differ");
    cols += value(p).cols();
    needs = needs || NeedsGrad(p);
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  return Push(std::move(out), needs, [parts](Tape& t, const Matrix& g) {
    Eigen::Index offset = 0;
    for (Var p : parts) {
      const Eigen::Index width = t.value(p).cols();
      if (t.NeedsGrad(p)) t.Accumulate(p, g.middleCols(offset, width));
      offset += width;
    }
  });
}

Tape::Var Tape::Custom(Matrix value, std::vector<Var> inputs, std::vector<Matrix> grads) {
  if (value.size() != 1) throw Error(ErrorCode::kInvalidArgument, "Custom nodes are scalar");
  bool needs = false;
  for (Var v : inputs) needs = needs || NeedsGrad(v);
  return Push(std::move(value), needs,
              [inputs = std::move(inputs), grads = std::move(grads)](Tape& t, const Matrix& g) {
                const double scale = g(0, 0);
                for (std::size_t i = 0; i < inputs.size(); ++i) {
                  if (t.NeedsGrad(inputs[i])) t.Accumulate(inputs[i], grads[i] * scale);
                }
              });
}

void Tape::Backward(Var scalar) {
  if (value(scalar).size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "Backward needs a scalar node");
  }
  nodes_[scalar].grad = Matrix::Ones(1, 1);
  for (Var v = scalar; v >= 0; --v) {
    Node& node = nodes_[v];
    if (!node.backward || node.grad.size() == 0) continue;
    // Copy: the closure may append to other nodes' gradients but never grows
    // the tape, so the reference stays valid.
    const Matrix g = node.grad;
    node.backward(*this, g);
  }
}

}  // namespace ggeval
