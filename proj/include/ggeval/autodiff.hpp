#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <vector>

#include "ggeval/graph.hpp"

namespace ggeval {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Minimal reverse-mode automatic differentiation over dense matrices.
///
/// Every op appends a node holding its value and a closure that pushes the
/// node's gradient to its inputs. Backward() seeds a scalar (1x1) node and
/// walks the tape in reverse. Node handles are plain indices; values live in
/// the tape and are only valid while it is alive.
class Tape {
 public:
  using Var = int;

  /// A value that receives a gradient (a parameter).
  Var Parameter(Matrix value);
  /// A value that does not (inputs, fixed statistics).
  Var Constant(Matrix value);

  const Matrix& value(Var v) const { return nodes_[v].value; }
  const Matrix& grad(Var v) const { return nodes_[v].grad; }
  std::size_t size() const { return nodes_.size(); }

  Var MatMul(Var a, Var b);
  /// x + 1 * bias, with bias a 1 x cols row.
  Var AddRowBias(Var x, Var bias);
  Var Relu(Var x);
  /// propagation * h, with a constant sparse propagation operator.
  Var SparseLeftMultiply(const SparseMatrix& propagation, Var h);

  struct NormStatistics {
    Matrix mean;      // 1 x cols
    Matrix variance;  // 1 x cols, biased
  };
  /// Column-wise batch normalization using the statistics of x itself:
  /// gamma * (x - mean) / sqrt(var + eps) + beta. The batch statistics are
  /// written to `stats` when non-null.
  Var BatchNorm(Var x, Var gamma, Var beta, double eps, NormStatistics* stats = nullptr);
  /// Same transform with fixed (non-differentiated) statistics.
  Var FixedNorm(Var x, const Matrix& mean, const Matrix& variance, Var gamma, Var beta,
                double eps);

  /// Row-block sums: output row i sums rows [offsets[i], offsets[i+1]).
  Var SegmentSum(Var h, const std::vector<Eigen::Index>& offsets);
  Var ConcatCols(const std::vector<Var>& parts);

  /// Attaches an externally computed scalar with known input gradients, e.g. a
  /// fused loss. `grads[i]` is d(value)/d(inputs[i]).
  Var Custom(Matrix value, std::vector<Var> inputs, std::vector<Matrix> grads);

  /// Reverse sweep from a 1x1 node. Gradients accumulate; call once per tape.
  void Backward(Var scalar);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    std::function<void(Tape&, const Matrix&)> backward;
  };

  Var Push(Matrix value, bool needs_grad, std::function<void(Tape&, const Matrix&)> backward);
  bool NeedsGrad(Var v) const { return nodes_[v].needs_grad; }
  void Accumulate(Var v, const Matrix& g);

  std::vector<Node> nodes_;
};

}  // namespace ggeval
