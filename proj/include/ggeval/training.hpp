#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ggeval/autodiff.hpp"
#include "ggeval/encoder.hpp"
#include "ggeval/graph.hpp"
#include "ggeval/rng.hpp"

namespace ggeval {

struct Augmentation {
  enum class Kind { kNodeDrop, kEdgeDrop, kSubgraphWalk, kAttributeMask, kEdgeAdd };
  Kind kind = Kind::kNodeDrop;
  double p = 0.1;        // drop / mask / add probability
  int walk_length = 10;  // kSubgraphWalk only

  static Augmentation NodeDrop(double p) { return {Kind::kNodeDrop, p, 0}; }
  static Augmentation EdgeDrop(double p) { return {Kind::kEdgeDrop, p, 0}; }
  static Augmentation SubgraphWalk(int length) { return {Kind::kSubgraphWalk, 0.0, length}; }
  static Augmentation AttributeMask(double p) { return {Kind::kAttributeMask, p, 0}; }
  static Augmentation EdgeAdd(double p) { return {Kind::kEdgeAdd, p, 0}; }
};

std::string AugmentationName(const Augmentation& aug);

/// Returns a randomized view of g. Node features (when attached) follow their
/// nodes and are never recomputed.
///
///  - NodeDrop: each node removed independently with probability p;
///    survivors keep their relative order.
///  - EdgeDrop: each edge removed independently with probability p.
///  - SubgraphWalk: subgraph induced by the nodes a random walk of
///    walk_length steps from a uniform start visits (ascending order).
///  - AttributeMask: each node's feature row zeroed with probability p.
///  - EdgeAdd: round(p * |E|) uniformly chosen non-edges added.
///
/// A view with no nodes is redrawn once; if that is empty too, g is returned.
Graph Augment(const Graph& g, const Augmentation& aug, Rng& rng);

struct NtXentResult {
  double loss = 0.0;
  Matrix grad_z1;
  Matrix grad_z2;
};

/// NT-Xent over N positive pairs (rows of z1 and z2). The 2N rows are
/// L2-normalized; anchor a's positive is its counterpart in the other view and
/// its denominator runs over all 2N - 1 other rows (other-view and same-view
/// negatives plus the positive):
///
///   loss = 1/(2N) sum_a -log( exp(s(a, pos(a)) / tau) / sum_{k != a} exp(s(a, k) / tau) )
///
/// with s the cosine similarity. Throws DegenerateBatch for N < 2.
NtXentResult NtXentLoss(const Matrix& z1, const Matrix& z2, double tau);

/// Loss applied to the two projected views. Implementations record a scalar
/// node on the tape; Evaluate computes the same value without one.
class ContrastiveLoss {
 public:
  virtual ~ContrastiveLoss() = default;
  virtual std::string name() const = 0;
  virtual Tape::Var Record(Tape& tape, Tape::Var z1, Tape::Var z2) const = 0;
  virtual double Evaluate(const Matrix& z1, const Matrix& z2) const = 0;
};

class NtXentObjective : public ContrastiveLoss {
 public:
  explicit NtXentObjective(double temperature) : temperature_(temperature) {}
  std::string name() const override { return "nt-xent"; }
  Tape::Var Record(Tape& tape, Tape::Var z1, Tape::Var z2) const override;
  double Evaluate(const Matrix& z1, const Matrix& z2) const override;

 private:
  double temperature_;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 0.001;
  double temperature = 0.2;
  double node_drop_p = 0.1;
  double edge_drop_p = 0.1;
  int walk_length = 10;
  bool subgraph_enabled = true;
  bool attribute_mask_enabled = false;
  double attribute_mask_p = 0.1;
  bool edge_add_enabled = false;
  double edge_add_p = 0.1;
  bool lipschitz_enabled = true;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Verify the spectral-norm bound after every optimizer step.
  bool check_bound_each_step = false;
  std::uint64_t seed = 0;

  void Validate() const;
  /// Augmentations sampled uniformly for each view.
  std::vector<Augmentation> EnabledAugmentations() const;
};

/// Ablation presets: no Lipschitz projection; no subgraph views and half the
/// node/edge drop probabilities.
TrainConfig WithoutLipschitz(TrainConfig config);
TrainConfig WithoutSubgraphs(TrainConfig config);

/// Two augmented views of each graph in a batch. The graphs carry their
/// encoder input as node features.
struct ContrastiveViews {
  std::vector<Graph> first;
  std::vector<Graph> second;
};

/// Attaches EncoderInput(g) as node features, so they survive augmentation.
Graph AttachEncoderInput(const Graph& g, const EncoderConfig& config);

/// Draws both views of `graphs` (already carrying encoder inputs). View v of
/// graph i uses Rng(seed, {epoch, batch, index[i], v}).
ContrastiveViews SampleViews(const std::vector<const Graph*>& graphs,
                             const std::vector<std::size_t>& index,
                             const std::vector<Augmentation>& kinds, std::uint64_t seed,
                             std::uint64_t epoch, std::uint64_t batch);

struct GradientResult {
  double loss = 0.0;
  std::vector<Matrix> encoder;  // aligned with TrainableTensors(EncoderParams&)
  std::vector<Matrix> head;     // aligned with TrainableTensors(ProjectionHead&)
  std::vector<Tape::NormStatistics> first_stats;
  std::vector<Tape::NormStatistics> second_stats;
};

/// Reverse-mode gradient of the contrastive loss over one batch of views,
/// with batch statistics in every normalization layer. Each view set is
/// encoded in its own forward pass. Throws DegenerateBatch for fewer than two
/// pairs and NonFiniteGradient when any entry is NaN or infinite.
GradientResult ComputeGradients(const EncoderParams& params, const ProjectionHead& head,
                                const ContrastiveViews& views, const ContrastiveLoss& loss);

/// Loss of the same computation through the plain (tape-free) forward path.
double ComputeLoss(const EncoderParams& params, const ProjectionHead& head,
                   const ContrastiveViews& views, const ContrastiveLoss& loss);

Matrix ApplyHead(const ProjectionHead& head, const Matrix& readout);

struct TrainResult {
  EncoderParams params;
  ProjectionHead head;
  std::vector<double> epoch_loss;
  std::size_t steps = 0;
};

/// GraphCL pretraining: per epoch, shuffled minibatches; two independently
/// augmented views per graph; one Adam step per batch followed, when enabled,
/// by the Lipschitz projection. Deterministic for a fixed seed.
TrainResult TrainGraphCL(const GraphSet& set, const EncoderConfig& encoder_config,
                         const TrainConfig& train_config,
                         const ContrastiveLoss* loss = nullptr);

}  // namespace ggeval
