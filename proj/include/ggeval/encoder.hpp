#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ggeval/autodiff.hpp"
#include "ggeval/graph.hpp"
#include "ggeval/local_features.hpp"
#include "ggeval/rng.hpp"

namespace ggeval {

struct EncoderConfig {
  int num_layers = 3;
  int hidden = 32;
  double lipschitz_bound = 1.0;
  FeatureConfig features = FeatureConfig::kNone;
  int mlp_depth = 2;
  // Width of per-graph node attributes appended after the structural columns;
  // zero ignores any attributes the graphs carry.
  int attribute_dim = 0;

  int input_dim() const { return FeatureConfigWidth(features) + attribute_dim; }
  int embedding_dim() const { return num_layers * hidden; }
  /// Throws InvalidArgument when a field is out of range.
  void Validate() const;
};

// Weights are stored (in x out) so node states multiply from the left as row
// vectors. Biases and normalization vectors are 1 x width.
struct LinearLayer {
  Matrix weight;
  Matrix bias;
};

struct NormLayer {
  Matrix gamma;
  Matrix beta;
  Matrix running_mean;
  Matrix running_var;
};

struct GinLayer {
  std::vector<LinearLayer> linears;  // mlp_depth entries
  std::vector<NormLayer> norms;      // one per hidden MLP layer (mlp_depth - 1)
};

struct EncoderParams {
  EncoderConfig config;
  std::vector<GinLayer> layers;
};

/// Two-layer MLP applied to the readout for the contrastive loss only.
struct ProjectionHead {
  LinearLayer first;
  LinearLayer second;
};

inline constexpr double kNormEpsilon = 1e-5;
inline constexpr double kRunningMomentum = 0.1;

enum class NormMode {
  kBatch,    // statistics of the nodes in the current forward call
  kJoint,    // same computation, used over the union of compared sets
  kRunning,  // running statistics accumulated during training
};

/// Orthogonal weights, zero biases, unit scale / zero shift, running
/// statistics at mean 0, variance 1.
EncoderParams InitEncoder(const EncoderConfig& config, std::uint64_t seed);
ProjectionHead InitProjectionHead(int dim, std::uint64_t seed);

/// Input matrix for g: structural columns per config, then g's node
/// attributes when config.attribute_dim > 0. Throws FeatureMismatch if the
/// attributes are absent or the wrong width.
Matrix EncoderInput(const Graph& g, const EncoderConfig& config);

/// Disjoint union of graphs: block-diagonal (I + A) propagation operator,
/// row offsets per graph, and stacked input rows.
struct GraphBatch {
  SparseMatrix propagation;
  std::vector<Eigen::Index> offsets;
  Matrix inputs;

  std::size_t num_graphs() const { return offsets.size() - 1; }
};

/// Batches graphs whose encoder input is already attached as node features
/// (the training path, where features travel through augmentations).
GraphBatch MakeBatchFromAttached(std::span<const Graph> graphs, int input_dim);
/// Batches graphs computing EncoderInput for each.
GraphBatch MakeBatch(std::span<const Graph* const> graphs, const EncoderConfig& config);

/// Records the encoder on a tape. Returns the num_graphs x embedding_dim
/// readout. Parameters are registered on the tape in the order of
/// TrainableTensors().
struct TapeEncoder {
  std::vector<Tape::Var> params;
  std::vector<Tape::NormStatistics> batch_stats;  // kBatch/kJoint only
  Tape::Var readout = -1;
};
TapeEncoder RecordEncoder(Tape& tape, const EncoderParams& params, const GraphBatch& batch,
                          NormMode mode);

/// Plain forward pass (no tape), layer by layer over the whole batch.
Matrix ForwardBatch(const EncoderParams& params, const GraphBatch& batch, NormMode mode);

/// Embedding of one graph (statistics over that graph alone unless kRunning).
Vector Forward(const EncoderParams& params, const Graph& g, NormMode mode);

/// Row i = embedding of set[i]; statistics over the whole set.
Matrix EmbedSet(const EncoderParams& params, const GraphSet& set, NormMode mode);

/// Embeds two sets in one pass so both share normalization statistics.
std::pair<Matrix, Matrix> EmbedJoint(const EncoderParams& params, const GraphSet& a,
                                     const GraphSet& b, NormMode mode = NormMode::kJoint);

/// Pointers to every trainable matrix in a fixed order: per GIN layer, each
/// linear (weight, bias) then each norm (gamma, beta).
std::vector<Matrix*> TrainableTensors(EncoderParams& params);
std::vector<const Matrix*> TrainableTensors(const EncoderParams& params);
std::vector<Matrix*> TrainableTensors(ProjectionHead& head);

/// Every GIN weight matrix (the ones the Lipschitz bound applies to).
std::vector<const Matrix*> LipschitzWeights(const EncoderParams& params);

/// Rescales every GIN weight with spectral norm above `bound` to norm
/// exactly `bound`; others are left untouched. Biases, norms and the
/// projection head are never modified.
void ProjectLipschitzInPlace(EncoderParams& params, double bound);
EncoderParams ProjectLipschitz(EncoderParams params, double bound);

/// Largest spectral norm among LipschitzWeights.
double MaxSpectralNorm(const EncoderParams& params);

// Checkpoints: JSON with an embedded config and format version.
inline constexpr int kCheckpointVersion = 1;
std::string SerializeCheckpoint(const EncoderParams& params,
                                const ProjectionHead* head = nullptr);
EncoderParams DeserializeCheckpoint(const std::string& text,
                                    std::optional<ProjectionHead>* head = nullptr);
void SaveCheckpoint(const EncoderParams& params, const std::filesystem::path& path,
                    const ProjectionHead* head = nullptr);
EncoderParams LoadCheckpoint(const std::filesystem::path& path);

}  // namespace ggeval
