#include "ggeval/training.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ggeval/error.hpp"
#include "ggeval/linalg.hpp"

namespace ggeval {

namespace {

Graph DrawAugmentation(const Graph& g, const Augmentation& aug, Rng& rng) {
  switch (aug.kind) {
    case Augmentation::Kind::kNodeDrop: {
      std::vector<NodeId> keep;
      for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (!rng.Bernoulli(aug.p)) keep.push_back(v);
      }
      return g.InducedSubgraph(keep);
    }
    case Augmentation::Kind::kEdgeDrop: {
      std::vector<Edge> kept;
      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < g.edges().size(); ++i) {
        if (!rng.Bernoulli(aug.p)) {
          kept.push_back(g.edges()[i]);
          rows.push_back(static_cast<Eigen::Index>(i));
        }
      }
      std::optional<Matrix> e;
      if (g.edge_features()) {
        Matrix m(static_cast<Eigen::Index>(rows.size()), g.edge_features()->cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          m.row(static_cast<Eigen::Index>(i)) = g.edge_features()->row(rows[i]);
        }
        e = std::move(m);
      }
      return Graph(g.num_nodes(), std::move(kept), g.node_features(), std::move(e));
    }
    case Augmentation::Kind::kSubgraphWalk: {
      if (g.num_nodes() == 0) return g;
      NodeId at = static_cast<NodeId>(rng.UniformInt(static_cast<std::uint64_t>(g.num_nodes())));
      std::set<NodeId> visited{at};
      for (int step = 0; step < aug.walk_length; ++step) {
        const auto& nbrs = g.neighbors(at);
        if (nbrs.empty()) break;
        at = nbrs[rng.UniformInt(nbrs.size())];
        visited.insert(at);
      }
      return g.InducedSubgraph(std::vector<NodeId>(visited.begin(), visited.end()));
    }
    case Augmentation::Kind::kAttributeMask: {
      if (!g.node_features()) return g;
      Matrix x = *g.node_features();
      for (Eigen::Index v = 0; v < x.rows(); ++v) {
        if (rng.Bernoulli(aug.p)) x.row(v).setZero();
      }
      return Graph(g.num_nodes(), g.edges(), std::move(x), g.edge_features());
    }
    case Augmentation::Kind::kEdgeAdd: {
      const auto n = static_cast<std::uint64_t>(g.num_nodes());
      const std::uint64_t capacity = n * (n - (n > 0 ? 1 : 0)) / 2;
      const auto wanted = std::min<std::uint64_t>(
          static_cast<std::uint64_t>(std::llround(aug.p * static_cast<double>(g.num_edges()))),
          capacity - g.num_edges());
      std::set<Edge> added;
      while (added.size() < wanted) {
        auto u = static_cast<NodeId>(rng.UniformInt(n));
        auto v = static_cast<NodeId>(rng.UniformInt(n));
        if (u == v || g.has_edge(u, v)) continue;
        added.insert({std::min(u, v), std::max(u, v)});
      }
      std::vector<Edge> edges = g.edges();
      edges.insert(edges.end(), added.begin(), added.end());
      // Edge features cannot be invented for new edges.
      return Graph(g.num_nodes(), std::move(edges), g.node_features());
    }
  }
  return g;
}

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::size_t t = 0;
};

void AdamStep(std::vector<Matrix*>& tensors, const std::vector<Matrix>& grads, AdamState& state,
              const TrainConfig& cfg) {
  if (state.m.empty()) {
    for (Matrix* p : tensors) {
      state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    state.m[i] = cfg.adam_beta1 * state.m[i] + (1.0 - cfg.adam_beta1) * grads[i];
    state.v[i] = cfg.adam_beta2 * state.v[i] + (1.0 - cfg.adam_beta2) * grads[i].cwiseProduct(grads[i]);
    const Matrix m_hat = state.m[i] / c1;
    const Matrix v_hat = state.v[i] / c2;
    *tensors[i] -= (cfg.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg.adam_epsilon))
                       .matrix();
  }
}

void CheckFinite(const std::vector<Matrix>& grads, const char* group) {
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].allFinite()) {
      throw Error(ErrorCode::kNonFiniteGradient,
                  std::string(group) + " tensor " + std::to_string(i) + " (" +
                      std::to_string(grads[i].rows()) + "x" + std::to_string(grads[i].cols()) +
                      ") has non-finite entries");
    }
  }
}

void UpdateRunningStats(EncoderParams& params, const GradientResult& grads) {
  std::size_t k = 0;
  for (GinLayer& layer : params.layers) {
    for (NormLayer& norm : layer.norms) {
      const auto& a = grads.first_stats[k];
      const auto& b = grads.second_stats[k];
      ++k;
      const Matrix mean = 0.5 * (a.mean + b.mean);
      const Matrix var = 0.5 * (a.variance + b.variance);
      norm.running_mean = (1.0 - kRunningMomentum) * norm.running_mean + kRunningMomentum * mean;
      norm.running_var = (1.0 - kRunningMomentum) * norm.running_var + kRunningMomentum * var;
    }
  }
}

GraphBatch ViewBatch(const std::vector<Graph>& views, const EncoderParams& params) {
  return MakeBatchFromAttached(views, params.config.input_dim());
}

}  // namespace

std::string AugmentationName(const Augmentation& aug) {
  switch (aug.kind) {
    case Augmentation::Kind::kNodeDrop: return "node-drop";
    case Augmentation::Kind::kEdgeDrop: return "edge-drop";
    case Augmentation::Kind::kSubgraphWalk: return "subgraph-walk";
    case Augmentation::Kind::kAttributeMask: return "attribute-mask";
    case Augmentation::Kind::kEdgeAdd: return "edge-add";
  }
  return "unknown";
}

Graph Augment(const Graph& g, const Augmentation& aug, Rng& rng) {
  if (aug.kind != Augmentation::Kind::kSubgraphWalk && !(aug.p >= 0.0 && aug.p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "augmentation probability outside [0, 1]");
  }
  if (aug.kind == Augmentation::Kind::kSubgraphWalk && aug.walk_length < 1) {
    throw Error(ErrorCode::kInvalidArgument, "walk length must be >= 1");
  }
  if (g.num_nodes() == 0) return g;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Graph view = DrawAugmentation(g, aug, rng);
    if (view.num_nodes() > 0) return view;
  }
  return g;
}

NtXentResult NtXentLoss(const Matrix& z1, const Matrix& z2, double tau) {
  if (z1.rows() != z2.rows() || z1.cols() != z2.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "NT-Xent views differ in shape");
  }
  if (z1.rows() < 2) throw Error(ErrorCode::kDegenerateBatch, "NT-Xent needs at least 2 pairs");
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  const Eigen::Index n = z1.rows();
  const Eigen::Index total = 2 * n;
  Matrix z(total, z1.cols());
  z << z1, z2;
  const Vector norms = z.rowwise().norm().cwiseMax(1e-12);
  const Matrix u = norms.cwiseInverse().asDiagonal() * z;
  const Matrix logits = u * u.transpose() / tau;

  // d loss / d logits, accumulated per anchor row.
  Matrix g_logits = Matrix::Zero(total, total);
  double loss = 0.0;
  for (Eigen::Index a = 0; a < total; ++a) {
    const Eigen::Index pos = a < n ? a + n : a - n;
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < total; ++k) {
      if (k != a) peak = std::max(peak, logits(a, k));
    }
    double denom = 0.0;
    for (Eigen::Index k = 0; k < total; ++k) {
      if (k != a) denom += std::exp(logits(a, k) - peak);
    }
    loss += -(logits(a, pos) - peak) + std::log(denom);
    for (Eigen::Index k = 0; k < total; ++k) {
      if (k == a) continue;
      g_logits(a, k) = std::exp(logits(a, k) - peak) / denom;
    }
    g_logits(a, pos) -= 1.0;
  }
  const double scale = 1.0 / static_cast<double>(total);
  loss *= scale;
  g_logits *= scale;

  // logits = U U^T / tau, so dU = (G + G^T) U / tau.
  const Matrix g_u = (g_logits + g_logits.transpose()) * u / tau;
  // Through row normalization: dz = (du - u (u . du)) / |z|.
  const Vector radial = (g_u.cwiseProduct(u)).rowwise().sum();
  const Matrix g_z = norms.cwiseInverse().asDiagonal() * (g_u - radial.asDiagonal() * u);
  return {loss, g_z.topRows(n), g_z.bottomRows(n)};
}

Tape::Var NtXentObjective::Record(Tape& tape, Tape::Var z1, Tape::Var z2) const {
  NtXentResult r = NtXentLoss(tape.value(z1), tape.value(z2), temperature_);
  Matrix value(1, 1);
  value(0, 0) = r.loss;
  return tape.Custom(std::move(value), {z1, z2}, {std::move(r.grad_z1), std::move(r.grad_z2)});
}

double NtXentObjective::Evaluate(const Matrix& z1, const Matrix& z2) const {
  return NtXentLoss(z1, z2, temperature_).loss;
}

void TrainConfig::Validate() const {
  if (epochs < 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 0");
  if (batch_size < 2) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 2");
  if (!(temperature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "temperature must be positive");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  for (double p : {node_drop_p, edge_drop_p, attribute_mask_p, edge_add_p}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "augmentation probability outside [0, 1]");
    }
  }
  if (walk_length < 1) throw Error(ErrorCode::kInvalidArgument, "walk length must be >= 1");
}

std::vector<Augmentation> TrainConfig::EnabledAugmentations() const {
  std::vector<Augmentation> kinds = {Augmentation::NodeDrop(node_drop_p),
                                     Augmentation::EdgeDrop(edge_drop_p)};
  if (subgraph_enabled) kinds.push_back(Augmentation::SubgraphWalk(walk_length));
  if (attribute_mask_enabled) kinds.push_back(Augmentation::AttributeMask(attribute_mask_p));
  if (edge_add_enabled) kinds.push_back(Augmentation::EdgeAdd(edge_add_p));
  return kinds;
}

TrainConfig WithoutLipschitz(TrainConfig config) {
  config.lipschitz_enabled = false;
  return config;
}

TrainConfig WithoutSubgraphs(TrainConfig config) {
  config.subgraph_enabled = false;
  config.node_drop_p *= 0.5;
  config.edge_drop_p *= 0.5;
  return config;
}

Graph AttachEncoderInput(const Graph& g, const EncoderConfig& config) {
  return Graph(g.num_nodes(), g.edges(), EncoderInput(g, config), g.edge_features());
}

ContrastiveViews SampleViews(const std::vector<const Graph*>& graphs,
                             const std::vector<std::size_t>& index,
                             const std::vector<Augmentation>& kinds, std::uint64_t seed,
                             std::uint64_t epoch, std::uint64_t batch) {
  ContrastiveViews views;
  views.first.reserve(graphs.size());
  views.second.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    for (std::uint64_t v = 0; v < 2; ++v) {
      Rng rng(seed, {epoch, batch, index[i], v});
      const Augmentation& aug = kinds[rng.UniformInt(kinds.size())];
      (v == 0 ? views.first : views.second).push_back(Augment(*graphs[i], aug, rng));
    }
  }
  return views;
}

Matrix ApplyHead(const ProjectionHead& head, const Matrix& readout) {
  const Matrix hidden =
      ((readout * head.first.weight).rowwise() + head.first.bias.row(0)).cwiseMax(0.0);
  return (hidden * head.second.weight).rowwise() + head.second.bias.row(0);
}

GradientResult ComputeGradients(const EncoderParams& params, const ProjectionHead& head,
                                const ContrastiveViews& views, const ContrastiveLoss& loss) {
  if (views.first.size() != views.second.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "view sets differ in size");
  }
  if (views.first.size() < 2) {
    throw Error(ErrorCode::kDegenerateBatch, "contrastive batch needs at least 2 graphs");
  }
  Tape tape;
  const TapeEncoder first = RecordEncoder(tape, params, ViewBatch(views.first, params), NormMode::kBatch);
  const TapeEncoder second =
      RecordEncoder(tape, params, ViewBatch(views.second, params), NormMode::kBatch);

  const Tape::Var w1 = tape.Parameter(head.first.weight);
  const Tape::Var b1 = tape.Parameter(head.first.bias);
  const Tape::Var w2 = tape.Parameter(head.second.weight);
  const Tape::Var b2 = tape.Parameter(head.second.bias);
  auto project = [&](Tape::Var r) {
    const Tape::Var hidden = tape.Relu(tape.AddRowBias(tape.MatMul(r, w1), b1));
    return tape.AddRowBias(tape.MatMul(hidden, w2), b2);
  };
  const Tape::Var objective = loss.Record(tape, project(first.readout), project(second.readout));
  tape.Backward(objective);

  GradientResult out;
  out.loss = tape.value(objective)(0, 0);
  // Parameters are shared between the two passes: sum their gradients.
  for (std::size_t i = 0; i < first.params.size(); ++i) {
    const Matrix& a = tape.grad(first.params[i]);
    const Matrix& b = tape.grad(second.params[i]);
    const Matrix& value = tape.value(first.params[i]);
    Matrix g = Matrix::Zero(value.rows(), value.cols());
    if (a.size() > 0) g += a;
    if (b.size() > 0) g += b;
    out.encoder.push_back(std::move(g));
  }
  for (Tape::Var v : {w1, b1, w2, b2}) {
    const Matrix& g = tape.grad(v);
    out.head.push_back(g.size() > 0 ? g : Matrix::Zero(tape.value(v).rows(), tape.value(v).cols()));
  }
  out.first_stats = first.batch_stats;
  out.second_stats = second.batch_stats;
  if (!std::isfinite(out.loss)) throw Error(ErrorCode::kNonFiniteGradient, "loss is not finite");
  CheckFinite(out.encoder, "encoder");
  CheckFinite(out.head, "projection head");
  return out;
}

double ComputeLoss(const EncoderParams& params, const ProjectionHead& head,
                   const ContrastiveViews& views, const ContrastiveLoss& loss) {
  const Matrix r1 = ForwardBatch(params, ViewBatch(views.first, params), NormMode::kBatch);
  const Matrix r2 = ForwardBatch(params, ViewBatch(views.second, params), NormMode::kBatch);
  return loss.Evaluate(ApplyHead(head, r1), ApplyHead(head, r2));
}

TrainResult TrainGraphCL(const GraphSet& set, const EncoderConfig& encoder_config,
                         const TrainConfig& train_config, const ContrastiveLoss* loss) {
  RequireNonEmpty(set, "TrainGraphCL");
  encoder_config.Validate();
  train_config.Validate();
  if (set.size() < 2) {
    throw Error(ErrorCode::kDegenerateBatch, "contrastive training needs at least 2 graphs");
  }
  NtXentObjective default_loss(train_config.temperature);
  const ContrastiveLoss& objective = loss ? *loss : default_loss;

  const std::uint64_t seed = train_config.seed;
  TrainResult result{InitEncoder(encoder_config, Rng::DeriveSeed(seed, {0xe7c0de})),
                     InitProjectionHead(encoder_config.embedding_dim(),
                                        Rng::DeriveSeed(seed, {0x4ead})),
                     {},
                     0};
  if (train_config.lipschitz_enabled) {
    ProjectLipschitzInPlace(result.params, encoder_config.lipschitz_bound);
  }

  std::vector<Graph> prepared;
  prepared.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    try {
      prepared.push_back(AttachEncoderInput(set[i], encoder_config));
    } catch (const Error& e) {
      throw Error(e.code(), "graph " + std::to_string(i) + ": " + e.detail());
    }
  }
  const std::vector<Augmentation> kinds = train_config.EnabledAugmentations();
  std::vector<Matrix*> encoder_tensors = TrainableTensors(result.params);
  std::vector<Matrix*> head_tensors = TrainableTensors(result.head);
  AdamState encoder_adam;
  AdamState head_adam;

  const auto batch_size = static_cast<std::size_t>(train_config.batch_size);
  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    std::vector<std::size_t> order(prepared.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle(seed, {0x5 /* shuffle stream */, static_cast<std::uint64_t>(epoch)});
    shuffle.Shuffle(order);

    // A trailing batch of one graph has no negatives; fold it into the
    // previous batch.
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      spans.push_back({begin, std::min(order.size(), begin + batch_size)});
    }
    if (spans.size() > 1 && spans.back().second - spans.back().first < 2) {
      spans[spans.size() - 2].second = spans.back().second;
      spans.pop_back();
    }

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < spans.size(); ++b) {
      std::vector<const Graph*> members;
      std::vector<std::size_t> index;
      for (std::size_t i = spans[b].first; i < spans[b].second; ++i) {
        members.push_back(&prepared[order[i]]);
        index.push_back(order[i]);
      }
      const ContrastiveViews views = SampleViews(members, index, kinds, seed,
                                                 static_cast<std::uint64_t>(epoch), b);
      GradientResult grads = ComputeGradients(result.params, result.head, views, objective);
      epoch_loss += grads.loss;
      AdamStep(encoder_tensors, grads.encoder, encoder_adam, train_config);
      AdamStep(head_tensors, grads.head, head_adam, train_config);
      UpdateRunningStats(result.params, grads);
      if (train_config.lipschitz_enabled) {
        ProjectLipschitzInPlace(result.params, encoder_config.lipschitz_bound);
        if (train_config.check_bound_each_step &&
            MaxSpectralNorm(result.params) > encoder_config.lipschitz_bound + 1e-6) {
          throw Error(ErrorCode::kInvariantViolation,
                      "spectral norm bound violated after step " + std::to_string(result.steps));
        }
      }
      ++result.steps;
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(spans.size()));
  }
  return result;
}

}  // namespace ggeval
