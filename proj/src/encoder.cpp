#include "ggeval/encoder.hpp"

#include <fstream>
#include <sstream>

#include "ggeval/error.hpp"
#include "ggeval/graph_io.hpp"
#include "ggeval/linalg.hpp"
#include "json.hpp"

namespace ggeval {

namespace {

using nlohmann::json;

LinearLayer InitLinear(int in, int out, Rng& rng) {
  return {RandomOrthogonal(in, out, rng), Matrix::Zero(1, out)};
}

NormLayer InitNorm(int width) {
  return {Matrix::Ones(1, width), Matrix::Zero(1, width), Matrix::Zero(1, width),
          Matrix::Ones(1, width)};
}

json MatrixJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix JsonMatrix(const json& rows, const char* what) {
  if (!rows.is_array()) throw Error(ErrorCode::kParseError, std::string(what) + " is not a matrix");
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      throw Error(ErrorCode::kParseError, std::string(what) + " has ragged rows");
    }
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json LinearJson(const LinearLayer& l) {
  return {{"weight", MatrixJson(l.weight)}, {"bias", MatrixJson(l.bias)}};
}

LinearLayer JsonLinear(const json& j) {
  return {JsonMatrix(j.at("weight"), "weight"), JsonMatrix(j.at("bias"), "bias")};
}

void ApplyNorm(Matrix& z, const Matrix& mean, const Matrix& var, const NormLayer& norm) {
  const Eigen::RowVectorXd inv_std = (var.row(0).array() + kNormEpsilon).rsqrt();
  z = (((z.rowwise() - mean.row(0)).array().rowwise() * inv_std.array()).rowwise() *
           norm.gamma.row(0).array())
          .rowwise() +
      norm.beta.row(0).array();
}

}  // namespace

void EncoderConfig::Validate() const {
  if (num_layers < 1) throw Error(ErrorCode::kInvalidArgument, "num_layers must be >= 1");
  if (hidden < 1) throw Error(ErrorCode::kInvalidArgument, "hidden must be >= 1");
  if (mlp_depth < 1) throw Error(ErrorCode::kInvalidArgument, "mlp_depth must be >= 1");
  if (!(lipschitz_bound > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lipschitz bound must be positive");
  }
  if (attribute_dim < 0) throw Error(ErrorCode::kInvalidArgument, "attribute_dim must be >= 0");
}

EncoderParams InitEncoder(const EncoderConfig& config, std::uint64_t seed) {
  config.Validate();
  EncoderParams params{config, {}};
  int in = config.input_dim();
  for (int l = 0; l < config.num_layers; ++l) {
    GinLayer layer;
    for (int j = 0; j < config.mlp_depth; ++j) {
      Rng rng(seed, {static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(j)});
      layer.linears.push_back(InitLinear(j == 0 ? in : config.hidden, config.hidden, rng));
      if (j + 1 < config.mlp_depth) layer.norms.push_back(InitNorm(config.hidden));
    }
    params.layers.push_back(std::move(layer));
    in = config.hidden;
  }
  return params;
}

ProjectionHead InitProjectionHead(int dim, std::uint64_t seed) {
  Rng first(seed, {0x4ead, 0});
  Rng second(seed, {0x4ead, 1});
  return {InitLinear(dim, dim, first), InitLinear(dim, dim, second)};
}

Matrix EncoderInput(const Graph& g, const EncoderConfig& config) {
  Matrix structural = StructuralFeatures(g, config.features);
  if (config.attribute_dim == 0) return structural;
  const auto& attrs = g.node_features();
  if (!attrs) {
    throw Error(ErrorCode::kFeatureMismatch, "encoder expects node attributes, graph has none");
  }
  if (attrs->cols() != config.attribute_dim) {
    throw Error(ErrorCode::kFeatureMismatch,
                "encoder expects " + std::to_string(config.attribute_dim) +
                    " attribute columns, graph has " + std::to_string(attrs->cols()));
  }
  Matrix x(g.num_nodes(), structural.cols() + attrs->cols());
  x << structural, *attrs;
  return x;
}

namespace {

GraphBatch AssembleBatch(std::size_t count, const auto& graph_at, const auto& input_at,
                         int input_dim) {
  GraphBatch batch;
  batch.offsets.reserve(count + 1);
  batch.offsets.push_back(0);
  for (std::size_t i = 0; i < count; ++i) {
    batch.offsets.push_back(batch.offsets.back() + graph_at(i).num_nodes());
  }
  const Eigen::Index total = batch.offsets.back();
  batch.inputs.resize(total, input_dim);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < count; ++i) {
    const Graph& g = graph_at(i);
    const Eigen::Index base = batch.offsets[i];
    Matrix x;
    try {
      x = input_at(i);
    } catch (const Error& e) {
      throw Error(e.code(), "graph " + std::to_string(i) + ": " + e.detail());
    }
    if (x.cols() != input_dim || x.rows() != g.num_nodes()) {
      throw Error(ErrorCode::kFeatureMismatch,
                  "graph " + std::to_string(i) + ": input is " + std::to_string(x.rows()) + "x" +
                      std::to_string(x.cols()) + ", expected " + std::to_string(g.num_nodes()) +
                      "x" + std::to_string(input_dim));
    }
    if (g.num_nodes() > 0) batch.inputs.middleRows(base, g.num_nodes()) = x;
    for (NodeId v = 0; v < g.num_nodes(); ++v) triplets.emplace_back(base + v, base + v, 1.0);
    for (auto [u, v] : g.edges()) {
      triplets.emplace_back(base + u, base + v, 1.0);
      triplets.emplace_back(base + v, base + u, 1.0);
    }
  }
  batch.propagation.resize(total, total);
  batch.propagation.setFromTriplets(triplets.begin(), triplets.end());
  return batch;
}

}  // namespace

GraphBatch MakeBatchFromAttached(std::span<const Graph> graphs, int input_dim) {
  return AssembleBatch(
      graphs.size(), [&](std::size_t i) -> const Graph& { return graphs[i]; },
      [&](std::size_t i) -> Matrix {
        const auto& x = graphs[i].node_features();
        if (!x) throw Error(ErrorCode::kFeatureMismatch, "no attached encoder input");
        return *x;
      },
      input_dim);
}

GraphBatch MakeBatch(std::span<const Graph* const> graphs, const EncoderConfig& config) {
  return AssembleBatch(
      graphs.size(), [&](std::size_t i) -> const Graph& { return *graphs[i]; },
      [&](std::size_t i) { return EncoderInput(*graphs[i], config); }, config.input_dim());
}

TapeEncoder RecordEncoder(Tape& tape, const EncoderParams& params, const GraphBatch& batch,
                          NormMode mode) {
  TapeEncoder out;
  Tape::Var h = tape.Constant(batch.inputs);
  std::vector<Tape::Var> readouts;
  for (const GinLayer& layer : params.layers) {
    std::vector<Tape::Var> linear_vars;
    for (const LinearLayer& lin : layer.linears) {
      linear_vars.push_back(tape.Parameter(lin.weight));
      linear_vars.push_back(tape.Parameter(lin.bias));
    }
    std::vector<Tape::Var> norm_vars;
    for (const NormLayer& norm : layer.norms) {
      norm_vars.push_back(tape.Parameter(norm.gamma));
      norm_vars.push_back(tape.Parameter(norm.beta));
    }
    out.params.insert(out.params.end(), linear_vars.begin(), linear_vars.end());
    out.params.insert(out.params.end(), norm_vars.begin(), norm_vars.end());

    Tape::Var z = tape.SparseLeftMultiply(batch.propagation, h);
    for (std::size_t j = 0; j < layer.linears.size(); ++j) {
      z = tape.AddRowBias(tape.MatMul(z, linear_vars[2 * j]), linear_vars[2 * j + 1]);
      if (j + 1 < layer.linears.size()) {
        const NormLayer& norm = layer.norms[j];
        if (mode == NormMode::kRunning) {
          z = tape.FixedNorm(z, norm.running_mean, norm.running_var, norm_vars[2 * j],
                             norm_vars[2 * j + 1], kNormEpsilon);
        } else {
          Tape::NormStatistics stats;
          z = tape.BatchNorm(z, norm_vars[2 * j], norm_vars[2 * j + 1], kNormEpsilon, &stats);
          out.batch_stats.push_back(std::move(stats));
        }
        z = tape.Relu(z);
      }
    }
    h = tape.Relu(z);
    readouts.push_back(tape.SegmentSum(h, batch.offsets));
  }
  out.readout = tape.ConcatCols(readouts);
  return out;
}

Matrix ForwardBatch(const EncoderParams& params, const GraphBatch& batch, NormMode mode) {
  const auto graphs = static_cast<Eigen::Index>(batch.num_graphs());
  const int hidden = params.config.hidden;
  Matrix out(graphs, params.config.embedding_dim());
  Matrix h = batch.inputs;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const GinLayer& layer = params.layers[l];
    Matrix z = batch.propagation * h;
    for (std::size_t j = 0; j < layer.linears.size(); ++j) {
      z = (z * layer.linears[j].weight).rowwise() + layer.linears[j].bias.row(0);
      if (j + 1 < layer.linears.size()) {
        const NormLayer& norm = layer.norms[j];
        if (mode == NormMode::kRunning) {
          ApplyNorm(z, norm.running_mean, norm.running_var, norm);
        } else if (z.rows() > 0) {
          const Matrix mean = z.colwise().mean();
          const Matrix var =
              (z.rowwise() - mean.row(0)).array().square().colwise().sum() /
              static_cast<double>(z.rows());
          ApplyNorm(z, mean, var, norm);
        }
        z = z.cwiseMax(0.0);
      }
    }
    h = z.cwiseMax(0.0);
    for (Eigen::Index g = 0; g < graphs; ++g) {
      const Eigen::Index begin = batch.offsets[g];
      const Eigen::Index count = batch.offsets[g + 1] - begin;
      out.block(g, static_cast<Eigen::Index>(l) * hidden, 1, hidden) =
          count > 0 ? Matrix(h.middleRows(begin, count).colwise().sum())
                    : Matrix::Zero(1, hidden);
    }
  }
  return out;
}

Vector Forward(const EncoderParams& params, const Graph& g, NormMode mode) {
  const Graph* ptr = &g;
  const GraphBatch batch = MakeBatch(std::span<const Graph* const>(&ptr, 1), params.config);
  return ForwardBatch(params, batch, mode).row(0).transpose();
}

Matrix EmbedSet(const EncoderParams& params, const GraphSet& set, NormMode mode) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(set.size());
  for (const Graph& g : set.graphs) ptrs.push_back(&g);
  const Matrix out = ForwardBatch(params, MakeBatch(ptrs, params.config), mode);
  if (!out.allFinite()) throw Error(ErrorCode::kInvariantViolation, "non-finite embedding");
  return out;
}

std::pair<Matrix, Matrix> EmbedJoint(const EncoderParams& params, const GraphSet& a,
                                     const GraphSet& b, NormMode mode) {
  GraphSet both{a.name + "+" + b.name, {}};
  both.graphs.reserve(a.size() + b.size());
  both.graphs.insert(both.graphs.end(), a.graphs.begin(), a.graphs.end());
  both.graphs.insert(both.graphs.end(), b.graphs.begin(), b.graphs.end());
  const Matrix all = EmbedSet(params, both, mode);
  const auto na = static_cast<Eigen::Index>(a.size());
  return {all.topRows(na), all.bottomRows(all.rows() - na)};
}

std::vector<Matrix*> TrainableTensors(EncoderParams& params) {
  std::vector<Matrix*> out;
  for (GinLayer& layer : params.layers) {
    for (LinearLayer& lin : layer.linears) {
      out.push_back(&lin.weight);
      out.push_back(&lin.bias);
    }
    for (NormLayer& norm : layer.norms) {
      out.push_back(&norm.gamma);
      out.push_back(&norm.beta);
    }
  }
  return out;
}

std::vector<const Matrix*> TrainableTensors(const EncoderParams& params) {
  std::vector<const Matrix*> out;
  for (Matrix* m : TrainableTensors(const_cast<EncoderParams&>(params))) out.push_back(m);
  return out;
}

std::vector<Matrix*> TrainableTensors(ProjectionHead& head) {
  return {&head.first.weight, &head.first.bias, &head.second.weight, &head.second.bias};
}

std::vector<const Matrix*> LipschitzWeights(const EncoderParams& params) {
  std::vector<const Matrix*> out;
  for (const GinLayer& layer : params.layers) {
    for (const LinearLayer& lin : layer.linears) out.push_back(&lin.weight);
  }
  return out;
}

void ProjectLipschitzInPlace(EncoderParams& params, double bound) {
  if (!(bound > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lipschitz bound must be positive");
  for (GinLayer& layer : params.layers) {
    for (LinearLayer& lin : layer.linears) {
      const double norm = SpectralNorm(lin.weight);
      if (norm > bound) lin.weight *= bound / norm;
    }
  }
}

EncoderParams ProjectLipschitz(EncoderParams params, double bound) {
  ProjectLipschitzInPlace(params, bound);
  return params;
}

double MaxSpectralNorm(const EncoderParams& params) {
  double worst = 0.0;
  for (const Matrix* w : LipschitzWeights(params)) worst = std::max(worst, SpectralNorm(*w));
  return worst;
}

std::string SerializeCheckpoint(const EncoderParams& params, const ProjectionHead* head) {
  const EncoderConfig& c = params.config;
  json layers = json::array();
  for (const GinLayer& layer : params.layers) {
    json linears = json::array();
    for (const LinearLayer& lin : layer.linears) linears.push_back(LinearJson(lin));
    json norms = json::array();
    for (const NormLayer& n : layer.norms) {
      norms.push_back({{"gamma", MatrixJson(n.gamma)},
                       {"beta", MatrixJson(n.beta)},
                       {"running_mean", MatrixJson(n.running_mean)},
                       {"running_var", MatrixJson(n.running_var)}});
    }
    layers.push_back({{"linears", std::move(linears)}, {"norms", std::move(norms)}});
  }
  json doc = {{"format", "ggeval-encoder"},
              {"version", kCheckpointVersion},
              {"config",
               {{"num_layers", c.num_layers},
                {"hidden", c.hidden},
                {"lipschitz_bound", c.lipschitz_bound},
                {"features", std::string(FeatureConfigName(c.features))},
                {"mlp_depth", c.mlp_depth},
                {"attribute_dim", c.attribute_dim}}},
              {"layers", std::move(layers)}};
  if (head) doc["head"] = {{"first", LinearJson(head->first)}, {"second", LinearJson(head->second)}};
  return doc.dump();
}

EncoderParams DeserializeCheckpoint(const std::string& text, std::optional<ProjectionHead>* head) {
  json doc;
  try {
    doc = json::parse(text);
    if (doc.value("format", "") != "ggeval-encoder") {
      throw Error(ErrorCode::kParseError, "not an encoder checkpoint");
    }
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorCode::kParseError, "unsupported checkpoint version");
    }
    EncoderParams params;
    const json& c = doc.at("config");
    params.config.num_layers = c.at("num_layers").get<int>();
    params.config.hidden = c.at("hidden").get<int>();
    params.config.lipschitz_bound = c.at("lipschitz_bound").get<double>();
    params.config.features = ParseFeatureConfig(c.at("features").get<std::string>());
    params.config.mlp_depth = c.at("mlp_depth").get<int>();
    params.config.attribute_dim = c.value("attribute_dim", 0);
    params.config.Validate();
    for (const json& lj : doc.at("layers")) {
      GinLayer layer;
      for (const json& lin : lj.at("linears")) layer.linears.push_back(JsonLinear(lin));
      for (const json& n : lj.at("norms")) {
        layer.norms.push_back({JsonMatrix(n.at("gamma"), "gamma"), JsonMatrix(n.at("beta"), "beta"),
                               JsonMatrix(n.at("running_mean"), "running_mean"),
                               JsonMatrix(n.at("running_var"), "running_var")});
      }
      params.layers.push_back(std::move(layer));
    }
    if (static_cast<int>(params.layers.size()) != params.config.num_layers) {
      throw Error(ErrorCode::kParseError, "layer count disagrees with config");
    }
    if (head) {
      if (doc.contains("head")) {
        *head = ProjectionHead{JsonLinear(doc["head"].at("first")),
                               JsonLinear(doc["head"].at("second"))};
      } else {
        head->reset();
      }
    }
    return params;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const EncoderParams& params, const std::filesystem::path& path,
                    const ProjectionHead* head) {
  WriteFileAtomic(path, SerializeCheckpoint(params, head));
}

EncoderParams LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return DeserializeCheckpoint(buffer.str());
}

}  // namespace ggeval
