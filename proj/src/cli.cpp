#include "ggeval/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ggeval/benchmark.hpp"
#include "ggeval/csv.hpp"
#include "ggeval/distinguishability.hpp"
#include "ggeval/encoder.hpp"
#include "ggeval/error.hpp"
#include "ggeval/generators.hpp"
#include "ggeval/graph_io.hpp"
#include "ggeval/local_features.hpp"
#include "ggeval/metrics.hpp"
#include "ggeval/training.hpp"

namespace ggeval {

namespace {

using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string format = "jsonl";
  bool quiet = false;
};

// JSON-lines event log on the error stream.
class Log {
 public:
  Log(std::ostream& err, const Globals& globals) : err_(err), globals_(globals) {}
  void Event(const std::string& name, json fields = json::object()) const {
    if (globals_.quiet) return;
    fields["event"] = name;
    err_ << fields.dump() << std::endl;
  }

 private:
  std::ostream& err_;
  const Globals& globals_;
};

struct EncoderOptions {
  int layers = 3;
  int hidden = 32;
  std::string features = "none";
  double lipschitz_bound = 1.0;
  int mlp_depth = 2;

  void Register(CLI::App* app) {
    app->add_option("--layers", layers, "GIN layers")->capture_default_str();
    app->add_option("--hidden", hidden, "Hidden width")->capture_default_str();
    app->add_option("--features", features, "Structural input features")
        ->check(CLI::IsMember({"none", "degree", "degree+clustering"}))
        ->capture_default_str();
    app->add_option("--lipschitz-bound", lipschitz_bound, "Spectral norm bound")
        ->capture_default_str();
    app->add_option("--mlp-depth", mlp_depth, "Linear layers per GIN MLP")->capture_default_str();
  }

  EncoderConfig Build() const {
    EncoderConfig c;
    c.num_layers = layers;
    c.hidden = hidden;
    c.features = ParseFeatureConfig(features);
    c.lipschitz_bound = lipschitz_bound;
    c.mlp_depth = mlp_depth;
    c.Validate();
    return c;
  }
};

json EncoderConfigJson(const EncoderConfig& c) {
  return {{"num_layers", c.num_layers},
          {"hidden", c.hidden},
          {"features", std::string(FeatureConfigName(c.features))},
          {"lipschitz_bound", c.lipschitz_bound},
          {"mlp_depth", c.mlp_depth}};
}

struct TrainOptions {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 0.001;
  double temperature = 0.2;
  double node_drop = 0.1;
  double edge_drop = 0.1;
  int walk_length = 10;
  bool no_subgraph = false;
  bool no_lipschitz = false;
  double attribute_mask = -1.0;
  double edge_add = -1.0;
  std::string variant = "graphcl";
  bool check_bound = false;

  void Register(CLI::App* app, bool with_variant = true) {
    app->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Graphs per batch")->capture_default_str();
    app->add_option("--lr", learning_rate, "Adam learning rate")->capture_default_str();
    app->add_option("--temperature", temperature, "NT-Xent temperature")->capture_default_str();
    app->add_option("--node-drop", node_drop, "Node drop probability")->capture_default_str();
    app->add_option("--edge-drop", edge_drop, "Edge drop probability")->capture_default_str();
    app->add_option("--walk-length", walk_length, "Subgraph random-walk length")
        ->capture_default_str();
    app->add_flag("--no-subgraph", no_subgraph, "Disable subgraph views");
    app->add_flag("--no-lipschitz", no_lipschitz, "Disable the Lipschitz projection");
    app->add_option("--attribute-mask", attribute_mask,
                    "Enable attribute masking with this probability");
    app->add_option("--edge-add", edge_add, "Enable edge addition with this probability");
    app->add_flag("--check-bound", check_bound, "Verify the spectral bound after every step");
    if (with_variant) {
      app->add_option("--variant", variant, "graphcl, graphcl2 (no Lipschitz), graphcl3 (no subgraph)")
          ->check(CLI::IsMember({"graphcl", "graphcl2", "graphcl3"}))
          ->capture_default_str();
    }
  }

  TrainConfig Build(std::uint64_t seed, const std::string& chosen_variant) const {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.learning_rate = learning_rate;
    t.temperature = temperature;
    t.node_drop_p = node_drop;
    t.edge_drop_p = edge_drop;
    t.walk_length = walk_length;
    t.subgraph_enabled = !no_subgraph;
    t.lipschitz_enabled = !no_lipschitz;
    if (attribute_mask >= 0.0) {
      t.attribute_mask_enabled = true;
      t.attribute_mask_p = attribute_mask;
    }
    if (edge_add >= 0.0) {
      t.edge_add_enabled = true;
      t.edge_add_p = edge_add;
    }
    t.check_bound_each_step = check_bound;
    t.seed = seed;
    if (chosen_variant == "graphcl2") t = WithoutLipschitz(t);
    if (chosen_variant == "graphcl3") t = WithoutSubgraphs(t);
    t.Validate();
    return t;
  }
};

json TrainConfigJson(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"temperature", t.temperature},
          {"node_drop_p", t.node_drop_p},
          {"edge_drop_p", t.edge_drop_p},
          {"walk_length", t.walk_length},
          {"subgraph_enabled", t.subgraph_enabled},
          {"attribute_mask_enabled", t.attribute_mask_enabled},
          {"attribute_mask_p", t.attribute_mask_p},
          {"edge_add_enabled", t.edge_add_enabled},
          {"edge_add_p", t.edge_add_p},
          {"lipschitz_enabled", t.lipschitz_enabled},
          {"adam", {t.adam_beta1, t.adam_beta2, t.adam_epsilon}},
          {"seed", t.seed}};
}

struct MetricOptions {
  int k = 5;
  double sigma = 0.0;
  bool polynomial = false;
  int polynomial_degree = 3;
  std::string estimator = "unbiased";

  void Register(CLI::App* app) {
    app->add_option("--k", k, "Nearest neighbours for PR/DC")->capture_default_str();
    app->add_option("--sigma", sigma, "RBF bandwidth (median heuristic when unset)");
    app->add_flag("--poly", polynomial, "Also report polynomial-kernel MMD");
    app->add_option("--poly-degree", polynomial_degree, "Polynomial kernel degree")
        ->capture_default_str();
    app->add_option("--estimator", estimator, "MMD estimator")
        ->check(CLI::IsMember({"unbiased", "squared-count"}))
        ->capture_default_str();
  }

  MetricSettings Build() const {
    MetricSettings s;
    s.k = k;
    if (sigma > 0.0) s.rbf_sigma = sigma;
    s.polynomial = polynomial;
    s.polynomial_degree = polynomial_degree;
    s.estimator = estimator == "unbiased" ? MmdEstimator::kUnbiased : MmdEstimator::kSquaredCount;
    return s;
  }
};

NormMode ParseNormMode(const std::string& name) {
  if (name == "joint") return NormMode::kJoint;
  if (name == "batch") return NormMode::kBatch;
  if (name == "running") return NormMode::kRunning;
  throw Error(ErrorCode::kInvalidArgument, "unknown normalization mode: " + name);
}

std::string LossCsv(const std::vector<double>& losses) {
  std::string out = "epoch,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out += std::to_string(i + 1) + "," + FormatDouble(losses[i]) + "\n";
  }
  return out;
}

TrainResult TrainLogged(const GraphSet& data, const EncoderConfig& encoder, const TrainConfig& train,
                        const Log& log) {
  const auto start = std::chrono::steady_clock::now();
  TrainResult result = TrainGraphCL(data, encoder, train);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log.Event("train.done", {{"seed", train.seed},
                           {"epochs", train.epochs},
                           {"steps", result.steps},
                           {"first_loss", result.epoch_loss.front()},
                           {"last_loss", result.epoch_loss.back()},
                           {"max_spectral_norm", MaxSpectralNorm(result.params)},
                           {"seconds", seconds}});
  return result;
}

std::vector<std::uint64_t> SeedRange(std::uint64_t base, int count) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "--seeds must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

// ---- generate -------------------------------------------------------------

struct GenerateCommand {
  std::string recipe;
  std::size_t count = 0;
  std::string out;
  int min_nodes = 0;
  int max_nodes = 0;
  double community_p = 0.3;
  double inter_frac = 0.05;

  void Register(CLI::App* app) {
    app->add_option("--recipe", recipe, "Dataset recipe")
        ->required()
        ->check(CLI::IsMember({"community", "grid", "lobster"}));
    app->add_option("--count", count, "Number of graphs (recipe default when 0)");
    app->add_option("--out", out, "Output graph file")->required();
    app->add_option("--min-nodes", min_nodes, "Smallest node count (recipe default when 0)");
    app->add_option("--max-nodes", max_nodes, "Largest node count (recipe default when 0)");
    app->add_option("--community-p", community_p, "Within-community edge probability")
        ->capture_default_str();
    app->add_option("--inter-frac", inter_frac, "Cross edges per node")->capture_default_str();
  }

  int Run(const Globals& g, std::ostream& out_stream, const Log& log) const {
    const Recipe r = ParseRecipe(recipe);
    DatasetOptions opts;
    opts.min_nodes = min_nodes;
    opts.max_nodes = max_nodes;
    opts.community_p = community_p;
    opts.community_inter_frac = inter_frac;
    const std::size_t n = count ? count : DefaultDatasetSize(r);
    const GraphSet set = GenerateDataset(r, n, g.seed, opts);
    SaveGraphs(set, out, g.format);
    log.Event("generate.done", {{"recipe", recipe}, {"count", n}, {"seed", g.seed}, {"out", out}});
    out_stream << "wrote " << n << " graphs to " << out << "\n";
    return 0;
  }
};

// ---- features -------------------------------------------------------------

struct FeaturesCommand {
  std::string in;
  std::string out;
  long graph = -1;

  void Register(CLI::App* app) {
    app->add_option("--in", in, "Input graph file")->required();
    app->add_option("--out", out, "Output CSV (stdout when omitted)");
    app->add_option("--graph", graph, "Only this graph index");
  }

  int Run(const Globals& g, std::ostream& out_stream, const Log&) const {
    const GraphSet set = LoadGraphs(in, g.format);
    std::string csv = "graph,node_id,degree,c3,c4\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (graph >= 0 && static_cast<std::size_t>(graph) != i) continue;
      const Graph& gr = set[i];
      for (NodeId v = 0; v < gr.num_nodes(); ++v) {
        csv += std::to_string(i) + "," + std::to_string(v) + "," + std::to_string(gr.degree(v)) +
               "," + FormatDouble(ClusteringCoefficient(gr, v)) + "," +
               FormatDouble(FourNodeClustering(gr, v)) + "\n";
      }
    }
    if (graph >= 0 && static_cast<std::size_t>(graph) >= set.size()) {
      throw Error(ErrorCode::kInvalidArgument, "--graph beyond the set size");
    }
    if (out.empty()) {
      out_stream << csv;
    } else {
      WriteFileAtomic(out, csv);
    }
    return 0;
  }
};

// ---- train ----------------------------------------------------------------

struct TrainCommand {
  std::string data;
  std::string out;
  std::string loss_out;
  EncoderOptions encoder;
  TrainOptions train;

  void Register(CLI::App* app) {
    app->add_option("--data", data, "Training graph file")->required();
    app->add_option("--out", out, "Checkpoint path")->required();
    app->add_option("--loss-out", loss_out, "Loss history CSV (default <out>.loss.csv)");
    encoder.Register(app);
    train.Register(app);
  }

  int Run(const Globals& g, std::ostream& out_stream, const Log& log) const {
    const GraphSet set = LoadGraphs(data, g.format);
    const EncoderConfig ec = encoder.Build();
    const TrainConfig tc = train.Build(g.seed, train.variant);
    log.Event("train.start", {{"encoder", EncoderConfigJson(ec)}, {"train", TrainConfigJson(tc)},
                              {"graphs", set.size()}});
    const TrainResult result = TrainLogged(set, ec, tc, log);
    SaveCheckpoint(result.params, out, &result.head);
    WriteFileAtomic(loss_out.empty() ? out + ".loss.csv" : loss_out, LossCsv(result.epoch_loss));
    out_stream << "trained " << result.steps << " steps, final loss "
               << FormatDouble(result.epoch_loss.back()) << ", checkpoint " << out << "\n";
    return 0;
  }
};

// ---- embed ----------------------------------------------------------------

struct EmbedCommand {
  std::string params;
  std::string in;
  std::string out;
  std::string pair_in;
  std::string pair_out;
  std::string mode = "joint";

  void Register(CLI::App* app) {
    app->add_option("--params", params, "Checkpoint")->required();
    app->add_option("--in", in, "Graph file")->required();
    app->add_option("--out", out, "Embedding CSV")->required();
    app->add_option("--pair-in", pair_in, "Second graph file sharing normalization statistics");
    app->add_option("--pair-out", pair_out, "Embedding CSV for --pair-in");
    app->add_option("--mode", mode, "Normalization statistics")
        ->check(CLI::IsMember({"joint", "batch", "running"}))
        ->capture_default_str();
  }

  int Run(const Globals& g, std::ostream& out_stream, const Log&) const {
    const EncoderParams p = LoadCheckpoint(params);
    const GraphSet set = LoadGraphs(in, g.format);
    const NormMode m = ParseNormMode(mode);
    if (pair_in.empty() != pair_out.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--pair-in and --pair-out go together");
    }
    if (pair_in.empty()) {
      WriteFileAtomic(out, MatrixToCsv(EmbedSet(p, set, m)));
      out_stream << "embedded " << set.size() << " graphs\n";
      return 0;
    }
    const GraphSet other = LoadGraphs(pair_in, g.format);
    const auto [a, b] = EmbedJoint(p, set, other, m);
    WriteFileAtomic(out, MatrixToCsv(a));
    WriteFileAtomic(pair_out, MatrixToCsv(b));
    out_stream << "embedded " << set.size() << " + " << other.size() << " graphs\n";
    return 0;
  }
};

// ---- evaluate -------------------------------------------------------------

struct EvaluateCommand {
  std::string ref;
  std::string gen;
  std::string out;
  MetricOptions metrics;

  void Register(CLI::App* app) {
    app->add_option("--ref", ref, "Reference embedding CSV")->required();
    app->add_option("--gen", gen, "Generated embedding CSV")->required();
    app->add_option("--out", out, "Report JSON (stdout when omitted)");
    metrics.Register(app);
  }

  int Run(const Globals&, std::ostream& out_stream, const Log&) const {
    const MetricReport report = Evaluate(LoadMatrixCsv(ref), LoadMatrixCsv(gen), metrics.Build());
    const std::string text = report.ToJson().dump(2) + "\n";
    if (out.empty()) {
      out_stream << text;
    } else {
      WriteFileAtomic(out, text);
    }
    return 0;
  }
};

// ---- benchmark ------------------------------------------------------------

struct BenchmarkOptions {
  std::string kind = "mix-random";
  double step = 0.01;
  int seeds = 10;
  int clusters = 10;
  int wl_depth = 3;
  std::string sigma_policy = "reference";
  MetricOptions metrics;

  void Register(CLI::App* app) {
    app->add_option("--kind", kind, "Perturbation")
        ->check(CLI::IsMember({"mix-random", "rewire", "mode-collapse", "mode-drop"}))
        ->capture_default_str();
    app->add_option("--step", step, "Ratio step")->capture_default_str();
    app->add_option("--seeds", seeds, "Number of seeds (seed, seed+1, ...)")->capture_default_str();
    app->add_option("--clusters", clusters, "Clusters for the mode experiments")
        ->capture_default_str();
    app->add_option("--wl-depth", wl_depth, "WL kernel depth for clustering")->capture_default_str();
    app->add_option("--sigma-policy", sigma_policy, "RBF bandwidth per seed or per step")
        ->check(CLI::IsMember({"reference", "per-step"}))
        ->capture_default_str();
    metrics.Register(app);
  }

  BenchmarkConfig Build() const {
    BenchmarkConfig c;
    c.kind = ParsePerturbation(kind);
    c.step = step;
    c.num_clusters = clusters;
    c.wl_depth = wl_depth;
    c.metrics = metrics.Build();
    c.sigma_policy = sigma_policy == "reference" ? SigmaPolicy::kReference : SigmaPolicy::kPerStep;
    RatioGrid(c);  // validates the step / cluster count
    return c;
  }
};

void WriteBenchmarkOutputs(const std::vector<BenchmarkCurve>& curves, const json& summary,
                           const std::string& csv_path, const std::string& summary_path,
                           const std::string& plot_path, const std::string& title,
                           bool polynomial) {
  if (!csv_path.empty()) WriteFileAtomic(csv_path, CurvesCsv(curves));
  if (!summary_path.empty()) WriteFileAtomic(summary_path, summary.dump(2) + "\n");
  if (!plot_path.empty()) WriteFileAtomic(plot_path, CurvesSvg(curves, MetricNames(polynomial), title));
}

void PrintRhoTable(std::ostream& out, const json& summary) {
  out << "metric       mean_rho  median_rho\n";
  for (const auto& [name, s] : summary.at("rho").items()) {
    char line[96];
    std::snprintf(line, sizeof(line), "%-12s %8.4f  %10.4f\n", name.c_str(),
                  s.at("mean").get<double>(), s.at("median").get<double>());
    out << line;
  }
}

struct BenchmarkCommand {
  std::string data;
  std::string params;
  std::string out;
  std::string summary;
  std::string plot;
  EncoderOptions encoder;
  BenchmarkOptions bench;

  void Register(CLI::App* app) {
    app->add_option("--data", data, "Reference graph file")->required();
    app->add_option("--params", params, "Checkpoint (random encoder per seed when omitted)");
    app->add_option("--out", out, "Curve CSV")->required();
    app->add_option("--summary", summary, "Summary JSON (default <out>.summary.json)");
    app->add_option("--plot", plot, "SVG plot of metric vs r");
    bench.Register(app);
    encoder.Register(app);
  }

  int Run(const Globals& g, std::ostream& out_stream, const Log& log) const {
    const GraphSet set = LoadGraphs(data, g.format);
    const BenchmarkConfig config = bench.Build();
    const std::vector<std::uint64_t> seeds = SeedRange(g.seed, bench.seeds);
    ParamsForSeed factory;
    json encoder_json;
    if (params.empty()) {
      const EncoderConfig ec = encoder.Build();
      encoder_json = {{"random_init", true}, {"config", EncoderConfigJson(ec)}};
      factory = [ec](std::uint64_t seed) { return InitEncoder(ec, seed); };
    } else {
      const EncoderParams p = LoadCheckpoint(params);
      encoder_json = {{"checkpoint", params}, {"config", EncoderConfigJson(p.config)}};
      factory = [p](std::uint64_t) { return p; };
    }
    log.Event("benchmark.start", {{"kind", bench.kind}, {"seeds", seeds}, {"graphs", set.size()}});
    const auto curves = RunBenchmark(set, factory, config, seeds, g.threads);
    json s = SummaryJson(curves, MetricNames(config.metrics.polynomial));
    s["tool"] = "ggeval";
    s["version"] = kVersion;
    s["command"] = "benchmark";
    s["config"] = {{"data", data},
                   {"benchmark", config.ToJson()},
                   {"encoder", encoder_json},
                   {"seed", g.seed},
                   {"threads", g.threads}};
    WriteBenchmarkOutputs(curves, s, out, summary.empty() ? out + ".summary.json" : summary, plot,
                          bench.kind, config.metrics.polynomial);
    PrintRhoTable(out_stream, s);
    if (!s.at("complete").get<bool>()) {
      out_stream << "warning: some curves stopped early, see the summary errors\n";
    }
    return 0;
  }
};

// ---- verify ---------------------------------------------------------------

CyclePairQuad ParseQuad(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "--prop1 expects a,b,c,d integers, got " + text);
    }
  }
  if (values.size() != 4) {
    throw Error(ErrorCode::kInvalidArgument, "--prop1 expects four integers, got " + text);
  }
  return {values[0], values[1], values[2], values[3]};
}

struct VerifyCommand {
  std::vector<std::string> quads;
  bool ceiling = false;
  int inits = 20;
  EncoderOptions encoder;

  void Register(CLI::App* app) {
    app->add_option("--prop1", quads, "Cycle-pair quadruple a,b,c,d (repeatable)");
    app->add_flag("--ceiling", ceiling, "Check C6 vs two triangles under random encoders");
    app->add_option("--inits", inits, "Random encoders for --ceiling")->capture_default_str();
    encoder.Register(app);
  }

  int Run(const Globals& g, std::ostream& out_stream, const Log&) const {
    std::vector<std::string> chosen = quads;
    bool run_ceiling = ceiling;
    if (chosen.empty() && !ceiling) {
      chosen = {"5,8,6,7", "5,9,6,8", "5,10,7,8"};
      run_ceiling = true;
    }
    bool ok = true;
    if (!chosen.empty()) {
      std::vector<CyclePairReport> reports;
      for (const std::string& q : chosen) reports.push_back(VerifyCyclePairs(ParseQuad(q)));
      out_stream << FormatCyclePairTable(reports);
      for (const auto& r : reports) ok = ok && r.passed();
    }
    if (run_ceiling) {
      const GnnComparison c = CompareUnderRandomEncoders(GenerateCycle(6), GenerateDisjointCycles(3, 2),
                                                         encoder.Build(), inits, g.seed);
      const bool pass = c.max_difference < 1e-7 && c.local_metrics_differ;
      out_stream << "C6 vs 2xC3: max embedding difference " << c.max_difference << " over "
                 << inits << " inits, clustering differs: "
                 << (c.local_metrics_differ ? "yes" : "no") << "  " << (pass ? "PASS" : "FAIL")
                 << "\n";
      ok = ok && pass;
    }
    return ok ? 0 : 1;
  }
};

// ---- reproduce ------------------------------------------------------------

struct ReproduceCommand {
  std::string experiment;
  std::string out_dir = "reproduce-out";
  std::size_t graphs = 100;
  int min_nodes = 60;
  int max_nodes = 100;
  std::string variant = "graphcl";
  bool shared_training = false;
  EncoderOptions encoder;
  TrainOptions train;
  BenchmarkOptions bench;

  void Register(CLI::App* app) {
    app->add_option("--experiment", experiment, "Experiment name")
        ->required()
        ->check(CLI::IsMember({"community-mix-random"}));
    app->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    app->add_option("--graphs", graphs, "Reference set size")->capture_default_str();
    app->add_option("--min-nodes", min_nodes, "Smallest community graph")->capture_default_str();
    app->add_option("--max-nodes", max_nodes, "Largest community graph")->capture_default_str();
    app->add_option("--variant", variant, "graphcl, graphcl2, graphcl3 or random (untrained)")
        ->check(CLI::IsMember({"graphcl", "graphcl2", "graphcl3", "random"}))
        ->capture_default_str();
    app->add_flag("--shared-training", shared_training,
                  "Train one encoder for all seeds instead of one per seed");
    encoder.Register(app);
    train.Register(app, false);
    bench.Register(app);
  }

  int Run(const Globals& g, std::ostream& out_stream, const Log& log) const {
    DatasetOptions opts;
    opts.min_nodes = min_nodes;
    opts.max_nodes = max_nodes;
    const GraphSet set = GenerateDataset(Recipe::kCommunity, graphs, g.seed, opts);
    const EncoderConfig ec = encoder.Build();
    BenchmarkConfig bc = bench.Build();
    const std::vector<std::uint64_t> seeds = SeedRange(g.seed, bench.seeds);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    json train_json = nullptr;
    ParamsForSeed factory;
    std::vector<std::vector<double>> losses;
    auto train_for = [&](std::uint64_t seed) {
      const TrainConfig tc = train.Build(seed, variant);
      TrainResult r = TrainLogged(set, ec, tc, log);
      losses.push_back(r.epoch_loss);
      SaveCheckpoint(r.params, dir / ("checkpoint-" + std::to_string(seed) + ".json"), &r.head);
      return r.params;
    };
    if (variant == "random") {
      factory = [ec](std::uint64_t seed) { return InitEncoder(ec, seed); };
    } else {
      train_json = TrainConfigJson(train.Build(g.seed, variant));
      train_json.erase("seed");
      if (shared_training) {
        const EncoderParams p = train_for(g.seed);
        factory = [p](std::uint64_t) { return p; };
      } else {
        // Training runs sequentially here; only the benchmark is threaded.
        std::map<std::uint64_t, EncoderParams> trained;
        for (std::uint64_t s : seeds) trained.emplace(s, train_for(s));
        factory = [trained](std::uint64_t seed) { return trained.at(seed); };
      }
    }

    log.Event("reproduce.benchmark", {{"seeds", seeds}, {"variant", variant}});
    const auto curves = RunBenchmark(set, factory, bc, seeds, g.threads);
    json s = SummaryJson(curves, MetricNames(bc.metrics.polynomial));
    s["tool"] = "ggeval";
    s["version"] = kVersion;
    s["command"] = "reproduce";
    s["experiment"] = experiment;
    s["config"] = {{"dataset",
                    {{"recipe", "community"},
                     {"graphs", graphs},
                     {"min_nodes", min_nodes},
                     {"max_nodes", max_nodes},
                     {"seed", g.seed}}},
                   {"variant", variant},
                   {"shared_training", shared_training},
                   {"encoder", EncoderConfigJson(ec)},
                   {"train", train_json},
                   {"benchmark", bc.ToJson()}};
    WriteBenchmarkOutputs(curves, s, (dir / "curve.csv").string(), (dir / "summary.json").string(),
                          (dir / "plot.svg").string(), experiment + " (" + variant + ")",
                          bc.metrics.polynomial);
    if (!losses.empty()) {
      std::string csv = "run,epoch,loss\n";
      for (std::size_t run = 0; run < losses.size(); ++run) {
        for (std::size_t e = 0; e < losses[run].size(); ++e) {
          csv += std::to_string(run) + "," + std::to_string(e + 1) + "," +
                 FormatDouble(losses[run][e]) + "\n";
        }
      }
      WriteFileAtomic(dir / "loss.csv", csv);
    }
    PrintRhoTable(out_stream, s);
    return 0;
  }
};

}  // namespace

int Dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Globals globals;
  CLI::App app{"Graph generative model evaluation toolkit", "ggeval"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read options from an INI/TOML file ([subcommand] sections)");
  app.add_option("--seed", globals.seed, "Base random seed")->capture_default_str();
  app.add_option("--threads", globals.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--format", globals.format, "Graph file format")
      ->check(CLI::IsMember({"jsonl"}))
      ->capture_default_str();
  app.add_flag("--quiet", globals.quiet, "Suppress the JSON event log on stderr");
  app.require_subcommand(1);
  app.fallthrough();

  GenerateCommand generate;
  FeaturesCommand features;
  TrainCommand train;
  EmbedCommand embed;
  EvaluateCommand evaluate;
  BenchmarkCommand benchmark;
  VerifyCommand verify;
  ReproduceCommand reproduce;
  CLI::App* generate_app = app.add_subcommand("generate", "Generate a synthetic graph set");
  CLI::App* features_app = app.add_subcommand("features", "Per-node degree, C3 and C4 as CSV");
  CLI::App* train_app = app.add_subcommand("train", "Contrastive pretraining of the encoder");
  CLI::App* embed_app = app.add_subcommand("embed", "Embed a graph set with a checkpoint");
  CLI::App* evaluate_app = app.add_subcommand("evaluate", "Compare two embedding sets");
  CLI::App* benchmark_app = app.add_subcommand("benchmark", "Perturbation benchmark curves");
  CLI::App* verify_app = app.add_subcommand("verify", "Check the cycle-pair construction");
  CLI::App* reproduce_app = app.add_subcommand("reproduce", "Run an end-to-end experiment");
  generate.Register(generate_app);
  features.Register(features_app);
  train.Register(train_app);
  embed.Register(embed_app);
  evaluate.Register(evaluate_app);
  benchmark.Register(benchmark_app);
  verify.Register(verify_app);
  reproduce.Register(reproduce_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (const CLI::App* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return 2;
  }

  const Log log(err, globals);
  try {
    if (generate_app->parsed()) return generate.Run(globals, out, log);
    if (features_app->parsed()) return features.Run(globals, out, log);
    if (train_app->parsed()) return train.Run(globals, out, log);
    if (embed_app->parsed()) return embed.Run(globals, out, log);
    if (evaluate_app->parsed()) return evaluate.Run(globals, out, log);
    if (benchmark_app->parsed()) return benchmark.Run(globals, out, log);
    if (verify_app->parsed()) return verify.Run(globals, out, log);
    if (reproduce_app->parsed()) return reproduce.Run(globals, out, log);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int Dispatch(int argc, const char* const* argv) { return Dispatch(argc, argv, std::cout, std::cerr); }

}  // namespace ggeval
