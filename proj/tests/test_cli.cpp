#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ggeval/cli.hpp"
#include "ggeval/csv.hpp"
#include "ggeval/encoder.hpp"
#include "ggeval/graph_io.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace ggeval {
namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ggeval");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = Dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Cli, VerifyCyclePairQuad) {
  const Outcome o = Cli({"verify", "--prop1", "5,8,6,7"});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("PASS"), std::string::npos);
}

TEST(Cli, VerifyDefaultsIncludeCeiling) {
  const Outcome o = Cli({"--quiet", "verify", "--inits", "3"});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("5,10,7,8"), std::string::npos);
}

TEST(Cli, VerifyRejectsBadQuad) {
  EXPECT_EQ(Cli({"verify", "--prop1", "4,9,6,7"}).code, 1);
  EXPECT_EQ(Cli({"verify", "--prop1", "5,8"}).code, 2);
}

TEST(Cli, UsageErrors) {
  const Outcome unknown = Cli({"verify", "--bogus"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
  EXPECT_EQ(Cli({}).code, 2);
  EXPECT_EQ(Cli({"generate", "--recipe", "ego", "--out", "x"}).code, 2);
  EXPECT_EQ(Cli({"--version"}).out, std::string(kVersion) + "\n");
}

TEST(Cli, MissingInputFileExitsOne) {
  TempDir dir("cli_missing");
  const Outcome o = Cli({"features", "--in", (dir / "nope.jsonl").string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("Io"), std::string::npos);
}

TEST(Cli, GenerateFeaturesTrainEmbedEvaluate) {
  TempDir dir("cli_pipeline");
  const std::string data = (dir / "data.jsonl").string();
  const std::string other = (dir / "other.jsonl").string();
  ASSERT_EQ(Cli({"--quiet", "--seed", "3", "generate", "--recipe", "community", "--count", "12",
                 "--min-nodes", "20", "--max-nodes", "24", "--out", data})
                .code,
            0);
  ASSERT_EQ(Cli({"--quiet", "--seed", "4", "generate", "--recipe", "lobster", "--count", "12",
                 "--out", other})
                .code,
            0);
  EXPECT_EQ(LoadGraphs(data).size(), 12u);

  const Outcome feats = Cli({"features", "--in", data, "--graph", "0"});
  EXPECT_EQ(feats.code, 0);
  EXPECT_EQ(feats.out.substr(0, feats.out.find('\n')), "graph,node_id,degree,c3,c4");

  const std::string ckpt = (dir / "ckpt.json").string();
  const Outcome train = Cli({"--quiet", "train", "--data", data, "--out", ckpt, "--epochs", "2",
                             "--hidden", "4", "--batch-size", "6"});
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_LE(MaxSpectralNorm(LoadCheckpoint(ckpt)), 1.0 + 1e-6);
  EXPECT_TRUE(std::filesystem::exists(ckpt + ".loss.csv"));

  const std::string ref = (dir / "ref.csv").string();
  const std::string gen = (dir / "gen.csv").string();
  ASSERT_EQ(Cli({"--quiet", "embed", "--params", ckpt, "--in", data, "--out", ref, "--pair-in",
                 other, "--pair-out", gen})
                .code,
            0);
  EXPECT_EQ(LoadMatrixCsv(ref).rows(), 12);
  EXPECT_EQ(LoadMatrixCsv(ref).cols(), 12);

  const Outcome same = Cli({"--quiet", "evaluate", "--ref", ref, "--gen", ref});
  ASSERT_EQ(same.code, 0) << same.err;
  const auto report = nlohmann::json::parse(same.out);
  EXPECT_EQ(report.at("precision").get<double>(), 1.0);
  EXPECT_LT(std::abs(report.at("fd").get<double>()), 1e-6);

  const std::string report_path = (dir / "report.json").string();
  ASSERT_EQ(Cli({"--quiet", "evaluate", "--ref", ref, "--gen", gen, "--poly", "--out",
                 report_path})
                .code,
            0);
  EXPECT_TRUE(nlohmann::json::parse(Slurp(report_path)).contains("mmd_poly"));
}

TEST(Cli, BenchmarkWritesOutputs) {
  TempDir dir("cli_bench");
  const std::string data = (dir / "data.jsonl").string();
  ASSERT_EQ(Cli({"--quiet", "generate", "--recipe", "community", "--count", "12", "--min-nodes",
                 "20", "--max-nodes", "24", "--out", data})
                .code,
            0);
  const std::string curve = (dir / "curve.csv").string();
  const std::string plot = (dir / "plot.svg").string();
  const Outcome o = Cli({"--quiet", "benchmark", "--data", data, "--out", curve, "--kind",
                         "rewire", "--step", "0.5", "--seeds", "2", "--hidden", "4", "--plot",
                         plot});
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string csv = Slurp(curve);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  const auto summary = nlohmann::json::parse(Slurp(curve + ".summary.json"));
  EXPECT_EQ(summary.at("rho").at("fd").at("per_seed").size(), 2u);
  EXPECT_EQ(Slurp(plot).rfind("<svg", 0), 0u);
}

TEST(Cli, EventLogIsJsonLines) {
  TempDir dir("cli_log");
  const Outcome o = Cli({"generate", "--recipe", "grid", "--count", "2", "--out",
                         (dir / "g.jsonl").string()});
  ASSERT_EQ(o.code, 0);
  std::istringstream lines(o.err);
  std::string line;
  int events = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    EXPECT_TRUE(nlohmann::json::accept(line)) << line;
    ++events;
  }
  EXPECT_GT(events, 0);
}

TEST(Cli, ConfigFileSections) {
  TempDir dir("cli_config");
  const std::string out = (dir / "g.jsonl").string();
  {
    std::ofstream cfg(dir / "run.ini");
    cfg << "seed=5\n[generate]\nrecipe=grid\ncount=3\nout=" << out << "\n";
  }
  const Outcome o = Cli({"--quiet", "--config", (dir / "run.ini").string(), "generate"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(LoadGraphs(out).size(), 3u);
}

TEST(Cli, ReproduceIsDeterministic) {
  TempDir dir("cli_reproduce");
  auto run = [&](const std::string& sub) {
    const Outcome o = Cli({"--quiet", "--seed", "2", "reproduce", "--experiment",
                           "community-mix-random", "--out-dir", (dir / sub).string(), "--graphs",
                           "12", "--min-nodes", "20", "--max-nodes", "24", "--epochs", "1",
                           "--hidden", "4", "--step", "0.5", "--seeds", "2"});
    EXPECT_EQ(o.code, 0) << o.err;
    return Slurp(dir / sub / "summary.json");
  };
  const std::string a = run("a");
  const std::string b = run("b");
  EXPECT_EQ(a, b);
  const auto summary = nlohmann::json::parse(a);
  EXPECT_EQ(summary.at("seeds"), nlohmann::json({2, 3}));
  EXPECT_EQ(summary.at("config").at("variant"), "graphcl");
  for (const char* f : {"curve.csv", "plot.svg", "loss.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "a" / f)) << f;
  }
}

}  // namespace
}  // namespace ggeval
