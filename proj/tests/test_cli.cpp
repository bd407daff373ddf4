// Copyright 2026 The KA-GNN Authors.
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end runs of the command-line tools.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_support.hpp"

namespace kagnn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::fixture_path;
using testing::read_file;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("kagnn_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs `args` through the shell; stdout and stderr land in files under the
  // scratch directory. Returns the exit status.
  int run(const std::string &binary, const std::string &args, const std::string &env = "") {
    const std::string cmd = env + " '" + binary + "' " + args + " >'" + path("stdout") +
                            "' 2>'" + path("stderr") + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  int kagnn(const std::string &args, const std::string &env = "") {
    return run(KAGNN_CLI, args, env);
  }
  std::string path(const std::string &name) const { return (dir_ / name).string(); }
  std::string out() const { return read_file(path("stdout")); }
  std::string err() const { return read_file(path("stderr")); }
  json load(const std::string &name) const { return json::parse(read_file(path(name))); }

  std::string parity_data(std::size_t count = 40) {
    const auto file = path("parity.jsonl");
    EXPECT_EQ(run(KAGNN_SYNTH, "parity --count " + std::to_string(count) +
                                   " --seed 3 -o '" + file + "'"), 0) << err();
    return file;
  }

  fs::path dir_;
};

std::size_t count_lines(const std::string &text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// ---------------------------------------------------------------------------
// featurize

TEST_F(CliTest, FeaturizeEmptyFile) {
  std::ofstream(path("empty.jsonl")).close();
  EXPECT_EQ(kagnn("featurize '" + path("empty.jsonl") + "'"), 0) << err();
  EXPECT_EQ(out(), "");
  EXPECT_NE(err().find("featurized 0 molecules"), std::string::npos) << err();
}

TEST_F(CliTest, FeaturizeSdfFixture) {
  EXPECT_EQ(kagnn("featurize '" + fixture_path("three.sdf") + "' --format sdf"), 0) << err();
  EXPECT_EQ(count_lines(out()), 3u);
  const auto first = json::parse(out().substr(0, out().find('\n')));
  EXPECT_EQ(first.at("id"), "water");
  EXPECT_EQ(first.at("n_atoms"), 3);
  EXPECT_EQ(first.at("node_features")[0].size(), 92u);
  EXPECT_EQ(first.at("edges")[0].at("features").size(), 21u);
}

TEST_F(CliTest, FeaturizeIsByteIdenticalAcrossRuns) {
  const auto in = fixture_path("corpus.jsonl");
  ASSERT_EQ(kagnn("featurize '" + in + "' -o '" + path("a.jsonl") + "'"), 0) << err();
  ASSERT_EQ(kagnn("featurize '" + in + "' -o '" + path("b.jsonl") + "'"), 0) << err();
  const auto a = read_file(path("a.jsonl"));
  EXPECT_EQ(count_lines(a), 5u);
  EXPECT_EQ(a, read_file(path("b.jsonl")));
}

TEST_F(CliTest, FeaturizeCutoffZeroKeepsOnlyBonds) {
  ASSERT_EQ(kagnn("featurize '" + fixture_path("corpus.jsonl") + "' --cutoff 0"), 0);
  EXPECT_NE(err().find("0 cutoff edges"), std::string::npos) << err();
}

TEST_F(CliTest, FeaturizeBadInputIsDataError) {
  std::ofstream(path("bad.jsonl")) << "{\"atoms\": [{\"element\": \"Qq\", \"xyz\": [0,0,0]}]}\n";
  EXPECT_EQ(kagnn("featurize '" + path("bad.jsonl") + "'"), 2);
  EXPECT_NE(err().find("bad.jsonl:1"), std::string::npos) << err();
  EXPECT_EQ(kagnn("featurize '" + path("missing.jsonl") + "'"), 2);
}

// ---------------------------------------------------------------------------
// usage

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(kagnn(""), 1);
  EXPECT_EQ(kagnn("frobnicate"), 1);
  EXPECT_EQ(kagnn("featurize '" + fixture_path("corpus.jsonl") + "' --no-such-flag"), 1);
  EXPECT_EQ(kagnn("train --data x"), 1);
  EXPECT_EQ(kagnn("--help"), 0);
}

// ---------------------------------------------------------------------------
// train / eval

TEST_F(CliTest, TrainZeroEpochs) {
  const auto data = parity_data();
  ASSERT_EQ(kagnn("train --data '" + data + "' --out '" + path("run") +
                  "' --epochs 0 --hidden-dim 8"), 0) << err();
  const auto report = load("run/report.json");
  ASSERT_EQ(report.at("runs").size(), 1u);
  EXPECT_TRUE(report.at("runs")[0].at("epochs").empty());
  EXPECT_EQ(report.at("runs")[0].at("best_epoch"), 0);
  EXPECT_TRUE(fs::exists(path("run/run_0/checkpoint.json")));
  EXPECT_EQ(count_lines(read_file(path("run/run_0/epochs.csv"))), 1u);
}

TEST_F(CliTest, TrainRepeatsAggregate) {
  const auto data = parity_data();
  ASSERT_EQ(kagnn("train --data '" + data + "' --out '" + path("run") +
                  "' --repeats 2 --seed 1 --epochs 2 --hidden-dim 8 --batch-size 16 --lr 1e-3"),
            0) << err();
  const auto report = load("run/report.json");
  const auto &runs = report.at("runs");
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_EQ(runs[0].at("config").at("seed"), 1);
  EXPECT_EQ(runs[1].at("config").at("seed"), 2);
  const double a = runs[0].at("test_auc"), b = runs[1].at("test_auc");
  EXPECT_NEAR(report.at("test_auc_mean").get<double>(), (a + b) / 2, 1e-15);
  EXPECT_NEAR(report.at("test_auc_std").get<double>(), std::abs(a - b) / 2, 1e-15);
  EXPECT_TRUE(fs::exists(path("run/run_1/checkpoint.json")));
  EXPECT_TRUE(fs::exists(path("run/metadata.json")));

  // Same flags again: JSON outputs are byte-identical (timestamps live in
  // metadata.json only).
  ASSERT_EQ(kagnn("train --data '" + data + "' --out '" + path("again") +
                  "' --repeats 2 --seed 1 --epochs 2 --hidden-dim 8 --batch-size 16 --lr 1e-3"),
            0) << err();
  EXPECT_EQ(read_file(path("run/report.json")), read_file(path("again/report.json")));
  EXPECT_EQ(read_file(path("run/run_1/checkpoint.json")),
            read_file(path("again/run_1/checkpoint.json")));
}

TEST_F(CliTest, TrainConfigFileAndOverrides) {
  const auto data = parity_data();
  std::ofstream(path("config.json")) << R"({"epochs": 1, "hidden_dim": 8, "lr": 0.001,
                                           "variant": "kagat", "K": 1})";
  ASSERT_EQ(kagnn("train --data '" + data + "' --out '" + path("run") + "' --config '" +
                  path("config.json") + "' --k 3"), 0) << err();
  const auto cfg = load("run/report.json").at("runs")[0].at("config");
  EXPECT_EQ(cfg.at("variant"), "kagat");
  EXPECT_EQ(cfg.at("K"), 3);
  EXPECT_EQ(cfg.at("epochs"), 1);
  EXPECT_EQ(cfg.at("hidden_dim"), 8);
}

TEST_F(CliTest, TrainConfigErrorsNameTheField) {
  const auto data = parity_data(20);
  std::ofstream(path("bad.json")) << R"({"epochs": 1, "learning_rat": 0.1})";
  EXPECT_EQ(kagnn("train --data '" + data + "' --out '" + path("run") + "' --config '" +
                  path("bad.json") + "'"), 1);
  EXPECT_NE(err().find("learning_rat"), std::string::npos) << err();
  EXPECT_EQ(kagnn("train --data '" + data + "' --out '" + path("run") + "' --lr -1"), 1);
  EXPECT_NE(err().find("'lr'"), std::string::npos) << err();
  EXPECT_EQ(kagnn("train --data '" + data + "' --out '" + path("run") + "' --batch-size 0"), 1);
  EXPECT_NE(err().find("batch_size"), std::string::npos) << err();
}

TEST_F(CliTest, TrainDataErrors) {
  std::ofstream(path("bad.jsonl")) << "{\"atoms\": []}\n";
  EXPECT_EQ(kagnn("train --data '" + path("bad.jsonl") + "' --out '" + path("run") + "'"), 2);
  EXPECT_EQ(kagnn("train --data '" + path("nope.jsonl") + "' --out '" + path("run") + "'"), 2);
}

TEST_F(CliTest, TrainWithSplitFileAndEval) {
  const auto data = parity_data(20);
  json split { { "train", json::array() }, { "valid", json::array() }, { "test", json::array() } };
  for (int i = 0; i < 20; ++i)
    split[i < 12 ? "train" : (i < 16 ? "valid" : "test")].push_back(i);
  std::ofstream(path("split.json")) << split.dump();
  ASSERT_EQ(kagnn("train --data '" + data + "' --split '" + path("split.json") + "' --out '" +
                  path("run") + "' --epochs 1 --hidden-dim 8"), 0) << err();
  const auto run0 = load("run/report.json").at("runs")[0];
  EXPECT_EQ(run0.at("split_provenance"), "external_file");
  EXPECT_EQ(run0.at("n_test"), 4);

  ASSERT_EQ(kagnn("eval --checkpoint '" + path("run/run_0/checkpoint.json") + "' --data '" +
                  data + "' --split '" + path("split.json") + "' -o '" + path("eval.json") + "'"),
            0) << err();
  const auto ev = load("eval.json");
  EXPECT_EQ(ev.at("n"), 4);
  EXPECT_NEAR(ev.at("auc").get<double>(), run0.at("test_auc").get<double>(), 1e-15);
  EXPECT_EQ(ev.at("predictions").size(), 4u);
}

TEST_F(CliTest, TrainDivergenceIsNumericError) {
  const auto data = parity_data();
  EXPECT_EQ(kagnn("train --data '" + data + "' --out '" + path("run") +
                  "' --epochs 2 --hidden-dim 8 --batch-size 8 --lr 1e308"), 3);
  EXPECT_NE(err().find("batch"), std::string::npos) << err();
}

TEST_F(CliTest, DataDirEnvironmentVariable) {
  parity_data();
  EXPECT_EQ(kagnn("train --data parity.jsonl --out '" + path("run") + "' --epochs 0 --hidden-dim 4",
                  "KAGNN_DATA_DIR='" + dir_.string() + "'"), 0) << err();
}

// ---------------------------------------------------------------------------
// gradcheck / fitfn / sweep

TEST_F(CliTest, GradcheckMinimalPasses) {
  EXPECT_EQ(kagnn("gradcheck --k 1 --layers 1 --graphs 2 -o '" + path("gc.json") + "'"), 0)
      << out() << err();
  EXPECT_NE(out().find("PASSED"), std::string::npos) << out();
  EXPECT_TRUE(fs::exists(path("gc.json")));
}

TEST_F(CliTest, GradcheckCorruptedGradientFails) {
  const int code = kagnn("gradcheck --k 1 --layers 1 --graphs 2 --corrupt");
  EXPECT_NE(code, 0);
  EXPECT_EQ(code, 3);
  EXPECT_NE(out().find("FAILED"), std::string::npos) << out();
}

TEST_F(CliTest, FitfnWritesCsvAndSummary) {
  ASSERT_EQ(kagnn("fitfn --target sin --steps 100 --out '" + path("fit") + "'"), 0) << err();
  for (const char *f : { "fit/sin_kan.csv", "fit/sin_mlp.csv", "fit/summary.json" })
    EXPECT_TRUE(fs::exists(path(f))) << f;
  const auto summary = load("fit/summary.json");
  EXPECT_EQ(summary.at("results").size(), 2u);
  EXPECT_EQ(read_file(path("fit/sin_kan.csv")).substr(0, 19), "x,target,prediction");
  EXPECT_EQ(kagnn("fitfn --target nonsense --out '" + path("fit2") + "'"), 1);
}

TEST_F(CliTest, FitfnSweepK) {
  ASSERT_EQ(kagnn("fitfn --target polynomial --sweep-k 5,2 --steps 50 --out '" + path("fit") + "'"),
            0) << err();
  const auto sweep = load("fit/sweep_k.json");
  ASSERT_EQ(sweep.at("results").size(), 2u);
  EXPECT_EQ(sweep.at("results")[0].at("K"), 2);
  EXPECT_TRUE(fs::exists(path("fit/polynomial_K5.csv")));
}

TEST_F(CliTest, SweepCutoffReportsEdgeCounts) {
  const auto data = parity_data();
  ASSERT_EQ(kagnn("sweep --data '" + data + "' --out '" + path("sw") +
                  "' --grid cutoff --epochs 1 --hidden-dim 4"), 0) << err();
  const auto rows = load("sw/sweep.json").at("rows");
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].at("value"), 0.0);
  EXPECT_EQ(rows[0].at("cutoff_edges"), 0);
  EXPECT_GT(rows[5].at("cutoff_edges").get<int>(), 0);
  EXPECT_EQ(rows[0].at("covalent_edges"), rows[5].at("covalent_edges"));
}

}  // namespace
}  // namespace kagnn
