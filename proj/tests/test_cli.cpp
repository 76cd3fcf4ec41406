#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "slateval/estimators.hpp"
#include "slateval/jsonl.hpp"
#include "slateval/simulator.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(testing::TempDir()) /
           ("cli_" + std::string(
                         testing::UnitTest::GetInstance()
                             ->current_test_info()
                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CmdResult run(const std::string& args) const {
    const fs::path out = dir_ / "_stdout";
    const fs::path err = dir_ / "_stderr";
    const std::string cmd = std::string(SLATEVAL_CLI_PATH) + " " + args +
                            " > " + out.string() + " 2> " + err.string();
    const int rc = std::system(cmd.c_str());
    CmdResult result;
    result.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
  }

  std::string simulate_args(const std::string& out_dir) const {
    return "simulate --out-dir " + out_dir +
           " --n 200 --contexts 4 --candidates 5 --slate-size 3"
           " --cascade probabilistic --rho 0.5 --seed 11";
  }

  fs::path dir_;
};

TEST_F(CliTest, VersionFlag) {
  const CmdResult r = run("--version");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "slateval 0.1.0\n");
}

TEST_F(CliTest, NoSubcommandFails) {
  const CmdResult r = run("");
  EXPECT_NE(r.exit_code, 0);
}

TEST_F(CliTest, SimulateWritesDeterministicFiles) {
  const fs::path a = dir_ / "a";
  const fs::path b = dir_ / "b";
  ASSERT_EQ(run(simulate_args(a.string())).exit_code, 0);
  ASSERT_EQ(run(simulate_args(b.string())).exit_code, 0);

  for (const char* name : {"logs.jsonl", "world.json", "config.json"}) {
    EXPECT_TRUE(fs::exists(a / name)) << name;
  }
  EXPECT_EQ(slurp(a / "logs.jsonl"), slurp(b / "logs.jsonl"));
  EXPECT_EQ(slurp(a / "world.json"), slurp(b / "world.json"));

  const slateval::Dataset ds = slateval::load_jsonl(a / "logs.jsonl");
  EXPECT_EQ(ds.size(), 200u);
  EXPECT_EQ(ds.slate_size(), 3);

  const json cfg = json::parse(slurp(a / "config.json"));
  EXPECT_EQ(cfg["command"], "simulate");
  EXPECT_EQ(cfg["cascade"]["mode"], "probabilistic");
  EXPECT_EQ(cfg["seed"], 11);
}

TEST_F(CliTest, EstimateOnlineMatchesLibrary) {
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(run(simulate_args(sim.string())).exit_code, 0);
  const CmdResult r = run("estimate --logs " + (sim / "logs.jsonl").string() +
                          " --estimator online");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json report = json::parse(r.out);
  const slateval::Dataset ds = slateval::load_jsonl(sim / "logs.jsonl");
  EXPECT_EQ(report["report"]["value"].get<double>(),
            slateval::on_policy_mean(ds).value);
  EXPECT_EQ(report["report"]["n_used"], 200);
}

TEST_F(CliTest, EstimateWritesOutFile) {
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(run(simulate_args(sim.string())).exit_code, 0);
  const fs::path out = dir_ / "report.json";
  const CmdResult r = run("estimate --logs " + (sim / "logs.jsonl").string() +
                          " --estimator rips:0.1 --target softmax:desc:0.5" +
                          " --world " + (sim / "world.json").string() +
                          " --out " + out.string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(slurp(out), r.out);
  const json report = json::parse(r.out);
  EXPECT_EQ(report["config"]["estimator"]["threshold"].get<double>(), 0.1);
  EXPECT_EQ(report["report"]["chosen_lookbacks"].size(), 3u);
}

TEST_F(CliTest, ValidationFailuresExitTwo) {
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(run(simulate_args(sim.string())).exit_code, 0);
  const std::string logs = (sim / "logs.jsonl").string();

  CmdResult r = run("estimate --logs " + logs + " --estimator banana");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("unknown estimator"), std::string::npos) << r.err;

  r = run("estimate --logs /no/such/file.jsonl --estimator online");
  EXPECT_EQ(r.exit_code, 2);

  r = run("estimate --logs " + logs + " --estimator ips");
  EXPECT_EQ(r.exit_code, 2);  // missing --target

  r = run("estimate --logs " + logs +
          " --estimator online --threshold 0.5");
  EXPECT_EQ(r.exit_code, 2);  // threshold without rips
}

TEST_F(CliTest, NoOverlapExitsThree) {
  // Deterministic sorted logging, opposite sorted target: the target puts
  // zero mass on every logged first position.
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(
      run(simulate_args(sim.string()) + " --policy sorted:desc").exit_code, 0);
  const CmdResult r =
      run("estimate --logs " + (sim / "logs.jsonl").string() +
          " --estimator rips --target sorted:asc --world " +
          (sim / "world.json").string());
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("no overlap"), std::string::npos) << r.err;
}

TEST_F(CliTest, TruthMatchesLibrary) {
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(run(simulate_args(sim.string())).exit_code, 0);
  const CmdResult r = run("truth --world " + (sim / "world.json").string() +
                          " --target sorted:desc --slate-size 3");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json out = json::parse(r.out);
  EXPECT_EQ(out["truth"]["method"], "exact");

  const slateval::SimWorld world =
      slateval::load_world(sim / "world.json");
  slateval::ScoreSortedPolicy target(
      slateval::score_table_from_world(world),
      slateval::SortDirection::descending);
  const slateval::TruthResult expected =
      slateval::true_value(world, target, 3);
  EXPECT_EQ(out["truth"]["value"].get<double>(), expected.value);
}

TEST_F(CliTest, GridEndToEnd) {
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(run(simulate_args(sim.string())).exit_code, 0);
  const fs::path cfg_path = dir_ / "grid.json";
  {
    std::ofstream out(cfg_path);
    out << R"({
      "logging_policies": ["uniform"],
      "target_policies": ["sorted:desc", "uniform"],
      "estimators": ["online", "rips:0.05"],
      "slate_size": 3,
      "n_per_repeat": 150,
      "repeats": 2,
      "truth_mc_samples": 10000,
      "seed": 3,
      "jobs": 2
    })";
  }
  const fs::path out_dir = dir_ / "grid";
  const CmdResult r = run("grid --config " + cfg_path.string() + " --world " +
                          (sim / "world.json").string() + " --out-dir " +
                          out_dir.string() + " --plot-data");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (const char* name :
       {"grid_rows.csv", "grid_summary.json", "grid_plot.csv", "config.json"}) {
    EXPECT_TRUE(fs::exists(out_dir / name)) << name;
  }
  const json summary = json::parse(slurp(out_dir / "grid_summary.json"));
  EXPECT_EQ(summary["cells"].size(), 4u);
  const json echo = json::parse(slurp(out_dir / "config.json"));
  EXPECT_EQ(echo["n_per_repeat"], 150);
  EXPECT_EQ(echo["world"], (sim / "world.json").string());
}

TEST_F(CliTest, SweepThresholdEndToEnd) {
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(run(simulate_args(sim.string())).exit_code, 0);
  const fs::path out_dir = dir_ / "sweep";
  const CmdResult r = run(
      "sweep-threshold --world " + (sim / "world.json").string() +
      " --logging uniform --target softmax:desc:0.7 --out-dir " +
      out_dir.string() +
      " --t-values 1.0,0.01 --n 150 --repeats 2 --slate-size 3"
      " --truth-mc 10000 --seed 4");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (const char* name : {"threshold_rows.csv", "threshold_summary.json",
                           "config.json"}) {
    EXPECT_TRUE(fs::exists(out_dir / name)) << name;
  }
  const json echo = json::parse(slurp(out_dir / "config.json"));
  ASSERT_EQ(echo["t_values"].size(), 2u);
  EXPECT_EQ(echo["t_values"][0], 1.0);
}

TEST_F(CliTest, BadSweepListExitsTwo) {
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(run(simulate_args(sim.string())).exit_code, 0);
  const CmdResult r = run(
      "sweep-threshold --world " + (sim / "world.json").string() +
      " --target uniform --out-dir " + (dir_ / "x").string() +
      " --t-values 1.0,banana");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("--t-values"), std::string::npos) << r.err;
}

}  // namespace
