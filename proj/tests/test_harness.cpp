#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "slateval/errors.hpp"
#include "slateval/harness.hpp"

namespace {

using namespace slateval;
namespace fs = std::filesystem;

SimWorld small_world(std::uint64_t seed = 201) {
  CascadeConfig cascade;
  cascade.mode = CascadeMode::probabilistic;
  cascade.rho = 0.5;
  return generate_world(4, 4, cascade, seed);
}

GridConfig small_grid_config() {
  GridConfig cfg;
  cfg.logging_policies = {parse_policy_spec("uniform"),
                          parse_policy_spec("softmax:1.0")};
  cfg.target_policies = {parse_policy_spec("sorted:desc"),
                         parse_policy_spec("uniform")};
  cfg.estimators = {parse_estimator_spec("online"), parse_estimator_spec("ips"),
                    parse_estimator_spec("rips:0.05")};
  cfg.slate_size = 3;
  cfg.n_per_repeat = 300;
  cfg.repeats = 3;
  cfg.truth_mc_samples = 30000;
  cfg.seed = 5;
  cfg.jobs = 1;
  return cfg;
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

std::size_t line_count(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

TEST(CiHalfWidth, NormalApproximation) {
  const std::vector<double> xs{1.0, 2.0, 3.0};
  // sd = 1, so the half width is 1.96 / sqrt(3).
  EXPECT_NEAR(ci_half_width(xs), 1.96 / std::sqrt(3.0), 1e-12);
  EXPECT_TRUE(std::isnan(ci_half_width(std::vector<double>{1.0})));
}

TEST(Rmse, RootMeanSquare) {
  const std::vector<double> est{1.0, 3.0};
  const std::vector<double> tru{0.0, 0.0};
  EXPECT_NEAR(rmse(est, tru), std::sqrt(5.0), 1e-12);
}

TEST(RunGrid, ShapesAndOrdering) {
  const GridConfig cfg = small_grid_config();
  const GridResult result = run_grid(small_world(), cfg);

  ASSERT_EQ(result.cells.size(), 2u * 2u * 3u);
  // Logging-major, then target, then estimator.
  EXPECT_EQ(result.cells[0].logging, "uniform");
  EXPECT_EQ(result.cells[0].target, "sorted:desc");
  EXPECT_EQ(result.cells[0].estimator, "online");
  EXPECT_EQ(result.cells[1].estimator, "ips");
  EXPECT_EQ(result.cells[3].target, "uniform");
  EXPECT_EQ(result.cells[6].logging, "softmax:desc:1");

  ASSERT_EQ(result.truths.size(), 2u);
  EXPECT_TRUE(result.truths.contains("sorted:desc"));
  EXPECT_TRUE(result.truths.contains("uniform"));

  ASSERT_EQ(result.rmse.size(), 2u * 3u);
  for (const auto& row : result.rmse) EXPECT_EQ(row.n_targets, 2);

  for (const auto& cell : result.cells) {
    EXPECT_EQ(cell.n_ok, 3);
    ASSERT_EQ(cell.repeats.size(), 3u);
    EXPECT_TRUE(std::isfinite(cell.mean));
    EXPECT_TRUE(std::isfinite(cell.ci_half_width));
    EXPECT_TRUE(cell.first_error.empty());
  }
}

TEST(RunGrid, DeterministicAcrossJobCounts) {
  GridConfig cfg = small_grid_config();
  const GridResult serial = run_grid(small_world(), cfg);
  cfg.jobs = 4;
  const GridResult parallel = run_grid(small_world(), cfg);
  ASSERT_EQ(serial.cells.size(), parallel.cells.size());
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    EXPECT_EQ(serial.cells[i].mean, parallel.cells[i].mean) << i;
    EXPECT_EQ(serial.cells[i].ci_half_width, parallel.cells[i].ci_half_width);
  }
  for (const auto& [name, truth] : serial.truths) {
    EXPECT_EQ(truth.value, parallel.truths.at(name).value);
  }
}

TEST(RunGrid, RecordsEstimatorFailuresPerCell) {
  GridConfig cfg = small_grid_config();
  // pi requires uniform full-pool logging; the softmax cells must fail
  // without aborting the grid.
  cfg.estimators.push_back(parse_estimator_spec("pi"));
  cfg.slate_size = 4;  // full pool so the uniform cells can pass
  const GridResult result = run_grid(small_world(), cfg);
  int failed_cells = 0;
  for (const auto& cell : result.cells) {
    if (cell.estimator != "pi") continue;
    if (cell.logging == "uniform") {
      EXPECT_EQ(cell.n_ok, 3);
    } else {
      EXPECT_EQ(cell.n_ok, 0);
      EXPECT_TRUE(std::isnan(cell.mean));
      EXPECT_NE(cell.first_error.find("pi"), std::string::npos);
      ++failed_cells;
    }
  }
  EXPECT_EQ(failed_cells, 2);
  // RMSE rows for pi under softmax logging cover zero targets.
  for (const auto& row : result.rmse) {
    if (row.estimator == "pi" && row.logging != "uniform") {
      EXPECT_EQ(row.n_targets, 0);
      EXPECT_TRUE(std::isnan(row.rmse));
    }
  }
}

TEST(RunGrid, ValidatesConfig) {
  GridConfig cfg = small_grid_config();
  cfg.repeats = 1;
  EXPECT_THROW(run_grid(small_world(), cfg), ValidationError);

  cfg = small_grid_config();
  cfg.estimators.push_back(parse_estimator_spec("ips"));
  EXPECT_THROW(run_grid(small_world(), cfg), ValidationError);

  cfg = small_grid_config();
  cfg.target_policies.push_back(parse_policy_spec("uniform"));
  EXPECT_THROW(run_grid(small_world(), cfg), ValidationError);
}

TEST(GridWriters, EmitExpectedFiles) {
  const GridConfig cfg = small_grid_config();
  const GridResult result = run_grid(small_world(), cfg);
  const fs::path dir = fs::path(testing::TempDir()) / "grid_writers";
  fs::create_directories(dir);

  write_grid_rows_csv(result, dir / "rows.csv");
  EXPECT_EQ(first_line(dir / "rows.csv"),
            "logging,target,estimator,repeat,value,n_used,mean_lookback,"
            "chosen_lookbacks,chosen_ess,error");
  EXPECT_EQ(line_count(dir / "rows.csv"), 1u + 12u * 3u);

  write_grid_plot_csv(result, dir / "plot.csv");
  EXPECT_EQ(first_line(dir / "plot.csv"),
            "logging,target,estimator,mean,ci_half_width,truth,abs_error");
  EXPECT_EQ(line_count(dir / "plot.csv"), 1u + 12u);

  write_grid_summary_json(result, cfg, dir / "summary.json");
  std::ifstream in(dir / "summary.json");
  nlohmann::json j;
  in >> j;
  EXPECT_TRUE(j.contains("config"));
  EXPECT_TRUE(j.contains("cells"));
  EXPECT_TRUE(j.contains("truths"));
  EXPECT_TRUE(j.contains("rmse"));
  EXPECT_EQ(j["cells"].size(), 12u);
  EXPECT_EQ(j["config"]["repeats"], 3);

  fs::remove_all(dir);
}

TEST(SweepThreshold, LookbackGrowsAsThresholdDrops) {
  ThresholdSweepConfig cfg;
  cfg.logging = parse_policy_spec("uniform");
  cfg.target = parse_policy_spec("softmax:0.7");
  cfg.t_values = {1.0, 0.1, 0.001};
  cfg.slate_size = 3;
  cfg.n_per_repeat = 400;
  cfg.repeats = 3;
  cfg.truth_mc_samples = 20000;
  cfg.seed = 6;
  const ThresholdSweepResult result = sweep_threshold(small_world(), cfg);

  ASSERT_EQ(result.rows.size(), 3u);
  EXPECT_DOUBLE_EQ(result.rows[0].threshold, 1.0);
  // At t = 1 no extension passes the gate.
  EXPECT_DOUBLE_EQ(result.rows[0].mean_lookback, 0.0);
  for (std::size_t i = 1; i < result.rows.size(); ++i) {
    EXPECT_GE(result.rows[i].mean_lookback,
              result.rows[i - 1].mean_lookback - 1e-12);
  }
  for (const auto& row : result.rows) {
    EXPECT_EQ(row.cell.n_ok, 3);
    EXPECT_DOUBLE_EQ(row.cell.truth, result.truth.value);
  }

  const fs::path dir = fs::path(testing::TempDir()) / "threshold_writers";
  fs::create_directories(dir);
  write_threshold_rows_csv(result, dir / "rows.csv");
  EXPECT_EQ(first_line(dir / "rows.csv"),
            "threshold,logging,target,estimator,repeat,value,n_used,"
            "mean_lookback,chosen_lookbacks,chosen_ess,error");
  write_threshold_plot_csv(result, dir / "plot.csv");
  EXPECT_EQ(first_line(dir / "plot.csv"),
            "threshold,mean,ci_half_width,mean_lookback,truth");
  EXPECT_EQ(line_count(dir / "plot.csv"), 4u);
  write_threshold_summary_json(result, cfg, dir / "summary.json");
  EXPECT_GT(fs::file_size(dir / "summary.json"), 0u);
  fs::remove_all(dir);
}

TEST(SweepSlate, PerSizeTruthsAndSinglePositionIdentity) {
  SlateSweepConfig cfg;
  cfg.logging = parse_policy_spec("uniform");
  cfg.target = parse_policy_spec("softmax:0.7");
  cfg.k_values = {1, 3};
  cfg.estimators = {parse_estimator_spec("nis"), parse_estimator_spec("rips")};
  cfg.n_per_repeat = 300;
  cfg.repeats = 3;
  cfg.truth_mc_samples = 20000;
  cfg.seed = 7;
  const SlateSweepResult result = sweep_slate_size(small_world(), cfg);

  ASSERT_EQ(result.rows.size(), 4u);
  EXPECT_EQ(result.rows[0].slate_size, 1);
  EXPECT_EQ(result.rows[1].slate_size, 1);
  EXPECT_EQ(result.rows[2].slate_size, 3);
  ASSERT_TRUE(result.truths.contains(1));
  ASSERT_TRUE(result.truths.contains(3));
  EXPECT_LT(result.truths.at(1).value, result.truths.at(3).value);

  // At slate size 1 the capped sequential estimator is exactly the
  // self-normalized estimator, repeat by repeat and in aggregate.
  EXPECT_EQ(result.rows[0].cell.estimator, "nis");
  EXPECT_EQ(result.rows[1].cell.estimator, "rips");
  EXPECT_EQ(result.rows[0].cell.mean, result.rows[1].cell.mean);

  SlateSweepConfig bad = cfg;
  bad.k_values = {5};  // exceeds the 4-candidate pool
  EXPECT_THROW(sweep_slate_size(small_world(), bad), ValidationError);

  const fs::path dir = fs::path(testing::TempDir()) / "slate_writers";
  fs::create_directories(dir);
  write_slate_rows_csv(result, dir / "rows.csv");
  EXPECT_EQ(first_line(dir / "rows.csv"),
            "slate_size,logging,target,estimator,repeat,value,n_used,"
            "mean_lookback,chosen_lookbacks,chosen_ess,error");
  write_slate_plot_csv(result, dir / "plot.csv");
  EXPECT_EQ(first_line(dir / "plot.csv"),
            "slate_size,estimator,mean,ci_half_width,truth,abs_error");
  write_slate_summary_json(result, cfg, dir / "summary.json");
  EXPECT_GT(fs::file_size(dir / "summary.json"), 0u);
  fs::remove_all(dir);
}

TEST(SweepData, RmsePerFraction) {
  DataSweepConfig cfg;
  cfg.logging = parse_policy_spec("uniform");
  cfg.targets = {parse_policy_spec("sorted:desc"), parse_policy_spec("uniform")};
  cfg.fractions = {0.1, 1.0};
  cfg.estimators = {parse_estimator_spec("iips_norm"),
                    parse_estimator_spec("rips")};
  cfg.n_max = 1000;
  cfg.repeats = 3;
  cfg.slate_size = 3;
  cfg.truth_mc_samples = 20000;
  cfg.seed = 8;
  const DataSweepResult result = sweep_data_size(small_world(), cfg);

  ASSERT_EQ(result.rows.size(), 4u);
  EXPECT_DOUBLE_EQ(result.rows[0].fraction, 0.1);
  EXPECT_EQ(result.rows[0].estimator, "iips_norm");
  for (const auto& row : result.rows) {
    ASSERT_EQ(row.rmse_per_repeat.size(), 3u);
    EXPECT_EQ(row.n_ok, 3);
    EXPECT_LE(row.rmse_min, row.rmse_median + 1e-15);
    EXPECT_LE(row.rmse_median, row.rmse_max + 1e-15);
  }

  DataSweepConfig bad = cfg;
  bad.fractions = {0.0, 1.0};
  EXPECT_THROW(sweep_data_size(small_world(), bad), ValidationError);
  bad.fractions = {0.5, 1.5};
  EXPECT_THROW(sweep_data_size(small_world(), bad), ValidationError);

  const fs::path dir = fs::path(testing::TempDir()) / "data_writers";
  fs::create_directories(dir);
  write_data_rows_csv(result, dir / "rows.csv");
  EXPECT_EQ(first_line(dir / "rows.csv"),
            "fraction,estimator,repeat,rmse,error");
  EXPECT_EQ(line_count(dir / "rows.csv"), 1u + 4u * 3u);
  write_data_plot_csv(result, dir / "plot.csv");
  EXPECT_EQ(first_line(dir / "plot.csv"),
            "fraction,estimator,rmse_median,rmse_min,rmse_max");
  write_data_summary_json(result, cfg, dir / "summary.json");
  EXPECT_GT(fs::file_size(dir / "summary.json"), 0u);
  fs::remove_all(dir);
}

}  // namespace
