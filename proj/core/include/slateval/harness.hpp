#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slateval/estimators.hpp"
#include "slateval/policy.hpp"
#include "slateval/simulator.hpp"

namespace slateval {

/// One estimator run on one repeat's logs: either a report or an error.
struct RepeatResult {
  std::optional<EstimateReport> report;
  std::string error;
};

/// Aggregate of one (logging, target, estimator) cell across repeats.
/// `mean` and `ci_half_width` cover the successful repeats only; both are
/// NaN when no repeat succeeded (`ci_half_width` also needs at least two).
struct CellSummary {
  std::string logging;
  std::string target;
  std::string estimator;
  std::vector<RepeatResult> repeats;
  int n_ok = 0;
  double mean = 0.0;
  double ci_half_width = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
  std::string first_error;
};

struct GridConfig {
  std::vector<PolicySpec> logging_policies;
  std::vector<PolicySpec> target_policies;
  std::vector<EstimatorSpec> estimators;
  int slate_size = 10;
  std::size_t n_per_repeat = 10000;
  int repeats = 20;  // at least 2, for confidence intervals
  long truth_mc_samples = 1000000;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct RmseRow {
  std::string logging;
  std::string estimator;
  double rmse = 0.0;   // sqrt(mean over targets of squared error)
  int n_targets = 0;   // targets whose cell produced a mean
};

struct GridResult {
  std::vector<CellSummary> cells;  // logging-major, then target, estimator
  std::map<std::string, TruthResult> truths;  // by target name
  std::vector<RmseRow> rmse;
};

/// Runs every (logging, target, estimator) cell with fresh logs per cell and
/// repeat. Estimator failures are recorded in the cell, not thrown.
GridResult run_grid(const SimWorld& world, const GridConfig& config);

struct ThresholdSweepConfig {
  PolicySpec logging;
  PolicySpec target;
  std::vector<double> t_values{1.0, 0.1, 0.01, 0.001};
  int slate_size = 10;
  std::size_t n_per_repeat = 10000;
  int repeats = 20;
  long truth_mc_samples = 1000000;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct ThresholdRow {
  double threshold = 0.0;
  CellSummary cell;
  double mean_lookback = 0.0;  // over positions, then over ok repeats
};

struct ThresholdSweepResult {
  std::vector<ThresholdRow> rows;
  TruthResult truth;
};

/// Runs the capped sequential estimator at every threshold on shared
/// per-repeat logs, so threshold effects are compared pathwise.
ThresholdSweepResult sweep_threshold(const SimWorld& world,
                                     const ThresholdSweepConfig& config);

struct SlateSweepConfig {
  PolicySpec logging;
  PolicySpec target;
  std::vector<int> k_values{1, 3, 5, 10};
  std::vector<EstimatorSpec> estimators;
  std::size_t n_per_repeat = 10000;
  int repeats = 20;
  long truth_mc_samples = 1000000;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct SlateRow {
  int slate_size = 0;
  CellSummary cell;
};

struct SlateSweepResult {
  std::vector<SlateRow> rows;              // slate-size-major, then estimator
  std::map<int, TruthResult> truths;       // by slate size
};

SlateSweepResult sweep_slate_size(const SimWorld& world,
                                  const SlateSweepConfig& config);

struct DataSweepConfig {
  PolicySpec logging;
  std::vector<PolicySpec> targets;
  std::vector<double> fractions{0.01, 0.1, 1.0};
  std::vector<EstimatorSpec> estimators;
  std::size_t n_max = 100000;
  int repeats = 5;
  int slate_size = 10;
  long truth_mc_samples = 1000000;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct DataSweepRow {
  double fraction = 0.0;
  std::string estimator;
  std::vector<double> rmse_per_repeat;  // NaN where a target errored
  std::vector<std::string> errors;      // per repeat, empty when ok
  int n_ok = 0;
  double rmse_median = 0.0;
  double rmse_min = 0.0;
  double rmse_max = 0.0;
};

struct DataSweepResult {
  std::vector<DataSweepRow> rows;            // fraction-major, then estimator
  std::map<std::string, TruthResult> truths; // by target name
};

/// Prefix-subsamples one master log per repeat at each fraction and scores
/// every estimator by RMSE across the target set.
DataSweepResult sweep_data_size(const SimWorld& world,
                                const DataSweepConfig& config);

/// 95% normal-approximation half-width over repeat means.
double ci_half_width(std::span<const double> values);

/// Root-mean-square error over (estimate, truth) pairs.
double rmse(std::span<const double> estimates, std::span<const double> truths);

/// CSV/JSON emitters. The *_rows writers emit one row per repeat with
/// diagnostics columns; the *_summary writers emit aggregate JSON including
/// the configuration; the *_plot writers emit compact long-format CSV for
/// external plotting.
void write_grid_rows_csv(const GridResult& result,
                         const std::filesystem::path& path);
void write_grid_summary_json(const GridResult& result, const GridConfig& config,
                             const std::filesystem::path& path);
void write_grid_plot_csv(const GridResult& result,
                         const std::filesystem::path& path);

void write_threshold_rows_csv(const ThresholdSweepResult& result,
                              const std::filesystem::path& path);
void write_threshold_summary_json(const ThresholdSweepResult& result,
                                  const ThresholdSweepConfig& config,
                                  const std::filesystem::path& path);
void write_threshold_plot_csv(const ThresholdSweepResult& result,
                              const std::filesystem::path& path);

void write_slate_rows_csv(const SlateSweepResult& result,
                          const std::filesystem::path& path);
void write_slate_summary_json(const SlateSweepResult& result,
                              const SlateSweepConfig& config,
                              const std::filesystem::path& path);
void write_slate_plot_csv(const SlateSweepResult& result,
                          const std::filesystem::path& path);

void write_data_rows_csv(const DataSweepResult& result,
                         const std::filesystem::path& path);
void write_data_summary_json(const DataSweepResult& result,
                             const DataSweepConfig& config,
                             const std::filesystem::path& path);
void write_data_plot_csv(const DataSweepResult& result,
                         const std::filesystem::path& path);

}  // namespace slateval
