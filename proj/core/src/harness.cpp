#include "slateval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "slateval/errors.hpp"
#include "slateval/format.hpp"
#include "slateval/weights.hpp"

namespace slateval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

struct BuiltPolicies {
  std::vector<std::unique_ptr<Policy>> policies;
  std::vector<std::string> names;
};

BuiltPolicies build_policies(const std::vector<PolicySpec>& specs,
                             const std::shared_ptr<const ScoreTable>& table,
                             const char* role) {
  if (specs.empty()) {
    throw ValidationError(std::string("no ") + role + " policies configured");
  }
  BuiltPolicies out;
  for (const auto& spec : specs) {
    const std::string name = policy_name(spec);
    if (std::find(out.names.begin(), out.names.end(), name) !=
        out.names.end()) {
      throw ValidationError(std::string(role) + " policy '" + name +
                            "' is listed twice");
    }
    out.policies.push_back(make_policy(spec, table));
    out.names.push_back(name);
  }
  return out;
}

void check_estimators(const std::vector<EstimatorSpec>& estimators) {
  if (estimators.empty()) {
    throw ValidationError("no estimators configured");
  }
  for (const auto& e : estimators) {
    const long count =
        std::count_if(estimators.begin(), estimators.end(),
                      [&](const EstimatorSpec& o) { return o.label == e.label; });
    if (count > 1) {
      throw ValidationError("estimator '" + e.label + "' is listed twice");
    }
  }
}

bool uses_weights(const EstimatorSpec& spec) {
  return spec.name != "online" && spec.name != "pi" && spec.name != "pi_mc";
}

/// Runs every estimator on one repeat's logs, sharing the weight matrix.
std::vector<RepeatResult> run_repeat(const SimWorld& world,
                                     const Policy& logging,
                                     const Policy& target,
                                     const std::vector<EstimatorSpec>& specs,
                                     int slate_size, std::size_t n,
                                     std::uint64_t logs_seed,
                                     std::uint64_t estimator_seed) {
  const Dataset ds = log_impressions(world, logging, slate_size, n, logs_seed);
  std::vector<RepeatResult> out(specs.size());
  std::optional<Matrix> w;
  for (std::size_t ei = 0; ei < specs.size(); ++ei) {
    try {
      const Matrix* wp = nullptr;
      if (uses_weights(specs[ei])) {
        if (!w) w = per_position_weights(ds, target);
        wp = &*w;
      }
      out[ei].report = run_estimator(specs[ei], ds, &target, &logging, wp,
                                     estimator_seed);
    } catch (const std::exception& e) {
      out[ei].error = e.what();
    }
  }
  return out;
}

CellSummary summarize_cell(std::string logging, std::string target,
                           std::string estimator,
                           std::vector<RepeatResult> repeats, double truth) {
  CellSummary cell;
  cell.logging = std::move(logging);
  cell.target = std::move(target);
  cell.estimator = std::move(estimator);
  cell.truth = truth;
  std::vector<double> ok;
  for (const auto& r : repeats) {
    if (r.report) {
      ok.push_back(r.report->value);
    } else if (cell.first_error.empty()) {
      cell.first_error = r.error;
    }
  }
  cell.repeats = std::move(repeats);
  cell.n_ok = static_cast<int>(ok.size());
  cell.mean = ok.empty() ? kNaN : mean_of(ok);
  cell.ci_half_width = ok.size() < 2 ? kNaN : ci_half_width(ok);
  cell.abs_error = ok.empty() ? kNaN : std::abs(cell.mean - truth);
  return cell;
}

double report_mean_lookback(const EstimateReport& rep) {
  if (rep.chosen_lookbacks.empty()) return kNaN;
  double s = 0.0;
  for (int b : rep.chosen_lookbacks) s += b;
  return s / static_cast<double>(rep.chosen_lookbacks.size());
}

std::uint64_t truth_seed(std::uint64_t base, const std::string& label) {
  return derive_seed(base, "truth/" + label);
}

}  // namespace

double ci_half_width(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return kNaN;
  const double mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(n));
}

double rmse(std::span<const double> estimates, std::span<const double> truths) {
  if (estimates.size() != truths.size() || estimates.empty()) {
    throw std::invalid_argument("rmse: need matching nonempty vectors");
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double d = estimates[i] - truths[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(estimates.size()));
}

GridResult run_grid(const SimWorld& world, const GridConfig& config) {
  if (config.repeats < 2) {
    throw ValidationError("grid needs at least 2 repeats");
  }
  if (config.n_per_repeat == 0) {
    throw ValidationError("grid needs a positive impression count");
  }
  check_estimators(config.estimators);
  const auto table = score_table_from_world(world);
  BuiltPolicies logging =
      build_policies(config.logging_policies, table, "logging");
  BuiltPolicies targets = build_policies(config.target_policies, table, "target");

  GridResult out;
  for (std::size_t ti = 0; ti < targets.policies.size(); ++ti) {
    out.truths[targets.names[ti]] =
        true_value(world, *targets.policies[ti], config.slate_size,
                   config.truth_mc_samples,
                   truth_seed(config.seed, targets.names[ti]));
  }

  const std::size_t n_l = logging.policies.size();
  const std::size_t n_t = targets.policies.size();
  const std::size_t n_r = static_cast<std::size_t>(config.repeats);
  const std::size_t n_e = config.estimators.size();
  std::vector<std::vector<RepeatResult>> slots(n_l * n_t * n_r);
  parallel_for(n_l * n_t * n_r, config.jobs, [&](std::size_t idx) {
    const std::size_t li = idx / (n_t * n_r);
    const std::size_t ti = (idx / n_r) % n_t;
    const std::size_t r = idx % n_r;
    const std::string label =
        logging.names[li] + "/" + targets.names[ti] + "/" + std::to_string(r);
    slots[idx] = run_repeat(world, *logging.policies[li], *targets.policies[ti],
                            config.estimators, config.slate_size,
                            config.n_per_repeat,
                            derive_seed(config.seed, "logs/" + label),
                            derive_seed(config.seed, "est/" + label));
  });

  for (std::size_t li = 0; li < n_l; ++li) {
    for (std::size_t ti = 0; ti < n_t; ++ti) {
      for (std::size_t ei = 0; ei < n_e; ++ei) {
        std::vector<RepeatResult> repeats;
        repeats.reserve(n_r);
        for (std::size_t r = 0; r < n_r; ++r) {
          repeats.push_back(slots[(li * n_t + ti) * n_r + r][ei]);
        }
        out.cells.push_back(summarize_cell(
            logging.names[li], targets.names[ti], config.estimators[ei].label,
            std::move(repeats), out.truths.at(targets.names[ti]).value));
      }
    }
  }

  for (std::size_t li = 0; li < n_l; ++li) {
    for (std::size_t ei = 0; ei < n_e; ++ei) {
      std::vector<double> estimates, truths;
      for (std::size_t ti = 0; ti < n_t; ++ti) {
        const CellSummary& cell = out.cells[(li * n_t + ti) * n_e + ei];
        if (cell.n_ok > 0) {
          estimates.push_back(cell.mean);
          truths.push_back(cell.truth);
        }
      }
      RmseRow row;
      row.logging = logging.names[li];
      row.estimator = config.estimators[ei].label;
      row.n_targets = static_cast<int>(estimates.size());
      row.rmse = estimates.empty() ? kNaN : rmse(estimates, truths);
      out.rmse.push_back(std::move(row));
    }
  }
  return out;
}

ThresholdSweepResult sweep_threshold(const SimWorld& world,
                                     const ThresholdSweepConfig& config) {
  if (config.repeats < 2) {
    throw ValidationError("threshold sweep needs at least 2 repeats");
  }
  if (config.t_values.empty()) {
    throw ValidationError("threshold sweep needs at least one threshold");
  }
  for (double t : config.t_values) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw ValidationError("threshold sweep: thresholds must be in [0, 1]");
    }
  }
  const auto table = score_table_from_world(world);
  const auto logging = make_policy(config.logging, table);
  const auto target = make_policy(config.target, table);
  const std::string logging_name = policy_name(config.logging);
  const std::string target_name = policy_name(config.target);

  ThresholdSweepResult out;
  out.truth = true_value(world, *target, config.slate_size,
                         config.truth_mc_samples,
                         truth_seed(config.seed, target_name));

  const std::size_t n_r = static_cast<std::size_t>(config.repeats);
  const std::size_t n_t = config.t_values.size();
  std::vector<std::vector<RepeatResult>> slots(n_r);
  parallel_for(n_r, config.jobs, [&](std::size_t r) {
    const Dataset ds =
        log_impressions(world, *logging, config.slate_size,
                        config.n_per_repeat,
                        derive_seed(config.seed, "logs/" + std::to_string(r)));
    const Matrix w = per_position_weights(ds, *target);
    auto& results = slots[r];
    results.resize(n_t);
    for (std::size_t i = 0; i < n_t; ++i) {
      try {
        results[i].report = rips_from_weights(w, ds.rewards_flat(),
                                              RipsConfig{config.t_values[i]});
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  });

  for (std::size_t i = 0; i < n_t; ++i) {
    std::vector<RepeatResult> repeats;
    repeats.reserve(n_r);
    for (std::size_t r = 0; r < n_r; ++r) repeats.push_back(slots[r][i]);
    ThresholdRow row;
    row.threshold = config.t_values[i];
    row.cell = summarize_cell(logging_name, target_name, "rips",
                              std::move(repeats), out.truth.value);
    std::vector<double> lookbacks;
    for (const auto& r : row.cell.repeats) {
      if (r.report) lookbacks.push_back(report_mean_lookback(*r.report));
    }
    row.mean_lookback = lookbacks.empty() ? kNaN : mean_of(lookbacks);
    out.rows.push_back(std::move(row));
  }
  return out;
}

SlateSweepResult sweep_slate_size(const SimWorld& world,
                                  const SlateSweepConfig& config) {
  if (config.repeats < 2) {
    throw ValidationError("slate sweep needs at least 2 repeats");
  }
  if (config.k_values.empty()) {
    throw ValidationError("slate sweep needs at least one slate size");
  }
  const int m = world.candidates_per_context();
  for (int k : config.k_values) {
    if (k < 1 || k > m) {
      throw ValidationError("slate sweep: slate sizes must be in [1, " +
                            std::to_string(m) + "]");
    }
  }
  check_estimators(config.estimators);
  const auto table = score_table_from_world(world);
  const auto logging = make_policy(config.logging, table);
  const auto target = make_policy(config.target, table);
  const std::string logging_name = policy_name(config.logging);
  const std::string target_name = policy_name(config.target);

  SlateSweepResult out;
  for (int k : config.k_values) {
    out.truths[k] =
        true_value(world, *target, k, config.truth_mc_samples,
                   truth_seed(config.seed, target_name + "/" + std::to_string(k)));
  }

  const std::size_t n_k = config.k_values.size();
  const std::size_t n_r = static_cast<std::size_t>(config.repeats);
  const std::size_t n_e = config.estimators.size();
  std::vector<std::vector<RepeatResult>> slots(n_k * n_r);
  parallel_for(n_k * n_r, config.jobs, [&](std::size_t idx) {
    const std::size_t ki = idx / n_r;
    const std::size_t r = idx % n_r;
    const int k = config.k_values[ki];
    const std::string label = std::to_string(k) + "/" + std::to_string(r);
    slots[idx] = run_repeat(world, *logging, *target, config.estimators, k,
                            config.n_per_repeat,
                            derive_seed(config.seed, "logs/" + label),
                            derive_seed(config.seed, "est/" + label));
  });

  for (std::size_t ki = 0; ki < n_k; ++ki) {
    const int k = config.k_values[ki];
    for (std::size_t ei = 0; ei < n_e; ++ei) {
      std::vector<RepeatResult> repeats;
      repeats.reserve(n_r);
      for (std::size_t r = 0; r < n_r; ++r) {
        repeats.push_back(slots[ki * n_r + r][ei]);
      }
      SlateRow row;
      row.slate_size = k;
      row.cell = summarize_cell(logging_name, target_name,
                                config.estimators[ei].label, std::move(repeats),
                                out.truths.at(k).value);
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

DataSweepResult sweep_data_size(const SimWorld& world,
                                const DataSweepConfig& config) {
  if (config.repeats < 2) {
    throw ValidationError("data sweep needs at least 2 repeats");
  }
  if (config.fractions.empty()) {
    throw ValidationError("data sweep needs at least one fraction");
  }
  for (double f : config.fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ValidationError("data sweep: fractions must be in (0, 1]");
    }
  }
  if (config.n_max == 0) {
    throw ValidationError("data sweep needs a positive impression count");
  }
  check_estimators(config.estimators);
  const auto table = score_table_from_world(world);
  const auto logging = make_policy(config.logging, table);
  BuiltPolicies targets = build_policies(config.targets, table, "target");

  DataSweepResult out;
  std::vector<double> truths(targets.policies.size());
  for (std::size_t ti = 0; ti < targets.policies.size(); ++ti) {
    const TruthResult t =
        true_value(world, *targets.policies[ti], config.slate_size,
                   config.truth_mc_samples,
                   truth_seed(config.seed, targets.names[ti]));
    truths[ti] = t.value;
    out.truths[targets.names[ti]] = t;
  }

  const std::size_t n_r = static_cast<std::size_t>(config.repeats);
  const std::size_t n_f = config.fractions.size();
  const std::size_t n_e = config.estimators.size();
  const std::size_t n_t = targets.policies.size();
  struct Slot {
    double rmse = kNaN;
    std::string error;
  };
  std::vector<Slot> slots(n_r * n_f * n_e);
  parallel_for(n_r, config.jobs, [&](std::size_t r) {
    const Dataset master =
        log_impressions(world, *logging, config.slate_size, config.n_max,
                        derive_seed(config.seed, "logs/" + std::to_string(r)));
    for (std::size_t fi = 0; fi < n_f; ++fi) {
      const auto wanted = static_cast<std::size_t>(
          std::llround(config.fractions[fi] * static_cast<double>(config.n_max)));
      const std::size_t m = std::clamp<std::size_t>(wanted, 1, config.n_max);
      const Dataset ds = master.prefix(m);
      std::vector<std::vector<std::optional<double>>> estimates(
          n_e, std::vector<std::optional<double>>(n_t));
      std::vector<std::vector<std::string>> errors(
          n_e, std::vector<std::string>(n_t));
      for (std::size_t ti = 0; ti < n_t; ++ti) {
        std::optional<Matrix> w;
        for (std::size_t ei = 0; ei < n_e; ++ei) {
          try {
            const Matrix* wp = nullptr;
            if (uses_weights(config.estimators[ei])) {
              if (!w) w = per_position_weights(ds, *targets.policies[ti]);
              wp = &*w;
            }
            estimates[ei][ti] =
                run_estimator(config.estimators[ei], ds,
                              targets.policies[ti].get(), logging.get(), wp,
                              derive_seed(config.seed,
                                          "est/" + std::to_string(r) + "/" +
                                              std::to_string(fi)))
                    .value;
          } catch (const std::exception& e) {
            errors[ei][ti] = e.what();
          }
        }
      }
      for (std::size_t ei = 0; ei < n_e; ++ei) {
        Slot& slot = slots[(r * n_f + fi) * n_e + ei];
        std::vector<double> est, tru;
        for (std::size_t ti = 0; ti < n_t; ++ti) {
          if (estimates[ei][ti]) {
            est.push_back(*estimates[ei][ti]);
            tru.push_back(truths[ti]);
          } else if (slot.error.empty()) {
            slot.error = "target '" + targets.names[ti] + "': " + errors[ei][ti];
          }
        }
        if (est.size() == n_t) {
          slot.rmse = rmse(est, tru);
        }
      }
    }
  });

  for (std::size_t fi = 0; fi < n_f; ++fi) {
    for (std::size_t ei = 0; ei < n_e; ++ei) {
      DataSweepRow row;
      row.fraction = config.fractions[fi];
      row.estimator = config.estimators[ei].label;
      std::vector<double> ok;
      for (std::size_t r = 0; r < n_r; ++r) {
        const Slot& slot = slots[(r * n_f + fi) * n_e + ei];
        row.rmse_per_repeat.push_back(slot.rmse);
        row.errors.push_back(slot.error);
        if (!std::isnan(slot.rmse)) ok.push_back(slot.rmse);
      }
      row.n_ok = static_cast<int>(ok.size());
      row.rmse_median = median_of(ok);
      if (!ok.empty()) {
        const auto [lo, hi] = std::minmax_element(ok.begin(), ok.end());
        row.rmse_min = *lo;
        row.rmse_max = *hi;
      } else {
        row.rmse_min = kNaN;
        row.rmse_max = kNaN;
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += "\"";
  return out;
}

std::string fmt_or_empty(double v) {
  return std::isnan(v) ? std::string() : format_double(v);
}

std::string join_lookbacks(const EstimateReport& rep) {
  std::string out;
  for (std::size_t i = 0; i < rep.chosen_lookbacks.size(); ++i) {
    if (i) out += "|";
    out += std::to_string(rep.chosen_lookbacks[i]);
  }
  return out;
}

std::string join_chosen_ess(const EstimateReport& rep) {
  std::string out;
  for (std::size_t k = 0; k < rep.ess_trace.size(); ++k) {
    if (k) out += "|";
    const auto& trace = rep.ess_trace[k];
    if (trace.empty()) continue;
    std::size_t idx = 0;
    if (k < rep.chosen_lookbacks.size()) {
      idx = std::min<std::size_t>(
          static_cast<std::size_t>(rep.chosen_lookbacks[k]), trace.size() - 1);
    }
    out += format_double(trace[idx].ess);
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write file '" + path.string() + "'");
  }
  return out;
}

void write_repeat_rows(std::ofstream& out, const CellSummary& cell,
                       const std::string& row_prefix) {
  for (std::size_t r = 0; r < cell.repeats.size(); ++r) {
    const RepeatResult& rep = cell.repeats[r];
    out << row_prefix << "," << r << ",";
    if (rep.report) {
      out << format_double(rep.report->value) << ","
          << rep.report->n_used << ","
          << fmt_or_empty(report_mean_lookback(*rep.report)) << ","
          << join_lookbacks(*rep.report) << ","
          << join_chosen_ess(*rep.report) << ",";
    } else {
      out << ",,,,," << csv_escape(rep.error);
    }
    out << "\n";
  }
}

nlohmann::json policy_json(const PolicySpec& spec) {
  nlohmann::json j;
  j["name"] = policy_name(spec);
  j["kind"] = spec.kind;
  if (spec.kind != "uniform") {
    j["direction"] =
        spec.direction == SortDirection::ascending ? "asc" : "desc";
  }
  if (spec.kind == "softmax") j["temperature"] = spec.temperature;
  return j;
}

nlohmann::json estimator_json(const EstimatorSpec& spec) {
  nlohmann::json j;
  j["label"] = spec.label.empty() ? spec.name : spec.label;
  j["name"] = spec.name;
  if (spec.name == "rips") j["threshold"] = spec.rips.threshold;
  if (spec.name == "pi" || spec.name == "pi_mc") {
    j["mc_samples"] = spec.mc_samples;
  }
  return j;
}

nlohmann::json truth_json(const TruthResult& truth) {
  nlohmann::json j;
  j["value"] = truth.value;
  j["method"] = truth.method;
  if (truth.standard_error) j["standard_error"] = *truth.standard_error;
  return j;
}

nlohmann::json cell_json(const CellSummary& cell) {
  nlohmann::json j;
  j["logging"] = cell.logging;
  j["target"] = cell.target;
  j["estimator"] = cell.estimator;
  j["n_ok"] = cell.n_ok;
  j["mean"] = cell.mean;
  j["ci_half_width"] = cell.ci_half_width;
  j["truth"] = cell.truth;
  j["abs_error"] = cell.abs_error;
  if (!cell.first_error.empty()) j["first_error"] = cell.first_error;
  return j;
}

void dump_json(const nlohmann::json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace

void write_grid_rows_csv(const GridResult& result,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "logging,target,estimator,repeat,value,n_used,mean_lookback,"
         "chosen_lookbacks,chosen_ess,error\n";
  for (const auto& cell : result.cells) {
    write_repeat_rows(out, cell,
                      csv_escape(cell.logging) + "," + csv_escape(cell.target) +
                          "," + csv_escape(cell.estimator));
  }
}

void write_grid_summary_json(const GridResult& result, const GridConfig& config,
                             const std::filesystem::path& path) {
  nlohmann::json j;
  nlohmann::json cfg;
  cfg["slate_size"] = config.slate_size;
  cfg["n_per_repeat"] = config.n_per_repeat;
  cfg["repeats"] = config.repeats;
  cfg["truth_mc_samples"] = config.truth_mc_samples;
  cfg["seed"] = config.seed;
  cfg["jobs"] = config.jobs;
  for (const auto& p : config.logging_policies) {
    cfg["logging_policies"].push_back(policy_json(p));
  }
  for (const auto& p : config.target_policies) {
    cfg["target_policies"].push_back(policy_json(p));
  }
  for (const auto& e : config.estimators) {
    cfg["estimators"].push_back(estimator_json(e));
  }
  j["config"] = cfg;
  for (const auto& [name, truth] : result.truths) {
    j["truths"][name] = truth_json(truth);
  }
  for (const auto& cell : result.cells) j["cells"].push_back(cell_json(cell));
  for (const auto& row : result.rmse) {
    j["rmse"].push_back({{"logging", row.logging},
                         {"estimator", row.estimator},
                         {"rmse", row.rmse},
                         {"n_targets", row.n_targets}});
  }
  dump_json(j, path);
}

void write_grid_plot_csv(const GridResult& result,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "logging,target,estimator,mean,ci_half_width,truth,abs_error\n";
  for (const auto& cell : result.cells) {
    out << csv_escape(cell.logging) << "," << csv_escape(cell.target) << ","
        << csv_escape(cell.estimator) << "," << fmt_or_empty(cell.mean) << ","
        << fmt_or_empty(cell.ci_half_width) << "," << format_double(cell.truth)
        << "," << fmt_or_empty(cell.abs_error) << "\n";
  }
}

void write_threshold_rows_csv(const ThresholdSweepResult& result,
                              const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "threshold,logging,target,estimator,repeat,value,n_used,"
         "mean_lookback,chosen_lookbacks,chosen_ess,error\n";
  for (const auto& row : result.rows) {
    write_repeat_rows(out, row.cell,
                      format_double(row.threshold) + "," +
                          csv_escape(row.cell.logging) + "," +
                          csv_escape(row.cell.target) + "," +
                          csv_escape(row.cell.estimator));
  }
}

void write_threshold_summary_json(const ThresholdSweepResult& result,
                                  const ThresholdSweepConfig& config,
                                  const std::filesystem::path& path) {
  nlohmann::json j;
  nlohmann::json cfg;
  cfg["logging"] = policy_json(config.logging);
  cfg["target"] = policy_json(config.target);
  cfg["t_values"] = config.t_values;
  cfg["slate_size"] = config.slate_size;
  cfg["n_per_repeat"] = config.n_per_repeat;
  cfg["repeats"] = config.repeats;
  cfg["truth_mc_samples"] = config.truth_mc_samples;
  cfg["seed"] = config.seed;
  cfg["jobs"] = config.jobs;
  j["config"] = cfg;
  j["truth"] = truth_json(result.truth);
  for (const auto& row : result.rows) {
    nlohmann::json r = cell_json(row.cell);
    r["threshold"] = row.threshold;
    r["mean_lookback"] = row.mean_lookback;
    j["rows"].push_back(r);
  }
  dump_json(j, path);
}

void write_threshold_plot_csv(const ThresholdSweepResult& result,
                              const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "threshold,mean,ci_half_width,mean_lookback,truth\n";
  for (const auto& row : result.rows) {
    out << format_double(row.threshold) << "," << fmt_or_empty(row.cell.mean)
        << "," << fmt_or_empty(row.cell.ci_half_width) << ","
        << fmt_or_empty(row.mean_lookback) << ","
        << format_double(row.cell.truth) << "\n";
  }
}

void write_slate_rows_csv(const SlateSweepResult& result,
                          const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "slate_size,logging,target,estimator,repeat,value,n_used,"
         "mean_lookback,chosen_lookbacks,chosen_ess,error\n";
  for (const auto& row : result.rows) {
    write_repeat_rows(out, row.cell,
                      std::to_string(row.slate_size) + "," +
                          csv_escape(row.cell.logging) + "," +
                          csv_escape(row.cell.target) + "," +
                          csv_escape(row.cell.estimator));
  }
}

void write_slate_summary_json(const SlateSweepResult& result,
                              const SlateSweepConfig& config,
                              const std::filesystem::path& path) {
  nlohmann::json j;
  nlohmann::json cfg;
  cfg["logging"] = policy_json(config.logging);
  cfg["target"] = policy_json(config.target);
  cfg["k_values"] = config.k_values;
  for (const auto& e : config.estimators) {
    cfg["estimators"].push_back(estimator_json(e));
  }
  cfg["n_per_repeat"] = config.n_per_repeat;
  cfg["repeats"] = config.repeats;
  cfg["truth_mc_samples"] = config.truth_mc_samples;
  cfg["seed"] = config.seed;
  cfg["jobs"] = config.jobs;
  j["config"] = cfg;
  for (const auto& [k, truth] : result.truths) {
    j["truths"][std::to_string(k)] = truth_json(truth);
  }
  for (const auto& row : result.rows) {
    nlohmann::json r = cell_json(row.cell);
    r["slate_size"] = row.slate_size;
    j["rows"].push_back(r);
  }
  dump_json(j, path);
}

void write_slate_plot_csv(const SlateSweepResult& result,
                          const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "slate_size,estimator,mean,ci_half_width,truth,abs_error\n";
  for (const auto& row : result.rows) {
    out << row.slate_size << "," << csv_escape(row.cell.estimator) << ","
        << fmt_or_empty(row.cell.mean) << ","
        << fmt_or_empty(row.cell.ci_half_width) << ","
        << format_double(row.cell.truth) << ","
        << fmt_or_empty(row.cell.abs_error) << "\n";
  }
}

void write_data_rows_csv(const DataSweepResult& result,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "fraction,estimator,repeat,rmse,error\n";
  for (const auto& row : result.rows) {
    for (std::size_t r = 0; r < row.rmse_per_repeat.size(); ++r) {
      out << format_double(row.fraction) << "," << csv_escape(row.estimator)
          << "," << r << "," << fmt_or_empty(row.rmse_per_repeat[r]) << ","
          << csv_escape(row.errors[r]) << "\n";
    }
  }
}

void write_data_summary_json(const DataSweepResult& result,
                             const DataSweepConfig& config,
                             const std::filesystem::path& path) {
  nlohmann::json j;
  nlohmann::json cfg;
  cfg["logging"] = policy_json(config.logging);
  for (const auto& t : config.targets) {
    cfg["targets"].push_back(policy_json(t));
  }
  cfg["fractions"] = config.fractions;
  for (const auto& e : config.estimators) {
    cfg["estimators"].push_back(estimator_json(e));
  }
  cfg["n_max"] = config.n_max;
  cfg["repeats"] = config.repeats;
  cfg["slate_size"] = config.slate_size;
  cfg["truth_mc_samples"] = config.truth_mc_samples;
  cfg["seed"] = config.seed;
  cfg["jobs"] = config.jobs;
  j["config"] = cfg;
  for (const auto& [name, truth] : result.truths) {
    j["truths"][name] = truth_json(truth);
  }
  for (const auto& row : result.rows) {
    j["rows"].push_back({{"fraction", row.fraction},
                         {"estimator", row.estimator},
                         {"n_ok", row.n_ok},
                         {"rmse_median", row.rmse_median},
                         {"rmse_min", row.rmse_min},
                         {"rmse_max", row.rmse_max}});
  }
  dump_json(j, path);
}

void write_data_plot_csv(const DataSweepResult& result,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "fraction,estimator,rmse_median,rmse_min,rmse_max\n";
  for (const auto& row : result.rows) {
    out << format_double(row.fraction) << "," << csv_escape(row.estimator)
        << "," << fmt_or_empty(row.rmse_median) << ","
        << fmt_or_empty(row.rmse_min) << "," << fmt_or_empty(row.rmse_max)
        << "\n";
  }
}

}  // namespace slateval
