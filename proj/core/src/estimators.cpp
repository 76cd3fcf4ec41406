#include "slateval/estimators.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "slateval/errors.hpp"

namespace slateval {

namespace {

double kish_or_zero(std::span<const double> w) {
  double sum = 0.0, sum_sq = 0.0;
  for (double v : w) {
    sum += v;
    sum_sq += v * v;
  }
  return sum_sq == 0.0 ? 0.0 : sum * sum / sum_sq;
}

void check_shapes(const Matrix& w, std::span<const double> rewards) {
  if (w.rows == 0 || w.cols == 0) {
    throw std::invalid_argument("estimator: empty weight matrix");
  }
  if (rewards.size() != w.rows * static_cast<std::size_t>(w.cols)) {
    throw std::invalid_argument(
        "estimator: rewards do not match the weight matrix shape");
  }
}

double reward_at(std::span<const double> rewards, std::size_t n, int cols,
                 int k) {
  return rewards[n * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(k)];
}

double sample_sd(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double sum_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

}  // namespace

EstimateReport on_policy_mean(const Dataset& dataset) {
  const std::size_t n = dataset.size();
  const int k = dataset.slate_size();
  EstimateReport rep;
  rep.estimator = "online";
  rep.per_position_value.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<double> sums(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto rewards = dataset.rewards(i);
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      rep.per_position_value[static_cast<std::size_t>(j)] +=
          rewards[static_cast<std::size_t>(j)];
      s += rewards[static_cast<std::size_t>(j)];
    }
    sums[i] = s;
  }
  for (double& v : rep.per_position_value) v /= static_cast<double>(n);
  rep.value = sum_of(rep.per_position_value);
  rep.n_used = static_cast<std::int64_t>(n);
  rep.standard_error = sample_sd(sums) / std::sqrt(static_cast<double>(n));
  return rep;
}

EstimateReport ips_from_weights(const Matrix& w,
                                std::span<const double> rewards) {
  check_shapes(w, rewards);
  const std::size_t n = w.rows;
  const int k = w.cols;
  EstimateReport rep;
  rep.estimator = "ips";
  rep.per_position_value.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<double> full(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = w.row(i);
    for (double v : row) full[i] *= v;
  }
  std::vector<double> contrib(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      const double x = full[i] * reward_at(rewards, i, k, j);
      rep.per_position_value[static_cast<std::size_t>(j)] += x;
      contrib[i] += x;
    }
  }
  for (double& v : rep.per_position_value) v /= static_cast<double>(n);
  rep.value = sum_of(rep.per_position_value);
  rep.n_used = static_cast<std::int64_t>(n);
  rep.standard_error = sample_sd(contrib) / std::sqrt(static_cast<double>(n));
  const double ess = kish_or_zero(full);
  rep.ess_trace.assign(static_cast<std::size_t>(k),
                       {EssTraceEntry{k - 1, ess}});
  return rep;
}

EstimateReport nis_from_weights(const Matrix& w,
                                std::span<const double> rewards) {
  check_shapes(w, rewards);
  const std::size_t n = w.rows;
  const int k = w.cols;
  const auto dists = prefix_weight_distributions(w);
  const auto& d = dists.back();
  EstimateReport rep;
  rep.estimator = "nis";
  rep.per_position_value.assign(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) {
      rep.per_position_value[static_cast<std::size_t>(j)] +=
          d[i] * reward_at(rewards, i, k, j);
    }
  }
  rep.value = sum_of(rep.per_position_value);
  rep.n_used = static_cast<std::int64_t>(n);
  const double ess = kish_or_zero(d);
  rep.ess_trace.assign(static_cast<std::size_t>(k),
                       {EssTraceEntry{k - 1, ess}});
  return rep;
}

EstimateReport iips_from_weights(const Matrix& w,
                                 std::span<const double> rewards) {
  check_shapes(w, rewards);
  const std::size_t n = w.rows;
  const int k = w.cols;
  EstimateReport rep;
  rep.estimator = "iips";
  rep.per_position_value.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<double> contrib(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = w.row(i);
    for (int j = 0; j < k; ++j) {
      const double x = row[static_cast<std::size_t>(j)] *
                       reward_at(rewards, i, k, j);
      rep.per_position_value[static_cast<std::size_t>(j)] += x;
      contrib[i] += x;
    }
  }
  for (double& v : rep.per_position_value) v /= static_cast<double>(n);
  rep.value = sum_of(rep.per_position_value);
  rep.n_used = static_cast<std::int64_t>(n);
  rep.standard_error = sample_sd(contrib) / std::sqrt(static_cast<double>(n));
  rep.ess_trace.resize(static_cast<std::size_t>(k));
  std::vector<double> col(n);
  for (int j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = w(i, j);
    rep.ess_trace[static_cast<std::size_t>(j)] = {
        EssTraceEntry{0, kish_or_zero(col)}};
  }
  return rep;
}

EstimateReport iips_normalized_from_weights(const Matrix& w,
                                            std::span<const double> rewards) {
  check_shapes(w, rewards);
  const std::size_t n = w.rows;
  const int k = w.cols;
  EstimateReport rep;
  rep.estimator = "iips_norm";
  rep.per_position_value.assign(static_cast<std::size_t>(k), 0.0);
  rep.ess_trace.resize(static_cast<std::size_t>(k));
  std::vector<double> col(n);
  for (int j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = w(i, j);
      s += col[i];
    }
    if (s <= 0.0) {
      throw EstimatorError("no overlap: total weight is zero at position " +
                           std::to_string(j));
    }
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v += (col[i] / s) * reward_at(rewards, i, k, j);
    }
    rep.per_position_value[static_cast<std::size_t>(j)] = v;
    rep.ess_trace[static_cast<std::size_t>(j)] = {
        EssTraceEntry{0, kish_or_zero(col)}};
  }
  rep.value = sum_of(rep.per_position_value);
  rep.n_used = static_cast<std::int64_t>(n);
  return rep;
}

EstimateReport rips_closed_form_from_weights(const Matrix& w,
                                             std::span<const double> rewards) {
  check_shapes(w, rewards);
  const std::size_t n = w.rows;
  const int k = w.cols;
  const auto dists = prefix_weight_distributions(w);
  EstimateReport rep;
  rep.estimator = "rips_closed";
  rep.per_position_value.assign(static_cast<std::size_t>(k), 0.0);
  rep.ess_trace.resize(static_cast<std::size_t>(k));
  rep.chosen_lookbacks.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const auto& d = dists[static_cast<std::size_t>(j)];
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += d[i] * reward_at(rewards, i, k, j);
    rep.per_position_value[static_cast<std::size_t>(j)] = v;
    rep.ess_trace[static_cast<std::size_t>(j)] = {
        EssTraceEntry{j, kish_or_zero(d)}};
    rep.chosen_lookbacks[static_cast<std::size_t>(j)] = j;
  }
  rep.value = sum_of(rep.per_position_value);
  rep.n_used = static_cast<std::int64_t>(n);
#ifndef NDEBUG
  const EstimateReport rec = rips_recursion_from_weights(w, rewards);
  assert(std::abs(rec.value - rep.value) <=
         1e-12 * std::max(1.0, std::abs(rep.value)));
#endif
  return rep;
}

EstimateReport rips_recursion_from_weights(const Matrix& w,
                                           std::span<const double> rewards) {
  check_shapes(w, rewards);
  const std::size_t n = w.rows;
  const int k = w.cols;
  EstimateReport rep;
  rep.estimator = "rips_recursion";
  rep.per_position_value.assign(static_cast<std::size_t>(k), 0.0);
  rep.ess_trace.resize(static_cast<std::size_t>(k));
  rep.chosen_lookbacks.resize(static_cast<std::size_t>(k));
  std::vector<double> gamma(n, 1.0);
  std::vector<double> d(n);
  for (int j = 0; j < k; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = gamma[i] * w(i, j);
      s += d[i];
    }
    if (s <= 0.0) {
      throw EstimatorError(
          "no overlap: every prefix product is zero at position " +
          std::to_string(j));
    }
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] /= s;
      v += d[i] * reward_at(rewards, i, k, j);
    }
    rep.per_position_value[static_cast<std::size_t>(j)] = v;
    rep.ess_trace[static_cast<std::size_t>(j)] = {
        EssTraceEntry{j, kish_or_zero(d)}};
    rep.chosen_lookbacks[static_cast<std::size_t>(j)] = j;
    for (std::size_t i = 0; i < n; ++i) {
      gamma[i] = static_cast<double>(n) * d[i];
    }
  }
  rep.value = sum_of(rep.per_position_value);
  rep.n_used = static_cast<std::int64_t>(n);
  return rep;
}

EstimateReport rips_from_weights(const Matrix& w,
                                 std::span<const double> rewards,
                                 const RipsConfig& config) {
  check_shapes(w, rewards);
  if (!(config.threshold >= 0.0) || !(config.threshold <= 1.0)) {
    throw ValidationError("rips threshold must be in [0, 1]");
  }
  const std::size_t n = w.rows;
  const int k = w.cols;
  const double ess_floor = config.threshold * static_cast<double>(n);
  EstimateReport rep;
  rep.estimator = "rips";
  rep.per_position_value.assign(static_cast<std::size_t>(k), 0.0);
  rep.ess_trace.resize(static_cast<std::size_t>(k));
  rep.chosen_lookbacks.resize(static_cast<std::size_t>(k));
  std::vector<double> cur(n), cand(n);
  for (int j = 0; j < k; ++j) {
    auto& trace = rep.ess_trace[static_cast<std::size_t>(j)];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cur[i] = w(i, j);
      s += cur[i];
    }
    if (s <= 0.0) {
      throw EstimatorError("no overlap: total weight is zero at position " +
                           std::to_string(j));
    }
    for (double& v : cur) v /= s;
    double ess_cur = kish_or_zero(cur);
    trace.push_back(EssTraceEntry{0, ess_cur});
    int chosen = 0;
    for (int back = 1; back <= j; ++back) {
      const int col = j - back;
      double cs = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cand[i] = cur[i] * w(i, col);
        cs += cand[i];
      }
      if (cs <= 0.0) {
        trace.push_back(EssTraceEntry{back, 0.0});
        break;
      }
      for (double& v : cand) v /= cs;
      const double ess_cand = kish_or_zero(cand);
      trace.push_back(EssTraceEntry{back, ess_cand});
      if (ess_cand > ess_floor && ess_cand < ess_cur) {
        std::swap(cur, cand);
        ess_cur = ess_cand;
        chosen = back;
      } else {
        break;
      }
    }
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v += cur[i] * reward_at(rewards, i, k, j);
    }
    rep.per_position_value[static_cast<std::size_t>(j)] = v;
    rep.chosen_lookbacks[static_cast<std::size_t>(j)] = chosen;
  }
  rep.value = sum_of(rep.per_position_value);
  rep.n_used = static_cast<std::int64_t>(n);
  return rep;
}

namespace {

EstimateReport with_weights(
    const Dataset& dataset, const Policy& target,
    EstimateReport (*fn)(const Matrix&, std::span<const double>)) {
  const Matrix w = per_position_weights(dataset, target);
  return fn(w, dataset.rewards_flat());
}

}  // namespace

EstimateReport ips(const Dataset& dataset, const Policy& target) {
  return with_weights(dataset, target, &ips_from_weights);
}
EstimateReport nis(const Dataset& dataset, const Policy& target) {
  return with_weights(dataset, target, &nis_from_weights);
}
EstimateReport iips(const Dataset& dataset, const Policy& target) {
  return with_weights(dataset, target, &iips_from_weights);
}
EstimateReport iips_normalized(const Dataset& dataset, const Policy& target) {
  return with_weights(dataset, target, &iips_normalized_from_weights);
}
EstimateReport rips_closed_form(const Dataset& dataset, const Policy& target) {
  return with_weights(dataset, target, &rips_closed_form_from_weights);
}
EstimateReport rips(const Dataset& dataset, const Policy& target,
                    const RipsConfig& config) {
  const Matrix w = per_position_weights(dataset, target);
  return rips_from_weights(w, dataset.rewards_flat(), config);
}

std::vector<std::string> estimator_names() {
  return {"online", "ips",   "nis",    "iips",       "iips_norm",
          "pi",     "pi_mc", "rips",   "rips_closed"};
}

EstimatorSpec parse_estimator_spec(std::string_view text) {
  EstimatorSpec spec;
  spec.label = std::string(text);
  const std::size_t colon = text.find(':');
  spec.name = std::string(text.substr(0, colon));
  const auto names = estimator_names();
  if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
    throw ValidationError("unknown estimator '" + spec.name + "'");
  }
  if (colon == std::string_view::npos) return spec;
  const std::string arg(text.substr(colon + 1));
  if (spec.name == "rips") {
    double t = 0.0;
    const char* end = arg.data() + arg.size();
    auto [ptr, ec] = std::from_chars(arg.data(), end, t);
    if (ec != std::errc() || ptr != end || !(t >= 0.0) || !(t <= 1.0)) {
      throw ValidationError("estimator '" + spec.name +
                            "': threshold must be a number in [0, 1]");
    }
    spec.rips.threshold = t;
    return spec;
  }
  if (spec.name == "pi" || spec.name == "pi_mc") {
    long samples = 0;
    const char* end = arg.data() + arg.size();
    auto [ptr, ec] = std::from_chars(arg.data(), end, samples);
    if (ec != std::errc() || ptr != end || samples < 1) {
      throw ValidationError("estimator '" + spec.name +
                            "': sample count must be a positive integer");
    }
    spec.mc_samples = samples;
    return spec;
  }
  throw ValidationError("estimator '" + spec.name + "' takes no argument");
}

EstimateReport run_estimator(const EstimatorSpec& spec, const Dataset& dataset,
                             const Policy* target, const Policy* logging,
                             const Matrix* weights, std::uint64_t seed) {
  EstimateReport rep;
  if (spec.name == "online") {
    rep = on_policy_mean(dataset);
  } else {
    if (target == nullptr) {
      throw ValidationError("estimator '" + spec.name +
                            "' requires a target policy");
    }
    const bool uses_weights = spec.name != "pi" && spec.name != "pi_mc";
    Matrix local;
    const Matrix* w = weights;
    if (uses_weights && w == nullptr) {
      local = per_position_weights(dataset, *target);
      w = &local;
    }
    if (spec.name == "ips") {
      rep = ips_from_weights(*w, dataset.rewards_flat());
    } else if (spec.name == "nis") {
      rep = nis_from_weights(*w, dataset.rewards_flat());
    } else if (spec.name == "iips") {
      rep = iips_from_weights(*w, dataset.rewards_flat());
    } else if (spec.name == "iips_norm") {
      rep = iips_normalized_from_weights(*w, dataset.rewards_flat());
    } else if (spec.name == "rips") {
      rep = rips_from_weights(*w, dataset.rewards_flat(), spec.rips);
    } else if (spec.name == "rips_closed") {
      rep = rips_closed_form_from_weights(*w, dataset.rewards_flat());
    } else if (spec.name == "pi") {
      rep = pi_uniform(dataset, *target, spec.mc_samples, seed);
    } else if (spec.name == "pi_mc") {
      if (logging == nullptr) {
        throw ValidationError(
            "estimator 'pi_mc' requires an explicit logging policy");
      }
      rep = pi_mc(dataset, *target, *logging, spec.mc_samples, seed);
    } else {
      throw ValidationError("unknown estimator '" + spec.name + "'");
    }
  }
  rep.estimator = spec.label.empty() ? spec.name : spec.label;
  return rep;
}

}  // namespace slateval
