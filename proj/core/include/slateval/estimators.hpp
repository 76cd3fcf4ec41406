#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slateval/policy.hpp"
#include "slateval/types.hpp"
#include "slateval/weights.hpp"

namespace slateval {

/// One effective-sample-size evaluation made while choosing a lookback.
struct EssTraceEntry {
  int lookback = 0;  // prior positions incorporated into the weight window
  double ess = 0.0;  // 0 when the proposed weights had no mass
};

/// Output of every estimator.
///
/// `per_position_value` always sums to `value` (within rounding).
/// `ess_trace` has one list per slate position: the adaptive estimator logs
/// every lookback it evaluated there; fixed importance-weighted estimators
/// log a single entry with the ESS of the weights applied at that position;
/// estimators without importance weights (online, pi family) leave it empty.
/// Entries use 0 ESS for a proposal whose weights were all zero.
/// `chosen_lookbacks` is filled by the reweighted (sequential) estimators:
/// entry k is the number of prior positions whose weights were folded into
/// position k, so it is at most k. Other estimators leave it empty.
/// `standard_error` is present for the plain averages (online, ips, iips,
/// pi); self-normalized estimators omit it.
struct EstimateReport {
  std::string estimator;
  double value = 0.0;
  std::vector<double> per_position_value;
  std::vector<std::vector<EssTraceEntry>> ess_trace;
  std::vector<int> chosen_lookbacks;
  std::int64_t n_used = 0;
  std::optional<double> standard_error;
};

/// Configuration of the ESS-gated lookback cap.
struct RipsConfig {
  /// Minimum effective sample fraction t in [0, 1]: a longer lookback is
  /// accepted only while its ESS stays above t * N. Default 0.01.
  double threshold = 0.01;
};

/// Mean observed slate reward of the logged data (no reweighting).
EstimateReport on_policy_mean(const Dataset& dataset);

EstimateReport ips(const Dataset& dataset, const Policy& target);
EstimateReport nis(const Dataset& dataset, const Policy& target);
EstimateReport iips(const Dataset& dataset, const Policy& target);
EstimateReport iips_normalized(const Dataset& dataset, const Policy& target);
EstimateReport rips_closed_form(const Dataset& dataset, const Policy& target);
EstimateReport rips(const Dataset& dataset, const Policy& target,
                    const RipsConfig& config = {});

/// Pseudoinverse estimator specialized to uniform without-replacement
/// logging over slates that use the whole candidate pool (slate size equals
/// candidate count). The slot-activity covariance matrix has a closed form
/// in that regime; the data's propensities are checked against it.
/// `eh_mc_samples` sets the Monte-Carlo draws used for the target's slot
/// activity when the target is stochastic (deterministic targets are exact).
EstimateReport pi_uniform(const Dataset& dataset, const Policy& target,
                          long eh_mc_samples = 10000, std::uint64_t seed = 0);

/// Pseudoinverse estimator with the covariance matrix estimated by
/// Monte-Carlo rollouts of an explicitly supplied logging policy.
/// Experimental: costs O(contexts * mc_samples) rollouts.
EstimateReport pi_mc(const Dataset& dataset, const Policy& target,
                     const Policy& logging, long mc_samples = 10000,
                     std::uint64_t seed = 0);

/// Weight-level entry points. `weights` is [n x k] per-position importance
/// weights; `rewards` is the matching row-major reward array.
EstimateReport ips_from_weights(const Matrix& weights,
                                std::span<const double> rewards);
EstimateReport nis_from_weights(const Matrix& weights,
                                std::span<const double> rewards);
EstimateReport iips_from_weights(const Matrix& weights,
                                 std::span<const double> rewards);
EstimateReport iips_normalized_from_weights(const Matrix& weights,
                                            std::span<const double> rewards);
EstimateReport rips_closed_form_from_weights(const Matrix& weights,
                                             std::span<const double> rewards);
/// Sequential reweighting by the position recursion (no lookback cap);
/// algebraically identical to the closed form.
EstimateReport rips_recursion_from_weights(const Matrix& weights,
                                           std::span<const double> rewards);
EstimateReport rips_from_weights(const Matrix& weights,
                                 std::span<const double> rewards,
                                 const RipsConfig& config = {});

/// A named estimator invocation, as written on a command line:
/// "rips:0.1" or "pi:50000". `label` preserves the original text.
struct EstimatorSpec {
  std::string label;
  std::string name;
  RipsConfig rips;
  long mc_samples = 10000;
};

/// Parses "<name>[:<arg>]". The numeric argument is the ESS threshold for
/// the rips family and the Monte-Carlo sample count for the pi family.
/// Throws ValidationError for unknown names.
EstimatorSpec parse_estimator_spec(std::string_view text);

/// All registered estimator names.
std::vector<std::string> estimator_names();

/// Dispatches by name. `target` may be null only for "online"; `logging` is
/// required only for "pi_mc". `weights` optionally supplies precomputed
/// per-position weights (ignored by estimators that do not use them).
EstimateReport run_estimator(const EstimatorSpec& spec, const Dataset& dataset,
                             const Policy* target, const Policy* logging,
                             const Matrix* weights = nullptr,
                             std::uint64_t seed = 0);

}  // namespace slateval
