#include "slateval/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slateval/errors.hpp"

namespace slateval {

namespace {

constexpr double kDirectLow = 1e-6;
constexpr double kDirectHigh = 1e6;

bool needs_log_space(const Matrix& w) {
  for (double v : w.values) {
    if (v > 0.0 && (v < kDirectLow || v > kDirectHigh)) return true;
  }
  return false;
}

[[noreturn]] void throw_zero_mass(int position) {
  throw EstimatorError(
      "no overlap: every prefix product is zero at position " +
      std::to_string(position));
}

}  // namespace

Matrix per_position_weights(const Dataset& dataset, const Policy& target) {
  const std::size_t n = dataset.size();
  const int k = dataset.slate_size();
  Matrix w(n, k);
  std::size_t max_candidates = 0;
  for (const auto& ctx : dataset.contexts()) {
    max_candidates = std::max(max_candidates, ctx.candidates.size());
  }
  std::vector<double> probs(max_candidates);
  for (std::size_t i = 0; i < n; ++i) {
    const Context& ctx = dataset.context(i);
    const auto actions = dataset.actions(i);
    const auto logged = dataset.logging_propensities(i);
    std::span<double> buf{probs.data(), ctx.candidates.size()};
    for (int j = 0; j < k; ++j) {
      target.action_probabilities(ctx, actions.subspan(0, static_cast<std::size_t>(j)), buf);
      const double h = buf[static_cast<std::size_t>(actions[static_cast<std::size_t>(j)])];
      w(i, j) = h / logged[static_cast<std::size_t>(j)];
    }
  }
  return w;
}

double per_position_weight(const LoggedImpression& imp, const Policy& target,
                           int position) {
  validate_impression(imp);
  const int k = static_cast<int>(imp.actions.size());
  if (position < 0 || position >= k) {
    throw ValidationError("position " + std::to_string(position) +
                          " is outside the slate");
  }
  const Context ctx{imp.context_id, imp.candidate_set};
  const std::span<const std::string> prev{imp.actions.data(),
                                          static_cast<std::size_t>(position)};
  const double h = target.propensity(ctx, prev, imp.actions[static_cast<std::size_t>(position)]);
  return h / imp.logging_propensities[static_cast<std::size_t>(position)];
}

std::vector<std::vector<double>> prefix_weight_distributions(
    const Matrix& weights) {
  const std::size_t n = weights.rows;
  const int k = weights.cols;
  if (n == 0 || k == 0) {
    throw std::invalid_argument("prefix_weight_distributions: empty matrix");
  }
  std::vector<std::vector<double>> out(static_cast<std::size_t>(k));

  if (!needs_log_space(weights)) {
    std::vector<double> prod(n, 1.0);
    for (int j = 0; j < k; ++j) {
      double sum = 0.0;
      auto& dist = out[static_cast<std::size_t>(j)];
      dist.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        prod[i] *= weights(i, j);
        dist[i] = prod[i];
        sum += prod[i];
      }
      if (sum <= 0.0) throw_zero_mass(j);
      for (double& v : dist) v /= sum;
    }
    return out;
  }

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> log_prod(n, 0.0);
  for (int j = 0; j < k; ++j) {
    double max_log = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weights(i, j);
      log_prod[i] = w > 0.0 ? log_prod[i] + std::log(w) : kNegInf;
      max_log = std::max(max_log, log_prod[i]);
    }
    if (max_log == kNegInf) throw_zero_mass(j);
    auto& dist = out[static_cast<std::size_t>(j)];
    dist.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = log_prod[i] == kNegInf ? 0.0 : std::exp(log_prod[i] - max_log);
      sum += dist[i];
    }
    for (double& v : dist) v /= sum;
  }
  return out;
}

}  // namespace slateval
