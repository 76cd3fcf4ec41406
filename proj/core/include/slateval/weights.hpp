#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "slateval/policy.hpp"
#include "slateval/types.hpp"

namespace slateval {

/// Dense row-major matrix of shape [rows x cols].
struct Matrix {
  std::size_t rows = 0;
  int cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, int c)
      : rows(r), cols(c), values(r * static_cast<std::size_t>(c), 0.0) {}

  double operator()(std::size_t n, int k) const {
    return values[n * static_cast<std::size_t>(cols) +
                  static_cast<std::size_t>(k)];
  }
  double& operator()(std::size_t n, int k) {
    return values[n * static_cast<std::size_t>(cols) +
                  static_cast<std::size_t>(k)];
  }
  std::span<const double> row(std::size_t n) const {
    return {values.data() + n * static_cast<std::size_t>(cols),
            static_cast<std::size_t>(cols)};
  }
};

/// Per-position importance weights for every impression:
/// w[n][k] = target(a_k | context, logged prefix) / logging propensity.
/// Weights are nonnegative and finite; the logging propensity floor keeps
/// them bounded.
Matrix per_position_weights(const Dataset& dataset, const Policy& target);

/// Weight of a single position (0-based) of one impression.
double per_position_weight(const LoggedImpression& imp, const Policy& target,
                           int position);

/// For each position k, the normalized distribution over impressions
/// proportional to the prefix weight product prod_{j<=k} w[n][j].
///
/// Products run in log space when any positive weight falls outside
/// [1e-6, 1e6]; otherwise they are computed directly so small cases match a
/// naive product bit for bit. Throws EstimatorError when a position's total
/// mass is zero (the target puts no mass on any logged prefix of that
/// length).
std::vector<std::vector<double>> prefix_weight_distributions(
    const Matrix& weights);

}  // namespace slateval
