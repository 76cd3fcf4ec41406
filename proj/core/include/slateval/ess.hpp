#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "slateval/errors.hpp"

namespace slateval {

/// Effective sample size of a set of nonnegative importance weights,
/// (sum w)^2 / (sum w^2). Invariant under rescaling all weights by a
/// positive constant, and bounded by [1, n] for any nonzero weight vector.
inline double effective_sample_size(std::span<const double> weights) {
  if (weights.empty()) {
    throw std::invalid_argument("effective_sample_size: empty weight vector");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(
          "effective_sample_size: weights must be finite and nonnegative");
    }
    sum += w;
    sum_sq += w * w;
  }
  if (sum_sq == 0.0) {
    throw EstimatorError("degenerate weights");
  }
  return sum * sum / sum_sq;
}

}  // namespace slateval
