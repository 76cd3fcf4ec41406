#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "slateval/errors.hpp"
#include "slateval/estimators.hpp"
#include "slateval/rng.hpp"

namespace slateval {

namespace {

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU |
                                            Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv(0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Slot-activity indicator expectation of the target in one context:
/// entry k * M + i is P(position k shows candidate i).
Eigen::VectorXd target_activity(const Context& ctx, const Policy& target,
                                int slate_size, long mc_samples,
                                std::uint64_t seed, std::string_view label) {
  const int m = static_cast<int>(ctx.candidates.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(slate_size) * m);
  if (target.deterministic()) {
    Rng rng(0);
    const SlateSample s = target.sample_slate(ctx, slate_size, rng);
    for (int k = 0; k < slate_size; ++k) {
      q(static_cast<Eigen::Index>(k) * m +
        s.action_indices[static_cast<std::size_t>(k)]) = 1.0;
    }
    return q;
  }
  if (mc_samples < 1) {
    throw ValidationError(
        "pi: a stochastic target needs a positive Monte-Carlo sample count");
  }
  Rng rng(derive_seed(seed, std::string(label) + ctx.id));
  const double inc = 1.0 / static_cast<double>(mc_samples);
  for (long s = 0; s < mc_samples; ++s) {
    const SlateSample sample = target.sample_slate(ctx, slate_size, rng);
    for (int k = 0; k < slate_size; ++k) {
      q(static_cast<Eigen::Index>(k) * m +
        sample.action_indices[static_cast<std::size_t>(k)]) += inc;
    }
  }
  return q;
}

EstimateReport accumulate(const Dataset& dataset,
                          const std::vector<Eigen::VectorXd>& context_value,
                          const char* name) {
  const std::size_t n = dataset.size();
  const int k = dataset.slate_size();
  EstimateReport rep;
  rep.estimator = name;
  rep.per_position_value.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<double> contrib(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd& v =
        context_value[static_cast<std::size_t>(dataset.context_index(i))];
    const int m = static_cast<int>(dataset.context(i).candidates.size());
    const auto actions = dataset.actions(i);
    const auto rewards = dataset.rewards(i);
    double c = 0.0;
    for (int j = 0; j < k; ++j) {
      c += v(static_cast<Eigen::Index>(j) * m +
             actions[static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < k; ++j) {
      rep.per_position_value[static_cast<std::size_t>(j)] +=
          c * rewards[static_cast<std::size_t>(j)];
      contrib[i] += c * rewards[static_cast<std::size_t>(j)];
    }
  }
  for (double& v : rep.per_position_value) v /= static_cast<double>(n);
  double value = 0.0;
  for (double v : rep.per_position_value) value += v;
  rep.value = value;
  rep.n_used = static_cast<std::int64_t>(n);
  double mean = 0.0;
  for (double c : contrib) mean += c;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double c : contrib) ss += (c - mean) * (c - mean);
  if (n > 1) {
    rep.standard_error =
        std::sqrt(ss / static_cast<double>(n - 1)) /
        std::sqrt(static_cast<double>(n));
  }
  return rep;
}

}  // namespace

EstimateReport pi_uniform(const Dataset& dataset, const Policy& target,
                          long eh_mc_samples, std::uint64_t seed) {
  const int k = dataset.slate_size();
  for (const auto& ctx : dataset.contexts()) {
    if (static_cast<int>(ctx.candidates.size()) != k) {
      throw EstimatorError(
          "pi: slate size must equal the candidate count (context '" +
          ctx.id + "' has " + std::to_string(ctx.candidates.size()) +
          " candidates for slate size " + std::to_string(k) + ")");
    }
  }
  const int m = k;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto props = dataset.logging_propensities(i);
    for (int j = 0; j < k; ++j) {
      const double expected = 1.0 / static_cast<double>(m - j);
      if (std::abs(props[static_cast<std::size_t>(j)] - expected) > 1e-9) {
        throw EstimatorError(
            "pi: impression " + std::to_string(i) +
            " was not logged by uniform without-replacement sampling "
            "(position " + std::to_string(j) + ")");
      }
    }
  }

  // Closed-form slot-activity covariance under uniform logging: slots are
  // exchangeable and items within a slot exclusive.
  const Eigen::Index d = static_cast<Eigen::Index>(k) * m;
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(d, d);
  const double diag = 1.0 / static_cast<double>(m);
  const double cross = 1.0 / (static_cast<double>(m) * (m - 1));
  for (int k1 = 0; k1 < k; ++k1) {
    for (int i1 = 0; i1 < m; ++i1) {
      const Eigen::Index r = static_cast<Eigen::Index>(k1) * m + i1;
      for (int k2 = 0; k2 < k; ++k2) {
        for (int i2 = 0; i2 < m; ++i2) {
          const Eigen::Index c = static_cast<Eigen::Index>(k2) * m + i2;
          if (k1 == k2) {
            gamma(r, c) = i1 == i2 ? diag : 0.0;
          } else {
            gamma(r, c) = i1 == i2 ? 0.0 : cross;
          }
        }
      }
    }
  }
  const Eigen::MatrixXd pinv = pseudo_inverse(gamma);

  std::vector<Eigen::VectorXd> context_value;
  context_value.reserve(dataset.contexts().size());
  for (const auto& ctx : dataset.contexts()) {
    const Eigen::VectorXd q =
        target_activity(ctx, target, k, eh_mc_samples, seed, "pi_eh/");
    context_value.push_back(pinv * q);
  }
  return accumulate(dataset, context_value, "pi");
}

EstimateReport pi_mc(const Dataset& dataset, const Policy& target,
                     const Policy& logging, long mc_samples,
                     std::uint64_t seed) {
  if (mc_samples < 1) {
    throw ValidationError("pi_mc: sample count must be positive");
  }
  const int k = dataset.slate_size();
  std::vector<Eigen::VectorXd> context_value;
  context_value.reserve(dataset.contexts().size());
  for (const auto& ctx : dataset.contexts()) {
    const int m = static_cast<int>(ctx.candidates.size());
    const Eigen::Index d = static_cast<Eigen::Index>(k) * m;
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(d, d);
    Rng rng(derive_seed(seed, "pi_mc_gamma/" + ctx.id));
    const double inc = 1.0 / static_cast<double>(mc_samples);
    std::vector<Eigen::Index> on(static_cast<std::size_t>(k));
    for (long s = 0; s < mc_samples; ++s) {
      const SlateSample sample = logging.sample_slate(ctx, k, rng);
      for (int j = 0; j < k; ++j) {
        on[static_cast<std::size_t>(j)] =
            static_cast<Eigen::Index>(j) * m +
            sample.action_indices[static_cast<std::size_t>(j)];
      }
      for (Eigen::Index a : on) {
        for (Eigen::Index b : on) gamma(a, b) += inc;
      }
    }
    const Eigen::VectorXd q =
        target_activity(ctx, target, k, mc_samples, seed, "pi_mc_eh/");
    context_value.push_back(pseudo_inverse(gamma) * q);
  }
  return accumulate(dataset, context_value, "pi_mc");
}

}  // namespace slateval
