#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slateval/policy.hpp"
#include "slateval/rng.hpp"
#include "slateval/types.hpp"

namespace slateval {

enum class CascadeMode { hard, probabilistic };

/// Whether a suppressed position's zero suppresses the next position in
/// turn (chain) or the process recovers one step after a suppressed zero.
enum class CascadeRecovery { chain, one_step };

struct CascadeConfig {
  CascadeMode mode = CascadeMode::hard;
  /// Damping of the success probability after an observed zero, in [0, 1].
  /// Used by probabilistic mode only: the next success probability becomes
  /// p * (1 - rho). rho = 1 reproduces hard mode, rho = 0 removes the
  /// interaction entirely.
  double rho = 0.7;
  CascadeRecovery recovery = CascadeRecovery::chain;
};

/// A synthetic environment: contexts with per-candidate base success
/// probabilities and a cascading user model over slate positions.
struct SimWorld {
  std::vector<Context> contexts;
  /// true_probs[c][i] is the base success probability of candidate i of
  /// context c, aligned with contexts[c].candidates.
  std::vector<std::vector<double>> true_probs;
  CascadeConfig cascade;
  std::uint64_t seed = 0;

  int candidates_per_context() const {
    return contexts.empty()
               ? 0
               : static_cast<int>(contexts.front().candidates.size());
  }
};

std::string cascade_mode_name(CascadeMode mode);
CascadeMode parse_cascade_mode(std::string_view name);
std::string cascade_recovery_name(CascadeRecovery recovery);
CascadeRecovery parse_cascade_recovery(std::string_view name);

/// Draws a world with `n_candidates` candidates per context and base
/// probabilities i.i.d. Uniform(0,1). Deterministic given the seed.
SimWorld generate_world(int n_contexts, int n_candidates,
                        const CascadeConfig& cascade, std::uint64_t seed);

/// Score table mapping each context's candidates to their base success
/// probabilities; feeds the sorted/softmax policies.
std::shared_ptr<const ScoreTable> score_table_from_world(const SimWorld& world);

/// Samples binary per-position rewards for one displayed slate, applying
/// the cascade rule position by position.
std::vector<double> sample_rewards(const SimWorld& world,
                                   std::size_t context_index,
                                   std::span<const std::int32_t> actions,
                                   Rng& rng);

/// Expected per-position rewards of a fixed slate in one context, by the
/// forward recursion over the cascade chain.
std::vector<double> slate_position_values(const SimWorld& world,
                                          std::size_t context_index,
                                          std::span<const std::int32_t> actions);

/// Expected total reward of a fixed slate in one context.
double slate_value(const SimWorld& world, std::size_t context_index,
                   std::span<const std::int32_t> actions);

/// Logs `n` impressions: per impression, a uniformly drawn context, a slate
/// sampled from the logging policy with its propensities, and cascade
/// rewards. Impression i draws from a seed derived as (seed, i), so the
/// result does not depend on sharding.
Dataset log_impressions(const SimWorld& world, const Policy& logging,
                        int slate_size, std::size_t n, std::uint64_t seed);

struct TruthResult {
  double value = 0.0;
  std::optional<double> standard_error;  // Monte-Carlo only
  std::string method;                    // "exact" | "enumeration" | "monte_carlo"
};

/// Expected slate reward of the target policy, averaged uniformly over
/// contexts. Deterministic targets are evaluated exactly; stochastic
/// targets are enumerated when each context has at most 6 candidates, and
/// otherwise estimated by Monte-Carlo over `mc_samples` slate draws (error
/// if mc_samples = 0).
TruthResult true_value(const SimWorld& world, const Policy& target,
                       int slate_size, long mc_samples = 0,
                       std::uint64_t seed = 0);

SimWorld load_world(const std::filesystem::path& path);
void save_world(const SimWorld& world, const std::filesystem::path& path);

}  // namespace slateval
