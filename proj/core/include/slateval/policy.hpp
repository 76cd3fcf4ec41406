#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "slateval/rng.hpp"
#include "slateval/types.hpp"

namespace slateval {

/// Per-context candidate scores, aligned with each context's candidate list.
class ScoreTable {
 public:
  struct Entry {
    std::vector<std::string> candidates;
    std::vector<double> scores;
  };

  /// Adds scores aligned with ctx.candidates.
  void add(const Context& ctx, std::vector<double> scores);
  /// Adds scores keyed by candidate id; every candidate must be present.
  void add(const Context& ctx, const std::map<std::string, double>& by_candidate);

  bool contains(const std::string& context_id) const;
  /// Scores aligned with ctx.candidates; throws ValidationError if the
  /// context is unknown or the candidate count differs.
  std::span<const double> scores_for(const Context& ctx) const;

  /// Entries sorted by context id, for deterministic iteration.
  std::vector<std::pair<std::string, const Entry*>> sorted_entries() const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, Entry> entries_;
};

/// A slate policy that fills positions sequentially without replacement.
///
/// The single primitive is the conditional distribution over candidates for
/// the next position given the already-chosen prefix; sampling, propensity
/// lookup and slate enumeration are built on top of it.
class Policy {
 public:
  virtual ~Policy() = default;

  /// Canonical label, e.g. "uniform" or "softmax:desc:0.3".
  virtual std::string name() const = 0;

  /// True when the policy always produces the same slate for a context.
  virtual bool deterministic() const { return false; }

  /// Writes P(next action = candidate i | prefix) into `out`, one entry per
  /// candidate of `ctx` (zero for already-chosen candidates). `prefix` holds
  /// candidate indices of the already-filled positions, in order. Entries sum
  /// to 1. Throws ValidationError when no candidates remain.
  virtual void action_probabilities(const Context& ctx,
                                    std::span<const std::int32_t> prefix,
                                    std::span<double> out) const = 0;

  /// Probability of placing `candidate` next, given already-shown actions.
  /// String-based convenience over action_probabilities.
  double propensity(const Context& ctx,
                    std::span<const std::string> previous_actions,
                    const std::string& candidate) const;

  double propensity_indexed(const Context& ctx,
                            std::span<const std::int32_t> prefix,
                            std::int32_t candidate) const;

  /// Samples a slate of `slate_size` distinct candidates, recording the
  /// per-position propensities actually used.
  SlateSample sample_slate(const Context& ctx, int slate_size, Rng& rng) const;
};

class UniformRandomPolicy final : public Policy {
 public:
  std::string name() const override { return "uniform"; }
  void action_probabilities(const Context& ctx,
                            std::span<const std::int32_t> prefix,
                            std::span<double> out) const override;
};

enum class SortDirection { ascending, descending };

/// Deterministic policy that fills the slate in score order; ties broken by
/// candidate id.
class ScoreSortedPolicy final : public Policy {
 public:
  ScoreSortedPolicy(std::shared_ptr<const ScoreTable> scores,
                    SortDirection direction);
  std::string name() const override;
  bool deterministic() const override { return true; }
  void action_probabilities(const Context& ctx,
                            std::span<const std::int32_t> prefix,
                            std::span<double> out) const override;

 private:
  std::span<const std::int32_t> order_for(const Context& ctx) const;

  std::shared_ptr<const ScoreTable> scores_;
  SortDirection direction_;
  std::unordered_map<std::string, std::vector<std::int32_t>> order_;
};

/// Samples each position from softmax(score / temperature) over the
/// remaining candidates. Direction `ascending` negates the scores so low
/// scores are preferred.
class SoftmaxPolicy final : public Policy {
 public:
  SoftmaxPolicy(std::shared_ptr<const ScoreTable> scores, double temperature,
                SortDirection direction = SortDirection::descending);
  std::string name() const override;
  void action_probabilities(const Context& ctx,
                            std::span<const std::int32_t> prefix,
                            std::span<double> out) const override;
  double temperature() const { return temperature_; }

 private:
  std::shared_ptr<const ScoreTable> scores_;
  double temperature_;
  SortDirection direction_;
};

/// Parsed policy description.
struct PolicySpec {
  std::string kind;                // "uniform" | "sorted" | "softmax"
  SortDirection direction = SortDirection::descending;
  double temperature = 1.0;        // softmax only
};

/// Canonical label for a spec ("uniform", "sorted:asc", "softmax:desc:0.3").
std::string policy_name(const PolicySpec& spec);

/// Parses shorthand like "uniform", "sorted:desc", "softmax:0.3" or
/// "softmax:asc:0.3". Throws ValidationError on unknown forms.
PolicySpec parse_policy_spec(std::string_view text);

/// Parses a JSON object {"kind": ..., "direction": ..., "temperature": ...}.
PolicySpec policy_spec_from_json(std::string_view json_text);

/// Serializes a spec to its JSON object form.
std::string policy_spec_to_json(const PolicySpec& spec);

/// Builds a policy; `scores` may be null for kind "uniform" and is required
/// otherwise.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec,
                                    std::shared_ptr<const ScoreTable> scores);

}  // namespace slateval
