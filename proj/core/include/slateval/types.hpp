#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace slateval {

/// A logging/evaluation context with its fixed candidate pool.
struct Context {
  std::string id;
  std::vector<std::string> candidates;
};

/// One logged slate: the wire-format record.
/// `actions[k]` is the item shown at position k (0-based), drawn without
/// replacement from `candidate_set`. `logging_propensities[k]` is the
/// probability the logging policy assigned to `actions[k]` at position k
/// given the preceding actions. `rewards[k]` is the observed per-position
/// reward.
struct LoggedImpression {
  std::string context_id;
  std::vector<std::string> candidate_set;
  std::vector<std::string> actions;
  std::vector<double> logging_propensities;
  std::vector<double> rewards;
};

/// A sampled slate with the per-position propensities of the sampler.
struct SlateSample {
  std::vector<std::int32_t> action_indices;
  std::vector<double> propensities;
};

/// Smallest admissible logging propensity; smaller values are rejected so
/// importance weights stay finite.
inline constexpr double kMinPropensity = 1e-12;

/// Checks a single record: matching lengths, a nonempty slate, distinct
/// actions drawn from the candidate set, propensities in [kMinPropensity, 1],
/// and finite nonnegative rewards. Throws ValidationError.
void validate_impression(const LoggedImpression& imp);

/// A collection of logged impressions with a common slate size.
///
/// Storage is columnar: actions are interned to indices into the owning
/// context's candidate list, and propensities/rewards sit in flat row-major
/// arrays of shape [size x slate_size].
class Dataset {
 public:
  /// Validates and interns a batch of records. Impressions sharing a
  /// context_id must carry identical candidate sets.
  explicit Dataset(const std::vector<LoggedImpression>& impressions);

  /// Assembles a dataset from already-indexed columns (the simulator path).
  /// `context_index[n]` selects the context of impression n; `actions`,
  /// `propensities` and `rewards` are row-major [n x slate_size].
  Dataset(std::vector<Context> contexts, int slate_size,
          std::vector<std::int32_t> context_index,
          std::vector<std::int32_t> actions, std::vector<double> propensities,
          std::vector<double> rewards);

  std::size_t size() const { return context_index_.size(); }
  int slate_size() const { return slate_size_; }

  const Context& context(std::size_t n) const {
    return contexts_[static_cast<std::size_t>(context_index_[n])];
  }
  std::int32_t context_index(std::size_t n) const { return context_index_[n]; }

  std::span<const std::int32_t> actions(std::size_t n) const {
    return {actions_.data() + n * static_cast<std::size_t>(slate_size_),
            static_cast<std::size_t>(slate_size_)};
  }
  std::span<const double> logging_propensities(std::size_t n) const {
    return {propensities_.data() + n * static_cast<std::size_t>(slate_size_),
            static_cast<std::size_t>(slate_size_)};
  }
  std::span<const double> rewards(std::size_t n) const {
    return {rewards_.data() + n * static_cast<std::size_t>(slate_size_),
            static_cast<std::size_t>(slate_size_)};
  }
  /// All rewards, row-major [size x slate_size].
  std::span<const double> rewards_flat() const { return rewards_; }

  double reward_sum(std::size_t n) const;

  const std::vector<Context>& contexts() const { return contexts_; }

  /// Materializes impression n back into wire format.
  LoggedImpression impression(std::size_t n) const;

  /// The first `m` impressions as a new dataset (m >= 1).
  Dataset prefix(std::size_t m) const;

 private:
  Dataset() = default;
  void check_columns() const;

  std::vector<Context> contexts_;
  int slate_size_ = 0;
  std::vector<std::int32_t> context_index_;
  std::vector<std::int32_t> actions_;
  std::vector<double> propensities_;
  std::vector<double> rewards_;
};

}  // namespace slateval
