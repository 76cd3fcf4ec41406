#include "slateval/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "slateval/errors.hpp"

namespace slateval {

namespace {

std::string describe(const LoggedImpression& imp) {
  return imp.context_id.empty() ? std::string("<unnamed>") : imp.context_id;
}

}  // namespace

void validate_impression(const LoggedImpression& imp) {
  const std::size_t k = imp.actions.size();
  if (k == 0) {
    throw ValidationError("impression for context '" + describe(imp) +
                          "': slate is empty");
  }
  if (imp.logging_propensities.size() != k || imp.rewards.size() != k) {
    throw ValidationError(
        "impression for context '" + describe(imp) +
        "': actions, logging_propensities and rewards must have equal length");
  }
  if (imp.candidate_set.empty()) {
    throw ValidationError("impression for context '" + describe(imp) +
                          "': candidate set is empty");
  }
  if (k > imp.candidate_set.size()) {
    throw ValidationError("impression for context '" + describe(imp) +
                          "': slate is longer than the candidate set");
  }
  std::unordered_set<std::string_view> candidates;
  for (const auto& c : imp.candidate_set) {
    if (!candidates.insert(c).second) {
      throw ValidationError("impression for context '" + describe(imp) +
                            "': duplicate candidate '" + c + "'");
    }
  }
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& a = imp.actions[i];
    if (!candidates.contains(a)) {
      throw ValidationError("impression for context '" + describe(imp) +
                            "': action '" + a + "' is not a candidate");
    }
    if (!seen.insert(a).second) {
      throw ValidationError("impression for context '" + describe(imp) +
                            "': action '" + a + "' repeats within the slate");
    }
    const double p = imp.logging_propensities[i];
    if (!std::isfinite(p) || p < kMinPropensity || p > 1.0) {
      throw ValidationError("impression for context '" + describe(imp) +
                            "': logging propensity at position " +
                            std::to_string(i) + " is outside [1e-12, 1]");
    }
    const double r = imp.rewards[i];
    if (!std::isfinite(r) || r < 0.0) {
      throw ValidationError("impression for context '" + describe(imp) +
                            "': reward at position " + std::to_string(i) +
                            " must be finite and nonnegative");
    }
  }
}

Dataset::Dataset(const std::vector<LoggedImpression>& impressions) {
  if (impressions.empty()) {
    throw ValidationError("dataset: no impressions");
  }
  slate_size_ = static_cast<int>(impressions.front().actions.size());
  const std::size_t n = impressions.size();
  const std::size_t k = static_cast<std::size_t>(slate_size_);
  context_index_.reserve(n);
  actions_.reserve(n * k);
  propensities_.reserve(n * k);
  rewards_.reserve(n * k);

  std::unordered_map<std::string, std::int32_t> context_of;
  std::unordered_map<std::string, std::int32_t> candidate_of;  // per context
  std::int32_t current_context = -1;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& imp = impressions[i];
    validate_impression(imp);
    if (imp.actions.size() != k) {
      throw ValidationError("impression " + std::to_string(i) +
                            " (context '" + imp.context_id +
                            "'): slate size differs from the first impression");
    }
    auto [it, inserted] =
        context_of.try_emplace(imp.context_id, static_cast<std::int32_t>(contexts_.size()));
    if (inserted) {
      contexts_.push_back(Context{imp.context_id, imp.candidate_set});
    } else if (contexts_[static_cast<std::size_t>(it->second)].candidates !=
               imp.candidate_set) {
      throw ValidationError("impression " + std::to_string(i) + ": context '" +
                            imp.context_id +
                            "' appears with a different candidate set");
    }
    const std::int32_t ctx = it->second;
    if (ctx != current_context) {
      candidate_of.clear();
      const auto& cands = contexts_[static_cast<std::size_t>(ctx)].candidates;
      for (std::size_t j = 0; j < cands.size(); ++j) {
        candidate_of.emplace(cands[j], static_cast<std::int32_t>(j));
      }
      current_context = ctx;
    }
    context_index_.push_back(ctx);
    for (std::size_t j = 0; j < k; ++j) {
      actions_.push_back(candidate_of.at(imp.actions[j]));
      propensities_.push_back(imp.logging_propensities[j]);
      rewards_.push_back(imp.rewards[j]);
    }
  }
}

Dataset::Dataset(std::vector<Context> contexts, int slate_size,
                 std::vector<std::int32_t> context_index,
                 std::vector<std::int32_t> actions,
                 std::vector<double> propensities, std::vector<double> rewards)
    : contexts_(std::move(contexts)),
      slate_size_(slate_size),
      context_index_(std::move(context_index)),
      actions_(std::move(actions)),
      propensities_(std::move(propensities)),
      rewards_(std::move(rewards)) {
  check_columns();
}

void Dataset::check_columns() const {
  if (context_index_.empty()) {
    throw ValidationError("dataset: no impressions");
  }
  if (slate_size_ < 1) {
    throw ValidationError("dataset: slate size must be positive");
  }
  const std::size_t nk = context_index_.size() * static_cast<std::size_t>(slate_size_);
  if (actions_.size() != nk || propensities_.size() != nk ||
      rewards_.size() != nk) {
    throw ValidationError("dataset: column lengths do not match");
  }
  for (std::int32_t c : context_index_) {
    if (c < 0 || static_cast<std::size_t>(c) >= contexts_.size()) {
      throw ValidationError("dataset: context index out of range");
    }
  }
  const std::size_t k = static_cast<std::size_t>(slate_size_);
  for (std::size_t n = 0; n < context_index_.size(); ++n) {
    const std::size_t m =
        contexts_[static_cast<std::size_t>(context_index_[n])]
            .candidates.size();
    const std::int32_t* row = actions_.data() + n * k;
    for (std::size_t i = 0; i < k; ++i) {
      if (row[i] < 0 || static_cast<std::size_t>(row[i]) >= m) {
        throw ValidationError("dataset: action index out of range");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (row[i] == row[j]) {
          throw ValidationError("dataset: impression " + std::to_string(n) +
                                " repeats an action within the slate");
        }
      }
    }
    const double* props = propensities_.data() + n * k;
    const double* rews = rewards_.data() + n * k;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(props[i] >= kMinPropensity) || !(props[i] <= 1.0)) {
        throw ValidationError("dataset: impression " + std::to_string(n) +
                              " has a logging propensity outside "
                              "[1e-12, 1]");
      }
      if (!(rews[i] >= 0.0) || !std::isfinite(rews[i])) {
        throw ValidationError("dataset: impression " + std::to_string(n) +
                              " has a negative or non-finite reward");
      }
    }
  }
}

double Dataset::reward_sum(std::size_t n) const {
  double s = 0.0;
  for (double r : rewards(n)) s += r;
  return s;
}

LoggedImpression Dataset::impression(std::size_t n) const {
  const Context& ctx = context(n);
  LoggedImpression imp;
  imp.context_id = ctx.id;
  imp.candidate_set = ctx.candidates;
  const auto acts = actions(n);
  imp.actions.reserve(acts.size());
  for (std::int32_t a : acts) {
    imp.actions.push_back(ctx.candidates[static_cast<std::size_t>(a)]);
  }
  const auto props = logging_propensities(n);
  imp.logging_propensities.assign(props.begin(), props.end());
  const auto rews = rewards(n);
  imp.rewards.assign(rews.begin(), rews.end());
  return imp;
}

Dataset Dataset::prefix(std::size_t m) const {
  if (m == 0 || m > size()) {
    throw ValidationError("dataset: prefix length out of range");
  }
  Dataset out;
  out.contexts_ = contexts_;
  out.slate_size_ = slate_size_;
  const std::size_t k = static_cast<std::size_t>(slate_size_);
  out.context_index_.assign(context_index_.begin(),
                            context_index_.begin() + static_cast<std::ptrdiff_t>(m));
  out.actions_.assign(actions_.begin(),
                      actions_.begin() + static_cast<std::ptrdiff_t>(m * k));
  out.propensities_.assign(
      propensities_.begin(),
      propensities_.begin() + static_cast<std::ptrdiff_t>(m * k));
  out.rewards_.assign(rewards_.begin(),
                      rewards_.begin() + static_cast<std::ptrdiff_t>(m * k));
  return out;
}

}  // namespace slateval
