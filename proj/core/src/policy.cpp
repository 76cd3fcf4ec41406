#include "slateval/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "slateval/errors.hpp"
#include "slateval/format.hpp"

namespace slateval {

namespace {

std::int32_t candidate_index(const Context& ctx, const std::string& candidate) {
  for (std::size_t i = 0; i < ctx.candidates.size(); ++i) {
    if (ctx.candidates[i] == candidate) return static_cast<std::int32_t>(i);
  }
  throw ValidationError("context '" + ctx.id + "': unknown candidate '" +
                        candidate + "'");
}

void check_remaining(const Context& ctx, std::span<const std::int32_t> prefix,
                     std::span<double> out) {
  if (out.size() != ctx.candidates.size()) {
    throw ValidationError("context '" + ctx.id +
                          "': output span does not match candidate count");
  }
  if (prefix.size() >= ctx.candidates.size()) {
    throw ValidationError("context '" + ctx.id +
                          "': no candidates remain for the next position");
  }
}

}  // namespace

void ScoreTable::add(const Context& ctx, std::vector<double> scores) {
  if (scores.size() != ctx.candidates.size()) {
    throw ValidationError("scores for context '" + ctx.id +
                          "' do not match its candidate count");
  }
  entries_[ctx.id] = Entry{ctx.candidates, std::move(scores)};
}

void ScoreTable::add(const Context& ctx,
                     const std::map<std::string, double>& by_candidate) {
  std::vector<double> aligned;
  aligned.reserve(ctx.candidates.size());
  for (const auto& c : ctx.candidates) {
    auto it = by_candidate.find(c);
    if (it == by_candidate.end()) {
      throw ValidationError("scores for context '" + ctx.id +
                            "' are missing candidate '" + c + "'");
    }
    aligned.push_back(it->second);
  }
  entries_[ctx.id] = Entry{ctx.candidates, std::move(aligned)};
}

bool ScoreTable::contains(const std::string& context_id) const {
  return entries_.contains(context_id);
}

std::span<const double> ScoreTable::scores_for(const Context& ctx) const {
  auto it = entries_.find(ctx.id);
  if (it == entries_.end()) {
    throw ValidationError("no scores for context '" + ctx.id + "'");
  }
  if (it->second.scores.size() != ctx.candidates.size()) {
    throw ValidationError("scores for context '" + ctx.id +
                          "' do not match its candidate count");
  }
  return it->second.scores;
}

std::vector<std::pair<std::string, const ScoreTable::Entry*>>
ScoreTable::sorted_entries() const {
  std::vector<std::pair<std::string, const Entry*>> out;
  out.reserve(entries_.size());
  for (const auto& [id, entry] : entries_) out.emplace_back(id, &entry);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

double Policy::propensity(const Context& ctx,
                          std::span<const std::string> previous_actions,
                          const std::string& candidate) const {
  std::vector<std::int32_t> prefix;
  prefix.reserve(previous_actions.size());
  for (const auto& a : previous_actions) {
    prefix.push_back(candidate_index(ctx, a));
  }
  return propensity_indexed(ctx, prefix, candidate_index(ctx, candidate));
}

double Policy::propensity_indexed(const Context& ctx,
                                  std::span<const std::int32_t> prefix,
                                  std::int32_t candidate) const {
  std::vector<double> probs(ctx.candidates.size());
  action_probabilities(ctx, prefix, probs);
  return probs[static_cast<std::size_t>(candidate)];
}

SlateSample Policy::sample_slate(const Context& ctx, int slate_size,
                                 Rng& rng) const {
  const std::size_t m = ctx.candidates.size();
  if (slate_size < 1 || static_cast<std::size_t>(slate_size) > m) {
    throw ValidationError("context '" + ctx.id +
                          "': slate size must be in [1, candidate count]");
  }
  SlateSample out;
  out.action_indices.reserve(static_cast<std::size_t>(slate_size));
  out.propensities.reserve(static_cast<std::size_t>(slate_size));
  std::vector<double> probs(m);
  for (int k = 0; k < slate_size; ++k) {
    action_probabilities(ctx, out.action_indices, probs);
    const double u = uniform_unit(rng);
    double cum = 0.0;
    std::int32_t chosen = -1;
    std::int32_t last_positive = -1;
    for (std::size_t i = 0; i < m; ++i) {
      const double p = probs[i];
      if (p <= 0.0) continue;
      last_positive = static_cast<std::int32_t>(i);
      cum += p;
      if (u < cum) {
        chosen = static_cast<std::int32_t>(i);
        break;
      }
    }
    if (chosen < 0) chosen = last_positive;  // guards rounding at u ~ 1
    out.action_indices.push_back(chosen);
    out.propensities.push_back(probs[static_cast<std::size_t>(chosen)]);
  }
  return out;
}

void UniformRandomPolicy::action_probabilities(
    const Context& ctx, std::span<const std::int32_t> prefix,
    std::span<double> out) const {
  check_remaining(ctx, prefix, out);
  const double p =
      1.0 / static_cast<double>(ctx.candidates.size() - prefix.size());
  std::fill(out.begin(), out.end(), p);
  for (std::int32_t i : prefix) out[static_cast<std::size_t>(i)] = 0.0;
}

ScoreSortedPolicy::ScoreSortedPolicy(std::shared_ptr<const ScoreTable> scores,
                                     SortDirection direction)
    : scores_(std::move(scores)), direction_(direction) {
  if (!scores_) {
    throw ValidationError("sorted policy requires a score table");
  }
  for (const auto& [id, entry] : scores_->sorted_entries()) {
    std::vector<std::int32_t> order(entry->candidates.size());
    std::iota(order.begin(), order.end(), 0);
    const auto& s = entry->scores;
    const auto& c = entry->candidates;
    const bool asc = direction_ == SortDirection::ascending;
    std::sort(order.begin(), order.end(),
              [&](std::int32_t a, std::int32_t b) {
                const double sa = s[static_cast<std::size_t>(a)];
                const double sb = s[static_cast<std::size_t>(b)];
                if (sa != sb) return asc ? sa < sb : sa > sb;
                return c[static_cast<std::size_t>(a)] <
                       c[static_cast<std::size_t>(b)];
              });
    order_.emplace(id, std::move(order));
  }
}

std::string ScoreSortedPolicy::name() const {
  return direction_ == SortDirection::ascending ? "sorted:asc" : "sorted:desc";
}

std::span<const std::int32_t> ScoreSortedPolicy::order_for(
    const Context& ctx) const {
  auto it = order_.find(ctx.id);
  if (it == order_.end()) {
    throw ValidationError("no scores for context '" + ctx.id + "'");
  }
  if (it->second.size() != ctx.candidates.size()) {
    throw ValidationError("scores for context '" + ctx.id +
                          "' do not match its candidate count");
  }
  return it->second;
}

void ScoreSortedPolicy::action_probabilities(
    const Context& ctx, std::span<const std::int32_t> prefix,
    std::span<double> out) const {
  check_remaining(ctx, prefix, out);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::int32_t i : order_for(ctx)) {
    if (std::find(prefix.begin(), prefix.end(), i) == prefix.end()) {
      out[static_cast<std::size_t>(i)] = 1.0;
      return;
    }
  }
  throw ValidationError("context '" + ctx.id +
                        "': no candidates remain for the next position");
}

SoftmaxPolicy::SoftmaxPolicy(std::shared_ptr<const ScoreTable> scores,
                             double temperature, SortDirection direction)
    : scores_(std::move(scores)),
      temperature_(temperature),
      direction_(direction) {
  if (!scores_) {
    throw ValidationError("softmax policy requires a score table");
  }
  if (!(temperature_ > 0.0) || !std::isfinite(temperature_)) {
    throw ValidationError("softmax temperature must be positive and finite");
  }
}

std::string SoftmaxPolicy::name() const {
  return std::string("softmax:") +
         (direction_ == SortDirection::ascending ? "asc" : "desc") + ":" +
         format_double(temperature_);
}

void SoftmaxPolicy::action_probabilities(const Context& ctx,
                                         std::span<const std::int32_t> prefix,
                                         std::span<double> out) const {
  check_remaining(ctx, prefix, out);
  const auto scores = scores_->scores_for(ctx);
  const double sign = direction_ == SortDirection::ascending ? -1.0 : 1.0;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sign * scores[i];
  for (std::int32_t i : prefix) {
    out[static_cast<std::size_t>(i)] = -std::numeric_limits<double>::infinity();
  }
  double max = -std::numeric_limits<double>::infinity();
  for (double v : out) max = std::max(max, v);
  double sum = 0.0;
  for (double& v : out) {
    v = std::isinf(v) ? 0.0 : std::exp((v - max) / temperature_);
    sum += v;
  }
  for (double& v : out) v /= sum;
}

std::string policy_name(const PolicySpec& spec) {
  if (spec.kind == "uniform") return "uniform";
  const char* dir =
      spec.direction == SortDirection::ascending ? "asc" : "desc";
  if (spec.kind == "sorted") return std::string("sorted:") + dir;
  return std::string("softmax:") + dir + ":" + format_double(spec.temperature);
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

SortDirection parse_direction(const std::string& s) {
  if (s == "asc") return SortDirection::ascending;
  if (s == "desc") return SortDirection::descending;
  throw ValidationError("unknown policy direction '" + s +
                        "' (expected asc or desc)");
}

void check_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw ValidationError("softmax temperature must be positive and finite");
  }
}

}  // namespace

PolicySpec parse_policy_spec(std::string_view text) {
  const auto parts = split(text, ':');
  PolicySpec spec;
  spec.kind = parts[0];
  if (spec.kind == "uniform") {
    if (parts.size() > 1) {
      throw ValidationError("policy 'uniform' takes no arguments");
    }
    return spec;
  }
  if (spec.kind == "sorted") {
    if (parts.size() > 2) {
      throw ValidationError("policy 'sorted' takes at most a direction");
    }
    if (parts.size() == 2) spec.direction = parse_direction(parts[1]);
    return spec;
  }
  if (spec.kind == "softmax") {
    for (std::size_t i = 1; i < parts.size(); ++i) {
      double t;
      if (parse_double(parts[i], t)) {
        spec.temperature = t;
      } else {
        spec.direction = parse_direction(parts[i]);
      }
    }
    check_temperature(spec.temperature);
    return spec;
  }
  throw ValidationError("unknown policy '" + spec.kind + "'");
}

PolicySpec policy_spec_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("policy config is not valid JSON: ") +
                          e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ValidationError("policy config must be an object with a 'kind'");
  }
  PolicySpec spec;
  spec.kind = j["kind"].get<std::string>();
  if (spec.kind != "uniform" && spec.kind != "sorted" &&
      spec.kind != "softmax") {
    throw ValidationError("unknown policy kind '" + spec.kind + "'");
  }
  if (j.contains("direction")) {
    if (!j["direction"].is_string()) {
      throw ValidationError("policy 'direction' must be a string");
    }
    spec.direction = parse_direction(j["direction"].get<std::string>());
  }
  if (j.contains("temperature")) {
    if (!j["temperature"].is_number()) {
      throw ValidationError("policy 'temperature' must be a number");
    }
    spec.temperature = j["temperature"].get<double>();
    check_temperature(spec.temperature);
  }
  return spec;
}

std::string policy_spec_to_json(const PolicySpec& spec) {
  nlohmann::json j;
  j["kind"] = spec.kind;
  if (spec.kind != "uniform") {
    j["direction"] =
        spec.direction == SortDirection::ascending ? "asc" : "desc";
  }
  if (spec.kind == "softmax") j["temperature"] = spec.temperature;
  return j.dump();
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec,
                                    std::shared_ptr<const ScoreTable> scores) {
  if (spec.kind == "uniform") {
    return std::make_unique<UniformRandomPolicy>();
  }
  if (!scores) {
    throw ValidationError("policy '" + policy_name(spec) +
                          "' requires a score table");
  }
  if (spec.kind == "sorted") {
    return std::make_unique<ScoreSortedPolicy>(std::move(scores),
                                               spec.direction);
  }
  if (spec.kind == "softmax") {
    return std::make_unique<SoftmaxPolicy>(std::move(scores), spec.temperature,
                                           spec.direction);
  }
  throw ValidationError("unknown policy kind '" + spec.kind + "'");
}

}  // namespace slateval
