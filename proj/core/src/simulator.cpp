#include "slateval/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "slateval/errors.hpp"

namespace slateval {

namespace {

int id_width(int count, int min_width) {
  int width = 1;
  for (int v = count - 1; v >= 10; v /= 10) ++width;
  return std::max(width, min_width);
}

std::string make_id(char prefix, int i, int width) {
  std::string digits = std::to_string(i);
  std::string out(1, prefix);
  out.append(static_cast<std::size_t>(width) - std::min<std::size_t>(
                 static_cast<std::size_t>(width), digits.size()),
             '0');
  out += digits;
  return out;
}

void check_cascade(const CascadeConfig& c) {
  if (!(c.rho >= 0.0 && c.rho <= 1.0)) {
    throw ValidationError("cascade rho must be in [0, 1]");
  }
}

void check_context_index(const SimWorld& world, std::size_t context_index) {
  if (context_index >= world.contexts.size()) {
    throw ValidationError("context index out of range");
  }
}

}  // namespace

std::string cascade_mode_name(CascadeMode mode) {
  return mode == CascadeMode::hard ? "hard" : "probabilistic";
}

CascadeMode parse_cascade_mode(std::string_view name) {
  if (name == "hard") return CascadeMode::hard;
  if (name == "probabilistic") return CascadeMode::probabilistic;
  throw ValidationError("unknown cascade mode '" + std::string(name) +
                        "' (expected hard or probabilistic)");
}

std::string cascade_recovery_name(CascadeRecovery recovery) {
  return recovery == CascadeRecovery::chain ? "chain" : "one_step";
}

CascadeRecovery parse_cascade_recovery(std::string_view name) {
  if (name == "chain") return CascadeRecovery::chain;
  if (name == "one_step") return CascadeRecovery::one_step;
  throw ValidationError("unknown cascade recovery '" + std::string(name) +
                        "' (expected chain or one_step)");
}

SimWorld generate_world(int n_contexts, int n_candidates,
                        const CascadeConfig& cascade, std::uint64_t seed) {
  if (n_contexts < 1) {
    throw ValidationError("generate_world: need at least one context");
  }
  if (n_candidates < 1) {
    throw ValidationError("generate_world: need at least one candidate");
  }
  check_cascade(cascade);
  SimWorld world;
  world.cascade = cascade;
  world.seed = seed;
  world.contexts.reserve(static_cast<std::size_t>(n_contexts));
  world.true_probs.reserve(static_cast<std::size_t>(n_contexts));
  const int cw = id_width(n_contexts, 3);
  const int aw = id_width(n_candidates, 2);
  Rng rng(derive_seed(seed, "world"));
  for (int c = 0; c < n_contexts; ++c) {
    Context ctx;
    ctx.id = make_id('c', c, cw);
    ctx.candidates.reserve(static_cast<std::size_t>(n_candidates));
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(n_candidates));
    for (int a = 0; a < n_candidates; ++a) {
      ctx.candidates.push_back(make_id('a', a, aw));
      probs.push_back(uniform_unit(rng));
    }
    world.contexts.push_back(std::move(ctx));
    world.true_probs.push_back(std::move(probs));
  }
  return world;
}

std::shared_ptr<const ScoreTable> score_table_from_world(
    const SimWorld& world) {
  auto table = std::make_shared<ScoreTable>();
  for (std::size_t c = 0; c < world.contexts.size(); ++c) {
    table->add(world.contexts[c], world.true_probs[c]);
  }
  return table;
}

std::vector<double> sample_rewards(const SimWorld& world,
                                   std::size_t context_index,
                                   std::span<const std::int32_t> actions,
                                   Rng& rng) {
  check_context_index(world, context_index);
  const auto& probs = world.true_probs[context_index];
  const CascadeConfig& c = world.cascade;
  std::vector<double> rewards(actions.size());
  bool prev_success = true;   // position 0 is never suppressed
  bool prev_damped = false;
  for (std::size_t k = 0; k < actions.size(); ++k) {
    const double p = probs[static_cast<std::size_t>(actions[k])];
    const bool damp_now =
        !prev_success &&
        (c.recovery == CascadeRecovery::chain || !prev_damped);
    const double p_eff =
        damp_now ? (c.mode == CascadeMode::hard ? 0.0 : p * (1.0 - c.rho)) : p;
    const bool success = uniform_unit(rng) < p_eff;
    rewards[k] = success ? 1.0 : 0.0;
    prev_success = success;
    prev_damped = damp_now;
  }
  return rewards;
}

std::vector<double> slate_position_values(
    const SimWorld& world, std::size_t context_index,
    std::span<const std::int32_t> actions) {
  check_context_index(world, context_index);
  const auto& probs = world.true_probs[context_index];
  const CascadeConfig& c = world.cascade;
  std::vector<double> values(actions.size());
  // State over (reward, was-damped): a = P(r=1), z = P(r=0 and damped),
  // o = P(r=0, not damped). Damping hits the position after a zero; in
  // one_step mode a damped position's zero does not damp the next one.
  // Start from a virtual success so position 0 is never damped.
  double a = 1.0, z = 0.0, o = 0.0;
  for (std::size_t k = 0; k < actions.size(); ++k) {
    const double p = probs[static_cast<std::size_t>(actions[k])];
    const double dp = c.mode == CascadeMode::hard ? 0.0 : p * (1.0 - c.rho);
    double a2, z2, o2;
    if (c.recovery == CascadeRecovery::chain) {
      a2 = p * a + dp * (z + o);
      z2 = (1.0 - dp) * (z + o);
      o2 = (1.0 - p) * a;
    } else {
      a2 = p * (a + z) + dp * o;
      z2 = (1.0 - dp) * o;
      o2 = (1.0 - p) * (a + z);
    }
    a = a2;
    z = z2;
    o = o2;
    values[k] = a;
  }
  return values;
}

double slate_value(const SimWorld& world, std::size_t context_index,
                   std::span<const std::int32_t> actions) {
  double v = 0.0;
  for (double q : slate_position_values(world, context_index, actions)) v += q;
  return v;
}

Dataset log_impressions(const SimWorld& world, const Policy& logging,
                        int slate_size, std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw ValidationError("log_impressions: need at least one impression");
  }
  if (world.contexts.empty()) {
    throw ValidationError("log_impressions: world has no contexts");
  }
  const std::size_t k = static_cast<std::size_t>(slate_size);
  std::vector<std::int32_t> context_index(n);
  std::vector<std::int32_t> actions(n * k);
  std::vector<double> propensities(n * k);
  std::vector<double> rewards(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    const std::size_t c = uniform_index(rng, world.contexts.size());
    context_index[i] = static_cast<std::int32_t>(c);
    const SlateSample slate =
        logging.sample_slate(world.contexts[c], slate_size, rng);
    const std::vector<double> r =
        sample_rewards(world, c, slate.action_indices, rng);
    for (std::size_t j = 0; j < k; ++j) {
      actions[i * k + j] = slate.action_indices[j];
      propensities[i * k + j] = slate.propensities[j];
      rewards[i * k + j] = r[j];
    }
  }
  return Dataset(world.contexts, slate_size, std::move(context_index),
                 std::move(actions), std::move(propensities),
                 std::move(rewards));
}

namespace {

void enumerate_prefixes(const SimWorld& world, std::size_t c,
                        const Policy& target, int slate_size,
                        std::vector<std::int32_t>& prefix, double prob,
                        double& total) {
  if (static_cast<int>(prefix.size()) == slate_size) {
    total += prob * slate_value(world, c, prefix);
    return;
  }
  const Context& ctx = world.contexts[c];
  std::vector<double> local(ctx.candidates.size());
  target.action_probabilities(ctx, prefix, local);
  for (std::size_t i = 0; i < local.size(); ++i) {
    if (local[i] <= 0.0) continue;
    prefix.push_back(static_cast<std::int32_t>(i));
    enumerate_prefixes(world, c, target, slate_size, prefix, prob * local[i],
                       total);
    prefix.pop_back();
  }
}

}  // namespace

TruthResult true_value(const SimWorld& world, const Policy& target,
                       int slate_size, long mc_samples, std::uint64_t seed) {
  if (world.contexts.empty()) {
    throw ValidationError("true_value: world has no contexts");
  }
  const std::size_t n_ctx = world.contexts.size();
  TruthResult out;
  if (target.deterministic()) {
    Rng dummy(0);
    double total = 0.0;
    for (std::size_t c = 0; c < n_ctx; ++c) {
      const SlateSample s =
          target.sample_slate(world.contexts[c], slate_size, dummy);
      total += slate_value(world, c, s.action_indices);
    }
    out.value = total / static_cast<double>(n_ctx);
    out.method = "exact";
    return out;
  }
  std::size_t max_m = 0;
  for (const auto& ctx : world.contexts) {
    max_m = std::max(max_m, ctx.candidates.size());
  }
  if (max_m <= 6) {
    double total = 0.0;
    for (std::size_t c = 0; c < n_ctx; ++c) {
      std::vector<std::int32_t> prefix;
      double ctx_total = 0.0;
      enumerate_prefixes(world, c, target, slate_size, prefix, 1.0, ctx_total);
      total += ctx_total;
    }
    out.value = total / static_cast<double>(n_ctx);
    out.method = "enumeration";
    return out;
  }
  if (mc_samples <= 0) {
    throw ValidationError(
        "true_value: a stochastic target with more than 6 candidates needs "
        "Monte-Carlo samples");
  }
  const long per_ctx = mc_samples / static_cast<long>(n_ctx);
  if (per_ctx < 2) {
    throw ValidationError(
        "true_value: need at least 2 Monte-Carlo samples per context");
  }
  Rng rng(derive_seed(seed, "truth_mc"));
  double grand = 0.0;
  double var_sum = 0.0;
  for (std::size_t c = 0; c < n_ctx; ++c) {
    double mean = 0.0;
    double ss = 0.0;
    for (long s = 0; s < per_ctx; ++s) {
      const SlateSample sample =
          target.sample_slate(world.contexts[c], slate_size, rng);
      const double v = slate_value(world, c, sample.action_indices);
      const double delta = v - mean;
      mean += delta / static_cast<double>(s + 1);
      ss += delta * (v - mean);
    }
    grand += mean;
    var_sum += ss / static_cast<double>(per_ctx - 1) /
               static_cast<double>(per_ctx);
  }
  out.value = grand / static_cast<double>(n_ctx);
  out.standard_error = std::sqrt(var_sum) / static_cast<double>(n_ctx);
  out.method = "monte_carlo";
  return out;
}

SimWorld load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open world file '" + path.string() + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("world file '" + path.string() +
                          "' is not valid JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("contexts") || !j["contexts"].is_array() ||
      j["contexts"].empty()) {
    throw ValidationError("world file '" + path.string() +
                          "' must contain a nonempty 'contexts' array");
  }
  SimWorld world;
  if (j.contains("seed")) {
    world.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("cascade")) {
    const auto& c = j["cascade"];
    if (c.contains("mode")) {
      world.cascade.mode = parse_cascade_mode(c["mode"].get<std::string>());
    }
    if (c.contains("rho")) {
      world.cascade.rho = c["rho"].get<double>();
    }
    if (c.contains("recovery")) {
      world.cascade.recovery =
          parse_cascade_recovery(c["recovery"].get<std::string>());
    }
    check_cascade(world.cascade);
  }
  std::unordered_set<std::string> seen_ids;
  std::size_t expected_m = 0;
  for (const auto& entry : j["contexts"]) {
    if (!entry.is_object() || !entry.contains("id") ||
        !entry.contains("true_rewards") || !entry["true_rewards"].is_object() ||
        entry["true_rewards"].empty()) {
      throw ValidationError(
          "world context entries need an 'id' and a nonempty 'true_rewards' "
          "object");
    }
    Context ctx;
    ctx.id = entry["id"].get<std::string>();
    if (!seen_ids.insert(ctx.id).second) {
      throw ValidationError("world context '" + ctx.id + "' appears twice");
    }
    std::vector<double> probs;
    for (const auto& [cand, val] : entry["true_rewards"].items()) {
      const double p = val.get<double>();
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw ValidationError("world context '" + ctx.id + "' candidate '" +
                              cand + "': probability must be in [0, 1]");
      }
      ctx.candidates.push_back(cand);
      probs.push_back(p);
    }
    if (expected_m == 0) {
      expected_m = ctx.candidates.size();
    } else if (ctx.candidates.size() != expected_m) {
      throw ValidationError(
          "world contexts must all have the same number of candidates "
          "(context '" + ctx.id + "' differs)");
    }
    world.contexts.push_back(std::move(ctx));
    world.true_probs.push_back(std::move(probs));
  }
  return world;
}

void save_world(const SimWorld& world, const std::filesystem::path& path) {
  nlohmann::json j;
  j["seed"] = world.seed;
  j["cascade"] = {{"mode", cascade_mode_name(world.cascade.mode)},
                  {"rho", world.cascade.rho},
                  {"recovery", cascade_recovery_name(world.cascade.recovery)}};
  nlohmann::json contexts = nlohmann::json::array();
  for (std::size_t c = 0; c < world.contexts.size(); ++c) {
    nlohmann::json rewards;
    for (std::size_t i = 0; i < world.contexts[c].candidates.size(); ++i) {
      rewards[world.contexts[c].candidates[i]] = world.true_probs[c][i];
    }
    contexts.push_back(
        {{"id", world.contexts[c].id}, {"true_rewards", rewards}});
  }
  j["contexts"] = contexts;
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write world file '" + path.string() + "'");
  }
  out << j.dump(2) << "\n";
}

}  // namespace slateval
