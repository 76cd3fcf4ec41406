#include <benchmark/benchmark.h>

#include <cstdint>
#include <memory>
#include <vector>

#include "slateval/ess.hpp"
#include "slateval/estimators.hpp"
#include "slateval/policy.hpp"
#include "slateval/rng.hpp"
#include "slateval/simulator.hpp"
#include "slateval/weights.hpp"

namespace {

using namespace slateval;

// Shared fixture: one mid-sized world with uniform logs scored against a
// softmax target, built once outside the timed loops.
const SimWorld& bench_world() {
  static const SimWorld world = generate_world(50, 10, {}, 7);
  return world;
}

const Policy& bench_target() {
  static const std::unique_ptr<Policy> target = make_policy(
      parse_policy_spec("softmax:desc:0.3"), score_table_from_world(bench_world()));
  return *target;
}

const Dataset& bench_logs() {
  static const Dataset logs =
      log_impressions(bench_world(), UniformRandomPolicy{}, 10, 20000, 11);
  return logs;
}

const Matrix& bench_weights() {
  static const Matrix weights = per_position_weights(bench_logs(), bench_target());
  return weights;
}

void ess_kish(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> w(n);
  Rng rng(3);
  for (double& x : w) x = uniform_unit(rng) + 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(effective_sample_size(w));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(ess_kish)->Range(1 << 10, 1 << 20);

void weight_matrix_build(benchmark::State& state) {
  const Dataset& logs = bench_logs();
  const Policy& target = bench_target();
  for (auto _ : state) {
    Matrix w = per_position_weights(logs, target);
    benchmark::DoNotOptimize(w.values.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(logs.size()) *
                          logs.slate_size());
}
BENCHMARK(weight_matrix_build);

void prefix_distributions(benchmark::State& state) {
  const Matrix& w = bench_weights();
  for (auto _ : state) {
    auto dists = prefix_weight_distributions(w);
    benchmark::DoNotOptimize(dists.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(w.rows) * w.cols);
}
BENCHMARK(prefix_distributions);

void estimator_ips(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ips_from_weights(bench_weights(), bench_logs().rewards_flat()).value);
  }
}
BENCHMARK(estimator_ips);

void estimator_nis(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        nis_from_weights(bench_weights(), bench_logs().rewards_flat()).value);
  }
}
BENCHMARK(estimator_nis);

void estimator_rips_closed(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rips_closed_form_from_weights(bench_weights(),
                                      bench_logs().rewards_flat())
            .value);
  }
}
BENCHMARK(estimator_rips_closed);

void estimator_rips_gated(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rips_from_weights(bench_weights(), bench_logs().rewards_flat()).value);
  }
}
BENCHMARK(estimator_rips_gated);

void simulator_log_impressions(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const UniformRandomPolicy logging;
  for (auto _ : state) {
    Dataset logs = log_impressions(bench_world(), logging, 10, n, 13);
    benchmark::DoNotOptimize(logs.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(simulator_log_impressions)->Arg(1000)->Arg(10000);

void simulator_sample_rewards(benchmark::State& state) {
  const std::vector<std::int32_t> slate{0, 3, 5, 7, 9};
  Rng rng(17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_rewards(bench_world(), 0, slate, rng));
  }
}
BENCHMARK(simulator_sample_rewards);

}  // namespace

BENCHMARK_MAIN();
