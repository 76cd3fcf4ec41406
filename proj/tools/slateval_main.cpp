#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "slateval/errors.hpp"
#include "slateval/estimators.hpp"
#include "slateval/format.hpp"
#include "slateval/harness.hpp"
#include "slateval/jsonl.hpp"
#include "slateval/policy.hpp"
#include "slateval/simulator.hpp"
#include "slateval/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& tok : split_list(text)) {
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      throw slateval::ValidationError(std::string(what) + ": '" + tok +
                                      "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw slateval::ValidationError(std::string(what) + ": empty list");
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
  std::vector<int> out;
  for (const auto& tok : split_list(text)) {
    int v = 0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      throw slateval::ValidationError(std::string(what) + ": '" + tok +
                                      "' is not an integer");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw slateval::ValidationError(std::string(what) + ": empty list");
  }
  return out;
}

json policy_json(const slateval::PolicySpec& spec) {
  json j;
  j["name"] = slateval::policy_name(spec);
  j["kind"] = spec.kind;
  if (spec.kind != "uniform") {
    j["direction"] =
        spec.direction == slateval::SortDirection::ascending ? "asc" : "desc";
  }
  if (spec.kind == "softmax") j["temperature"] = spec.temperature;
  return j;
}

json estimator_json(const slateval::EstimatorSpec& spec) {
  json j;
  j["label"] = spec.label;
  j["name"] = spec.name;
  if (spec.name == "rips") j["threshold"] = spec.rips.threshold;
  if (spec.name == "pi" || spec.name == "pi_mc") {
    j["mc_samples"] = spec.mc_samples;
  }
  return j;
}

json report_json(const slateval::EstimateReport& rep) {
  json j;
  j["estimator"] = rep.estimator;
  j["value"] = rep.value;
  j["per_position_value"] = rep.per_position_value;
  json trace = json::array();
  for (const auto& entries : rep.ess_trace) {
    json position = json::array();
    for (const auto& e : entries) {
      position.push_back({{"lookback", e.lookback}, {"ess", e.ess}});
    }
    trace.push_back(position);
  }
  j["ess_trace"] = trace;
  j["chosen_lookbacks"] = rep.chosen_lookbacks;
  j["n_used"] = rep.n_used;
  if (rep.standard_error) j["standard_error"] = *rep.standard_error;
  return j;
}

json truth_result_json(const slateval::TruthResult& truth) {
  json j;
  j["value"] = truth.value;
  j["method"] = truth.method;
  if (truth.standard_error) j["standard_error"] = *truth.standard_error;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw slateval::ValidationError("cannot write file '" + path.string() +
                                    "'");
  }
  out << text;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) {
    throw slateval::ValidationError("cannot create output directory '" + dir +
                                    "': " + ec.message());
  }
  return p;
}

/// Score source shared by policies: a world file doubles as a score table
/// (true_rewards as scores).
std::shared_ptr<const slateval::ScoreTable> load_scores(
    const std::string& world_path, const std::string& scores_path) {
  const std::string& path = scores_path.empty() ? world_path : scores_path;
  if (path.empty()) return nullptr;
  return slateval::score_table_from_world(slateval::load_world(path));
}

struct SimulateArgs {
  std::string out_dir;
  std::string world_in;
  std::size_t n = 0;
  int contexts = 50;
  int candidates = 10;
  int slate_size = 10;
  std::string policy = "uniform";
  std::string cascade = "hard";
  double rho = 0.7;
  std::string recovery = "chain";
  std::uint64_t seed = 1;
};

int run_simulate(const SimulateArgs& a) {
  const fs::path dir = prepare_out_dir(a.out_dir);
  slateval::SimWorld world;
  if (!a.world_in.empty()) {
    world = slateval::load_world(a.world_in);
  } else {
    slateval::CascadeConfig cascade;
    cascade.mode = slateval::parse_cascade_mode(a.cascade);
    cascade.rho = a.rho;
    cascade.recovery = slateval::parse_cascade_recovery(a.recovery);
    world = slateval::generate_world(a.contexts, a.candidates, cascade, a.seed);
  }
  const slateval::PolicySpec spec = slateval::parse_policy_spec(a.policy);
  const auto policy = slateval::make_policy(
      spec, spec.kind == "uniform" ? nullptr
                                   : slateval::score_table_from_world(world));
  const slateval::Dataset logs = slateval::log_impressions(
      world, *policy, a.slate_size, a.n,
      slateval::derive_seed(a.seed, "logs"));
  slateval::save_world(world, dir / "world.json");
  slateval::save_jsonl(logs, dir / "logs.jsonl");

  json cfg;
  cfg["command"] = "simulate";
  cfg["out_dir"] = a.out_dir;
  if (!a.world_in.empty()) {
    cfg["world_in"] = a.world_in;
  } else {
    cfg["contexts"] = a.contexts;
    cfg["candidates"] = a.candidates;
    cfg["cascade"] = {{"mode", slateval::cascade_mode_name(world.cascade.mode)},
                      {"rho", world.cascade.rho},
                      {"recovery", slateval::cascade_recovery_name(
                                       world.cascade.recovery)}};
  }
  cfg["n"] = a.n;
  cfg["slate_size"] = a.slate_size;
  cfg["policy"] = policy_json(spec);
  cfg["seed"] = a.seed;
  write_text(dir / "config.json", cfg.dump(2) + "\n");
  std::cout << "wrote " << (dir / "logs.jsonl").string() << " ("
            << logs.size() << " impressions)\n";
  return 0;
}

struct EstimateArgs {
  std::string logs;
  std::string estimator;
  std::string target;
  std::string logging;
  std::string world;
  std::string scores;
  std::optional<double> threshold;
  std::optional<long> mc_samples;
  std::uint64_t seed = 1;
  std::string out;
};

int run_estimate(const EstimateArgs& a) {
  slateval::EstimatorSpec spec = slateval::parse_estimator_spec(a.estimator);
  if (a.threshold) {
    if (spec.name != "rips") {
      throw slateval::ValidationError(
          "--threshold applies only to the 'rips' estimator");
    }
    spec.rips.threshold = *a.threshold;
    if (!(spec.rips.threshold >= 0.0 && spec.rips.threshold <= 1.0)) {
      throw slateval::ValidationError("rips threshold must be in [0, 1]");
    }
  }
  if (a.mc_samples) {
    if (spec.name != "pi" && spec.name != "pi_mc") {
      throw slateval::ValidationError(
          "--mc-samples applies only to the 'pi' estimators");
    }
    if (*a.mc_samples < 1) {
      throw slateval::ValidationError("--mc-samples must be positive");
    }
    spec.mc_samples = *a.mc_samples;
  }
  const slateval::Dataset ds = slateval::load_jsonl(a.logs);
  const auto table = load_scores(a.world, a.scores);

  std::unique_ptr<slateval::Policy> target;
  std::optional<slateval::PolicySpec> target_spec;
  if (!a.target.empty()) {
    target_spec = slateval::parse_policy_spec(a.target);
    target = slateval::make_policy(*target_spec, table);
  } else if (spec.name != "online") {
    throw slateval::ValidationError("estimator '" + spec.name +
                                    "' requires --target");
  }
  std::unique_ptr<slateval::Policy> logging;
  std::optional<slateval::PolicySpec> logging_spec;
  if (!a.logging.empty()) {
    logging_spec = slateval::parse_policy_spec(a.logging);
    logging = slateval::make_policy(*logging_spec, table);
  }

  const slateval::EstimateReport rep = slateval::run_estimator(
      spec, ds, target.get(), logging.get(), nullptr, a.seed);

  json cfg;
  cfg["command"] = "estimate";
  cfg["logs"] = a.logs;
  cfg["estimator"] = estimator_json(spec);
  if (target_spec) cfg["target"] = policy_json(*target_spec);
  if (logging_spec) cfg["logging"] = policy_json(*logging_spec);
  if (!a.world.empty()) cfg["world"] = a.world;
  if (!a.scores.empty()) cfg["scores"] = a.scores;
  cfg["seed"] = a.seed;

  json out;
  out["config"] = cfg;
  out["report"] = report_json(rep);
  const std::string text = out.dump(2) + "\n";
  if (!a.out.empty()) {
    write_text(a.out, text);
  }
  std::cout << text;
  return 0;
}

struct TruthArgs {
  std::string world;
  std::string target;
  int slate_size = 10;
  long mc_samples = 1000000;
  std::uint64_t seed = 1;
  std::string out;
};

int run_truth(const TruthArgs& a) {
  const slateval::SimWorld world = slateval::load_world(a.world);
  const slateval::PolicySpec spec = slateval::parse_policy_spec(a.target);
  const auto policy = slateval::make_policy(
      spec, spec.kind == "uniform" ? nullptr
                                   : slateval::score_table_from_world(world));
  slateval::TruthResult truth;
  try {
    truth = slateval::true_value(world, *policy, a.slate_size, 0, a.seed);
  } catch (const slateval::ValidationError&) {
    truth = slateval::true_value(world, *policy, a.slate_size, a.mc_samples,
                                 a.seed);
  }
  json cfg;
  cfg["command"] = "truth";
  cfg["world"] = a.world;
  cfg["target"] = policy_json(spec);
  cfg["slate_size"] = a.slate_size;
  cfg["mc_samples"] = a.mc_samples;
  cfg["seed"] = a.seed;
  json out;
  out["config"] = cfg;
  out["truth"] = truth_result_json(truth);
  const std::string text = out.dump(2) + "\n";
  if (!a.out.empty()) {
    write_text(a.out, text);
  }
  std::cout << text;
  return 0;
}

slateval::PolicySpec policy_from_config_entry(const json& entry) {
  if (entry.is_string()) {
    return slateval::parse_policy_spec(entry.get<std::string>());
  }
  if (entry.is_object()) {
    return slateval::policy_spec_from_json(entry.dump());
  }
  throw slateval::ValidationError(
      "policy entries must be shorthand strings or config objects");
}

struct GridArgs {
  std::string config_path;
  std::string out_dir;
  std::string world_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<int> repeats;
  std::optional<int> jobs;
  bool plot_data = false;
};

int run_grid_cmd(const GridArgs& a) {
  std::ifstream in(a.config_path);
  if (!in) {
    throw slateval::ValidationError("cannot open grid config '" +
                                    a.config_path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw slateval::ValidationError("grid config '" + a.config_path +
                                    "' is not valid JSON: " + e.what());
  }
  slateval::GridConfig cfg;
  if (!j.contains("logging_policies") || !j.contains("target_policies")) {
    throw slateval::ValidationError(
        "grid config needs 'logging_policies' and 'target_policies'");
  }
  for (const auto& e : j["logging_policies"]) {
    cfg.logging_policies.push_back(policy_from_config_entry(e));
  }
  for (const auto& e : j["target_policies"]) {
    cfg.target_policies.push_back(policy_from_config_entry(e));
  }
  if (j.contains("estimators")) {
    for (const auto& e : j["estimators"]) {
      cfg.estimators.push_back(
          slateval::parse_estimator_spec(e.get<std::string>()));
    }
  } else {
    for (const auto* name : {"online", "ips", "nis", "iips", "iips_norm",
                             "rips_closed", "rips"}) {
      cfg.estimators.push_back(slateval::parse_estimator_spec(name));
    }
  }
  cfg.slate_size = j.value("slate_size", 10);
  cfg.n_per_repeat = j.value("n_per_repeat", std::size_t{10000});
  cfg.repeats = j.value("repeats", 20);
  cfg.truth_mc_samples = j.value("truth_mc_samples", 1000000L);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.jobs = j.value("jobs", 1);
  if (a.seed) cfg.seed = *a.seed;
  if (a.n) cfg.n_per_repeat = *a.n;
  if (a.repeats) cfg.repeats = *a.repeats;
  if (a.jobs) cfg.jobs = *a.jobs;

  slateval::SimWorld world;
  std::string world_source;
  if (!a.world_path.empty()) {
    world = slateval::load_world(a.world_path);
    world_source = a.world_path;
  } else if (j.contains("world") && j["world"].is_string()) {
    world_source = j["world"].get<std::string>();
    world = slateval::load_world(world_source);
  } else {
    slateval::CascadeConfig cascade;
    if (j.contains("cascade")) {
      const auto& c = j["cascade"];
      if (c.contains("mode")) {
        cascade.mode =
            slateval::parse_cascade_mode(c["mode"].get<std::string>());
      }
      if (c.contains("rho")) cascade.rho = c["rho"].get<double>();
      if (c.contains("recovery")) {
        cascade.recovery =
            slateval::parse_cascade_recovery(c["recovery"].get<std::string>());
      }
    }
    world = slateval::generate_world(j.value("world_contexts", 50),
                                     j.value("world_candidates", 10), cascade,
                                     cfg.seed);
  }

  const fs::path dir = prepare_out_dir(a.out_dir);
  const slateval::GridResult result = slateval::run_grid(world, cfg);
  slateval::write_grid_rows_csv(result, dir / "grid_rows.csv");
  slateval::write_grid_summary_json(result, cfg, dir / "grid_summary.json");
  if (a.plot_data) {
    slateval::write_grid_plot_csv(result, dir / "grid_plot.csv");
  }

  json echo;
  echo["command"] = "grid";
  echo["config_file"] = a.config_path;
  echo["out_dir"] = a.out_dir;
  if (!world_source.empty()) {
    echo["world"] = world_source;
  } else {
    echo["world_contexts"] = static_cast<int>(world.contexts.size());
    echo["world_candidates"] = world.candidates_per_context();
    echo["cascade"] = {
        {"mode", slateval::cascade_mode_name(world.cascade.mode)},
        {"rho", world.cascade.rho},
        {"recovery",
         slateval::cascade_recovery_name(world.cascade.recovery)}};
  }
  for (const auto& p : cfg.logging_policies) {
    echo["logging_policies"].push_back(policy_json(p));
  }
  for (const auto& p : cfg.target_policies) {
    echo["target_policies"].push_back(policy_json(p));
  }
  for (const auto& e : cfg.estimators) {
    echo["estimators"].push_back(estimator_json(e));
  }
  echo["slate_size"] = cfg.slate_size;
  echo["n_per_repeat"] = cfg.n_per_repeat;
  echo["repeats"] = cfg.repeats;
  echo["truth_mc_samples"] = cfg.truth_mc_samples;
  echo["seed"] = cfg.seed;
  echo["jobs"] = cfg.jobs;
  echo["plot_data"] = a.plot_data;
  write_text(dir / "config.json", echo.dump(2) + "\n");
  std::cout << "wrote " << (dir / "grid_summary.json").string() << "\n";
  return 0;
}

struct SweepCommonArgs {
  std::string world;
  std::string logging = "uniform";
  std::string target;
  std::string out_dir;
  std::size_t n = 10000;
  int repeats = 20;
  int slate_size = 10;
  long truth_mc = 1000000;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool plot_data = false;
};

json sweep_common_json(const char* command, const SweepCommonArgs& a) {
  json j;
  j["command"] = command;
  j["world"] = a.world;
  j["out_dir"] = a.out_dir;
  j["n_per_repeat"] = a.n;
  j["repeats"] = a.repeats;
  j["truth_mc_samples"] = a.truth_mc;
  j["seed"] = a.seed;
  j["jobs"] = a.jobs;
  j["plot_data"] = a.plot_data;
  return j;
}

int run_sweep_threshold(const SweepCommonArgs& a,
                        const std::string& t_values_text) {
  const slateval::SimWorld world = slateval::load_world(a.world);
  slateval::ThresholdSweepConfig cfg;
  cfg.logging = slateval::parse_policy_spec(a.logging);
  cfg.target = slateval::parse_policy_spec(a.target);
  cfg.t_values = parse_doubles(t_values_text, "--t-values");
  cfg.slate_size = a.slate_size;
  cfg.n_per_repeat = a.n;
  cfg.repeats = a.repeats;
  cfg.truth_mc_samples = a.truth_mc;
  cfg.seed = a.seed;
  cfg.jobs = a.jobs;
  const fs::path dir = prepare_out_dir(a.out_dir);
  const auto result = slateval::sweep_threshold(world, cfg);
  slateval::write_threshold_rows_csv(result, dir / "threshold_rows.csv");
  slateval::write_threshold_summary_json(result, cfg,
                                         dir / "threshold_summary.json");
  if (a.plot_data) {
    slateval::write_threshold_plot_csv(result, dir / "threshold_plot.csv");
  }
  json echo = sweep_common_json("sweep-threshold", a);
  echo["logging"] = policy_json(cfg.logging);
  echo["target"] = policy_json(cfg.target);
  echo["t_values"] = cfg.t_values;
  echo["slate_size"] = cfg.slate_size;
  write_text(dir / "config.json", echo.dump(2) + "\n");
  std::cout << "wrote " << (dir / "threshold_summary.json").string() << "\n";
  return 0;
}

int run_sweep_slate(const SweepCommonArgs& a, const std::string& k_values_text,
                    const std::string& estimators_text) {
  const slateval::SimWorld world = slateval::load_world(a.world);
  slateval::SlateSweepConfig cfg;
  cfg.logging = slateval::parse_policy_spec(a.logging);
  cfg.target = slateval::parse_policy_spec(a.target);
  cfg.k_values = parse_ints(k_values_text, "--k-values");
  for (const auto& name : split_list(estimators_text)) {
    cfg.estimators.push_back(slateval::parse_estimator_spec(name));
  }
  cfg.n_per_repeat = a.n;
  cfg.repeats = a.repeats;
  cfg.truth_mc_samples = a.truth_mc;
  cfg.seed = a.seed;
  cfg.jobs = a.jobs;
  const fs::path dir = prepare_out_dir(a.out_dir);
  const auto result = slateval::sweep_slate_size(world, cfg);
  slateval::write_slate_rows_csv(result, dir / "slate_rows.csv");
  slateval::write_slate_summary_json(result, cfg, dir / "slate_summary.json");
  if (a.plot_data) {
    slateval::write_slate_plot_csv(result, dir / "slate_plot.csv");
  }
  json echo = sweep_common_json("sweep-slate", a);
  echo["logging"] = policy_json(cfg.logging);
  echo["target"] = policy_json(cfg.target);
  echo["k_values"] = cfg.k_values;
  for (const auto& e : cfg.estimators) {
    echo["estimators"].push_back(estimator_json(e));
  }
  write_text(dir / "config.json", echo.dump(2) + "\n");
  std::cout << "wrote " << (dir / "slate_summary.json").string() << "\n";
  return 0;
}

int run_sweep_data(const SweepCommonArgs& a, const std::string& targets_text,
                   const std::string& fractions_text,
                   const std::string& estimators_text, std::size_t n_max) {
  const slateval::SimWorld world = slateval::load_world(a.world);
  slateval::DataSweepConfig cfg;
  cfg.logging = slateval::parse_policy_spec(a.logging);
  for (const auto& t : split_list(targets_text)) {
    cfg.targets.push_back(slateval::parse_policy_spec(t));
  }
  cfg.fractions = parse_doubles(fractions_text, "--fractions");
  for (const auto& name : split_list(estimators_text)) {
    cfg.estimators.push_back(slateval::parse_estimator_spec(name));
  }
  cfg.n_max = n_max;
  cfg.repeats = a.repeats;
  cfg.slate_size = a.slate_size;
  cfg.truth_mc_samples = a.truth_mc;
  cfg.seed = a.seed;
  cfg.jobs = a.jobs;
  const fs::path dir = prepare_out_dir(a.out_dir);
  const auto result = slateval::sweep_data_size(world, cfg);
  slateval::write_data_rows_csv(result, dir / "data_rows.csv");
  slateval::write_data_summary_json(result, cfg, dir / "data_summary.json");
  if (a.plot_data) {
    slateval::write_data_plot_csv(result, dir / "data_plot.csv");
  }
  json echo = sweep_common_json("sweep-data", a);
  echo.erase("n_per_repeat");
  echo["logging"] = policy_json(cfg.logging);
  for (const auto& t : cfg.targets) {
    echo["targets"].push_back(policy_json(t));
  }
  echo["fractions"] = cfg.fractions;
  for (const auto& e : cfg.estimators) {
    echo["estimators"].push_back(estimator_json(e));
  }
  echo["n_max"] = cfg.n_max;
  echo["slate_size"] = cfg.slate_size;
  write_text(dir / "config.json", echo.dump(2) + "\n");
  std::cout << "wrote " << (dir / "data_summary.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual evaluation toolkit for sequential slates"};
  app.set_version_flag("--version",
                       std::string("slateval ") + slateval::kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate a world and log impressions from it");
  simulate->add_option("--out-dir", sim.out_dir)->required();
  simulate->add_option("--n", sim.n, "Impressions to log")->required();
  simulate->add_option("--world", sim.world_in,
                       "Reuse an existing world file instead of generating");
  simulate->add_option("--contexts", sim.contexts);
  simulate->add_option("--candidates", sim.candidates);
  simulate->add_option("--slate-size", sim.slate_size);
  simulate->add_option("--policy", sim.policy, "Logging policy spec");
  simulate->add_option("--cascade", sim.cascade, "hard or probabilistic");
  simulate->add_option("--rho", sim.rho);
  simulate->add_option("--recovery", sim.recovery, "chain or one_step");
  simulate->add_option("--seed", sim.seed);

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Run one estimator over a JSONL log file");
  estimate->add_option("--logs", est.logs)->required();
  estimate->add_option("--estimator", est.estimator)->required();
  estimate->add_option("--target", est.target, "Target policy spec");
  estimate->add_option("--logging", est.logging,
                       "Logging policy spec (pi_mc only)");
  estimate->add_option("--world", est.world, "World file for policy scores");
  estimate->add_option("--scores", est.scores,
                       "Score file for policy scores (world format)");
  double est_threshold = 0.0;
  auto* thr =
      estimate->add_option("--threshold", est_threshold, "rips ESS threshold");
  long est_mc = 0;
  auto* mcs = estimate->add_option("--mc-samples", est_mc, "pi MC draws");
  estimate->add_option("--seed", est.seed);
  estimate->add_option("--out", est.out, "Also write the report here");

  TruthArgs tru;
  CLI::App* truth =
      app.add_subcommand("truth", "Expected value of a policy on a world");
  truth->add_option("--world", tru.world)->required();
  truth->add_option("--target", tru.target)->required();
  truth->add_option("--slate-size", tru.slate_size)->required();
  truth->add_option("--mc-samples", tru.mc_samples);
  truth->add_option("--seed", tru.seed);
  truth->add_option("--out", tru.out);

  GridArgs grid;
  CLI::App* grid_cmd = app.add_subcommand(
      "grid", "Run the logging x target x estimator grid");
  grid_cmd->add_option("--config", grid.config_path)->required();
  grid_cmd->add_option("--out-dir", grid.out_dir)->required();
  grid_cmd->add_option("--world", grid.world_path,
                       "World file (overrides the config)");
  std::uint64_t grid_seed = 0;
  auto* gseed = grid_cmd->add_option("--seed", grid_seed);
  std::size_t grid_n = 0;
  auto* gn = grid_cmd->add_option("--n", grid_n, "Impressions per repeat");
  int grid_repeats = 0;
  auto* grep = grid_cmd->add_option("--repeats", grid_repeats);
  int grid_jobs = 0;
  auto* gjobs = grid_cmd->add_option("--jobs", grid_jobs);
  grid_cmd->add_flag("--plot-data", grid.plot_data);

  SweepCommonArgs tsw;
  std::string t_values = "1.0,0.1,0.01,0.001";
  CLI::App* sweep_t = app.add_subcommand(
      "sweep-threshold", "Capped estimator across ESS thresholds");
  sweep_t->add_option("--world", tsw.world)->required();
  sweep_t->add_option("--logging", tsw.logging);
  sweep_t->add_option("--target", tsw.target)->required();
  sweep_t->add_option("--out-dir", tsw.out_dir)->required();
  sweep_t->add_option("--t-values", t_values);
  sweep_t->add_option("--n", tsw.n);
  sweep_t->add_option("--repeats", tsw.repeats);
  sweep_t->add_option("--slate-size", tsw.slate_size);
  sweep_t->add_option("--truth-mc", tsw.truth_mc);
  sweep_t->add_option("--seed", tsw.seed);
  sweep_t->add_option("--jobs", tsw.jobs);
  sweep_t->add_flag("--plot-data", tsw.plot_data);

  SweepCommonArgs ksw;
  std::string k_values = "1,3,5,10";
  std::string k_estimators = "ips,nis,iips,iips_norm,rips,rips_closed";
  CLI::App* sweep_k =
      app.add_subcommand("sweep-slate", "Estimators across slate sizes");
  sweep_k->add_option("--world", ksw.world)->required();
  sweep_k->add_option("--logging", ksw.logging);
  sweep_k->add_option("--target", ksw.target)->required();
  sweep_k->add_option("--out-dir", ksw.out_dir)->required();
  sweep_k->add_option("--k-values", k_values);
  sweep_k->add_option("--estimators", k_estimators);
  sweep_k->add_option("--n", ksw.n);
  sweep_k->add_option("--repeats", ksw.repeats);
  sweep_k->add_option("--truth-mc", ksw.truth_mc);
  sweep_k->add_option("--seed", ksw.seed);
  sweep_k->add_option("--jobs", ksw.jobs);
  sweep_k->add_flag("--plot-data", ksw.plot_data);

  SweepCommonArgs dsw;
  std::string d_targets;
  std::string d_fractions = "0.01,0.1,1.0";
  std::string d_estimators = "ips,nis,iips,iips_norm,rips,rips_closed";
  std::size_t d_n_max = 100000;
  CLI::App* sweep_d = app.add_subcommand(
      "sweep-data", "Estimator RMSE across dataset sizes");
  sweep_d->add_option("--world", dsw.world)->required();
  sweep_d->add_option("--logging", dsw.logging);
  sweep_d->add_option("--targets", d_targets, "Comma-separated target specs")
      ->required();
  sweep_d->add_option("--out-dir", dsw.out_dir)->required();
  sweep_d->add_option("--fractions", d_fractions);
  sweep_d->add_option("--estimators", d_estimators);
  sweep_d->add_option("--n-max", d_n_max);
  sweep_d->add_option("--repeats", dsw.repeats)->default_val(5);
  sweep_d->add_option("--slate-size", dsw.slate_size);
  sweep_d->add_option("--truth-mc", dsw.truth_mc);
  sweep_d->add_option("--seed", dsw.seed);
  sweep_d->add_option("--jobs", dsw.jobs);
  sweep_d->add_flag("--plot-data", dsw.plot_data);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (estimate->parsed()) {
      if (thr->count() > 0) est.threshold = est_threshold;
      if (mcs->count() > 0) est.mc_samples = est_mc;
      return run_estimate(est);
    }
    if (truth->parsed()) return run_truth(tru);
    if (grid_cmd->parsed()) {
      if (gseed->count() > 0) grid.seed = grid_seed;
      if (gn->count() > 0) grid.n = grid_n;
      if (grep->count() > 0) grid.repeats = grid_repeats;
      if (gjobs->count() > 0) grid.jobs = grid_jobs;
      return run_grid_cmd(grid);
    }
    if (sweep_t->parsed()) return run_sweep_threshold(tsw, t_values);
    if (sweep_k->parsed()) return run_sweep_slate(ksw, k_values, k_estimators);
    if (sweep_d->parsed()) {
      return run_sweep_data(dsw, d_targets, d_fractions, d_estimators,
                            d_n_max);
    }
  } catch (const slateval::EstimatorError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const slateval::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
