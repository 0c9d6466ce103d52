/*
 Copyright 2026 The rrl Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rrl/errors.hpp"
#include "rrl/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFailures = 3;

int cmd_run(const std::string& config_path, const std::string& out_dir, int trials, long long seed,
            const std::string& method, int jobs) {
  rrl::ExperimentConfig cfg = rrl::load_config(config_path);
  if (trials > 0) cfg.trials = trials;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (!method.empty()) {
    try {
      cfg.methods = {rrl::planner_from_string(method)};
    } catch (const rrl::Error& e) {
      throw rrl::ConfigError(std::string("--method: ") + e.what());
    }
  }
  cfg.validate();

  const rrl::ExperimentResult res = rrl::run_experiment(cfg, out_dir, jobs);
  for (const auto& a : res.aggregates) {
    if (a.epoch != 0) continue;
    std::printf("%-7s %-20s median %.6g  IQR [%.6g, %.6g]  n=%d\n", a.method.c_str(), a.metric.c_str(), a.median,
                a.q1, a.q3, a.count);
  }
  std::printf("%d of %zu runs failed; results in %s\n", res.failures, res.outcomes.size(), out_dir.c_str());
  for (const auto& o : res.outcomes) {
    if (!o.result) std::fprintf(stderr, "%s trial %d failed: %s\n", rrl::to_string(o.method), o.trial, o.error.c_str());
  }
  return res.excess_failures() ? kExitFailures : 0;
}

int cmd_synth(const std::string& config_path) {
  const rrl::ExperimentConfig cfg = rrl::load_config(config_path);
  const std::uint64_t seed = rrl::trial_seed(cfg.seed, 0);
  const rrl::Dataset data = rrl::generate_initial_data(cfg.system, cfg.initial_data, rrl::mix_seed(seed, 1));
  const rrl::UncertainModel model = rrl::spectral_model(data, cfg.system.sigma_w, cfg.delta);
  const rrl::SynthesisResult r = rrl::synthesize_robust(model, cfg.cost, cfg.system.sigma_w, cfg.solver);
  json out;
  out["K"] = rrl::matrix_to_json(r.policy.K);
  out["Sigma"] = rrl::matrix_to_json(r.policy.Sigma);
  out["wc_cost"] = r.wc_cost;
  out["lambda"] = r.lambda;
  out["Ahat"] = rrl::matrix_to_json(model.Ahat);
  out["Bhat"] = rrl::matrix_to_json(model.Bhat);
  out["information"] = rrl::information(model);
  out["c_delta"] = model.c_delta;
  out["transitions"] = data.size();
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_aggregate(const std::string& in, const std::string& out) {
  fs::path src = in;
  if (fs::is_directory(src)) src /= "results.csv";
  std::ifstream f(src);
  if (!f) throw rrl::Error(src.string() + ": cannot open");
  const auto rows = rrl::read_tidy_csv(f);
  std::ofstream o(out, std::ios::binary);
  if (!o) throw rrl::Error(out + ": cannot open for writing");
  rrl::write_aggregate_csv(o, rrl::aggregate(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust reinforcement learning for linear-quadratic control"};
  app.require_subcommand(1);

  std::string config_path, out_dir, method, in_path, out_csv;
  int trials = 0, jobs = 0;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "Run the Monte Carlo experiment described by a config file");
  run->add_option("--config", config_path, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--trials", trials, "Override the number of trials")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the master seed")->check(CLI::NonNegativeNumber);
  run->add_option("--method", method, "Run a single method")->check(CLI::IsMember({"rrl", "nom", "greedy"}));
  run->add_option("--jobs", jobs, "Worker threads (default: available cores)")->check(CLI::NonNegativeNumber);

  auto* synth = app.add_subcommand("synth", "Robust synthesis from the initial data of trial 0; prints JSON");
  synth->add_option("--config", config_path, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);

  auto* agg = app.add_subcommand("aggregate", "Median and quartiles of a results table");
  agg->add_option("--in", in_path, "Results directory or results.csv")->required()->check(CLI::ExistingPath);
  agg->add_option("--out", out_csv, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, trials, seed, method, jobs);
    if (*synth) return cmd_synth(config_path);
    if (*agg) return cmd_aggregate(in_path, out_csv);
  } catch (const rrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
