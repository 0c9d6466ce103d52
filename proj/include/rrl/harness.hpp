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
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rrl/planner.hpp"

namespace rrl {

/// Open-loop experiments used to collect the initial dataset: each rollout
/// starts at x = 0 and is driven by u ~ N(0, input_covariance).
struct InitialDataProtocol {
  int rollouts = 500;
  int length = 6;
  Matrix input_covariance;
};

enum class Mode { empirical, wc_data, wc_theoretical };

const char* to_string(Mode m);

struct ExperimentConfig {
  LinearSystem system;
  CostSpec cost;
  EpochSchedule schedule = EpochSchedule::uniform(1, 1);
  double delta = 0.05;
  int horizon = 10;
  InitialDataProtocol initial_data;
  int trials = 100;
  std::uint64_t seed = 0;
  std::vector<Planner> methods{Planner::rrl, Planner::nom, Planner::greedy};
  std::vector<Mode> modes{Mode::empirical, Mode::wc_data, Mode::wc_theoretical};
  SolverOptions solver = SolverOptions::from_env();
  nlohmann::json source;  ///< the parsed document, echoed into every trial file

  bool has_mode(Mode m) const;
  RRLConfig rrl_config() const;
  void validate() const;
};

/// Parses and validates a configuration document. Errors are ConfigError
/// whose message starts with the offending field path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Seed of trial `trial`, shared by every method (common random numbers).
std::uint64_t trial_seed(std::uint64_t master, int trial);

Dataset generate_initial_data(const LinearSystem& sys, const InitialDataProtocol& protocol, std::uint64_t seed);

struct TrialOutcome {
  Planner method = Planner::rrl;
  int trial = 0;
  std::uint64_t seed = 0;
  std::optional<TrialResult> result;
  std::string error;
};

/// One record of the tidy results table. `epoch` is 1..N, or 0 for the
/// total over all epochs (written as "total").
struct TidyRow {
  std::string method;
  int trial = 0;
  int epoch = 0;
  std::string metric;
  double value = 0.0;
};

struct AggregateRow {
  std::string method;
  int epoch = 0;
  std::string metric;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  int count = 0;
};

struct ExperimentResult {
  std::vector<TrialOutcome> outcomes;  ///< method-major, then trial order
  std::vector<TidyRow> rows;
  std::vector<AggregateRow> aggregates;
  int failures = 0;

  /// True when more than 10% of the trials failed.
  bool excess_failures() const;
};

TrialOutcome run_trial(const ExperimentConfig& config, Planner method, int trial);

/// Runs every (method, trial) pair on `jobs` worker threads, then writes
/// per-trial JSON files, results.csv, aggregate.csv and summary.json into
/// `out_dir` from a single thread in a fixed order.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir, int jobs = 0);

std::vector<TidyRow> tidy_rows(const TrialOutcome& outcome, const ExperimentConfig& config);

/// Median and quartiles (linear interpolation between order statistics)
/// for every (method, epoch, metric) group, in first-appearance order.
std::vector<AggregateRow> aggregate(const std::vector<TidyRow>& rows);

/// Quantile with linear interpolation, p in [0, 1]. `values` need not be sorted.
double quantile(std::vector<double> values, double p);

void write_tidy_csv(std::ostream& out, const std::vector<TidyRow>& rows);
std::vector<TidyRow> read_tidy_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

nlohmann::json to_json(const TrialOutcome& outcome, const ExperimentConfig& config);
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace rrl
