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
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rrl/baselines.hpp"
#include "rrl/estimation.hpp"
#include "rrl/simulation.hpp"
#include "rrl/synthesis.hpp"

namespace rrl {

struct RRLConfig {
  explicit RRLConfig(EpochSchedule s) : schedule(std::move(s)) {}

  EpochSchedule schedule;
  int horizon = 10;  ///< look-ahead epochs h
  double delta = 0.05;
  CostSpec cost;
  double sigma_w = 1.0;
  SolverOptions solver = SolverOptions::from_env();
  bool track_wc_data = true;
  bool track_wc_theoretical = true;

  void validate() const;
  /// Number of epochs actually planned ahead from epoch i: min(h, N - i).
  int lookahead(int epoch) const;
};

struct EpochPlan {
  int epoch = 1;
  std::vector<Policy> policies;
  std::vector<CovarianceBlock> xis;
  std::vector<double> multipliers;
  double planned_cost = 0.0;
};

/// Nominal model with the uncertainty matrix predicted after further data.
struct PropagatedModel {
  UncertainModel base;
  Matrix Dtilde;

  UncertainModel model() const { return base.with_D(Dtilde); }
};

/// D + (1 / (sigma_w^2 c_delta)) sum_k T_k Xi_k.
Matrix propagate_D(const Matrix& D, const std::vector<CovarianceBlock>& xis, const std::vector<int>& durations,
                   double sigma_w, double c_delta);

PropagatedModel propagate(const UncertainModel& model, const std::vector<CovarianceBlock>& xis,
                          const std::vector<int>& durations, double sigma_w);

/// Multipliers for epochs i..i+h' obtained by costing the robust stationary
/// gain against the uncertainty predicted from repeating its own covariance.
std::vector<double> select_multipliers(const UncertainModel& model, const RRLConfig& config, int epoch);
std::vector<double> select_multipliers(const SynthesisResult& robust, const UncertainModel& model,
                                       const RRLConfig& config, int epoch);

/// Worst-case costs of the fixed robust gain over the same look-ahead
/// (the plan whose multipliers `select_multipliers` reports), weighted by
/// epoch duration.
double fixed_gain_plan_cost(const SynthesisResult& robust, const UncertainModel& model, const RRLConfig& config,
                            int epoch);

/// The receding-horizon program: one covariance variable per planned epoch,
/// a free multiplier for the current epoch, and fixed multipliers for the
/// rest, so every constraint is affine in the stacked variables.
struct RRLProgram {
  ConicProgram program;
  std::vector<MatrixVar> xis;
  ScalarVar lambda;
};

RRLProgram build_rrl_program(const UncertainModel& model, const RRLConfig& config, int epoch,
                             const std::vector<double>& multipliers);

/// Multi-epoch receding-horizon program with multipliers of future epochs
/// fixed. Throws PlanInfeasible when no plan exists.
EpochPlan solve_rrl(const UncertainModel& model, const RRLConfig& config, int epoch,
                    const std::vector<double>& multipliers);

enum class Planner { rrl, nom, greedy };

const char* to_string(Planner p);
Planner planner_from_string(const std::string& name);

/// Policy chosen for one epoch by a planner, plus bookkeeping.
struct Decision {
  Policy policy;
  bool fallback = false;  ///< rrl plan failed and nom was deployed
  std::string note;
  double greedy_alpha = 0.0;
  bool greedy_saturated = false;
  double target_wc_cost = 0.0;
};

using MultiplierRule =
    std::function<std::vector<double>(const SynthesisResult&, const UncertainModel&, const RRLConfig&, int)>;

/// `rule` defaults to select_multipliers.
Decision plan_epoch(const UncertainModel& model, const RRLConfig& config, int epoch, Planner planner,
                    const MultiplierRule& rule = {});

struct TrialResult {
  Planner planner = Planner::rrl;
  std::uint64_t seed = 0;
  std::vector<double> empirical_cost;
  std::vector<double> wc_cost_data;
  std::vector<double> wc_cost_theoretical;
  std::vector<double> information;
  std::vector<Policy> policies;
  std::vector<bool> fallback;
  std::vector<double> greedy_alpha;
  std::vector<std::string> notes;
};

/// Runs every epoch of the schedule against the true system starting from
/// x = 0, re-estimating the model from all data before each epoch.
TrialResult receding_horizon_run(const LinearSystem& true_sys, const Dataset& initial_data, const RRLConfig& config,
                                 NoiseStreams& rng, Planner planner);

}  // namespace rrl
