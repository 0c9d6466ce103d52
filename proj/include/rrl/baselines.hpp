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

#include "rrl/synthesis.hpp"

namespace rrl {

/// Robust exploitation: the robust synthesis gain with the exploration
/// covariance removed. A residual Sigma with trace >= 1e-4 is an error.
SynthesisResult nom_policy(const UncertainModel& model, const CostSpec& cost, double sigma_w,
                           const SolverOptions& opts = SolverOptions::from_env());

/// Strips Sigma from an existing synthesis result under the same rule.
SynthesisResult nom_from(const SynthesisResult& robust);

struct GreedyPolicy {
  Policy policy;
  double alpha = 0.0;
  double wc_cost = 0.0;
  bool alpha_saturated = false;  ///< target not reached even at alpha_max
  int evaluations = 0;
};

struct GreedyOptions {
  double alpha_max = 1e3;
  double rel_tol = 1e-3;
  int max_iterations = 100;
};

/// Nom gain with isotropic excitation Sigma = alpha^2 I, where alpha is
/// chosen by bisection so that the worst-case cost matches `target_wc_cost`.
GreedyPolicy greedy_policy(const UncertainModel& model, const CostSpec& cost, double sigma_w, double target_wc_cost,
                           const SolverOptions& opts = SolverOptions::from_env(), const GreedyOptions& gopts = {});

/// As above, reusing an already computed nom result.
GreedyPolicy greedy_policy(const SynthesisResult& nom, const UncertainModel& model, const CostSpec& cost,
                           double sigma_w, double target_wc_cost,
                           const SolverOptions& opts = SolverOptions::from_env(), const GreedyOptions& gopts = {});

}  // namespace rrl
