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
#include "rrl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rrl/errors.hpp"

namespace rrl {

SynthesisResult nom_from(const SynthesisResult& robust) {
  SynthesisResult out = robust;
  const double tr = robust.policy.Sigma.trace();
  if (tr >= 1e-4) {
    throw NumericalTrouble("robust synthesis returned exploration covariance with trace " + std::to_string(tr));
  }
  out.policy.Sigma.setZero();
  return out;
}

SynthesisResult nom_policy(const UncertainModel& model, const CostSpec& cost, double sigma_w,
                           const SolverOptions& opts) {
  return nom_from(synthesize_robust(model, cost, sigma_w, opts));
}

GreedyPolicy greedy_policy(const UncertainModel& model, const CostSpec& cost, double sigma_w, double target_wc_cost,
                           const SolverOptions& opts, const GreedyOptions& gopts) {
  return greedy_policy(nom_policy(model, cost, sigma_w, opts), model, cost, sigma_w, target_wc_cost, opts, gopts);
}

GreedyPolicy greedy_policy(const SynthesisResult& nom, const UncertainModel& model, const CostSpec& cost,
                           double sigma_w, double target_wc_cost, const SolverOptions& opts,
                           const GreedyOptions& gopts) {
  if (!(gopts.alpha_max > 0.0) || !(gopts.rel_tol > 0.0)) throw Error("greedy options must be positive");
  if (!std::isfinite(target_wc_cost)) throw Error("greedy target cost must be finite");
  const Eigen::Index nu = nom.policy.nu();
  GreedyPolicy out;
  out.policy = Policy{nom.policy.K, Matrix::Zero(nu, nu)};
  out.wc_cost = nom.wc_cost;

  const double tol = gopts.rel_tol * std::abs(target_wc_cost);
  if (target_wc_cost <= nom.wc_cost + tol) return out;

  auto evaluate = [&](double alpha) {
    ++out.evaluations;
    Policy p{nom.policy.K, alpha * alpha * Matrix::Identity(nu, nu)};
    return evaluate_wc_cost(p, model, cost, sigma_w, opts).wc_cost;
  };
  auto finish = [&](double alpha, double value) {
    out.alpha = alpha;
    out.wc_cost = value;
    out.policy.Sigma = alpha * alpha * Matrix::Identity(nu, nu);
    return out;
  };

  double lo = 0.0, hi = std::min(1.0, gopts.alpha_max);
  double f_hi = evaluate(hi);
  while (f_hi < target_wc_cost - tol && hi < gopts.alpha_max) {
    lo = hi;
    hi = std::min(2.0 * hi, gopts.alpha_max);
    f_hi = evaluate(hi);
  }
  if (std::abs(f_hi - target_wc_cost) <= tol) return finish(hi, f_hi);
  if (f_hi < target_wc_cost) {
    out.alpha_saturated = true;
    return finish(hi, f_hi);
  }

  double mid = hi, f_mid = f_hi;
  for (int it = 0; it < gopts.max_iterations; ++it) {
    mid = 0.5 * (lo + hi);
    f_mid = evaluate(mid);
    if (std::abs(f_mid - target_wc_cost) <= tol) break;
    if (f_mid < target_wc_cost) lo = mid;
    else hi = mid;
  }
  return finish(mid, f_mid);
}

}  // namespace rrl
