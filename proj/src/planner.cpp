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
#include "rrl/planner.hpp"

#include <algorithm>
#include <string>

#include "rrl/errors.hpp"

namespace rrl {

void RRLConfig::validate() const {
  if (horizon < 0) throw Error("look-ahead horizon must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
  if (!(sigma_w > 0.0)) throw Error("sigma_w must be positive");
  cost.validate();
}

int RRLConfig::lookahead(int epoch) const {
  if (epoch < 1 || epoch > schedule.epochs()) throw std::out_of_range("epoch " + std::to_string(epoch));
  return std::min(horizon, schedule.epochs() - epoch);
}

Matrix propagate_D(const Matrix& D, const std::vector<CovarianceBlock>& xis, const std::vector<int>& durations,
                   double sigma_w, double c_delta) {
  if (xis.size() != durations.size()) throw DimensionMismatch("propagate_D: one duration per covariance block");
  if (D.rows() != D.cols()) throw DimensionMismatch("propagate_D: D must be square");
  if (!(sigma_w > 0.0) || !(c_delta > 0.0)) throw Error("propagate_D: sigma_w and c_delta must be positive");
  const double scale = 1.0 / (sigma_w * sigma_w * c_delta);
  Matrix out = D;
  for (std::size_t k = 0; k < xis.size(); ++k) {
    const Matrix xi = xis[k].xi();
    if (xi.rows() != D.rows()) throw DimensionMismatch("propagate_D: covariance block size differs from D");
    out += scale * static_cast<double>(durations[k]) * xi;
  }
  return symmetrize(out);
}

PropagatedModel propagate(const UncertainModel& model, const std::vector<CovarianceBlock>& xis,
                          const std::vector<int>& durations, double sigma_w) {
  return PropagatedModel{model, propagate_D(model.D, xis, durations, sigma_w, model.c_delta)};
}

namespace {

std::vector<WorstCaseEvaluation> fixed_gain_evaluations(const SynthesisResult& robust, const UncertainModel& model,
                                                        const RRLConfig& config, int epoch) {
  const int h = config.lookahead(epoch);
  std::vector<WorstCaseEvaluation> out;
  std::vector<CovarianceBlock> xis;
  std::vector<int> durations;
  for (int j = 0; j <= h; ++j) {
    const PropagatedModel pm = propagate(model, xis, durations, config.sigma_w);
    try {
      out.push_back(evaluate_wc_cost(robust.policy, pm.model(), config.cost, config.sigma_w, config.solver));
    } catch (const Error& e) {
      throw MultiplierSelectionFailed(epoch + j, e.what());
    }
    xis.push_back(robust.xi);
    durations.push_back(config.schedule.duration(epoch + j));
  }
  return out;
}

}  // namespace

std::vector<double> select_multipliers(const SynthesisResult& robust, const UncertainModel& model,
                                       const RRLConfig& config, int epoch) {
  std::vector<double> lambdas;
  for (const auto& ev : fixed_gain_evaluations(robust, model, config, epoch)) lambdas.push_back(ev.lambda);
  return lambdas;
}

std::vector<double> select_multipliers(const UncertainModel& model, const RRLConfig& config, int epoch) {
  SynthesisResult robust;
  try {
    robust = synthesize_robust(model, config.cost, config.sigma_w, config.solver);
  } catch (const Error& e) {
    throw MultiplierSelectionFailed(epoch, e.what());
  }
  return select_multipliers(robust, model, config, epoch);
}

double fixed_gain_plan_cost(const SynthesisResult& robust, const UncertainModel& model, const RRLConfig& config,
                            int epoch) {
  const auto evs = fixed_gain_evaluations(robust, model, config, epoch);
  double total = 0.0;
  for (std::size_t j = 0; j < evs.size(); ++j) {
    total += config.schedule.duration(epoch + static_cast<int>(j)) * evs[j].wc_cost;
  }
  return total;
}

RRLProgram build_rrl_program(const UncertainModel& model, const RRLConfig& config, int epoch,
                             const std::vector<double>& multipliers) {
  model.validate();
  const int h = config.lookahead(epoch);
  if (multipliers.size() != static_cast<std::size_t>(h) + 1) {
    throw DimensionMismatch("solve_rrl: expected " + std::to_string(h + 1) + " multipliers");
  }
  for (std::size_t j = 1; j < multipliers.size(); ++j) {
    if (!(multipliers[j] >= 0.0)) throw Error("solve_rrl: multipliers must be nonnegative");
  }
  const Eigen::Index nx = model.nx();
  const Eigen::Index nz = nx + model.nu();
  const Matrix theta = model.theta();
  const Matrix J = config.cost.joint();
  const double scale = 1.0 / (config.sigma_w * config.sigma_w * model.c_delta);

  RRLProgram out;
  ConicProgram& prog = out.program;
  std::vector<MatrixVar>& xi = out.xis;
  for (int j = 0; j <= h; ++j) {
    xi.push_back(prog.add_matrix_var("Xi_" + std::to_string(epoch + j), nz, true));
    prog.add_objective(xi.back(), config.schedule.duration(epoch + j) * J);
  }
  out.lambda = prog.add_scalar_var("lambda", true);
  prog.add_lmi(robust_lmi(XiExpr::variable(xi[0], nz), theta, config.sigma_w, out.lambda, model.D),
               "S_" + std::to_string(epoch));
  for (int j = 1; j <= h; ++j) {
    const double lj = multipliers[static_cast<std::size_t>(j)];
    XiExpr extra;
    for (int k = 0; k < j; ++k) {
      extra.terms.push_back({xi[static_cast<std::size_t>(k)], Matrix::Identity(nz, nz),
                             lj * scale * config.schedule.duration(epoch + k)});
    }
    prog.add_lmi(robust_lmi(XiExpr::variable(xi[static_cast<std::size_t>(j)], nz), theta, config.sigma_w, lj,
                            model.D, &extra),
                 "S_" + std::to_string(epoch + j));
  }
  return out;
}

EpochPlan solve_rrl(const UncertainModel& model, const RRLConfig& config, int epoch,
                    const std::vector<double>& multipliers) {
  const RRLProgram p = build_rrl_program(model, config, epoch, multipliers);
  const int h = static_cast<int>(p.xis.size()) - 1;
  const Eigen::Index nx = model.nx();
  const ConicSolution sol = solve(p.program, config.solver);
  if (sol.status == SolveStatus::Infeasible) {
    throw PlanInfeasible("receding-horizon program infeasible at epoch " + std::to_string(epoch));
  }
  if (!sol.optimal()) throw NumericalTrouble("receding-horizon program: " + sol.message);

  EpochPlan plan;
  plan.epoch = epoch;
  plan.planned_cost = sol.objective_value;
  plan.multipliers = multipliers;
  plan.multipliers[0] = std::max(0.0, sol.value(p.lambda));
  for (int j = 0; j <= h; ++j) {
    plan.xis.push_back(CovarianceBlock::from_xi(sol.value(p.xis[static_cast<std::size_t>(j)]), nx));
    plan.policies.push_back(recover_policy(plan.xis.back()));
  }
  return plan;
}

const char* to_string(Planner p) {
  switch (p) {
    case Planner::rrl:
      return "rrl";
    case Planner::nom:
      return "nom";
    case Planner::greedy:
      return "greedy";
  }
  return "?";
}

Planner planner_from_string(const std::string& name) {
  if (name == "rrl") return Planner::rrl;
  if (name == "nom") return Planner::nom;
  if (name == "greedy") return Planner::greedy;
  throw Error("unknown method '" + name + "'");
}

Decision plan_epoch(const UncertainModel& model, const RRLConfig& config, int epoch, Planner planner,
                    const MultiplierRule& rule) {
  const SynthesisResult robust = synthesize_robust(model, config.cost, config.sigma_w, config.solver);
  const SynthesisResult nom = nom_from(robust);
  Decision d;
  d.policy = nom.policy;
  if (planner == Planner::nom) return d;

  Policy rrl_policy = nom.policy;
  try {
    const auto lambdas = rule ? rule(robust, model, config, epoch) : select_multipliers(robust, model, config, epoch);
    rrl_policy = solve_rrl(model, config, epoch, lambdas).policies.front();
  } catch (const Error& e) {
    d.fallback = true;
    d.note = "epoch " + std::to_string(epoch) + ": rrl plan failed, deploying nom (" + e.what() + ")";
  }
  if (planner == Planner::rrl) {
    d.policy = rrl_policy;
    return d;
  }

  d.target_wc_cost = nom.wc_cost;
  if (!d.fallback) {
    try {
      d.target_wc_cost = evaluate_wc_cost(rrl_policy, model, config.cost, config.sigma_w, config.solver).wc_cost;
    } catch (const Error& e) {
      d.note = "epoch " + std::to_string(epoch) + ": rrl policy evaluation failed, greedy target set to nom (" +
               e.what() + ")";
    }
  }
  const GreedyPolicy g = greedy_policy(nom, model, config.cost, config.sigma_w, d.target_wc_cost, config.solver);
  d.policy = g.policy;
  d.greedy_alpha = g.alpha;
  d.greedy_saturated = g.alpha_saturated;
  if (g.alpha_saturated) {
    if (!d.note.empty()) d.note += "; ";
    d.note += "epoch " + std::to_string(epoch) + ": greedy excitation saturated at alpha_max";
  }
  d.fallback = false;
  return d;
}

TrialResult receding_horizon_run(const LinearSystem& true_sys, const Dataset& initial_data, const RRLConfig& config,
                                 NoiseStreams& rng, Planner planner) {
  config.validate();
  true_sys.validate();
  const int N = config.schedule.epochs();
  TrialResult out;
  out.planner = planner;
  out.seed = rng.process.seed();

  Dataset data = initial_data;
  const UncertainModel initial_model = spectral_model(data, config.sigma_w, config.delta);
  UncertainModel model = initial_model;
  Matrix D_theoretical = initial_model.D;
  Vector x = Vector::Zero(true_sys.nx());

  for (int i = 1; i <= N; ++i) {
    const int T = config.schedule.duration(i);
    const Decision d = plan_epoch(model, config, i, planner);
    out.policies.push_back(d.policy);
    out.fallback.push_back(d.fallback);
    out.greedy_alpha.push_back(d.greedy_alpha);
    if (!d.note.empty()) out.notes.push_back(d.note);

    if (config.track_wc_data) {
      out.wc_cost_data.push_back(
          T * evaluate_wc_cost(d.policy, model, config.cost, config.sigma_w, config.solver).wc_cost);
    }

    const Trajectory traj = rollout(true_sys, d.policy, x, T, rng);
    x = traj.states.back();
    data.append(traj);
    out.empirical_cost.push_back(empirical_cost(traj, config.cost).total);
    model = spectral_model(data, config.sigma_w, config.delta);
    out.information.push_back(information(model));

    if (config.track_wc_theoretical) {
      const UncertainModel m = initial_model.with_D(D_theoretical);
      const Decision dt = plan_epoch(m, config, i, planner);
      const WorstCaseEvaluation ev = evaluate_wc_cost(dt.policy, m, config.cost, config.sigma_w, config.solver);
      out.wc_cost_theoretical.push_back(T * ev.wc_cost);
      D_theoretical = propagate_D(D_theoretical, {ev.xi}, {T}, config.sigma_w, initial_model.c_delta);
    }
  }
  return out;
}

}  // namespace rrl
