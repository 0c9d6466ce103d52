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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "rrl/errors.hpp"
#include "rrl/planner.hpp"
#include "support.hpp"

using namespace rrl;
using rrl::testing::benchmark_cost;
using rrl::testing::benchmark_initial_data;
using rrl::testing::benchmark_system;
using rrl::testing::random_matrix;

namespace {

RRLConfig benchmark_config(EpochSchedule schedule, int horizon) {
  RRLConfig cfg{std::move(schedule)};
  cfg.horizon = horizon;
  cfg.cost = benchmark_cost();
  cfg.sigma_w = benchmark_system().sigma_w;
  return cfg;
}

UncertainModel benchmark_model(std::uint64_t seed, double input_scale = 1.0) {
  return spectral_model(benchmark_initial_data(seed, input_scale), benchmark_system().sigma_w, 0.05);
}

CovarianceBlock identity_block(Eigen::Index nx, Eigen::Index nu) {
  return CovarianceBlock::from_xi(Matrix::Identity(nx + nu, nx + nu), nx);
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("propagate_D: examples and additivity") {
  const Matrix D = 3.0 * Matrix::Identity(3, 3);
  CHECK((propagate_D(D, {}, {}, 1.0, 1.0) - D).norm() == 0.0);
  CHECK((propagate_D(D, {identity_block(2, 1)}, {100}, 1.0, 1.0) - (D + 100.0 * Matrix::Identity(3, 3))).norm() <=
        1e-12);

  Rng rng(5);
  const Matrix G1 = random_matrix(rng, 3, 3), G2 = random_matrix(rng, 3, 3);
  const CovarianceBlock x1 = CovarianceBlock::from_xi(G1 * G1.transpose(), 2);
  const CovarianceBlock x2 = CovarianceBlock::from_xi(G2 * G2.transpose(), 2);
  const Matrix both = propagate_D(D, {x1, x2}, {7, 13}, 0.5, 2.0);
  const Matrix chained = propagate_D(propagate_D(D, {x1}, {7}, 0.5, 2.0), {x2}, {13}, 0.5, 2.0);
  CHECK((both - chained).norm() <= 1e-12 * both.norm());

  CHECK_THROWS_AS(propagate_D(D, {x1}, {}, 1.0, 1.0), DimensionMismatch);
  CHECK_THROWS_AS(propagate_D(Matrix::Identity(4, 4), {x1}, {1}, 1.0, 1.0), DimensionMismatch);
}

TEST_CASE("lookahead is truncated at the last epoch") {
  const RRLConfig cfg = benchmark_config(EpochSchedule::uniform(1000, 10), 10);
  CHECK(cfg.lookahead(1) == 9);
  CHECK(cfg.lookahead(10) == 0);
  RRLConfig short_cfg = cfg;
  short_cfg.horizon = 2;
  CHECK(short_cfg.lookahead(1) == 2);
  CHECK(short_cfg.lookahead(9) == 1);
  short_cfg.horizon = -1;
  CHECK_THROWS_AS(short_cfg.validate(), Error);
}

TEST_CASE("h = 0 reduces to robust synthesis") {
  const UncertainModel m = benchmark_model(21);
  const RRLConfig cfg = benchmark_config(EpochSchedule::uniform(1000, 10), 0);
  const SynthesisResult robust = synthesize_robust(m, cfg.cost, cfg.sigma_w, cfg.solver);
  const std::vector<double> lambdas = select_multipliers(robust, m, cfg, 1);
  REQUIRE(lambdas.size() == 1);
  const WorstCaseEvaluation ev = evaluate_wc_cost(robust.policy, m, cfg.cost, cfg.sigma_w, cfg.solver);
  CHECK(rel_diff(lambdas[0], ev.lambda) <= 1e-6);

  const EpochPlan plan = solve_rrl(m, cfg, 1, lambdas);
  REQUIRE(plan.policies.size() == 1);
  CHECK(rel_diff(plan.planned_cost / 100.0, robust.wc_cost) <= 1e-6);
  CHECK((plan.policies[0].K - robust.policy.K).norm() <= 1e-4 * (1.0 + robust.policy.K.norm()));
}

TEST_CASE("multipliers and fixed-gain costs over a ten-epoch look-ahead") {
  const UncertainModel m = benchmark_model(22);
  const RRLConfig cfg = benchmark_config(EpochSchedule::uniform(1000, 10), 10);
  const SynthesisResult robust = synthesize_robust(m, cfg.cost, cfg.sigma_w, cfg.solver);
  const std::vector<double> lambdas = select_multipliers(robust, m, cfg, 1);
  REQUIRE(lambdas.size() == 10);
  for (double l : lambdas) {
    CHECK(std::isfinite(l));
    CHECK(l >= 0.0);
  }

  std::vector<CovarianceBlock> xis;
  std::vector<int> durations;
  double previous = INFINITY, total = 0.0;
  for (int j = 1; j <= 10; ++j) {
    const UncertainModel pm = propagate(m, xis, durations, cfg.sigma_w).model();
    const double wc = evaluate_wc_cost(robust.policy, pm, cfg.cost, cfg.sigma_w, cfg.solver).wc_cost;
    CHECK(wc <= previous * (1.0 + 1e-6));
    previous = wc;
    total += cfg.schedule.duration(j) * wc;
    xis.push_back(robust.xi);
    durations.push_back(cfg.schedule.duration(j));
  }
  CHECK(rel_diff(fixed_gain_plan_cost(robust, m, cfg, 1), total) <= 1e-6);
}

TEST_CASE("rrl plan: cost, consistency and exploration") {
  // Weakly excited initial inputs leave room for the plan to add excitation.
  const UncertainModel m = benchmark_model(23, 0.1);
  const RRLConfig cfg = benchmark_config(EpochSchedule::uniform(1000, 10), 10);
  const SynthesisResult robust = synthesize_robust(m, cfg.cost, cfg.sigma_w, cfg.solver);
  const std::vector<double> lambdas = select_multipliers(robust, m, cfg, 1);
  const EpochPlan plan = solve_rrl(m, cfg, 1, lambdas);
  REQUIRE(plan.policies.size() == 10);
  REQUIRE(plan.xis.size() == 10);
  REQUIRE(plan.multipliers.size() == 10);

  CHECK(plan.policies[0].Sigma.trace() > 1e-6);
  CHECK(plan.planned_cost <= fixed_gain_plan_cost(robust, m, cfg, 1) * (1.0 + 1e-6));

  double recomputed = 0.0;
  for (int j = 0; j < 10; ++j) {
    const Matrix xi = plan.xis[static_cast<std::size_t>(j)].xi();
    recomputed += cfg.schedule.duration(1 + j) * (cfg.cost.joint() * xi).trace();
  }
  CHECK(rel_diff(plan.planned_cost, recomputed) <= 1e-6);
  for (std::size_t j = 1; j < lambdas.size(); ++j) CHECK(plan.multipliers[j] == lambdas[j]);
}

TEST_CASE("rrl program constraints are affine in the stacked variables") {
  const UncertainModel m = benchmark_model(24);
  const RRLConfig cfg = benchmark_config(EpochSchedule::uniform(1000, 10), 3);
  const RRLProgram p = build_rrl_program(m, cfg, 1, {0.0, 2.0, 3.0, 5.0});
  CHECK(p.xis.size() == 4);
  CHECK(p.program.lmis().size() == 4);
  for (Eigen::Index d : p.program.lmi_dims()) CHECK(d == 11);

  Rng rng(77);
  auto random_assignment = [&] {
    Assignment a;
    for (int v = 0; v < p.program.num_matrix_vars(); ++v) {
      const Eigen::Index n = p.program.dim(MatrixVar{v});
      const Matrix G = random_matrix(rng, n, n);
      a.matrices.push_back(G + G.transpose());
    }
    for (int s = 0; s < p.program.num_scalar_vars(); ++s) a.scalars.push_back(rng.normal());
    return a;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const Assignment a = random_assignment(), b = random_assignment();
    const double t = rng.normal();
    Assignment mix;
    for (std::size_t v = 0; v < a.matrices.size(); ++v) {
      mix.matrices.push_back(t * a.matrices[v] + (1 - t) * b.matrices[v]);
    }
    for (std::size_t s = 0; s < a.scalars.size(); ++s) mix.scalars.push_back(t * a.scalars[s] + (1 - t) * b.scalars[s]);
    for (const AffineExpr& e : p.program.lmis()) {
      const Matrix fa = p.program.evaluate(e, a), fb = p.program.evaluate(e, b);
      const Matrix residual = p.program.evaluate(e, mix) - (t * fa + (1 - t) * fb);
      CHECK(residual.norm() <= 1e-9 * (1.0 + fa.norm() + fb.norm()));
    }
  }
}

TEST_CASE("rrl plan errors") {
  const UncertainModel m = benchmark_model(25);
  const RRLConfig cfg = benchmark_config(EpochSchedule::uniform(1000, 10), 2);
  CHECK_THROWS_AS(solve_rrl(m, cfg, 1, {1.0}), DimensionMismatch);
  CHECK_THROWS_AS(solve_rrl(m, cfg, 1, {0.0, -1.0, 1.0}), Error);
  // Zero future multipliers force the future covariances to vanish.
  CHECK_THROWS_AS(solve_rrl(m, cfg, 1, {0.0, 0.0, 0.0}), PlanInfeasible);
}

TEST_CASE("fallback deploys nom when the plan fails") {
  const UncertainModel m = benchmark_model(26);
  const RRLConfig cfg = benchmark_config(EpochSchedule::uniform(1000, 10), 2);
  const MultiplierRule zeros = [](const SynthesisResult&, const UncertainModel&, const RRLConfig& c, int epoch) {
    return std::vector<double>(static_cast<std::size_t>(c.lookahead(epoch)) + 1, 0.0);
  };
  const Decision nom = plan_epoch(m, cfg, 1, Planner::nom);
  const Decision d = plan_epoch(m, cfg, 1, Planner::rrl, zeros);
  CHECK(d.fallback);
  CHECK_FALSE(d.note.empty());
  CHECK((d.policy.K - nom.policy.K).norm() == 0.0);
  CHECK(d.policy.Sigma.norm() == 0.0);

  const Decision g = plan_epoch(m, cfg, 1, Planner::greedy, zeros);
  CHECK(g.greedy_alpha == 0.0);
  CHECK((g.policy.K - nom.policy.K).norm() == 0.0);
}

TEST_CASE("planner names") {
  for (Planner p : {Planner::rrl, Planner::nom, Planner::greedy}) CHECK(planner_from_string(to_string(p)) == p);
  CHECK_THROWS_AS(planner_from_string("ts"), Error);
}

TEST_CASE("single-epoch nom run is robust synthesis plus a rollout") {
  const auto sys = benchmark_system();
  const Dataset data = benchmark_initial_data(31);
  RRLConfig cfg = benchmark_config(EpochSchedule({0, 200}), 10);
  NoiseStreams rng = NoiseStreams::from_seed(32);
  const TrialResult r = receding_horizon_run(sys, data, cfg, rng, Planner::nom);
  REQUIRE(r.policies.size() == 1);

  const UncertainModel m = spectral_model(data, sys.sigma_w, cfg.delta);
  const SynthesisResult robust = synthesize_robust(m, cfg.cost, cfg.sigma_w, cfg.solver);
  CHECK((r.policies[0].K - robust.policy.K).norm() == 0.0);
  NoiseStreams replay = NoiseStreams::from_seed(32);
  const Trajectory traj = rollout(sys, Policy{robust.policy.K, Matrix::Zero(2, 2)}, Vector::Zero(3), 200, replay);
  CHECK(r.empirical_cost[0] == empirical_cost(traj, cfg.cost).total);
  CHECK(r.wc_cost_data[0] == doctest::Approx(200.0 * robust.wc_cost).epsilon(1e-6));
}

TEST_CASE("receding-horizon run: data metrics, monotone information, determinism") {
  const auto sys = benchmark_system();
  const Dataset data = benchmark_initial_data(41, 0.3);
  const RRLConfig cfg = benchmark_config(EpochSchedule({0, 150, 300, 500}), 2);

  NoiseStreams rng = NoiseStreams::from_seed(42);
  const TrialResult r = receding_horizon_run(sys, data, cfg, rng, Planner::rrl);
  REQUIRE(r.policies.size() == 3);
  REQUIRE(r.empirical_cost.size() == 3);
  REQUIRE(r.wc_cost_data.size() == 3);
  REQUIRE(r.wc_cost_theoretical.size() == 3);
  REQUIRE(r.information.size() == 3);
  for (std::size_t i = 1; i < r.information.size(); ++i) CHECK(r.information[i] >= r.information[i - 1]);

  // Replay epochs 1 and 2 and re-cost the deployed epoch-2 policy on the
  // model estimated from the data available when it was chosen.
  NoiseStreams replay = NoiseStreams::from_seed(42);
  Dataset all = data;
  const Trajectory t1 = rollout(sys, r.policies[0], Vector::Zero(3), 150, replay);
  all.append(t1);
  CHECK(r.empirical_cost[0] == empirical_cost(t1, cfg.cost).total);
  const UncertainModel m1 = spectral_model(all, sys.sigma_w, cfg.delta);
  CHECK(r.information[0] == information(m1));
  const double wc2 = evaluate_wc_cost(r.policies[1], m1, cfg.cost, cfg.sigma_w, cfg.solver).wc_cost;
  CHECK(r.wc_cost_data[1] == doctest::Approx(150.0 * wc2).epsilon(1e-9));
  const Trajectory t2 = rollout(sys, r.policies[1], t1.states.back(), 150, replay);
  CHECK(r.empirical_cost[1] == empirical_cost(t2, cfg.cost).total);

  NoiseStreams rng2 = NoiseStreams::from_seed(42);
  const TrialResult again = receding_horizon_run(sys, data, cfg, rng2, Planner::rrl);
  CHECK(again.empirical_cost == r.empirical_cost);
  CHECK(again.wc_cost_data == r.wc_cost_data);
  CHECK(again.wc_cost_theoretical == r.wc_cost_theoretical);
  CHECK(again.information == r.information);
  for (std::size_t i = 0; i < r.policies.size(); ++i) {
    CHECK((again.policies[i].K - r.policies[i].K).norm() == 0.0);
    CHECK((again.policies[i].Sigma - r.policies[i].Sigma).norm() == 0.0);
  }
}
