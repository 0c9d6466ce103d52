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
#include <numeric>

#include "rrl/errors.hpp"
#include "rrl/simulation.hpp"

using namespace rrl;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("apply_policy: zero policy gives zero input") {
  Rng rng(1);
  const Vector u = apply_policy(Policy::zero(2, 1), vec({3.0, -4.0}), rng);
  CHECK(u.size() == 1);
  CHECK(u(0) == 0.0);
}

TEST_CASE("apply_policy: deterministic gain") {
  Rng rng(2);
  Policy p{mat({{1.0, 0.0}}), Matrix::Zero(1, 1)};
  CHECK(apply_policy(p, vec({2.0, 3.0}), rng)(0) == doctest::Approx(2.0));
}

TEST_CASE("apply_policy: unit excitation has unit sample variance") {
  Rng rng(3);
  Policy p{Matrix::Zero(1, 1), Matrix::Identity(1, 1)};
  const int n = 10000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = apply_policy(p, vec({0.0}), rng)(0);
    s += u;
    s2 += u * u;
  }
  const double var = (s2 - s * s / n) / (n - 1);
  CHECK(var >= 0.94);
  CHECK(var <= 1.06);
}

TEST_CASE("apply_policy: Sigma = 0 ignores the rng state") {
  Policy p{mat({{0.5, -1.0}}), Matrix::Zero(1, 1)};
  Rng a(10), b(99);
  b.normal(5);
  CHECK(apply_policy(p, vec({1.0, 2.0}), a)(0) == apply_policy(p, vec({1.0, 2.0}), b)(0));
}

TEST_CASE("apply_policy: rejects an indefinite Sigma and bad dimensions") {
  Rng rng(4);
  Policy bad{Matrix::Zero(1, 2), Matrix::Constant(1, 1, -1e-6)};
  CHECK_THROWS_AS(apply_policy(bad, vec({0.0, 0.0}), rng), InvalidCovariance);
  Policy tiny{Matrix::Zero(1, 2), Matrix::Constant(1, 1, -5e-10)};
  CHECK_NOTHROW(apply_policy(tiny, vec({0.0, 0.0}), rng));
  Policy p{Matrix::Zero(1, 2), Matrix::Zero(1, 1)};
  CHECK_THROWS_AS(apply_policy(p, vec({0.0}), rng), DimensionMismatch);
}

TEST_CASE("step: noiseless identity") {
  Rng rng(5);
  LinearSystem sys{Matrix::Identity(2, 2), Matrix::Zero(2, 1), 0.0};
  const Vector x = step(sys, vec({1.0, 2.0}), vec({7.0}), rng);
  CHECK(x(0) == 1.0);
  CHECK(x(1) == 2.0);
}

TEST_CASE("step: scalar arithmetic") {
  Rng rng(6);
  LinearSystem sys{mat({{0.5}}), mat({{0.2}}), 0.0};
  CHECK(step(sys, vec({1.0}), vec({1.0}), rng)(0) == doctest::Approx(0.7));
}

TEST_CASE("step: process noise standard deviation") {
  Rng rng(7);
  LinearSystem sys{Matrix::Zero(2, 2), Matrix::Zero(2, 1), 0.5};
  const int n = 10000;
  Vector s = Vector::Zero(2), s2 = Vector::Zero(2);
  for (int i = 0; i < n; ++i) {
    const Vector x = step(sys, Vector::Zero(2), Vector::Zero(1), rng);
    s += x;
    s2 += x.cwiseProduct(x);
  }
  for (int k = 0; k < 2; ++k) {
    const double sd = std::sqrt((s2(k) - s(k) * s(k) / n) / (n - 1));
    CHECK(sd >= 0.47);
    CHECK(sd <= 0.53);
  }
}

TEST_CASE("step: dimension checks") {
  Rng rng(8);
  LinearSystem sys{Matrix::Identity(2, 2), Matrix::Zero(2, 1), 0.0};
  CHECK_THROWS_AS(step(sys, vec({1.0}), vec({0.0}), rng), DimensionMismatch);
  CHECK_THROWS_AS(step(sys, vec({1.0, 1.0}), vec({0.0, 0.0}), rng), DimensionMismatch);
}

TEST_CASE("rollout: zero fixed point") {
  auto rng = NoiseStreams::from_seed(1);
  LinearSystem sys{mat({{0.3, 0.1}, {0.0, 0.5}}), mat({{1.0}, {0.0}}), 0.0};
  const Trajectory tr = rollout(sys, Policy::zero(2, 1), Vector::Zero(2), 1, rng);
  REQUIRE(tr.states.size() == 2);
  CHECK(tr.states[0].norm() == 0.0);
  CHECK(tr.states[1].norm() == 0.0);
  CHECK(tr.transitions() == 1);
}

TEST_CASE("rollout: deadbeat closed loop") {
  auto rng = NoiseStreams::from_seed(2);
  LinearSystem sys{mat({{0.9}}), mat({{1.0}}), 0.0};
  Policy p{mat({{-0.9}}), Matrix::Zero(1, 1)};
  const Trajectory tr = rollout(sys, p, vec({1.0}), 3, rng);
  REQUIRE(tr.states.size() == 4);
  CHECK(tr.states[0](0) == 1.0);
  for (int t = 1; t < 4; ++t) CHECK(std::abs(tr.states[static_cast<std::size_t>(t)](0)) < 1e-15);
}

TEST_CASE("rollout: same seed gives bit-identical trajectories") {
  LinearSystem sys{mat({{0.9, 0.2}, {-0.1, 0.7}}), mat({{0.0}, {1.0}}), 0.3};
  Policy p{mat({{0.1, -0.4}}), mat({{0.25}})};
  auto r1 = NoiseStreams::from_seed(42);
  auto r2 = NoiseStreams::from_seed(42);
  const Trajectory a = rollout(sys, p, vec({1.0, -1.0}), 50, r1);
  const Trajectory b = rollout(sys, p, vec({1.0, -1.0}), 50, r2);
  for (std::size_t t = 0; t < a.states.size(); ++t) CHECK((a.states[t].array() == b.states[t].array()).all());
  for (std::size_t t = 0; t < a.inputs.size(); ++t) CHECK((a.inputs[t].array() == b.inputs[t].array()).all());
  auto r3 = NoiseStreams::from_seed(43);
  const Trajectory c = rollout(sys, p, vec({1.0, -1.0}), 50, r3);
  CHECK((a.states.back() - c.states.back()).norm() > 0.0);
}

TEST_CASE("rollout: noiseless trajectory follows the closed loop exactly") {
  auto rng = NoiseStreams::from_seed(3);
  LinearSystem sys{mat({{1.1, 0.5}, {0.0, 0.9}}), mat({{0.0}, {1.0}}), 0.0};
  Policy p{mat({{-0.3, -0.8}}), Matrix::Zero(1, 1)};
  const Trajectory tr = rollout(sys, p, vec({1.0, 2.0}), 40, rng);
  const Matrix F = sys.A + sys.B * p.K;
  for (std::size_t t = 0; t + 1 < tr.states.size(); ++t) {
    CHECK((tr.states[t + 1] - F * tr.states[t]).norm() < 1e-12);
  }
}

TEST_CASE("rollout: invalid step count") {
  auto rng = NoiseStreams::from_seed(4);
  LinearSystem sys{mat({{0.5}}), mat({{1.0}}), 0.1};
  CHECK_THROWS_AS(rollout(sys, Policy::zero(1, 1), vec({0.0}), 0, rng), Error);
}

TEST_CASE("epoch_index") {
  EpochSchedule s({0, 100, 200});
  CHECK(s.epoch_index(100) == 1);
  CHECK(s.epoch_index(101) == 2);
  CHECK(s.epoch_index(1) == 1);
  CHECK(s.epoch_index(200) == 2);
  CHECK_THROWS_AS(s.epoch_index(0), std::out_of_range);
  CHECK_THROWS_AS(s.epoch_index(201), std::out_of_range);
  CHECK(s.duration(1) == 100);
  CHECK(s.epochs() == 2);
}

TEST_CASE("epoch schedule validation") {
  CHECK_THROWS_AS(EpochSchedule({0, 100, 100}), Error);
  CHECK_THROWS_AS(EpochSchedule({1, 100}), Error);
  CHECK_THROWS_AS(EpochSchedule({0}), Error);
  const EpochSchedule u = EpochSchedule::uniform(1000, 10);
  CHECK(u.epochs() == 10);
  for (int i = 1; i <= 10; ++i) CHECK(u.duration(i) == 100);
  CHECK(u.horizon() == 1000);
}

TEST_CASE("empirical_cost: single step") {
  Trajectory tr;
  tr.states = {vec({1.0, 1.0})};
  tr.inputs = {vec({2.0})};
  CostSpec c{Matrix::Identity(2, 2), Matrix::Identity(1, 1)};
  const CostBreakdown b = empirical_cost(tr, c);
  REQUIRE(b.per_step.size() == 1);
  CHECK(b.per_step[0] == doctest::Approx(6.0));
  CHECK(b.total == doctest::Approx(6.0));
}

TEST_CASE("empirical_cost: zero trajectory") {
  auto rng = NoiseStreams::from_seed(5);
  LinearSystem sys{mat({{0.5}}), mat({{1.0}}), 0.0};
  const Trajectory tr = rollout(sys, Policy::zero(1, 1), vec({0.0}), 20, rng);
  CHECK(empirical_cost(tr, CostSpec{mat({{1.0}}), mat({{1.0}})}).total == 0.0);
}

TEST_CASE("empirical_cost: matches a naive loop and the per-epoch split") {
  auto rng = NoiseStreams::from_seed(6);
  LinearSystem sys{mat({{0.9, 0.2}, {-0.1, 0.7}}), mat({{0.0}, {1.0}}), 0.5};
  Policy p{mat({{0.1, -0.4}}), mat({{0.3}})};
  const Trajectory tr = rollout(sys, p, vec({0.0, 0.0}), 100, rng);
  CostSpec c{mat({{2.0, 0.5}, {0.5, 1.0}}), mat({{0.3}})};
  const CostBreakdown b = empirical_cost(tr, c);
  double naive = 0.0;
  for (std::size_t t = 0; t < 100; ++t) {
    const Vector& x = tr.states[t];
    const Vector& u = tr.inputs[t];
    double q = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) q += x(i) * c.Q(i, j) * x(j);
    naive += q + u(0) * c.R(0, 0) * u(0);
  }
  CHECK(b.total == doctest::Approx(naive).epsilon(1e-12));

  for (const auto& bounds : {std::vector<int>{0, 100}, std::vector<int>{0, 30, 31, 100},
                             std::vector<int>{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100}}) {
    const auto per = b.per_epoch(EpochSchedule(bounds));
    CHECK(per.size() == bounds.size() - 1);
    CHECK(std::accumulate(per.begin(), per.end(), 0.0) == doctest::Approx(b.total).epsilon(1e-12));
  }
  const auto split = b.per_epoch(EpochSchedule({0, 30, 100}));
  CHECK(split[0] == doctest::Approx(std::accumulate(b.per_step.begin(), b.per_step.begin() + 30, 0.0)));
}

TEST_CASE("cost spec validation") {
  CHECK_THROWS(CostSpec{mat({{1.0, 2.0}, {0.0, 1.0}}), mat({{1.0}})}.validate());
  CHECK_THROWS(CostSpec{mat({{-1.0}}), mat({{1.0}})}.validate());
  CHECK_NOTHROW(CostSpec{mat({{1.0}}), mat({{0.0}})}.validate());
}

TEST_CASE("random streams are reproducible and independent") {
  Rng a(123), b(123);
  CHECK(a.normal() == b.normal());
  Rng s1 = a.substream(1), s2 = a.substream(2), s1b = b.substream(1);
  const double x = s1.normal();
  CHECK(x == s1b.normal());
  CHECK(x != s2.normal());
}
