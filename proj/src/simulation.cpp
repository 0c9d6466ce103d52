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
#include "rrl/simulation.hpp"

#include <string>

#include "rrl/errors.hpp"

namespace rrl {

void LinearSystem::validate() const {
  if (A.rows() != A.cols()) throw DimensionMismatch("A must be square");
  if (B.rows() != A.rows()) throw DimensionMismatch("B must have as many rows as A");
  if (!(sigma_w >= 0.0)) throw Error("sigma_w must be nonnegative");
}

Policy Policy::zero(Eigen::Index nx, Eigen::Index nu) {
  return Policy{Matrix::Zero(nu, nx), Matrix::Zero(nu, nu)};
}

void Policy::validate() const {
  if (Sigma.rows() != K.rows() || Sigma.cols() != K.rows()) {
    throw DimensionMismatch("Sigma must be n_u x n_u");
  }
  if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + Sigma.cwiseAbs().maxCoeff())) {
    throw InvalidCovariance("Sigma is not symmetric");
  }
  if (!is_psd(Sigma)) throw InvalidCovariance("Sigma is not positive semidefinite");
}

EpochSchedule::EpochSchedule(std::vector<int> boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2) throw Error("epoch schedule needs at least one epoch");
  if (boundaries_.front() != 0) throw Error("epoch schedule must start at 0");
  for (std::size_t i = 1; i < boundaries_.size(); ++i) {
    if (boundaries_[i] <= boundaries_[i - 1]) {
      throw Error("epoch boundaries must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

EpochSchedule EpochSchedule::uniform(int horizon, int epochs) {
  if (epochs < 1 || horizon < epochs) throw Error("invalid uniform schedule");
  std::vector<int> b(static_cast<std::size_t>(epochs) + 1);
  for (int i = 0; i <= epochs; ++i) {
    b[static_cast<std::size_t>(i)] = static_cast<int>(static_cast<long long>(horizon) * i / epochs);
  }
  return EpochSchedule(std::move(b));
}

int EpochSchedule::epoch_index(int t) const {
  if (t <= 0 || t > horizon()) {
    throw std::out_of_range("time index " + std::to_string(t) + " outside (0, " +
                            std::to_string(horizon()) + "]");
  }
  int lo = 1, hi = epochs();
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (t <= boundaries_[static_cast<std::size_t>(mid)]) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

void CostSpec::validate() const {
  if (Q.rows() != Q.cols() || R.rows() != R.cols()) throw DimensionMismatch("Q and R must be square");
  auto check = [](const Matrix& m, const char* name) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
      throw Error(std::string(name) + " is not symmetric");
    }
    if (!is_psd(m)) throw Error(std::string(name) + " is not positive semidefinite");
  };
  check(Q, "Q");
  check(R, "R");
}

double CostSpec::stage(const Vector& x, const Vector& u) const {
  if (x.size() != Q.rows() || u.size() != R.rows()) throw DimensionMismatch("stage cost dimensions");
  return x.dot(Q * x) + u.dot(R * u);
}

Vector apply_policy(const Policy& policy, const Vector& x, Rng& excitation) {
  if (x.size() != policy.nx()) throw DimensionMismatch("apply_policy: state size");
  if (policy.Sigma.rows() != policy.nu() || policy.Sigma.cols() != policy.nu()) {
    throw DimensionMismatch("apply_policy: Sigma size");
  }
  Vector e = excitation.normal(policy.nu());
  return policy.K * x + psd_sqrt(policy.Sigma) * e;
}

Vector step(const LinearSystem& sys, const Vector& x, const Vector& u, Rng& process) {
  if (x.size() != sys.nx() || u.size() != sys.nu()) throw DimensionMismatch("step: state/input size");
  Vector w = process.normal(sys.nx());
  return sys.A * x + sys.B * u + sys.sigma_w * w;
}

Trajectory rollout(const LinearSystem& sys, const Policy& policy, const Vector& x0, int steps,
                   NoiseStreams& rng) {
  if (steps < 1) throw Error("rollout needs at least one step");
  sys.validate();
  if (policy.nx() != sys.nx() || policy.nu() != sys.nu() || x0.size() != sys.nx()) {
    throw DimensionMismatch("rollout: policy/system/state dimensions");
  }
  const Matrix root = psd_sqrt(policy.Sigma);
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.inputs.reserve(static_cast<std::size_t>(steps));
  Vector x = x0;
  traj.states.push_back(x);
  for (int t = 0; t < steps; ++t) {
    Vector u = policy.K * x + root * rng.excitation.normal(sys.nu());
    x = sys.A * x + sys.B * u + sys.sigma_w * rng.process.normal(sys.nx());
    traj.inputs.push_back(std::move(u));
    traj.states.push_back(x);
  }
  return traj;
}

std::vector<double> CostBreakdown::per_epoch(const EpochSchedule& schedule, int first_time) const {
  std::vector<double> out(static_cast<std::size_t>(schedule.epochs()), 0.0);
  for (std::size_t k = 0; k < per_step.size(); ++k) {
    int epoch = schedule.epoch_index(first_time + static_cast<int>(k));
    out[static_cast<std::size_t>(epoch - 1)] += per_step[k];
  }
  return out;
}

CostBreakdown empirical_cost(const Trajectory& traj, const CostSpec& cost) {
  if (traj.states.size() < traj.inputs.size()) throw DimensionMismatch("trajectory misaligned");
  CostBreakdown out;
  out.per_step.reserve(traj.inputs.size());
  for (std::size_t t = 0; t < traj.inputs.size(); ++t) {
    double c = cost.stage(traj.states[t], traj.inputs[t]);
    out.per_step.push_back(c);
    out.total += c;
  }
  return out;
}

}  // namespace rrl
