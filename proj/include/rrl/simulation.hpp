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

#include <vector>

#include "rrl/linalg.hpp"
#include "rrl/random.hpp"

namespace rrl {

/// x_{t+1} = A x_t + B u_t + w_t,  w_t ~ N(0, sigma_w^2 I).
struct LinearSystem {
  Matrix A;
  Matrix B;
  double sigma_w = 0.0;

  Eigen::Index nx() const { return A.rows(); }
  Eigen::Index nu() const { return B.cols(); }
  void validate() const;
};

/// Static-gain exploratory policy u = K x + Sigma^{1/2} e, e ~ N(0, I).
struct Policy {
  Matrix K;
  Matrix Sigma;

  static Policy zero(Eigen::Index nx, Eigen::Index nu);
  Eigen::Index nx() const { return K.cols(); }
  Eigen::Index nu() const { return K.rows(); }
  void validate() const;
};

/// states x_1..x_{n(+1)}, inputs u_1..u_n.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> inputs;

  std::size_t transitions() const {
    return states.size() > inputs.size() ? inputs.size() : inputs.size() - 1;
  }
};

/// Epoch boundaries 0 = tau_0 < tau_1 < ... < tau_N = T. Epochs are 1-based.
class EpochSchedule {
 public:
  explicit EpochSchedule(std::vector<int> boundaries);
  static EpochSchedule uniform(int horizon, int epochs);

  int epochs() const { return static_cast<int>(boundaries_.size()) - 1; }
  int horizon() const { return boundaries_.back(); }
  int start(int epoch) const { return boundaries_.at(epoch - 1); }
  int end(int epoch) const { return boundaries_.at(epoch); }
  int duration(int epoch) const { return end(epoch) - start(epoch); }
  /// Smallest i with t <= tau_i, for 0 < t <= T.
  int epoch_index(int t) const;
  const std::vector<int>& boundaries() const { return boundaries_; }

 private:
  std::vector<int> boundaries_;
};

/// c(x, u) = x'Qx + u'Ru.
struct CostSpec {
  Matrix Q;
  Matrix R;

  void validate() const;
  Matrix joint() const { return blkdiag(Q, R); }
  double stage(const Vector& x, const Vector& u) const;
};

Vector apply_policy(const Policy& policy, const Vector& x, Rng& excitation);

Vector step(const LinearSystem& sys, const Vector& x, const Vector& u, Rng& process);

/// `steps` transitions from x0. Excitation is drawn every step even when
/// Sigma = 0, so runs under different policies share noise realizations.
Trajectory rollout(const LinearSystem& sys, const Policy& policy, const Vector& x0, int steps,
                   NoiseStreams& rng);

struct CostBreakdown {
  std::vector<double> per_step;
  double total = 0.0;

  /// Step k (0-based) is attributed to epoch I(first_time + k) exactly once.
  std::vector<double> per_epoch(const EpochSchedule& schedule, int first_time = 1) const;
};

CostBreakdown empirical_cost(const Trajectory& traj, const CostSpec& cost);

}  // namespace rrl
