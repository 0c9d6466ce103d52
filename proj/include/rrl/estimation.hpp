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

#include <iosfwd>
#include <vector>

#include "rrl/linalg.hpp"
#include "rrl/simulation.hpp"

namespace rrl {

struct Transition {
  Vector x;
  Vector u;
  Vector x_next;
};

/// Transition triples (x_t, u_t, x_{t+1}), possibly pooled from several
/// trajectories.
class Dataset {
 public:
  Dataset(Eigen::Index nx, Eigen::Index nu) : nx_(nx), nu_(nu) {}

  void add(Transition tr);
  void append(const Trajectory& traj);
  void merge(const Dataset& other);

  Eigen::Index nx() const { return nx_; }
  Eigen::Index nu() const { return nu_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<Transition>& records() const { return records_; }

  /// sum_t z_t z_t' with z = [x; u].
  Matrix gram() const;
  /// sum_t x_{t+1} z_t'.
  Matrix cross() const;

 private:
  Eigen::Index nx_;
  Eigen::Index nu_;
  std::vector<Transition> records_;
};

/// Gaussian posterior over theta = vec([A B]) (column stacking).
struct Posterior {
  Vector mean;
  Matrix precision;
  Eigen::Index nx = 0;
  Eigen::Index nu = 0;

  Matrix theta_matrix() const;  ///< mean reshaped to [Ahat Bhat]
  Matrix Ahat() const { return theta_matrix().leftCols(nx); }
  Matrix Bhat() const { return theta_matrix().rightCols(nu); }
};

/// Nominal estimates plus the spectral region {(A,B) : X'DX <= I},
/// X = [Ahat - A, Bhat - B]'.
struct UncertainModel {
  Matrix Ahat;
  Matrix Bhat;
  Matrix D;
  double delta = 0.05;
  double c_delta = 1.0;

  Eigen::Index nx() const { return Ahat.rows(); }
  Eigen::Index nu() const { return Bhat.cols(); }
  Matrix theta() const;  ///< [Ahat Bhat]
  UncertainModel with_D(Matrix newD) const;
  void validate() const;
};

Posterior ols_posterior(const Dataset& data, double sigma_w);

/// c with P(chi2_dof <= c) = 1 - delta.
double chi2_quantile(int dof, double delta);

UncertainModel spectral_model(const Dataset& data, double sigma_w, double delta);

bool ellipsoid_contains(const Posterior& post, const Vector& theta, double c_delta);

bool spectral_contains(const UncertainModel& model, const Matrix& A, const Matrix& B);

/// lambda_min(D) = 1 / lambda_max(D^{-1}); zero when D is singular.
double information(const UncertainModel& model);

/// CSV with header `t,x0..,u0..`; one block of rows per chained trajectory,
/// blocks separated by a blank line. The last row of a block carries the
/// final state with empty input fields.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);

}  // namespace rrl
