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

#include <cmath>
#include <cstdint>

#include "rrl/harness.hpp"
#include "rrl/linalg.hpp"
#include "rrl/random.hpp"
#include "rrl/simulation.hpp"

namespace rrl::testing {

inline LinearSystem benchmark_system() {
  Matrix A(3, 3);
  A << 1.1, 0.5, 0.0, 0.0, 0.9, 0.1, 0.0, -0.2, 0.8;
  Matrix B(3, 2);
  B << 0.0, 1.0, 0.1, 0.0, 0.0, 2.0;
  return LinearSystem{A, B, 0.5};
}

inline CostSpec benchmark_cost() {
  Matrix R = Matrix::Zero(2, 2);
  R(0, 0) = 0.1;
  R(1, 1) = 1.0;
  return CostSpec{Matrix::Identity(3, 3), R};
}

/// 500 open-loop rollouts of 6 steps with u ~ N(0, scale^2 I).
inline Dataset benchmark_initial_data(std::uint64_t seed, double input_scale = 1.0, int rollouts = 500) {
  InitialDataProtocol p;
  p.rollouts = rollouts;
  p.length = 6;
  p.input_covariance = input_scale * input_scale * Matrix::Identity(2, 2);
  return generate_initial_data(benchmark_system(), p, seed);
}

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) m.col(j) = rng.normal(rows);
  return m;
}

/// Random X with X' D X <= I: a Gaussian direction rescaled to a random
/// fraction of the region boundary (every tenth sample on the boundary).
inline Matrix sample_in_region(Rng& rng, const Matrix& D, Eigen::Index nx, int index) {
  const Eigen::Index nz = D.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(D);
  const Matrix Dinv_half = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                           es.eigenvectors().transpose();
  const Matrix G = random_matrix(rng, nz, nx);
  const double norm = std::sqrt(max_eigenvalue(G.transpose() * G));
  const double z = rng.normal();
  const double r = index % 10 == 0 ? 1.0 : 1.0 - std::exp(-z * z);
  return Dinv_half * G * (r / norm);
}

}  // namespace rrl::testing
