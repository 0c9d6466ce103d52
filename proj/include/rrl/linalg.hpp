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

#include <Eigen/Dense>

namespace rrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerance below zero that eigenvalues of a "PSD" matrix may reach before
/// they are treated as a modeling error instead of round-off.
inline constexpr double kPsdClampTol = 1e-9;

Matrix symmetrize(const Matrix& m);

double min_eigenvalue(const Matrix& sym);
double max_eigenvalue(const Matrix& sym);

/// Symmetric PSD square root via eigendecomposition. Eigenvalues in
/// [-tol, 0) are clamped to zero; anything more negative throws
/// InvalidCovariance.
Matrix psd_sqrt(const Matrix& sym, double tol = kPsdClampTol);

/// Projects onto the PSD cone after checking min eigenvalue >= -tol.
Matrix clamp_psd(const Matrix& sym, double tol);

bool is_psd(const Matrix& sym, double tol = kPsdClampTol);

Matrix blkdiag(const Matrix& a, const Matrix& b);

/// Stationary covariance of x+ = F x + noise with covariance N, i.e. the
/// solution of W = F W F' + N. Requires spectral radius of F below one.
Matrix discrete_lyapunov(const Matrix& F, const Matrix& N);

double spectral_radius(const Matrix& m);

}  // namespace rrl
