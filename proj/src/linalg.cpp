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
#include "rrl/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "rrl/errors.hpp"

namespace rrl {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

Matrix psd_sqrt(const Matrix& sym, double tol) {
  if (sym.rows() != sym.cols()) throw DimensionMismatch("psd_sqrt: matrix is not square");
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym));
  Vector ev = es.eigenvalues();
  if (ev(0) < -tol) {
    throw InvalidCovariance("covariance has eigenvalue " + std::to_string(ev(0)) +
                            " below -" + std::to_string(tol));
  }
  Vector root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix clamp_psd(const Matrix& sym, double tol) {
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym));
  Vector ev = es.eigenvalues();
  if (ev(0) < -tol) {
    throw InvalidCovariance("matrix has eigenvalue " + std::to_string(ev(0)) +
                            " below -" + std::to_string(tol));
  }
  if (ev(0) >= 0.0) return symmetrize(sym);
  return es.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
}

bool is_psd(const Matrix& sym, double tol) { return min_eigenvalue(sym) >= -tol; }

Matrix blkdiag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Matrix discrete_lyapunov(const Matrix& F, const Matrix& N) {
  const Eigen::Index n = F.rows();
  if (F.cols() != n || N.rows() != n || N.cols() != n) {
    throw DimensionMismatch("discrete_lyapunov: inconsistent sizes");
  }
  if (spectral_radius(F) >= 1.0) throw NotStabilizable("discrete_lyapunov: F is not Schur stable");
  // vec(W) = (I - F (x) F)^{-1} vec(N)
  Matrix kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = F(i, j) * F;
  Matrix lhs = Matrix::Identity(n * n, n * n) - kron;
  Vector vecN = Eigen::Map<const Vector>(N.data(), n * n);
  Vector vecW = lhs.partialPivLu().solve(vecN);
  return symmetrize(Eigen::Map<Matrix>(vecW.data(), n, n));
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace rrl
