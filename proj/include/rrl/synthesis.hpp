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

#include <variant>
#include <vector>

#include "rrl/conic.hpp"
#include "rrl/estimation.hpp"
#include "rrl/simulation.hpp"

namespace rrl {

/// Joint stationary state/input covariance Xi = [[W, Z], [Z', Y]] with
/// Z = W K' and Y = K W K' + Sigma.
struct CovarianceBlock {
  Matrix W;
  Matrix Z;
  Matrix Y;

  static CovarianceBlock from_xi(const Matrix& xi, Eigen::Index nx);
  static CovarianceBlock from_policy(const Matrix& W, const Policy& policy);
  Matrix xi() const;
  Eigen::Index nx() const { return W.rows(); }
  Eigen::Index nu() const { return Y.rows(); }
  void validate() const;
};

/// K = Z' W^{-1}, Sigma = Y - Z' W^{-1} Z (clamped to PSD at -sigma_clamp).
Policy recover_policy(const CovarianceBlock& xi, double sigma_clamp = 1e-8);

struct SynthesisResult {
  Policy policy;
  CovarianceBlock xi;
  double lambda = 0.0;
  double wc_cost = 0.0;
};

struct WorstCaseEvaluation {
  double wc_cost = 0.0;
  double lambda = 0.0;
  CovarianceBlock xi;  ///< structured block of the fixed policy at the optimal W
};

/// The robust Lyapunov LMI of size 3 n_x + n_u:
///   [[I,     s I,              0         ],
///    [s I,   W - T Xi T' - l I, T Xi      ],
///    [0,     Xi T',            l D - Xi  ]]   with T = [Ahat Bhat], s = sigma_w.
Matrix build_S(double lambda, const CovarianceBlock& xi, const Matrix& Ahat, const Matrix& Bhat, const Matrix& D,
               double sigma_w);

/// Xi written as an affine function of program variables:
/// Xi = constant + sum_i coef_i L_i V_i L_i'.
struct XiExpr {
  struct Term {
    MatrixVar var;
    Matrix L;
    double coef = 1.0;
  };
  std::vector<Term> terms;
  Matrix constant;

  static XiExpr variable(MatrixVar v, Eigen::Index nz);
};

/// Builds S as an AffineExpr. `lambda` is either a program variable or a
/// fixed value; `extra_D` adds further affine terms to the lower-right
/// block (used for the propagated uncertainty in receding-horizon plans).
AffineExpr robust_lmi(const XiExpr& xi, const Matrix& theta, double sigma_w, std::variant<ScalarVar, double> lambda,
                      const Matrix& D, const XiExpr* extra_D = nullptr);

/// min trace(blkdiag(Q,R) Xi) s.t. S(lambda, Xi) >= 0, lambda >= 0, Xi >= 0.
SynthesisResult synthesize_robust(const UncertainModel& model, const CostSpec& cost, double sigma_w,
                                  const SolverOptions& opts = SolverOptions::from_env());

/// Worst-case stationary cost bound of a fixed policy over the model's
/// region, optimized over W and the multiplier.
WorstCaseEvaluation evaluate_wc_cost(const Policy& policy, const UncertainModel& model, const CostSpec& cost,
                                     double sigma_w, const SolverOptions& opts = SolverOptions::from_env());

/// Infinite-horizon discrete LQR gain by Riccati fixed-point iteration,
/// in the u = K x convention.
Matrix lqr_riccati(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

/// Stationary cost trace(Q W) + trace(R (K W K' + Sigma)) of a policy on a
/// known system.
double stationary_cost(const LinearSystem& sys, const Policy& policy, const CostSpec& cost);

}  // namespace rrl
