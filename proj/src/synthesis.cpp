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
#include "rrl/synthesis.hpp"

#include <cmath>
#include <string>

#include "rrl/errors.hpp"

namespace rrl {

CovarianceBlock CovarianceBlock::from_xi(const Matrix& xi, Eigen::Index nx) {
  const Eigen::Index nu = xi.rows() - nx;
  if (xi.rows() != xi.cols() || nu < 0) throw DimensionMismatch("covariance block shape");
  const Matrix s = symmetrize(xi);
  return CovarianceBlock{s.topLeftCorner(nx, nx), s.topRightCorner(nx, nu), s.bottomRightCorner(nu, nu)};
}

CovarianceBlock CovarianceBlock::from_policy(const Matrix& W, const Policy& policy) {
  const Matrix Z = W * policy.K.transpose();
  return CovarianceBlock{W, Z, symmetrize(policy.K * Z + policy.Sigma)};
}

Matrix CovarianceBlock::xi() const {
  Matrix out(nx() + nu(), nx() + nu());
  out << W, Z, Z.transpose(), Y;
  return out;
}

void CovarianceBlock::validate() const {
  if (Z.rows() != W.rows() || Z.cols() != Y.rows()) throw DimensionMismatch("covariance block shape");
  const Matrix x = xi();
  if (min_eigenvalue(x) < -1e-8) throw InvalidCovariance("Xi is not positive semidefinite");
  if (min_eigenvalue(W) <= 1e-10) throw InvalidCovariance("W is not positive definite");
}

Policy recover_policy(const CovarianceBlock& xi, double sigma_clamp) {
  Eigen::LLT<Matrix> llt(xi.W);
  if (llt.info() != Eigen::Success || min_eigenvalue(xi.W) <= 1e-10) {
    throw NumericalTrouble("recovered W is not positive definite");
  }
  const Matrix WinvZ = llt.solve(xi.Z);
  Policy p;
  p.K = WinvZ.transpose();
  p.Sigma = clamp_psd(xi.Y - xi.Z.transpose() * WinvZ, sigma_clamp);
  return p;
}

Matrix build_S(double lambda, const CovarianceBlock& xi, const Matrix& Ahat, const Matrix& Bhat, const Matrix& D,
               double sigma_w) {
  const Eigen::Index nx = Ahat.rows();
  const Eigen::Index nz = nx + Bhat.cols();
  if (Ahat.cols() != nx || Bhat.rows() != nx || D.rows() != nz || D.cols() != nz || xi.W.rows() != nx ||
      xi.Y.rows() != Bhat.cols()) {
    throw DimensionMismatch("build_S: inconsistent dimensions");
  }
  Matrix theta(nx, nz);
  theta << Ahat, Bhat;
  const Matrix X = xi.xi();
  const Matrix I = Matrix::Identity(nx, nx);
  Matrix S = Matrix::Zero(3 * nx + Bhat.cols(), 3 * nx + Bhat.cols());
  S.block(0, 0, nx, nx) = I;
  S.block(0, nx, nx, nx) = sigma_w * I;
  S.block(nx, 0, nx, nx) = sigma_w * I;
  S.block(nx, nx, nx, nx) = xi.W - theta * X * theta.transpose() - lambda * I;
  S.block(nx, 2 * nx, nx, nz) = theta * X;
  S.block(2 * nx, nx, nz, nx) = X * theta.transpose();
  S.block(2 * nx, 2 * nx, nz, nz) = lambda * D - X;
  return S;
}

XiExpr XiExpr::variable(MatrixVar v, Eigen::Index nz) {
  XiExpr e;
  e.terms.push_back({v, Matrix::Identity(nz, nz), 1.0});
  e.constant = Matrix::Zero(nz, nz);
  return e;
}

AffineExpr robust_lmi(const XiExpr& xi, const Matrix& theta, double sigma_w, std::variant<ScalarVar, double> lambda,
                      const Matrix& D, const XiExpr* extra_D) {
  const Eigen::Index nx = theta.rows();
  const Eigen::Index nz = theta.cols();
  if (D.rows() != nz || D.cols() != nz || xi.constant.rows() != nz) throw DimensionMismatch("robust_lmi shapes");
  const Eigen::Index o2 = nx, o3 = 2 * nx;
  const Matrix I = Matrix::Identity(nx, nx);
  const Matrix P = Matrix::Identity(nx, nz);  // W = P Xi P'

  AffineExpr e(3 * nx + (nz - nx));
  e.add_constant(0, 0, I);
  e.add_constant(0, o2, sigma_w * I);
  for (const auto& t : xi.terms) {
    const Matrix PL = P * t.L;
    const Matrix TL = theta * t.L;
    e.add_term(t.var, o2, o2, PL, PL, t.coef);
    e.add_term(t.var, o2, o2, TL, TL, -t.coef);
    e.add_term(t.var, o2, o3, TL, t.L, t.coef);
    e.add_term(t.var, o3, o3, t.L, t.L, -t.coef);
  }
  const Matrix& C = xi.constant;
  if (C.cwiseAbs().maxCoeff() > 0.0) {
    e.add_constant(o2, o2, symmetrize(P * C * P.transpose() - theta * C * theta.transpose()));
    e.add_constant(o2, o3, theta * C);
    e.add_constant(o3, o3, -symmetrize(C));
  }
  if (const ScalarVar* lv = std::get_if<ScalarVar>(&lambda)) {
    e.add_term(*lv, o2, o2, -I);
    e.add_term(*lv, o3, o3, D);
  } else {
    const double l = std::get<double>(lambda);
    e.add_constant(o2, o2, -l * I);
    e.add_constant(o3, o3, symmetrize(l * D));
  }
  if (extra_D) {
    for (const auto& t : extra_D->terms) e.add_term(t.var, o3, o3, t.L, t.L, t.coef);
    if (extra_D->constant.size() > 0 && extra_D->constant.cwiseAbs().maxCoeff() > 0.0) {
      e.add_constant(o3, o3, symmetrize(extra_D->constant));
    }
  }
  return e;
}

namespace {

void check_inputs(const UncertainModel& model, const CostSpec& cost) {
  model.validate();
  cost.validate();
  if (cost.Q.rows() != model.nx() || cost.R.rows() != model.nu()) throw DimensionMismatch("cost/model dimensions");
}

}  // namespace

SynthesisResult synthesize_robust(const UncertainModel& model, const CostSpec& cost, double sigma_w,
                                  const SolverOptions& opts) {
  check_inputs(model, cost);
  const Eigen::Index nx = model.nx();
  const Eigen::Index nz = nx + model.nu();
  ConicProgram prog;
  const MatrixVar xi = prog.add_matrix_var("Xi", nz, true);
  const ScalarVar lambda = prog.add_scalar_var("lambda", true);
  prog.add_objective(xi, cost.joint());
  prog.add_lmi(robust_lmi(XiExpr::variable(xi, nz), model.theta(), sigma_w, lambda, model.D), "S");

  const ConicSolution sol = solve(prog, opts);
  if (sol.status == SolveStatus::Infeasible) {
    throw NoRobustlyStabilizingPolicy("robust synthesis infeasible: uncertainty region too large");
  }
  if (!sol.optimal()) throw NumericalTrouble("robust synthesis: " + sol.message);

  SynthesisResult r;
  r.xi = CovarianceBlock::from_xi(sol.value(xi), nx);
  r.lambda = std::max(0.0, sol.value(lambda));
  r.policy = recover_policy(r.xi);
  r.wc_cost = sol.objective_value;
  return r;
}

WorstCaseEvaluation evaluate_wc_cost(const Policy& policy, const UncertainModel& model, const CostSpec& cost,
                                     double sigma_w, const SolverOptions& opts) {
  check_inputs(model, cost);
  policy.validate();
  const Eigen::Index nx = model.nx();
  const Eigen::Index nu = model.nu();
  if (policy.nx() != nx || policy.nu() != nu) throw DimensionMismatch("policy/model dimensions");
  const Eigen::Index nz = nx + nu;

  Matrix Lk(nz, nx);
  Lk << Matrix::Identity(nx, nx), policy.K;
  const Matrix sigma = symmetrize(policy.Sigma);

  ConicProgram prog;
  const MatrixVar W = prog.add_matrix_var("W", nx, true);
  const ScalarVar lambda = prog.add_scalar_var("lambda", true);
  prog.add_objective(W, Lk.transpose() * cost.joint() * Lk);
  prog.add_objective_constant((cost.R * sigma).trace());

  XiExpr xi;
  xi.terms.push_back({W, Lk, 1.0});
  xi.constant = blkdiag(Matrix::Zero(nx, nx), sigma);
  prog.add_lmi(robust_lmi(xi, model.theta(), sigma_w, lambda, model.D), "S");

  const ConicSolution sol = solve(prog, opts);
  if (sol.status == SolveStatus::Infeasible) {
    throw PolicyNotRobustlyStabilizing("policy does not robustly stabilize the uncertainty region");
  }
  if (!sol.optimal()) throw NumericalTrouble("worst-case evaluation: " + sol.message);

  WorstCaseEvaluation ev;
  ev.wc_cost = sol.objective_value;
  ev.lambda = std::max(0.0, sol.value(lambda));
  ev.xi = CovarianceBlock::from_policy(symmetrize(sol.value(W)), Policy{policy.K, sigma});
  return ev;
}

Matrix lqr_riccati(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || Q.rows() != A.rows() || R.rows() != B.cols()) {
    throw DimensionMismatch("lqr_riccati: inconsistent dimensions");
  }
  Matrix P = Q;
  for (int it = 0; it < 100000; ++it) {
    const Matrix BtP = B.transpose() * P;
    const Matrix gain = (R + BtP * B).ldlt().solve(BtP * A);
    Matrix next = Q + A.transpose() * P * A - A.transpose() * P * B * gain;
    next = symmetrize(next);
    const double change = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (!P.allFinite()) break;
    if (change <= 1e-12 * (1.0 + P.cwiseAbs().maxCoeff())) {
      const Matrix BtPf = B.transpose() * P;
      return -(R + BtPf * B).ldlt().solve(BtPf * A);
    }
  }
  throw NotStabilizable("Riccati iteration did not converge");
}

double stationary_cost(const LinearSystem& sys, const Policy& policy, const CostSpec& cost) {
  const Matrix F = sys.A + sys.B * policy.K;
  const Matrix N = sys.B * policy.Sigma * sys.B.transpose() +
                   sys.sigma_w * sys.sigma_w * Matrix::Identity(sys.nx(), sys.nx());
  const Matrix W = discrete_lyapunov(F, N);
  return (cost.Q * W).trace() + (cost.R * (policy.K * W * policy.K.transpose() + policy.Sigma)).trace();
}

}  // namespace rrl
