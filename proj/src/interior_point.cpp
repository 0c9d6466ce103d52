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
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>

#include "rrl/conic.hpp"

namespace rrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Block {
  Eigen::Index n = 0;
  Matrix F0;
  std::vector<int> vars;
  std::vector<SparseSym> coeffs;
};

double inner(const SparseSym& F, const Matrix& X) {
  double s = 0.0;
  for (std::size_t e = 0; e < F.vals.size(); ++e) s += F.vals[e] * X(F.rows[e], F.cols[e]);
  return s;
}

// trace(F R) for a general square R.
double trace_product(const SparseSym& F, const Matrix& R) {
  double s = 0.0;
  for (std::size_t e = 0; e < F.vals.size(); ++e) s += F.vals[e] * R(F.cols[e], F.rows[e]);
  return s;
}

void axpy(double a, const SparseSym& F, Matrix& out) {
  for (std::size_t e = 0; e < F.vals.size(); ++e) out(F.rows[e], F.cols[e]) += a * F.vals[e];
}

// Largest alpha with X + alpha dX >= 0 (infinite when dX >= 0).
double max_step(const Matrix& X, const Matrix& dX) {
  Eigen::LLT<Matrix> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix half = llt.matrixL().solve(dX);
  const Matrix M = llt.matrixL().solve(half.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0.0 ? kInf : -1.0 / lmin;
}

double frob_dot(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

}  // namespace

ConicSolution InteriorPointBackend::solve(const ConicProgram& prog, const SolverOptions& opts) const {
  const LoweredProgram lp = prog.lower();
  const int m = lp.num_unknowns;
  ConicSolution sol;

  // Column scaling: every unknown's largest coefficient becomes 1.
  Vector scale = Vector::Zero(m);
  for (const auto& blk : lp.blocks)
    for (const auto& [k, s] : blk.coeffs)
      for (double v : s.vals) scale(k) = std::max(scale(k), std::abs(v));
  for (int k = 0; k < m; ++k) {
    if (scale(k) == 0.0) {
      if (lp.c(k) != 0.0) {
        sol.status = SolveStatus::NumericalTrouble;
        sol.message = "unknown with nonzero cost appears in no constraint (unbounded)";
        return sol;
      }
      scale(k) = 1.0;
    }
  }
  Vector c = lp.c.cwiseQuotient(scale);
  const double obj_scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  c /= obj_scale;

  std::vector<Block> blocks;
  Eigen::Index ntot = 0;
  double normF0 = 0.0;
  for (const auto& lb : lp.blocks) {
    Block b;
    b.n = lb.dim;
    b.F0 = lb.constant;
    for (const auto& [k, s] : lb.coeffs) {
      SparseSym scaled = s;
      for (double& v : scaled.vals) v /= scale(k);
      b.vars.push_back(k);
      b.coeffs.push_back(std::move(scaled));
    }
    ntot += b.n;
    normF0 += b.F0.squaredNorm();
    blocks.push_back(std::move(b));
  }
  normF0 = std::sqrt(normF0);
  const double normc = c.norm();

  // Infeasible starting point (scaled identities).
  std::vector<Matrix> X(blocks.size()), S(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    const double n = static_cast<double>(blk.n);
    double xi = std::max(10.0, std::sqrt(n));
    double eta = std::max({10.0, std::sqrt(n), blk.F0.norm()});
    for (std::size_t a = 0; a < blk.vars.size(); ++a) {
      double fn = 0.0;
      for (double v : blk.coeffs[a].vals) fn += v * v;
      fn = std::sqrt(fn);
      xi = std::max(xi, n * (1.0 + std::abs(c(blk.vars[a]))) / (1.0 + fn));
      eta = std::max(eta, fn);
    }
    X[b] = xi * Matrix::Identity(blk.n, blk.n);
    S[b] = eta * Matrix::Identity(blk.n, blk.n);
  }
  Vector y = Vector::Zero(m);

  const double tol_f = 0.1 * opts.feas_tol;
  std::vector<Matrix> Rd(blocks.size()), Sinv(blocks.size()), dX(blocks.size()), dS(blocks.size()),
      dXa(blocks.size()), dSa(blocks.size());
  std::vector<std::vector<Matrix>> G(blocks.size());
  bool converged = false;
  int stall = 0;
  double relgap = kInf, pinf = kInf, dinf = kInf;

  auto directions = [&](const Eigen::LDLT<Matrix>& fac, double target_mu, bool corrector) {
    Vector rhs = -c;
    std::vector<Matrix> Rterm(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      Matrix inner_term = -X[b] * Rd[b];
      if (target_mu != 0.0) inner_term.diagonal().array() += target_mu;
      if (corrector) inner_term -= dXa[b] * dSa[b];
      Rterm[b] = inner_term * Sinv[b];
      for (std::size_t a = 0; a < blocks[b].vars.size(); ++a) {
        rhs(blocks[b].vars[a]) += trace_product(blocks[b].coeffs[a], Rterm[b]);
      }
    }
    Vector dy = fac.solve(rhs);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      dS[b] = Rd[b];
      for (std::size_t a = 0; a < blocks[b].vars.size(); ++a) axpy(dy(blocks[b].vars[a]), blocks[b].coeffs[a], dS[b]);
      Matrix d = Rterm[b] + X[b] * Rd[b] * Sinv[b] - X[b] - X[b] * dS[b] * Sinv[b];
      dX[b] = 0.5 * (d + d.transpose());
    }
    return dy;
  };

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    // Residuals.
    Vector Ax = Vector::Zero(m);
    double xs = 0.0, dobj = 0.0, rd2 = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto& blk = blocks[b];
      Rd[b] = blk.F0 - S[b];
      for (std::size_t a = 0; a < blk.vars.size(); ++a) {
        axpy(y(blk.vars[a]), blk.coeffs[a], Rd[b]);
        Ax(blk.vars[a]) += inner(blk.coeffs[a], X[b]);
      }
      xs += frob_dot(X[b], S[b]);
      dobj -= frob_dot(blk.F0, X[b]);
      rd2 += Rd[b].squaredNorm();
    }
    const double pobj = c.dot(y);
    const double mu = xs / static_cast<double>(ntot);
    pinf = (c - Ax).norm() / (1.0 + normc);
    dinf = std::sqrt(rd2) / (1.0 + normF0);
    relgap = xs / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (std::getenv("RRL_SOLVER_TRACE")) {
      std::fprintf(stderr, "it %3d pobj % .10e dobj % .10e pinf %.2e dinf %.2e gap %.2e mu %.2e\n", it,
                   pobj * obj_scale, dobj * obj_scale, pinf, dinf, relgap, mu);
    }
    if (pinf <= tol_f && dinf <= tol_f && relgap <= opts.opt_tol) {
      converged = true;
      break;
    }
    // X/dobj is an approximate certificate that the LMI has no solution.
    if (dobj > 0.0 && Ax.norm() <= 1e-8 * dobj) {
      sol.status = SolveStatus::Infeasible;
      sol.message = "LMI infeasibility certificate found";
      sol.iterations = it;
      return sol;
    }
    if (dinf <= tol_f && pobj < -1e10) {
      sol.status = SolveStatus::NumericalTrouble;
      sol.message = "objective unbounded below";
      sol.iterations = it;
      return sol;
    }

    // Schur complement M_kj = tr(F_k X F_j S^{-1}).
    Matrix M = Matrix::Zero(m, m);
    bool factor_ok = true;
    for (std::size_t b = 0; b < blocks.size() && factor_ok; ++b) {
      const auto& blk = blocks[b];
      Eigen::LLT<Matrix> llt(S[b]);
      if (llt.info() != Eigen::Success) {
        factor_ok = false;
        break;
      }
      Sinv[b] = llt.solve(Matrix::Identity(blk.n, blk.n));
      auto& Gb = G[b];
      Gb.resize(blk.vars.size());
      Matrix T(blk.n, blk.n);
      for (std::size_t a = 0; a < blk.vars.size(); ++a) {
        const SparseSym& F = blk.coeffs[a];
        T.setZero();
        for (std::size_t e = 0; e < F.vals.size(); ++e) T.col(F.cols[e]) += F.vals[e] * Sinv[b].col(F.rows[e]);
        Gb[a].setZero(blk.n, blk.n);
        for (int col : F.nonzero_cols) Gb[a].noalias() += T.col(col) * X[b].row(col);
      }
      for (std::size_t a = 0; a < blk.vars.size(); ++a) {
        const int k = blk.vars[a];
        for (std::size_t a2 = a; a2 < blk.vars.size(); ++a2) {
          const double v = trace_product(blk.coeffs[a2], Gb[a]);
          const int j = blk.vars[a2];
          M(k, j) += v;
          if (j != k) M(j, k) += v;
        }
      }
    }
    if (!factor_ok) break;
    M = 0.5 * (M + M.transpose());
    Eigen::LDLT<Matrix> fac(M);
    if (fac.info() != Eigen::Success) break;

    // Predictor.
    Vector dy = directions(fac, 0.0, false);
    double ap = 1.0, ad = 1.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      ap = std::min(ap, max_step(X[b], dX[b]));
      ad = std::min(ad, max_step(S[b], dS[b]));
    }
    double xs_aff = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      xs_aff += frob_dot(X[b] + ap * dX[b], S[b] + ad * dS[b]);
      dXa[b] = dX[b];
      dSa[b] = dS[b];
    }
    const double mu_aff = xs_aff / static_cast<double>(ntot);
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
    sigma = std::min(1.0, sigma);
    const double gamma = 0.9 + 0.09 * std::min(ap, ad);

    // Corrector.
    dy = directions(fac, sigma * mu, true);
    double step_p = kInf, step_d = kInf;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      step_p = std::min(step_p, max_step(X[b], dX[b]));
      step_d = std::min(step_d, max_step(S[b], dS[b]));
    }
    ap = std::min(1.0, gamma * step_p);
    ad = std::min(1.0, gamma * step_d);
    if (ap < 1e-10 && ad < 1e-10) {
      if (++stall > 3) break;
    } else {
      stall = 0;
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      X[b] += ap * dX[b];
      S[b] += ad * dS[b];
      X[b] = 0.5 * (X[b] + X[b].transpose());
      S[b] = 0.5 * (S[b] + S[b].transpose());
    }
    y += ad * dy;
  }

  sol.iterations = it;
  sol.relative_gap = relgap;
  const Vector y_orig = y.cwiseQuotient(scale);
  sol.values = prog.unpack(y_orig);
  sol.objective_value = prog.objective(sol.values);
  if (converged) {
    sol.status = SolveStatus::Optimal;
  } else {
    sol.status = SolveStatus::NumericalTrouble;
    sol.message = "no convergence after " + std::to_string(it) + " iterations (pinf " + std::to_string(pinf) +
                  ", dinf " + std::to_string(dinf) + ", gap " + std::to_string(relgap) + ")";
  }
  return sol;
}

}  // namespace rrl
