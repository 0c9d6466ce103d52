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
#include <map>
#include <string>
#include <vector>

#include "rrl/linalg.hpp"

namespace rrl {

struct MatrixVar {
  int id = -1;
};

struct ScalarVar {
  int id = -1;
};

/// Symmetric matrix-valued affine function of the program variables,
/// assembled block by block. Off-diagonal placements are mirrored; terms
/// placed on the diagonal are symmetrized.
class AffineExpr {
 public:
  struct MatrixTerm {
    int var;
    Eigen::Index row, col;
    Matrix L, R;  ///< contributes coef * L V R'
    double coef;
  };
  struct ScalarTerm {
    int var;
    Eigen::Index row, col;
    Matrix block;  ///< contributes s * block
  };
  struct ConstantTerm {
    Eigen::Index row, col;
    Matrix block;
  };

  explicit AffineExpr(Eigen::Index dim) : dim_(dim) {}

  AffineExpr& add_constant(Eigen::Index row, Eigen::Index col, const Matrix& block);
  AffineExpr& add_term(MatrixVar v, Eigen::Index row, Eigen::Index col, const Matrix& L, const Matrix& R,
                       double coef = 1.0);
  AffineExpr& add_term(ScalarVar s, Eigen::Index row, Eigen::Index col, const Matrix& block);

  Eigen::Index dim() const { return dim_; }
  const std::vector<MatrixTerm>& matrix_terms() const { return matrix_terms_; }
  const std::vector<ScalarTerm>& scalar_terms() const { return scalar_terms_; }
  const std::vector<ConstantTerm>& constant_terms() const { return constants_; }

 private:
  void check_placement(Eigen::Index row, Eigen::Index col, Eigen::Index rows, Eigen::Index cols) const;

  Eigen::Index dim_;
  std::vector<MatrixTerm> matrix_terms_;
  std::vector<ScalarTerm> scalar_terms_;
  std::vector<ConstantTerm> constants_;
};

/// Values for every variable of a program, indexed by variable id.
struct Assignment {
  std::vector<Matrix> matrices;
  std::vector<double> scalars;
};

/// Sparse symmetric coefficient stored with both triangles.
struct SparseSym {
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> vals;
  std::vector<int> nonzero_cols;  ///< distinct column indices
};

/// Block LMI standard form: minimize c'y + c0 s.t. F0_b + sum_k y_k F_bk >= 0
/// for every block b. Matrix variables are expanded over their upper
/// triangle, y = V(p,q) = V(q,p).
struct LoweredProgram {
  struct Block {
    std::string name;
    Eigen::Index dim = 0;
    Matrix constant;
    std::vector<std::pair<int, SparseSym>> coeffs;
  };
  int num_unknowns = 0;
  Vector c;
  double c0 = 0.0;
  std::vector<Block> blocks;
};

/// Linear objective over PSD matrix variables and (nonnegative) scalars
/// subject to LMI constraints.
class ConicProgram {
 public:
  MatrixVar add_matrix_var(std::string name, Eigen::Index dim, bool psd);
  ScalarVar add_scalar_var(std::string name, bool nonnegative);

  /// objective += trace(C V)
  void add_objective(MatrixVar v, const Matrix& C);
  void add_objective(ScalarVar s, double c);
  void add_objective_constant(double c) { objective_constant_ += c; }

  void add_lmi(AffineExpr expr, std::string name = {});

  int num_matrix_vars() const { return static_cast<int>(matrix_vars_.size()); }
  int num_scalar_vars() const { return static_cast<int>(scalar_vars_.size()); }
  const std::string& name(MatrixVar v) const { return matrix_vars_.at(static_cast<std::size_t>(v.id)).name; }
  const std::string& name(ScalarVar s) const { return scalar_vars_.at(static_cast<std::size_t>(s.id)).name; }
  Eigen::Index dim(MatrixVar v) const { return matrix_vars_.at(static_cast<std::size_t>(v.id)).dim; }
  const std::vector<AffineExpr>& lmis() const { return lmis_; }
  const std::vector<std::string>& lmi_names() const { return lmi_names_; }

  /// Number of scalar unknowns after expanding symmetric matrices.
  int num_unknowns() const;
  /// Sizes of the declared LMIs (not counting implicit PSD/nonnegativity blocks).
  std::vector<Eigen::Index> lmi_dims() const;

  Matrix evaluate(const AffineExpr& expr, const Assignment& a) const;
  double objective(const Assignment& a) const;

  /// Smallest eigenvalue over every declared LMI, PSD variable and
  /// nonnegative scalar at `a`.
  double min_constraint_eigenvalue(const Assignment& a) const;

  LoweredProgram lower() const;
  Assignment unpack(const Vector& y) const;

 private:
  struct MatrixVarInfo {
    std::string name;
    Eigen::Index dim;
    bool psd;
    int offset;
    Matrix objective;
  };
  struct ScalarVarInfo {
    std::string name;
    bool nonnegative;
    int offset;
    double objective;
  };

  std::vector<MatrixVarInfo> matrix_vars_;
  std::vector<ScalarVarInfo> scalar_vars_;
  std::vector<AffineExpr> lmis_;
  std::vector<std::string> lmi_names_;
  double objective_constant_ = 0.0;
  int next_offset_ = 0;
};

enum class SolveStatus { Optimal, Infeasible, NumericalTrouble };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  int max_iterations = 150;

  /// Defaults, overridden by the RRL_SOLVER_TOL environment variable when set.
  static SolverOptions from_env();
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalTrouble;
  double objective_value = 0.0;
  Assignment values;
  std::map<std::string, Matrix> assignments;  ///< by variable name (scalars as 1x1)
  int iterations = 0;
  double relative_gap = 0.0;
  double min_eigenvalue = 0.0;  ///< from the independent re-check
  std::string message;

  bool optimal() const { return status == SolveStatus::Optimal; }
  const Matrix& value(MatrixVar v) const { return values.matrices.at(static_cast<std::size_t>(v.id)); }
  double value(ScalarVar s) const { return values.scalars.at(static_cast<std::size_t>(s.id)); }
};

/// Adapter contract for a conic backend. Backends report their own status;
/// `solve` below re-verifies every constraint independently.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  virtual ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) const = 0;
};

/// Primal-dual path-following method (HKM direction, Mehrotra
/// predictor-corrector) on the lowered block-LMI form.
class InteriorPointBackend final : public ConicBackend {
 public:
  std::string name() const override { return "interior-point"; }
  ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) const override;
};

/// Solves with `backend` (interior point by default) and re-checks the
/// returned assignment; an Optimal status that fails the eigenvalue check
/// is downgraded to NumericalTrouble.
ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts = SolverOptions::from_env(),
                    const ConicBackend* backend = nullptr);

/// SDPA sparse format dump for cross-checking against external solvers.
void write_sdpa(std::ostream& out, const ConicProgram& prog);

}  // namespace rrl
