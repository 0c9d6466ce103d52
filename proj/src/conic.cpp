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
#include "rrl/conic.hpp"

#include <cstdlib>
#include <iomanip>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "rrl/errors.hpp"

namespace rrl {

// ---------------------------------------------------------------------------
// AffineExpr
// ---------------------------------------------------------------------------

void AffineExpr::check_placement(Eigen::Index row, Eigen::Index col, Eigen::Index rows,
                                 Eigen::Index cols) const {
  if (row < 0 || col < 0 || row + rows > dim_ || col + cols > dim_) {
    throw DimensionMismatch("affine expression block exceeds matrix dimension");
  }
  if (row == col) {
    if (rows != cols) throw DimensionMismatch("diagonal block must be square");
  } else if (!(row + rows <= col || col + cols <= row)) {
    throw DimensionMismatch("off-diagonal block straddles the diagonal");
  }
}

AffineExpr& AffineExpr::add_constant(Eigen::Index row, Eigen::Index col, const Matrix& block) {
  check_placement(row, col, block.rows(), block.cols());
  if (row == col && (block - block.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + block.cwiseAbs().maxCoeff())) {
    throw Error("constant diagonal block must be symmetric");
  }
  constants_.push_back({row, col, block});
  return *this;
}

AffineExpr& AffineExpr::add_term(MatrixVar v, Eigen::Index row, Eigen::Index col, const Matrix& L,
                                 const Matrix& R, double coef) {
  if (v.id < 0) throw Error("invalid matrix variable");
  if (L.cols() != R.cols()) throw DimensionMismatch("L and R must have the variable's dimension as columns");
  check_placement(row, col, L.rows(), R.rows());
  matrix_terms_.push_back({v.id, row, col, L, R, coef});
  return *this;
}

AffineExpr& AffineExpr::add_term(ScalarVar s, Eigen::Index row, Eigen::Index col, const Matrix& block) {
  if (s.id < 0) throw Error("invalid scalar variable");
  check_placement(row, col, block.rows(), block.cols());
  scalar_terms_.push_back({s.id, row, col, block});
  return *this;
}

namespace {

void place(Matrix& target, Eigen::Index row, Eigen::Index col, const Matrix& m) {
  if (row == col) {
    target.block(row, col, m.rows(), m.cols()) += 0.5 * (m + m.transpose());
  } else {
    target.block(row, col, m.rows(), m.cols()) += m;
    target.block(col, row, m.cols(), m.rows()) += m.transpose();
  }
}

int tri_index(Eigen::Index p, Eigen::Index q) {
  // upper triangle, column-major: (p <= q)
  return static_cast<int>(q * (q + 1) / 2 + p);
}

SparseSym sparsify(const Matrix& m) {
  SparseSym s;
  std::vector<bool> seen(static_cast<std::size_t>(m.cols()), false);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      if (v != 0.0) {
        s.rows.push_back(static_cast<int>(r));
        s.cols.push_back(static_cast<int>(c));
        s.vals.push_back(v);
        if (!seen[static_cast<std::size_t>(c)]) {
          seen[static_cast<std::size_t>(c)] = true;
          s.nonzero_cols.push_back(static_cast<int>(c));
        }
      }
    }
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConicProgram
// ---------------------------------------------------------------------------

MatrixVar ConicProgram::add_matrix_var(std::string name, Eigen::Index dim, bool psd) {
  if (dim < 1) throw Error("matrix variable dimension must be positive");
  matrix_vars_.push_back({std::move(name), dim, psd, next_offset_, Matrix::Zero(dim, dim)});
  next_offset_ += static_cast<int>(dim * (dim + 1) / 2);
  return MatrixVar{static_cast<int>(matrix_vars_.size()) - 1};
}

ScalarVar ConicProgram::add_scalar_var(std::string name, bool nonnegative) {
  scalar_vars_.push_back({std::move(name), nonnegative, next_offset_, 0.0});
  next_offset_ += 1;
  return ScalarVar{static_cast<int>(scalar_vars_.size()) - 1};
}

void ConicProgram::add_objective(MatrixVar v, const Matrix& C) {
  auto& info = matrix_vars_.at(static_cast<std::size_t>(v.id));
  if (C.rows() != info.dim || C.cols() != info.dim) throw DimensionMismatch("objective coefficient shape");
  info.objective += C;
}

void ConicProgram::add_objective(ScalarVar s, double c) {
  scalar_vars_.at(static_cast<std::size_t>(s.id)).objective += c;
}

void ConicProgram::add_lmi(AffineExpr expr, std::string name) {
  for (const auto& t : expr.matrix_terms()) {
    if (t.var >= num_matrix_vars() || t.L.cols() != matrix_vars_[static_cast<std::size_t>(t.var)].dim) {
      throw DimensionMismatch("LMI references an undeclared or mis-sized matrix variable");
    }
  }
  for (const auto& t : expr.scalar_terms()) {
    if (t.var >= num_scalar_vars()) throw DimensionMismatch("LMI references an undeclared scalar variable");
  }
  if (name.empty()) name = "lmi" + std::to_string(lmis_.size());
  lmis_.push_back(std::move(expr));
  lmi_names_.push_back(std::move(name));
}

int ConicProgram::num_unknowns() const { return next_offset_; }

std::vector<Eigen::Index> ConicProgram::lmi_dims() const {
  std::vector<Eigen::Index> dims;
  for (const auto& e : lmis_) dims.push_back(e.dim());
  return dims;
}

Matrix ConicProgram::evaluate(const AffineExpr& expr, const Assignment& a) const {
  Matrix out = Matrix::Zero(expr.dim(), expr.dim());
  for (const auto& c : expr.constant_terms()) place(out, c.row, c.col, c.block);
  for (const auto& t : expr.matrix_terms()) {
    place(out, t.row, t.col, t.coef * t.L * a.matrices.at(static_cast<std::size_t>(t.var)) * t.R.transpose());
  }
  for (const auto& t : expr.scalar_terms()) {
    place(out, t.row, t.col, a.scalars.at(static_cast<std::size_t>(t.var)) * t.block);
  }
  return out;
}

double ConicProgram::objective(const Assignment& a) const {
  double v = objective_constant_;
  for (std::size_t i = 0; i < matrix_vars_.size(); ++i) v += (matrix_vars_[i].objective * a.matrices[i]).trace();
  for (std::size_t i = 0; i < scalar_vars_.size(); ++i) v += scalar_vars_[i].objective * a.scalars[i];
  return v;
}

double ConicProgram::min_constraint_eigenvalue(const Assignment& a) const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& e : lmis_) lo = std::min(lo, min_eigenvalue(evaluate(e, a)));
  for (std::size_t i = 0; i < matrix_vars_.size(); ++i) {
    if (matrix_vars_[i].psd) lo = std::min(lo, min_eigenvalue(a.matrices[i]));
  }
  for (std::size_t i = 0; i < scalar_vars_.size(); ++i) {
    if (scalar_vars_[i].nonnegative) lo = std::min(lo, a.scalars[i]);
  }
  return lo;
}

LoweredProgram ConicProgram::lower() const {
  LoweredProgram lp;
  lp.num_unknowns = next_offset_;
  lp.c = Vector::Zero(next_offset_);
  lp.c0 = objective_constant_;
  for (const auto& v : matrix_vars_) {
    for (Eigen::Index q = 0; q < v.dim; ++q) {
      for (Eigen::Index p = 0; p <= q; ++p) {
        const double coef = p == q ? v.objective(p, p) : v.objective(p, q) + v.objective(q, p);
        lp.c(v.offset + tri_index(p, q)) = coef;
      }
    }
  }
  for (const auto& s : scalar_vars_) lp.c(s.offset) = s.objective;

  for (std::size_t li = 0; li < lmis_.size(); ++li) {
    const AffineExpr& e = lmis_[li];
    LoweredProgram::Block blk;
    blk.name = lmi_names_[li];
    blk.dim = e.dim();
    blk.constant = Matrix::Zero(e.dim(), e.dim());
    for (const auto& c : e.constant_terms()) place(blk.constant, c.row, c.col, c.block);
    std::map<int, Matrix> acc;
    auto slot = [&](int idx) -> Matrix& {
      auto it = acc.find(idx);
      if (it == acc.end()) it = acc.emplace(idx, Matrix::Zero(e.dim(), e.dim())).first;
      return it->second;
    };
    for (const auto& t : e.matrix_terms()) {
      const auto& v = matrix_vars_[static_cast<std::size_t>(t.var)];
      for (Eigen::Index q = 0; q < v.dim; ++q) {
        for (Eigen::Index p = 0; p <= q; ++p) {
          Matrix m = t.L.col(p) * t.R.col(q).transpose();
          if (p != q) m += t.L.col(q) * t.R.col(p).transpose();
          m *= t.coef;
          if (m.cwiseAbs().maxCoeff() == 0.0) continue;
          place(slot(v.offset + tri_index(p, q)), t.row, t.col, m);
        }
      }
    }
    for (const auto& t : e.scalar_terms()) {
      place(slot(scalar_vars_[static_cast<std::size_t>(t.var)].offset), t.row, t.col, t.block);
    }
    for (auto& [idx, m] : acc) {
      SparseSym s = sparsify(m);
      if (!s.vals.empty()) blk.coeffs.emplace_back(idx, std::move(s));
    }
    lp.blocks.push_back(std::move(blk));
  }
  for (const auto& v : matrix_vars_) {
    if (!v.psd) continue;
    LoweredProgram::Block blk;
    blk.name = v.name + " >= 0";
    blk.dim = v.dim;
    blk.constant = Matrix::Zero(v.dim, v.dim);
    for (Eigen::Index q = 0; q < v.dim; ++q) {
      for (Eigen::Index p = 0; p <= q; ++p) {
        Matrix m = Matrix::Zero(v.dim, v.dim);
        m(p, q) = 1.0;
        m(q, p) = 1.0;
        blk.coeffs.emplace_back(v.offset + tri_index(p, q), sparsify(m));
      }
    }
    lp.blocks.push_back(std::move(blk));
  }
  for (const auto& s : scalar_vars_) {
    if (!s.nonnegative) continue;
    LoweredProgram::Block blk;
    blk.name = s.name + " >= 0";
    blk.dim = 1;
    blk.constant = Matrix::Zero(1, 1);
    blk.coeffs.emplace_back(s.offset, sparsify(Matrix::Ones(1, 1)));
    lp.blocks.push_back(std::move(blk));
  }
  return lp;
}

Assignment ConicProgram::unpack(const Vector& y) const {
  if (y.size() != next_offset_) throw DimensionMismatch("unpack: wrong number of unknowns");
  Assignment a;
  for (const auto& v : matrix_vars_) {
    Matrix m(v.dim, v.dim);
    for (Eigen::Index q = 0; q < v.dim; ++q) {
      for (Eigen::Index p = 0; p <= q; ++p) {
        m(p, q) = m(q, p) = y(v.offset + tri_index(p, q));
      }
    }
    a.matrices.push_back(std::move(m));
  }
  for (const auto& s : scalar_vars_) a.scalars.push_back(y(s.offset));
  return a;
}

// ---------------------------------------------------------------------------
// Solve + verification
// ---------------------------------------------------------------------------

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::NumericalTrouble:
      return "numerical_trouble";
  }
  return "unknown";
}

SolverOptions SolverOptions::from_env() {
  SolverOptions o;
  if (const char* env = std::getenv("RRL_SOLVER_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) {
      o.feas_tol = v;
      o.opt_tol = v;
    }
  }
  return o;
}

ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts, const ConicBackend* backend) {
  static const InteriorPointBackend default_backend;
  const ConicBackend& b = backend ? *backend : default_backend;
  ConicSolution sol = b.solve(prog, opts);
  if (sol.status != SolveStatus::Optimal) return sol;

  sol.min_eigenvalue = prog.min_constraint_eigenvalue(sol.values);
  if (sol.min_eigenvalue < -opts.feas_tol) {
    sol.status = SolveStatus::NumericalTrouble;
    sol.message = "re-check failed: min constraint eigenvalue " + std::to_string(sol.min_eigenvalue);
    return sol;
  }
  sol.objective_value = prog.objective(sol.values);
  sol.assignments.clear();
  for (int i = 0; i < prog.num_matrix_vars(); ++i) {
    sol.assignments[prog.name(MatrixVar{i})] = sol.values.matrices[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < prog.num_scalar_vars(); ++i) {
    sol.assignments[prog.name(ScalarVar{i})] = Matrix::Constant(1, 1, sol.values.scalars[static_cast<std::size_t>(i)]);
  }
  return sol;
}

void write_sdpa(std::ostream& out, const ConicProgram& prog) {
  const LoweredProgram lp = prog.lower();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << "\"lowered from ConicProgram; min c'y s.t. sum F_k y_k - F_0 >= 0\"\n";
  out << lp.num_unknowns << "\n" << lp.blocks.size() << "\n";
  for (std::size_t b = 0; b < lp.blocks.size(); ++b) out << (b ? " " : "") << lp.blocks[b].dim;
  out << "\n";
  for (int k = 0; k < lp.num_unknowns; ++k) out << (k ? " " : "") << lp.c(k);
  out << "\n";
  for (std::size_t b = 0; b < lp.blocks.size(); ++b) {
    const auto& blk = lp.blocks[b];
    for (Eigen::Index j = 0; j < blk.dim; ++j)
      for (Eigen::Index i = 0; i <= j; ++i)
        if (blk.constant(i, j) != 0.0) {
          out << 0 << ' ' << b + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << -blk.constant(i, j) << "\n";
        }
    for (const auto& [k, s] : blk.coeffs) {
      for (std::size_t e = 0; e < s.vals.size(); ++e) {
        if (s.rows[e] <= s.cols[e]) {
          out << k + 1 << ' ' << b + 1 << ' ' << s.rows[e] + 1 << ' ' << s.cols[e] + 1 << ' ' << s.vals[e] << "\n";
        }
      }
    }
  }
  out.precision(prec);
}

}  // namespace rrl
