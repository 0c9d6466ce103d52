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
#include "rrl/estimation.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <iomanip>
#include <optional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "rrl/errors.hpp"

namespace rrl {

void Dataset::add(Transition tr) {
  if (tr.x.size() != nx_ || tr.x_next.size() != nx_ || tr.u.size() != nu_) {
    throw DimensionMismatch("dataset record has wrong dimensions");
  }
  records_.push_back(std::move(tr));
}

void Dataset::append(const Trajectory& traj) {
  const std::size_t n = traj.transitions();
  for (std::size_t t = 0; t < n; ++t) add({traj.states[t], traj.inputs[t], traj.states[t + 1]});
}

void Dataset::merge(const Dataset& other) {
  if (other.nx_ != nx_ || other.nu_ != nu_) throw DimensionMismatch("cannot merge datasets of different shape");
  records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

Matrix Dataset::gram() const {
  const Eigen::Index nz = nx_ + nu_;
  Matrix g = Matrix::Zero(nz, nz);
  Vector z(nz);
  for (const auto& r : records_) {
    z << r.x, r.u;
    g.selfadjointView<Eigen::Lower>().rankUpdate(z);
  }
  return g.selfadjointView<Eigen::Lower>();
}

Matrix Dataset::cross() const {
  Matrix c = Matrix::Zero(nx_, nx_ + nu_);
  Vector z(nx_ + nu_);
  for (const auto& r : records_) {
    z << r.x, r.u;
    c.noalias() += r.x_next * z.transpose();
  }
  return c;
}

Matrix Posterior::theta_matrix() const {
  return Eigen::Map<const Matrix>(mean.data(), nx, nx + nu);
}

Matrix UncertainModel::theta() const {
  Matrix t(nx(), nx() + nu());
  t << Ahat, Bhat;
  return t;
}

UncertainModel UncertainModel::with_D(Matrix newD) const {
  UncertainModel m = *this;
  m.D = std::move(newD);
  return m;
}

void UncertainModel::validate() const {
  if (Ahat.rows() != Ahat.cols() || Bhat.rows() != Ahat.rows()) {
    throw DimensionMismatch("model: Ahat/Bhat shapes");
  }
  const Eigen::Index nz = nx() + nu();
  if (D.rows() != nz || D.cols() != nz) throw DimensionMismatch("model: D must be (n_x+n_u) square");
  if (!is_psd(D, kPsdClampTol * (1.0 + D.cwiseAbs().maxCoeff()))) throw InvalidCovariance("model: D is not PSD");
  if (!(c_delta > 0.0)) throw Error("model: c_delta must be positive");
}

namespace {

Matrix checked_gram(const Dataset& data) {
  if (data.size() == 0) throw RankDeficient("empty dataset");
  Matrix g = data.gram();
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
  if (!(hi > 0.0) || lo <= 1e-10 * hi) {
    throw RankDeficient("regressor Gram matrix is numerically singular (min eig " + std::to_string(lo) +
                        ", max eig " + std::to_string(hi) + ")");
  }
  return g;
}

}  // namespace

Posterior ols_posterior(const Dataset& data, double sigma_w) {
  if (!(sigma_w > 0.0)) throw Error("ols_posterior: sigma_w must be positive");
  const Matrix g = checked_gram(data);
  const Eigen::Index nx = data.nx();
  const Eigen::Index nz = nx + data.nu();
  // Theta g = cross  =>  g Theta' = cross'
  Matrix theta = g.ldlt().solve(data.cross().transpose()).transpose();
  Posterior post;
  post.nx = nx;
  post.nu = data.nu();
  post.mean = Eigen::Map<const Vector>(theta.data(), theta.size());
  post.precision = Matrix::Zero(nz * nx, nz * nx);
  const double scale = 1.0 / (sigma_w * sigma_w);
  for (Eigen::Index i = 0; i < nz; ++i)
    for (Eigen::Index j = 0; j < nz; ++j)
      post.precision.block(i * nx, j * nx, nx, nx) = Matrix::Identity(nx, nx) * (scale * g(i, j));
  return post;
}

double chi2_quantile(int dof, double delta) {
  if (dof < 1) throw Error("chi2_quantile: dof must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("chi2_quantile: delta must lie in (0, 1)");
  const double a = 0.5 * dof;
  const double target = 1.0 - delta;
  auto cdf = [a](double c) { return boost::math::gamma_p(a, 0.5 * c); };
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (cdf(hi) < target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

UncertainModel spectral_model(const Dataset& data, double sigma_w, double delta) {
  const Posterior post = ols_posterior(data, sigma_w);
  const Eigen::Index nx = data.nx();
  const int dof = static_cast<int>(nx * nx + nx * data.nu());
  UncertainModel m;
  m.Ahat = post.Ahat();
  m.Bhat = post.Bhat();
  m.delta = delta;
  m.c_delta = chi2_quantile(dof, delta);
  m.D = data.gram() / (sigma_w * sigma_w * m.c_delta);
  return m;
}

bool ellipsoid_contains(const Posterior& post, const Vector& theta, double c_delta) {
  if (theta.size() != post.mean.size()) throw DimensionMismatch("ellipsoid_contains: theta size");
  const Vector d = theta - post.mean;
  return d.dot(post.precision * d) <= c_delta + 1e-9 * std::max(1.0, c_delta);
}

bool spectral_contains(const UncertainModel& model, const Matrix& A, const Matrix& B) {
  if (A.rows() != model.nx() || A.cols() != model.nx() || B.rows() != model.nx() || B.cols() != model.nu()) {
    throw DimensionMismatch("spectral_contains: A/B shape");
  }
  Matrix X(model.nx() + model.nu(), model.nx());
  X << (model.Ahat - A).transpose(), (model.Bhat - B).transpose();
  return max_eigenvalue(X.transpose() * model.D * X) <= 1.0 + 1e-9;
}

double information(const UncertainModel& model) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(model.D), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(es.eigenvalues().size() - 1);
  if (!(hi > 0.0) || lo <= 1e-14 * hi) return 0.0;
  return lo;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

void write_row(std::ostream& out, long t, const Vector& x, const Vector* u, Eigen::Index nu) {
  out << t;
  for (Eigen::Index i = 0; i < x.size(); ++i) out << ',' << x(i);
  for (Eigen::Index i = 0; i < nu; ++i) {
    out << ',';
    if (u) out << (*u)(i);
  }
  out << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  out << 't';
  for (Eigen::Index i = 0; i < data.nx(); ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < data.nu(); ++i) out << ",u" << i;
  out << '\n';
  const auto& recs = data.records();
  long t = 0;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    write_row(out, t++, recs[k].x, &recs[k].u, data.nu());
    const bool chained = k + 1 < recs.size() && recs[k + 1].x == recs[k].x_next;
    if (!chained) {
      write_row(out, t, recs[k].x_next, nullptr, data.nu());
      if (k + 1 < recs.size()) out << '\n';
      t = 0;
    }
  }
  out.flags(flags);
  out.precision(prec);
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("dataset csv: missing header");
  const auto header = split(line);
  Eigen::Index nx = 0, nu = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (!header[i].empty() && header[i][0] == 'x') ++nx;
    else if (!header[i].empty() && header[i][0] == 'u') ++nu;
    else throw Error("dataset csv: unexpected column '" + header[i] + "'");
  }
  if (header.empty() || header[0] != "t" || nx == 0) throw Error("dataset csv: bad header");
  Dataset data(nx, nu);
  std::vector<std::pair<Vector, std::optional<Vector>>> block;
  auto flush = [&]() {
    for (std::size_t k = 0; k + 1 < block.size(); ++k) {
      if (!block[k].second) throw Error("dataset csv: missing input before end of trajectory");
      data.add({block[k].first, *block[k].second, block[k + 1].first});
    }
    block.clear();
  };
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != static_cast<std::size_t>(1 + nx + nu)) {
      throw Error("dataset csv: wrong column count on line " + std::to_string(lineno));
    }
    Vector x(nx);
    for (Eigen::Index i = 0; i < nx; ++i) x(i) = std::stod(cells[static_cast<std::size_t>(1 + i)]);
    std::optional<Vector> u;
    if (nu > 0 && !cells[static_cast<std::size_t>(1 + nx)].empty()) {
      u = Vector(nu);
      for (Eigen::Index i = 0; i < nu; ++i) (*u)(i) = std::stod(cells[static_cast<std::size_t>(1 + nx + i)]);
    } else if (nu == 0) {
      u = Vector(0);
    }
    block.emplace_back(std::move(x), std::move(u));
  }
  flush();
  return data;
}

}  // namespace rrl
