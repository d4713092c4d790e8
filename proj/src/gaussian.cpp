// Copyright 2026 The cbbd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cbbd/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbbd {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = -1e-10;
constexpr double kRegularization = 1e-12;

struct Partition {
  std::vector<Eigen::Index> observed;
  std::vector<Eigen::Index> free;
};

Partition partition(std::size_t dim, std::span<const std::size_t> observed_idx) {
  std::vector<bool> seen(dim, false);
  Partition p;
  for (std::size_t i : observed_idx) {
    if (i >= dim) throw std::invalid_argument("condition: index out of range");
    if (seen[i]) throw std::invalid_argument("condition: duplicate observed index");
    seen[i] = true;
    p.observed.push_back(static_cast<Eigen::Index>(i));
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (!seen[i]) p.free.push_back(static_cast<Eigen::Index>(i));
  }
  return p;
}

// Sigma_oo^{-1} applied from the right, via Cholesky with one regularized retry.
Matrix solve_observed(const Matrix& sigma_oo, const Matrix& rhs_t) {
  Eigen::LLT<Matrix> llt(sigma_oo);
  if (llt.info() != Eigen::Success) {
    const Matrix reg =
        sigma_oo + kRegularization * Matrix::Identity(sigma_oo.rows(), sigma_oo.cols());
    llt.compute(reg);
    if (llt.info() != Eigen::Success) {
      throw SingularCovarianceError("condition: observed block is singular after regularization");
    }
  }
  return llt.solve(rhs_t);
}

}  // namespace

GaussianMoments::GaussianMoments(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw std::invalid_argument("GaussianMoments: shape mismatch");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw std::invalid_argument("GaussianMoments: non-finite entry");
  }
  if (mean_.size() == 0) return;
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw std::invalid_argument("GaussianMoments: covariance not symmetric");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < kPsdTol * scale) {
    throw std::invalid_argument("GaussianMoments: covariance not positive semidefinite");
  }
}

GaussianMoments wiener_cov(std::span<const double> times) {
  const auto m = static_cast<Eigen::Index>(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw std::invalid_argument("wiener_cov: times must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("wiener_cov: times must be strictly increasing");
    }
  }
  Matrix cov(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      cov(i, j) = std::min(times[static_cast<std::size_t>(i)], times[static_cast<std::size_t>(j)]);
    }
  }
  return GaussianMoments(Vector::Zero(m), std::move(cov));
}

Matrix regression_coefficients(const GaussianMoments& joint,
                               std::span<const std::size_t> observed_idx) {
  const Partition p = partition(joint.dim(), observed_idx);
  const Matrix& cov = joint.cov();
  const Matrix sigma_oo = cov(p.observed, p.observed);
  const Matrix sigma_uo = cov(p.free, p.observed);
  if (p.observed.empty()) return Matrix::Zero(static_cast<Eigen::Index>(p.free.size()), 0);
  return solve_observed(sigma_oo, sigma_uo.transpose()).transpose();
}

GaussianMoments condition(const GaussianMoments& joint, std::span<const std::size_t> observed_idx,
                          const Vector& observed_vals) {
  if (static_cast<std::size_t>(observed_vals.size()) != observed_idx.size()) {
    throw std::invalid_argument("condition: observed values do not match indices");
  }
  const Partition p = partition(joint.dim(), observed_idx);
  const Matrix& cov = joint.cov();
  const Vector mu_u = joint.mean()(p.free);
  const Matrix sigma_uu = cov(p.free, p.free);
  if (p.observed.empty()) return GaussianMoments(mu_u, sigma_uu);

  const Vector mu_o = joint.mean()(p.observed);
  const Matrix sigma_oo = cov(p.observed, p.observed);
  const Matrix sigma_uo = cov(p.free, p.observed);
  const Matrix gain = solve_observed(sigma_oo, sigma_uo.transpose()).transpose();

  Vector mean = mu_u + gain * (observed_vals - mu_o);
  Matrix c = sigma_uu - gain * sigma_uo.transpose();
  c = 0.5 * (c + c.transpose());
  return GaussianMoments(std::move(mean), std::move(c));
}

MomentTestReport moment_test(const Matrix& samples, const GaussianMoments& target,
                             double k_sigma) {
  if (!(k_sigma > 0.0)) throw std::invalid_argument("moment_test: k_sigma must be positive");
  const auto n = samples.cols();
  if (n < 100) throw std::invalid_argument("moment_test: need at least 100 samples");
  if (static_cast<std::size_t>(samples.rows()) != target.dim()) {
    throw std::invalid_argument("moment_test: dimension mismatch");
  }
  MomentTestReport rep;
  rep.n_samples = static_cast<std::size_t>(n);
  rep.k_sigma = k_sigma;
  bool exact_ok = true;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const double mu = target.mean()[i];
    const double var = target.cov()(i, i);
    const auto row = samples.row(i);
    if (var == 0.0) {
      exact_ok = exact_ok && (row.array() == mu).all();
      continue;
    }
    const double m = row.mean();
    const double v = (row.array() - m).square().sum() / static_cast<double>(n - 1);
    rep.max_mean_z = std::max(rep.max_mean_z, std::abs(m - mu) * std::sqrt(double(n)) / std::sqrt(var));
    rep.max_var_ratio_dev = std::max(rep.max_var_ratio_dev, std::abs(v / var - 1.0));
  }
  rep.pass = exact_ok && rep.max_mean_z <= k_sigma &&
             rep.max_var_ratio_dev <= k_sigma * std::sqrt(2.0 / static_cast<double>(n));
  return rep;
}

MomentTestReport moment_test(std::span<const Vector> samples, const GaussianMoments& target,
                             double k_sigma) {
  if (samples.size() < 100) throw std::invalid_argument("moment_test: need at least 100 samples");
  Matrix m(static_cast<Eigen::Index>(target.dim()), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (static_cast<std::size_t>(samples[j].size()) != target.dim()) {
      throw std::invalid_argument("moment_test: dimension mismatch");
    }
    m.col(static_cast<Eigen::Index>(j)) = samples[j];
  }
  return moment_test(m, target, k_sigma);
}

}  // namespace cbbd
