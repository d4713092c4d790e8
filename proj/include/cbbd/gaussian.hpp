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

// Exact multivariate Gaussian machinery used as the brute-force reference for
// every closed-form bridge formula, plus a Monte Carlo moment test.

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cbbd/core.hpp"

namespace cbbd {

/// Mean and covariance. The covariance is symmetric to 1e-12 and PSD up to
/// -1e-10 eigenvalues; the constructor enforces both.
class GaussianMoments {
 public:
  GaussianMoments(Vector mean, Matrix cov);

  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

 private:
  Vector mean_;
  Matrix cov_;
};

class SingularCovarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Zero-mean law of (W_{t_1}, ..., W_{t_m}); cov[i][j] = min(t_i, t_j).
GaussianMoments wiener_cov(std::span<const double> times);

/// Regression matrix Sigma_uo * Sigma_oo^{-1} mapping observed deviations to
/// the conditional mean shift of the unobserved block (unobserved indices in
/// ascending order).
Matrix regression_coefficients(const GaussianMoments& joint,
                               std::span<const std::size_t> observed_idx);

/// Law of the unobserved block given the observed values (Schur complement).
/// A singular observed block is retried with +1e-12 on its diagonal.
GaussianMoments condition(const GaussianMoments& joint, std::span<const std::size_t> observed_idx,
                          const Vector& observed_vals);

struct MomentTestReport {
  std::size_t n_samples = 0;
  double max_mean_z = 0.0;
  double max_var_ratio_dev = 0.0;
  double k_sigma = 4.0;
  bool pass = false;
};

/// Per-coordinate mean and variance test. Coordinates whose target variance is
/// exactly zero are instead required to match the target mean exactly.
MomentTestReport moment_test(std::span<const Vector> samples, const GaussianMoments& target,
                             double k_sigma = 4.0);

/// Same test on a column-per-sample matrix (rows are coordinates).
MomentTestReport moment_test(const Matrix& samples, const GaussianMoments& target,
                             double k_sigma = 4.0);

}  // namespace cbbd
