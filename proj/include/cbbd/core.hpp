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

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace cbbd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point in latent space. Every entry is finite and the dimension is >= 1.
class LatentPoint {
 public:
  explicit LatentPoint(Vector values);
  LatentPoint(std::initializer_list<double> values);

  const Vector& values() const { return values_; }
  std::size_t dim() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  bool operator==(const LatentPoint& other) const { return values_ == other.values_; }

 private:
  Vector values_;
};

/// Ordered (previous endpoint, ground truth, next endpoint).
struct Triplet {
  Triplet(LatentPoint y_, LatentPoint x_, LatentPoint z_);

  LatentPoint y;
  LatentPoint x;
  LatentPoint z;

  std::size_t dim() const { return x.dim(); }
};

/// Horizon, train/sample discretizations and the min-SNR clip.
class BridgeSchedule {
 public:
  /// (T, train_steps, sample_steps, gamma) = (2, 1000, 50, 5).
  BridgeSchedule();
  BridgeSchedule(double horizon, int train_steps, int sample_steps, double gamma);

  double horizon() const { return horizon_; }
  int train_steps() const { return train_steps_; }
  int sample_steps() const { return sample_steps_; }
  double gamma() const { return gamma_; }

  /// t_k = T*k/sample_steps. The upper half is mirrored from the lower half so
  /// that grid_time(k) + grid_time(n-k) == T.
  double grid_time(int k) const;
  double step() const { return horizon_ / sample_steps_; }

  BridgeSchedule with_sample_steps(int n) const;

  bool operator==(const BridgeSchedule&) const = default;

 private:
  double horizon_;
  int train_steps_;
  int sample_steps_;
  double gamma_;
};

BridgeSchedule make_bridge_schedule(double horizon, int train_steps, int sample_steps,
                                    double gamma);

/// DDPM noise schedule. Index t runs 1..steps; element [t-1] of each vector.
struct DdpmSchedule {
  std::vector<double> betas;
  std::vector<double> alphas;          // running products of (1 - beta)
  std::vector<double> posterior_vars;  // beta-tilde, with alpha_0 = 1

  int steps() const { return static_cast<int>(betas.size()); }
  double beta(int t) const { return betas.at(static_cast<std::size_t>(t - 1)); }
  double alpha(int t) const;  // alpha(0) == 1
  double posterior_var(int t) const {
    return posterior_vars.at(static_cast<std::size_t>(t - 1));
  }
};

/// Linearly spaced betas from beta_start to beta_end inclusive.
DdpmSchedule make_ddpm_schedule(double beta_start, double beta_end, int steps);

}  // namespace cbbd
