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

#include <memory>
#include <span>

#include "cbbd/bridge.hpp"
#include "cbbd/core.hpp"
#include "cbbd/gaussian.hpp"

namespace cbbd {

/// Denoiser input. `label` is the process label scaled into [0, 1]
/// (see scaled_time_label).
struct DenoiserInput {
  DenoiserInput(LatentPoint x_t_, double label_, LatentPoint y_, LatentPoint z_);

  LatentPoint x_t;
  double label;
  LatentPoint y;
  LatentPoint z;
};

/// Columns of a batch, one sample per column.
struct DenoiserBatch {
  Matrix x_t;
  Vector labels;
  Matrix y;
  Matrix z;

  Eigen::Index size() const { return x_t.cols(); }
  void validate() const;
};

/// Predicts the drift target x_t - x from (x_t, label, y, z).
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  LatentPoint predict(const DenoiserInput& in) const;

  /// One prediction per batch column.
  virtual Matrix predict_batch(const DenoiserBatch& batch) const = 0;
};

/// Exact predictor for tasks with x = (y + z) / 2. Ignores the label.
class MidpointOracle final : public Denoiser {
 public:
  Matrix predict_batch(const DenoiserBatch& batch) const override;
};

/*!
 * Posterior-mean predictor for a jointly Gaussian (y, x, z) task.
 *
 * Returns x_t - E[x | x_t, y, z], where x_t is the bridge state implied by the
 * label. The conditioning is done in two stages: x given (y, z) from the task
 * law, then the bridge observation x_t = (1 - t/T) x + (t/T) e + noise.
 */
class GaussianOracle final : public Denoiser {
 public:
  /// task_moments is the law of the stacked vector (y, x, z), dimension 3d.
  GaussianOracle(GaussianMoments task_moments, BridgeSchedule sched);

  Matrix predict_batch(const DenoiserBatch& batch) const override;

  /// E[x | x_t, y, z] for a single input.
  Vector posterior_mean(const Vector& x_t, double label, const Vector& y, const Vector& z) const;

  std::size_t dim() const { return dim_; }

 private:
  GaussianMoments task_;
  BridgeSchedule sched_;
  std::size_t dim_;
  Vector mu_x_;
  Vector mu_yz_;
  Matrix gain_;           // d x 2d, x on (y, z)
  Matrix cov_x_given_yz_;
};

std::unique_ptr<Denoiser> oracle_midpoint();
std::unique_ptr<GaussianOracle> oracle_gaussian(GaussianMoments task_moments, BridgeSchedule sched);

}  // namespace cbbd
