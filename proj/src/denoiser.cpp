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

#include "cbbd/denoiser.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

namespace cbbd {

DenoiserInput::DenoiserInput(LatentPoint x_t_, double label_, LatentPoint y_, LatentPoint z_)
    : x_t(std::move(x_t_)), label(label_), y(std::move(y_)), z(std::move(z_)) {
  if (x_t.dim() != y.dim() || z.dim() != y.dim()) {
    throw std::invalid_argument("DenoiserInput: dimension mismatch");
  }
  if (!(label >= 0.0 && label <= 1.0)) {
    throw std::invalid_argument("DenoiserInput: label must lie in [0, 1]");
  }
}

void DenoiserBatch::validate() const {
  const auto n = x_t.cols();
  if (y.cols() != n || z.cols() != n || labels.size() != n) {
    throw std::invalid_argument("DenoiserBatch: batch size mismatch");
  }
  if (y.rows() != x_t.rows() || z.rows() != x_t.rows()) {
    throw std::invalid_argument("DenoiserBatch: dimension mismatch");
  }
}

LatentPoint Denoiser::predict(const DenoiserInput& in) const {
  DenoiserBatch batch{in.x_t.values(), Vector::Constant(1, in.label), in.y.values(), in.z.values()};
  return LatentPoint(Vector(predict_batch(batch).col(0)));
}

Matrix MidpointOracle::predict_batch(const DenoiserBatch& batch) const {
  batch.validate();
  return batch.x_t - 0.5 * (batch.y + batch.z);
}

GaussianOracle::GaussianOracle(GaussianMoments task_moments, BridgeSchedule sched)
    : task_(std::move(task_moments)), sched_(sched), dim_(task_.dim() / 3) {
  if (dim_ == 0 || task_.dim() != 3 * dim_) {
    throw std::invalid_argument("GaussianOracle: task law must have dimension 3d");
  }
  std::vector<std::size_t> yz(2 * dim_);
  std::iota(yz.begin(), yz.begin() + static_cast<std::ptrdiff_t>(dim_), std::size_t{0});
  std::iota(yz.begin() + static_cast<std::ptrdiff_t>(dim_), yz.end(), 2 * dim_);
  const auto d = static_cast<Eigen::Index>(dim_);
  mu_x_ = task_.mean().segment(d, d);
  mu_yz_.resize(2 * d);
  mu_yz_ << task_.mean().head(d), task_.mean().tail(d);
  gain_ = regression_coefficients(task_, yz);
  // Conditioning at the prior mean gives the (value-independent) covariance.
  cov_x_given_yz_ = condition(task_, yz, mu_yz_).cov();
}

Vector GaussianOracle::posterior_mean(const Vector& x_t, double label, const Vector& y,
                                      const Vector& z) const {
  const auto d = static_cast<Eigen::Index>(dim_);
  if (x_t.size() != d || y.size() != d || z.size() != d) {
    throw std::invalid_argument("GaussianOracle: dimension mismatch");
  }
  const SideAndTime st = decode_time_label(label, sched_.horizon());
  const double horizon = sched_.horizon();
  const double a = 1.0 - st.t / horizon;
  const double b = st.t / horizon;
  const double noise = bridge_variance(st.t, horizon);
  const Vector& e = st.side == BridgeSide::PrevEndpoint ? y : z;

  Vector yz(2 * d);
  yz << y, z;
  const Vector m = mu_x_ + gain_ * (yz - mu_yz_);
  const Matrix& p = cov_x_given_yz_;

  // Joint law of (x, x_t) given (y, z).
  Vector mean(2 * d);
  mean << m, a * m + b * e;
  Matrix cov(2 * d, 2 * d);
  cov.topLeftCorner(d, d) = p;
  cov.topRightCorner(d, d) = a * p;
  cov.bottomLeftCorner(d, d) = a * p;
  cov.bottomRightCorner(d, d) = a * a * p + noise * Matrix::Identity(d, d);

  std::vector<std::size_t> obs(dim_);
  std::iota(obs.begin(), obs.end(), dim_);
  return condition(GaussianMoments(std::move(mean), std::move(cov)), obs, x_t).mean();
}

Matrix GaussianOracle::predict_batch(const DenoiserBatch& batch) const {
  batch.validate();
  Matrix out(batch.x_t.rows(), batch.size());
  for (Eigen::Index j = 0; j < batch.size(); ++j) {
    out.col(j) = batch.x_t.col(j) -
                 posterior_mean(batch.x_t.col(j), batch.labels[j], batch.y.col(j), batch.z.col(j));
  }
  return out;
}

std::unique_ptr<Denoiser> oracle_midpoint() { return std::make_unique<MidpointOracle>(); }

std::unique_ptr<GaussianOracle> oracle_gaussian(GaussianMoments task_moments, BridgeSchedule sched) {
  return std::make_unique<GaussianOracle>(std::move(task_moments), sched);
}

}  // namespace cbbd
