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

#include <array>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "cbbd/denoiser.hpp"
#include "cbbd/mlp.hpp"
#include "cbbd/rng.hpp"
#include "cbbd/tasks.hpp"

using namespace cbbd;

namespace {

// Law of (y, x, z) with x = (y + z) / 2 exactly: a singular task covariance.
GaussianMoments midpoint_law(int dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  const Matrix eye = Matrix::Identity(d, d);
  Matrix cov(3 * d, 3 * d);
  cov << eye, 0.5 * eye, 0 * eye, 0.5 * eye, 0.5 * eye, 0.5 * eye, 0 * eye, 0.5 * eye, eye;
  return GaussianMoments(Vector::Zero(3 * d), cov);
}

// Brute-force E[x | x_t, y, z]: condition the full 4d-dimensional joint of
// (y, x, z, x_t) in one shot.
Vector brute_posterior_mean(const GaussianMoments& task, const Vector& x_t, BridgeSide side, double t,
                            double horizon, const Vector& y, const Vector& z) {
  const auto d = static_cast<Eigen::Index>(task.dim() / 3);
  const double a = 1.0 - t / horizon;
  const double b = t / horizon;
  // x_t = a x + b e + noise; build the linear map from (y, x, z, noise).
  Matrix lin = Matrix::Zero(d, 3 * d);
  lin.middleCols(d, d) = a * Matrix::Identity(d, d);
  lin.block(0, side == BridgeSide::PrevEndpoint ? 0 : 2 * d, d, d) += b * Matrix::Identity(d, d);
  Vector mean(4 * d);
  mean << task.mean(), lin * task.mean();
  Matrix cov(4 * d, 4 * d);
  cov.topLeftCorner(3 * d, 3 * d) = task.cov();
  cov.topRightCorner(3 * d, d) = task.cov() * lin.transpose();
  cov.bottomLeftCorner(d, 3 * d) = lin * task.cov();
  cov.bottomRightCorner(d, d) = lin * task.cov() * lin.transpose() + bridge_variance(t, horizon) * Matrix::Identity(d, d);
  std::vector<std::size_t> obs;
  for (Eigen::Index i = 0; i < d; ++i) obs.push_back(static_cast<std::size_t>(i));
  for (Eigen::Index i = 2 * d; i < 4 * d; ++i) obs.push_back(static_cast<std::size_t>(i));
  Vector vals(3 * d);
  vals << y, z, x_t;
  return condition(GaussianMoments(mean, cov), obs, vals).mean();
}

}  // namespace

TEST_CASE("midpoint oracle") {
  const auto oracle = oracle_midpoint();
  const DenoiserInput scalar(LatentPoint{3.0}, 0.3, LatentPoint{0.0}, LatentPoint{2.0});
  CHECK(oracle->predict(scalar)[0] == 2.0);
  const DenoiserInput at_target(LatentPoint{1.0, -1.0}, 0.7, LatentPoint{0.0, 1.0}, LatentPoint{2.0, -3.0});
  CHECK(oracle->predict(at_target).values() == Vector::Zero(2));

  const DenoiserInput vec(LatentPoint{3.0, 0.5}, 0.1, LatentPoint{0.0, 4.0}, LatentPoint{2.0, -1.0});
  const DenoiserInput c1(LatentPoint{0.5}, 0.1, LatentPoint{4.0}, LatentPoint{-1.0});
  CHECK(oracle->predict(vec)[0] == oracle->predict(scalar)[0]);
  CHECK(oracle->predict(vec)[1] == oracle->predict(c1)[0]);
}

TEST_CASE("denoiser input validation") {
  CHECK_THROWS_AS(DenoiserInput(LatentPoint{1.0}, 1.5, LatentPoint{0.0}, LatentPoint{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(DenoiserInput(LatentPoint{1.0}, 0.5, LatentPoint{0.0, 1.0}, LatentPoint{0.0}),
                  std::invalid_argument);
  DenoiserBatch bad{Matrix::Zero(2, 3), Vector::Zero(2), Matrix::Zero(2, 3), Matrix::Zero(2, 3)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("gaussian oracle equals brute-force conditioning") {
  const BridgeSchedule sched;
  const GaussianMoments task = joint_gaussian_moments(2, 0.3);
  const auto oracle = oracle_gaussian(task, sched);
  RngStream rng = substream(8, 0);
  for (int k = 1; k < 20; ++k) {
    const double t = 2.0 * k / 20.0;
    for (BridgeSide side : {BridgeSide::PrevEndpoint, BridgeSide::NextEndpoint}) {
      const Vector y = rng.normal_vector(2);
      const Vector z = rng.normal_vector(2);
      const Vector x_t = rng.normal_vector(2);
      const Vector ours = oracle->posterior_mean(x_t, scaled_time_label(side, t, 2.0), y, z);
      const Vector brute = brute_posterior_mean(task, x_t, side, t, 2.0, y, z);
      CHECK((ours - brute).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("gaussian oracle boundary labels") {
  const BridgeSchedule sched;
  const GaussianMoments task = joint_gaussian_moments(2, 0.3);
  const GaussianOracle oracle(task, sched);
  const LatentPoint y{0.4, -0.2};
  const LatentPoint z{1.0, 0.3};
  const LatentPoint x{0.9, 0.1};
  // t = 0: the state is x itself.
  for (BridgeSide side : {BridgeSide::PrevEndpoint, BridgeSide::NextEndpoint}) {
    const DenoiserInput in(x, scaled_time_label(side, 0.0, 2.0), y, z);
    CHECK(oracle.predict(in).values().cwiseAbs().maxCoeff() <= 1e-10);
  }
  // t = T: the state is the endpoint and carries no information about x.
  std::array<std::size_t, 4> yz = {0, 1, 4, 5};
  Vector vals(4);
  vals << y.values(), z.values();
  const Vector e_x = condition(task, yz, vals).mean();
  const DenoiserInput at_y(y, scaled_time_label(BridgeSide::PrevEndpoint, 2.0, 2.0), y, z);
  CHECK((oracle.predict(at_y).values() - (y.values() - e_x)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("gaussian oracle collapses to the midpoint oracle on a degenerate task") {
  const BridgeSchedule sched;
  const auto gauss = oracle_gaussian(midpoint_law(2), sched);
  const auto mid = oracle_midpoint();
  RngStream rng = substream(12, 0);
  for (int k = 0; k <= 10; ++k) {
    for (BridgeSide side : {BridgeSide::PrevEndpoint, BridgeSide::NextEndpoint}) {
      const LatentPoint y(rng.normal_vector(2));
      const LatentPoint z(rng.normal_vector(2));
      const LatentPoint x_t(rng.normal_vector(2));
      const DenoiserInput in(x_t, scaled_time_label(side, 0.2 * k, 2.0), y, z);
      CHECK((gauss->predict(in).values() - mid->predict(in).values()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("gaussian oracle needs a 3d law") {
  CHECK_THROWS_AS(GaussianOracle(GaussianMoments(Vector::Zero(4), Matrix::Identity(4, 4)), BridgeSchedule()),
                  std::invalid_argument);
}

TEST_CASE("fresh MLP gives finite output of the right size") {
  RngStream rng = substream(1, 0);
  const MlpDenoiser net = MlpDenoiser::with_default_shape(3, rng);
  const DenoiserInput in(LatentPoint{0.1, 0.2, 0.3}, 0.4, LatentPoint{1.0, 0.0, -1.0}, LatentPoint{0.5, 0.5, 0.5});
  const LatentPoint out = net.predict(in);
  CHECK(out.dim() == 3);
  CHECK(out.values().allFinite());
}

TEST_CASE("predictions do not depend on batch membership") {
  RngStream rng = substream(2, 0);
  const MlpDenoiser net = MlpDenoiser::with_default_shape(2, rng, 16);
  const GaussianOracle gauss(joint_gaussian_moments(2, 0.3), BridgeSchedule());
  const int n = 6;
  DenoiserBatch batch{Matrix(2, n), Vector(n), Matrix(2, n), Matrix(2, n)};
  for (int j = 0; j < n; ++j) {
    batch.x_t.col(j) = rng.normal_vector(2);
    batch.y.col(j) = rng.normal_vector(2);
    batch.z.col(j) = rng.normal_vector(2);
    batch.labels[j] = rng.uniform();
  }
  std::array<int, n> perm = {3, 0, 5, 1, 4, 2};
  DenoiserBatch shuffled{Matrix(2, n), Vector(n), Matrix(2, n), Matrix(2, n)};
  for (int j = 0; j < n; ++j) {
    shuffled.x_t.col(j) = batch.x_t.col(perm[j]);
    shuffled.y.col(j) = batch.y.col(perm[j]);
    shuffled.z.col(j) = batch.z.col(perm[j]);
    shuffled.labels[j] = batch.labels[perm[j]];
  }
  for (const Denoiser* den : {static_cast<const Denoiser*>(&net), static_cast<const Denoiser*>(&gauss)}) {
    const Matrix a = den->predict_batch(batch);
    const Matrix b = den->predict_batch(shuffled);
    for (int j = 0; j < n; ++j) CHECK((a.col(perm[j]) - b.col(j)).cwiseAbs().maxCoeff() <= 1e-14);
  }
}
