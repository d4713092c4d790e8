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

#include "cbbd/tasks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cbbd/rng.hpp"

namespace cbbd {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Midpoint: return "midpoint";
    case TaskKind::JointGaussian: return "joint_gaussian";
    case TaskKind::NonlinearArc: return "nonlinear_arc";
  }
  return "midpoint";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "midpoint") return TaskKind::Midpoint;
  if (name == "joint_gaussian") return TaskKind::JointGaussian;
  if (name == "nonlinear_arc") return TaskKind::NonlinearArc;
  throw std::invalid_argument("unknown task kind: " + std::string(name));
}

GaussianMoments joint_gaussian_moments(int dim, double noise_scale) {
  if (dim < 1) throw std::invalid_argument("joint_gaussian_moments: dim must be >= 1");
  const auto d = static_cast<Eigen::Index>(dim);
  const double rho = kJointGaussianEndpointCorrelation;
  const Matrix eye = Matrix::Identity(d, d);
  // y = a, z = rho a + sqrt(1 - rho^2) b, x = (y + z)/2 + noise_scale c.
  const double cov_yz = rho;
  const double cov_xy = 0.5 * (1.0 + rho);
  const double var_x = 0.5 * (1.0 + rho) + noise_scale * noise_scale;
  Matrix cov(3 * d, 3 * d);
  cov << eye, cov_xy * eye, cov_yz * eye,
         cov_xy * eye, var_x * eye, cov_xy * eye,
         cov_yz * eye, cov_xy * eye, eye;
  return GaussianMoments(Vector::Zero(3 * d), std::move(cov));
}

TaskData generate_triplets(const TaskSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("generate_triplets: dim must be >= 1");
  if (spec.count < 1) throw std::invalid_argument("generate_triplets: count must be >= 1");
  if (!(spec.noise_scale >= 0.0)) throw std::invalid_argument("generate_triplets: negative noise scale");
  if (spec.kind == TaskKind::NonlinearArc && spec.dim < 2) {
    throw std::invalid_argument("generate_triplets: nonlinear_arc needs dim >= 2");
  }
  const auto d = static_cast<std::size_t>(spec.dim);
  TaskData data;
  data.triplets.reserve(static_cast<std::size_t>(spec.count));
  const double rho = kJointGaussianEndpointCorrelation;
  for (int i = 0; i < spec.count; ++i) {
    RngStream rng = substream(spec.seed, static_cast<std::uint64_t>(i));
    Vector y = rng.normal_vector(d);
    Vector z = rng.normal_vector(d);
    Vector x;
    switch (spec.kind) {
      case TaskKind::Midpoint:
        x = 0.5 * (y + z);
        break;
      case TaskKind::JointGaussian:
        z = rho * y + std::sqrt(1.0 - rho * rho) * z;
        x = 0.5 * (y + z) + spec.noise_scale * rng.normal_vector(d);
        break;
      case TaskKind::NonlinearArc: {
        x = 0.5 * (y + z);
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        const double phi = 0.2 + 1.0 * rng.uniform();
        y[0] = std::cos(theta - phi);
        y[1] = std::sin(theta - phi);
        z[0] = std::cos(theta + phi);
        z[1] = std::sin(theta + phi);
        x[0] = std::cos(theta);
        x[1] = std::sin(theta);
        break;
      }
    }
    data.triplets.emplace_back(LatentPoint(std::move(y)), LatentPoint(std::move(x)),
                               LatentPoint(std::move(z)));
  }
  if (spec.kind == TaskKind::JointGaussian) data.joint = joint_gaussian_moments(spec.dim, spec.noise_scale);
  return data;
}

double affine_baseline_rmse(std::span<const Triplet> train, std::span<const Triplet> test) {
  if (train.empty() || test.empty()) throw std::invalid_argument("affine_baseline_rmse: empty set");
  const auto d = static_cast<Eigen::Index>(train.front().dim());
  auto features = [d](const Triplet& t) {
    Vector f(2 * d + 1);
    f << t.y.values(), t.z.values(), 1.0;
    return f;
  };
  Matrix a(static_cast<Eigen::Index>(train.size()), 2 * d + 1);
  Matrix b(static_cast<Eigen::Index>(train.size()), d);
  for (std::size_t i = 0; i < train.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = features(train[i]).transpose();
    b.row(static_cast<Eigen::Index>(i)) = train[i].x.values().transpose();
  }
  const Matrix coef = a.colPivHouseholderQr().solve(b);
  double sq = 0.0;
  for (const Triplet& t : test) {
    const Vector pred = coef.transpose() * features(t);
    sq += (pred - t.x.values()).squaredNorm();
  }
  return std::sqrt(sq / static_cast<double>(test.size() * static_cast<std::size_t>(d)));
}

}  // namespace cbbd
