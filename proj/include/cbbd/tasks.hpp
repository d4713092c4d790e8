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

// Synthetic (y, x, z) triplet tasks.
//
//   Midpoint       y, z ~ N(0, I) independent; x = (y + z) / 2 exactly.
//   JointGaussian  y, z ~ N(0, I) with per-coordinate correlation 0.5;
//                  x = (y + z) / 2 + noise_scale * N(0, I). The exact joint
//                  law of (y, x, z) is returned alongside the samples.
//   NonlinearArc   (d >= 2) y and z sit on the unit circle at angles
//                  theta -+ phi and x at the arc midpoint theta; remaining
//                  coordinates follow the Midpoint rule. No affine map of
//                  (y, z) recovers x.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cbbd/core.hpp"
#include "cbbd/gaussian.hpp"

namespace cbbd {

enum class TaskKind { Midpoint, JointGaussian, NonlinearArc };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

struct TaskSpec {
  TaskKind kind = TaskKind::Midpoint;
  int dim = 2;
  double noise_scale = 0.3;
  int count = 1;
  std::uint64_t seed = 1;
};

struct TaskData {
  std::vector<Triplet> triplets;
  std::optional<GaussianMoments> joint;  // set for JointGaussian
};

/// Triplet i is drawn from substream(seed, i), so prefixes are stable across
/// counts.
TaskData generate_triplets(const TaskSpec& spec);

inline constexpr double kJointGaussianEndpointCorrelation = 0.5;

/// Exact law of the stacked (y, x, z) for the JointGaussian task.
GaussianMoments joint_gaussian_moments(int dim, double noise_scale);

/// RMSE on `test` of the least-squares affine predictor x ~ A [y; z; 1] fitted
/// on `train`.
double affine_baseline_rmse(std::span<const Triplet> train, std::span<const Triplet> test);

}  // namespace cbbd
