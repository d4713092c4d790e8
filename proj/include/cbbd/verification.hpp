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

// Closed-form bridge formulas checked against brute-force Gaussian
// conditioning, and Monte Carlo consistency suites. Shared by the CLI and the
// acceptance tests.

#pragma once

#include <cstdint>
#include <vector>

#include "cbbd/bridge.hpp"
#include "cbbd/gaussian.hpp"
#include "cbbd/pipeline.hpp"

namespace cbbd {

/// Max deviation (mean and variance) between forward_marginal and the law of
/// a Wiener path started at y, pinned at x (process time T) and z (2T), over
/// the 9 interior times t = T k / 10 on both sides.
double forward_marginal_oracle_deviation(const Triplet& trip, const BridgeSchedule& sched);

/// Max deviation between backward_transition and conditioning the pinned
/// bridge joint of (X_s, X_t) on X_t, over all 36 pairs 0 <= s < t <= T from
/// the grid T k / 8.
double backward_transition_oracle_deviation(const Triplet& trip, const BridgeSchedule& sched);

/// Max moment deviation of ddpm_posterior against conditioning the joint of
/// (x_{t-1}, x_t) given x_0, and of the composed posterior against the t-1
/// marginal, over every step of the schedule.
double ddpm_composition_deviation(const DdpmSchedule& sched, const LatentPoint& x0);

struct MarginalCheck {
  double t = 0.0;
  BridgeSide side = BridgeSide::PrevEndpoint;
  MomentTestReport report;
};

/// Runs n_chains samplers with the true ground truth as denoiser target
/// (midpoint task, exact oracle) and moment-tests the chain states at the
/// requested grid indices against forward_marginal.
std::vector<MarginalCheck> sampler_marginal_checks(const Triplet& trip, const BridgeSchedule& sched,
                                                   const std::vector<int>& grid_indices,
                                                   std::uint64_t seed, std::size_t n_chains,
                                                   double k_sigma = 4.0);

struct SdeSuiteReport {
  MomentTestReport forward;   // EM marginal at t_query vs pinned law
  MomentTestReport reverse;   // reverse integration t_from -> t_to
  double forward_mean_err_coarse = 0.0;
  double forward_mean_err_fine = 0.0;
  double forward_var_err_coarse = 0.0;
  double forward_var_err_fine = 0.0;
  bool pass = false;         // both moment tests, and fine variance error <= coarse
};

struct SdeSuiteOptions {
  Vector start = (Vector(2) << 0.5, -1.0).finished();
  Vector endpoint = (Vector(2) << 1.5, 2.0).finished();
  double horizon = 2.0;
  int fine_steps = 400;
  int coarse_steps = 50;
  double t_query = 1.0;
  double t_from = 1.5;
  double t_to = 0.5;
  int reverse_steps = 1000;
  std::size_t n_paths = 100000;
  std::uint64_t seed = 7;
};

SdeSuiteReport run_sde_suite(const SdeSuiteOptions& opts);

}  // namespace cbbd
