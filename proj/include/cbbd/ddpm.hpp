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

// DDPM reference math and the cumulative-variance lower bound it implies.

#pragma once

#include <vector>

#include "cbbd/bridge.hpp"
#include "cbbd/core.hpp"

namespace cbbd {

/// Variance injected along a sampling trajectory: the prior's variance plus
/// the variance added at each step, in sampling order.
struct VarianceLedger {
  double initial_prior_var = 0.0;
  std::vector<double> per_step_injected;
  double total = 0.0;

  void add(double v);
};

/// q(x_t | x_0) = N(sqrt(alpha_t) x_0, (1 - alpha_t) I).
IsotropicGaussian ddpm_forward_marginal(const LatentPoint& x0, int t_idx, const DdpmSchedule& sched);

/// q(x_{t-1} | x_0, x_t). Valid for t_idx >= 1 with alpha_0 = 1.
IsotropicGaussian ddpm_posterior(const LatentPoint& x0, const LatentPoint& x_t, int t_idx,
                                 const DdpmSchedule& sched);

/// Posterior mean written in terms of the forward noise:
/// (x_t - beta_t / sqrt(1 - alpha_t) * eps) / sqrt(1 - beta_t).
LatentPoint ddpm_reparam_mean(const LatentPoint& x_t, const LatentPoint& eps, int t_idx,
                              const DdpmSchedule& sched);

/// ||eps_pred - eps||^2.
double ddpm_objective_value(const LatentPoint& eps_pred, const LatentPoint& eps);

/// Lower bound 1 + sum_{t >= 2} beta-tilde_t on the ancestral sampler's
/// cumulative variance. Steps are listed from t = steps down to t = 2.
VarianceLedger ddpm_cumulative_variance(const DdpmSchedule& sched);

}  // namespace cbbd
