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

// Brownian bridge as an SDE, dX = (e - X)/(T - t) dt + dW, its time reversal
// with the analytic pinned-law score, and Euler-Maruyama integrators for both.

#pragma once

#include <cstdint>
#include <vector>

#include "cbbd/core.hpp"
#include "cbbd/rng.hpp"

namespace cbbd {

struct SdeConfig {
  SdeConfig(double horizon_, int n_steps_, LatentPoint endpoint_, LatentPoint start_);

  double horizon;
  int n_steps;
  LatentPoint endpoint;
  LatentPoint start;

  double step() const { return horizon / n_steps; }
};

struct SdePath {
  std::vector<double> times;
  std::vector<Vector> states;
};

/// (endpoint - x_t) / (T - t), for 0 <= t < T.
Vector bridge_drift(const LatentPoint& x_t, double t, const LatentPoint& endpoint, double horizon);

/*!
 * Forward Euler-Maruyama path from cfg.start at t = 0 to t = T.
 *
 * Every step except the last is an Euler step of the drift with unit
 * dispersion. The last step never touches the singular drift at t = T: it
 * uses the exact pinned-bridge conditional, which puts the path on the
 * endpoint.
 */
SdePath euler_maruyama(const SdeConfig& cfg, RngStream& rng, bool inject_noise = true);

/// States of n_paths forward paths at grid index query_step (column per path).
/// Path i draws from substream(seed, i).
Matrix euler_maruyama_marginal(const SdeConfig& cfg, std::uint64_t seed, std::size_t n_paths,
                               int query_step);

/// Score of the pinned law at time t: -(x_t - mu_t) / sigma_t^2. Needs 0 < t < T.
Vector analytic_score(const LatentPoint& x_t, double t, const LatentPoint& start,
                      const LatentPoint& endpoint, double horizon);

struct ReverseStepOptions {
  bool use_score = true;
  bool inject_noise = true;
};

/// One Euler-Maruyama step of the reverse SDE, from t to t - delta:
/// x - [drift(x, t) - score(x, t)] delta + sqrt(delta) xi.
Vector reverse_sde_step(const LatentPoint& x_t, double t, double delta, const LatentPoint& start,
                        const LatentPoint& endpoint, double horizon, RngStream& rng,
                        ReverseStepOptions opts = {});

/// Reverse-integrates n_paths paths from t_from to t_to in n_steps steps,
/// each initialized from the pinned law at t_from. Path i draws from
/// substream(seed, i). Returns the states at t_to, column per path.
Matrix reverse_marginal(const LatentPoint& start, const LatentPoint& endpoint, double horizon,
                        double t_from, double t_to, int n_steps, std::uint64_t seed,
                        std::size_t n_paths);

}  // namespace cbbd
