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

// Consecutive Brownian bridge math.
//
// Time convention: bridge time t in [0, T], with t = 0 at the ground truth x
// and t = T at the known endpoint e (y or z). The forward marginal is
//
//   X_t ~ N((1 - t/T) x + (t/T) e, t (T - t) / T * I).
//
// Training code that draws s = distance-from-endpoint converts with t = T - s.
// The scalar fed to a denoiser is u = t on the y side and u = 2T - t on the z
// side, so u sweeps 0 (y) -> T (x) -> 2T (z) along the whole process.

#pragma once

#include <string_view>

#include "cbbd/core.hpp"
#include "cbbd/gaussian.hpp"

namespace cbbd {

enum class BridgeSide { PrevEndpoint, NextEndpoint };

std::string_view to_string(BridgeSide side);

/// Gaussian with covariance var * I.
struct IsotropicGaussian {
  Vector mean;
  double var = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  GaussianMoments to_moments() const;
};

/// Brownian bridge pinned at a (t = 0) and b (t = T).
IsotropicGaussian pinned_bridge(const LatentPoint& a, const LatentPoint& b, double t, double horizon);

const LatentPoint& endpoint(const Triplet& trip, BridgeSide side);

IsotropicGaussian forward_marginal(const Triplet& trip, BridgeSide side, double t,
                                   const BridgeSchedule& sched);

/// Law of X_s given X_t and the ground truth estimate, 0 <= s < t.
IsotropicGaussian backward_transition(const LatentPoint& x_t, double t, double s,
                                      const LatentPoint& x_hat);

/// Unscaled process label: t on the y side, 2T - t on the z side.
double time_label(BridgeSide side, double t, double horizon);

/// Label scaled into [0, 1] for denoiser input.
double scaled_time_label(BridgeSide side, double t, double horizon);

struct SideAndTime {
  BridgeSide side;
  double t;
};

/// Inverse of scaled_time_label. The midpoint label (t = T) maps to the y side.
SideAndTime decode_time_label(double scaled_label, double horizon);

/// Bridge variance t (T - t) / T.
double bridge_variance(double t, double horizon);

/// min(1/delta_t, gamma), or gamma where delta_t == 0.
double snr_weight(double t, const BridgeSchedule& sched);

struct SplitPropertyReport {
  GaussianMoments three_point;  // W_s | W_t, W_h
  GaussianMoments two_point;    // W_s | W_t
  double far_pin_coefficient = 0.0;
  double max_mean_diff = 0.0;
  double var_diff = 0.0;
};

/// Conditions W_s on {W_t, W_h} and on {W_t} alone (0 < s < t < h).
SplitPropertyReport split_property_check(double s, double t, double h, double v_t, double v_h);

/// Discrete Brownian-bridge (BBDM) coefficients at step t_idx of a grid with
/// `steps` intervals and maximum-variance scale s_bb.
struct BbdmCoefficients {
  double m_t = 0.0;
  double m_prev = 0.0;
  double delta_t = 0.0;
  double delta_prev = 0.0;
  double delta_step = 0.0;       // delta_{t|t-1}
  double posterior_var = 0.0;    // delta-tilde_t
  double c_xt = 0.0;
  double c_yt = 0.0;
  double c_et = 0.0;
};

BbdmCoefficients bbdm_coefficients(int t_idx, int steps, double s_bb);

/// One-step BBDM posterior mean q(x_{t-1} | x_0, x_t, y) with the exact noise
/// term x_t - x_0 substituted.
Vector bbdm_posterior_mean(const BbdmCoefficients& c, const Vector& x_t, const Vector& y,
                           const Vector& x0);

struct BbdmCrossCheckReport {
  int comparisons = 0;
  double max_mean_dev = 0.0;
  double max_var_dev = 0.0;
};

/// Compares the discrete BBDM posterior with backward_transition on T = 2 s_bb
/// at every interior grid step.
BbdmCrossCheckReport bbdm_cross_check(int grid, double s_bb);

}  // namespace cbbd
