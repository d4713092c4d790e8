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

#include "cbbd/bridge.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace cbbd {
namespace {

void require_time(double t, double horizon, const char* who) {
  if (!(t >= 0.0 && t <= horizon)) {
    throw std::out_of_range(std::string(who) + ": time outside [0, T]");
  }
}

}  // namespace

std::string_view to_string(BridgeSide side) {
  return side == BridgeSide::PrevEndpoint ? "y" : "z";
}

GaussianMoments IsotropicGaussian::to_moments() const {
  const auto d = mean.size();
  return GaussianMoments(mean, var * Matrix::Identity(d, d));
}

double bridge_variance(double t, double horizon) { return t * (horizon - t) / horizon; }

IsotropicGaussian pinned_bridge(const LatentPoint& a, const LatentPoint& b, double t,
                                double horizon) {
  if (a.dim() != b.dim()) throw std::invalid_argument("pinned_bridge: dimension mismatch");
  if (!(horizon > 0.0)) throw std::invalid_argument("pinned_bridge: horizon must be positive");
  require_time(t, horizon, "pinned_bridge");
  const double w = t / horizon;
  return {(1.0 - w) * a.values() + w * b.values(), bridge_variance(t, horizon)};
}

const LatentPoint& endpoint(const Triplet& trip, BridgeSide side) {
  return side == BridgeSide::PrevEndpoint ? trip.y : trip.z;
}

IsotropicGaussian forward_marginal(const Triplet& trip, BridgeSide side, double t,
                                   const BridgeSchedule& sched) {
  require_time(t, sched.horizon(), "forward_marginal");
  return pinned_bridge(trip.x, endpoint(trip, side), t, sched.horizon());
}

IsotropicGaussian backward_transition(const LatentPoint& x_t, double t, double s,
                                      const LatentPoint& x_hat) {
  if (x_t.dim() != x_hat.dim()) throw std::invalid_argument("backward_transition: dimension mismatch");
  if (!(t > 0.0)) throw std::invalid_argument("backward_transition: t must be positive");
  if (!(s >= 0.0 && s < t)) throw std::invalid_argument("backward_transition: need 0 <= s < t");
  // Convex form: lands exactly on x_hat at s = 0.
  return {(s / t) * x_t.values() + ((t - s) / t) * x_hat.values(), s * (t - s) / t};
}

double time_label(BridgeSide side, double t, double horizon) {
  require_time(t, horizon, "time_label");
  return side == BridgeSide::PrevEndpoint ? t : 2.0 * horizon - t;
}

double scaled_time_label(BridgeSide side, double t, double horizon) {
  return time_label(side, t, horizon) / (2.0 * horizon);
}

SideAndTime decode_time_label(double scaled_label, double horizon) {
  if (!(scaled_label >= 0.0 && scaled_label <= 1.0)) {
    throw std::out_of_range("decode_time_label: label outside [0, 1]");
  }
  const double u = scaled_label * 2.0 * horizon;
  if (u <= horizon) return {BridgeSide::PrevEndpoint, u};
  return {BridgeSide::NextEndpoint, std::max(0.0, 2.0 * horizon - u)};
}

double snr_weight(double t, const BridgeSchedule& sched) {
  require_time(t, sched.horizon(), "snr_weight");
  const double delta = bridge_variance(t, sched.horizon());
  if (delta <= 0.0) return sched.gamma();
  return std::min(1.0 / delta, sched.gamma());
}

SplitPropertyReport split_property_check(double s, double t, double h, double v_t, double v_h) {
  if (!(0.0 < s && s < t && t < h)) {
    throw std::invalid_argument("split_property_check: need 0 < s < t < h");
  }
  const std::array<double, 3> times = {s, t, h};
  const GaussianMoments joint = wiener_cov(times);

  const std::array<std::size_t, 2> both = {1, 2};
  const std::array<std::size_t, 1> near = {1};
  Vector both_vals(2);
  both_vals << v_t, v_h;
  Vector near_vals(1);
  near_vals << v_t;

  const GaussianMoments two_point_joint(joint.mean().head(2), joint.cov().topLeftCorner(2, 2));
  SplitPropertyReport rep{condition(joint, both, both_vals), condition(two_point_joint, near, near_vals)};
  rep.far_pin_coefficient = regression_coefficients(joint, both)(0, 1);
  rep.max_mean_diff = std::abs(rep.three_point.mean()[0] - rep.two_point.mean()[0]);
  rep.var_diff = std::abs(rep.three_point.cov()(0, 0) - rep.two_point.cov()(0, 0));
  return rep;
}

BbdmCoefficients bbdm_coefficients(int t_idx, int steps, double s_bb) {
  if (steps < 1 || t_idx < 1 || t_idx > steps) {
    throw std::out_of_range("bbdm_coefficients: need 1 <= t_idx <= steps");
  }
  if (!(s_bb > 0.0)) throw std::invalid_argument("bbdm_coefficients: s_bb must be positive");
  BbdmCoefficients c;
  c.m_t = static_cast<double>(t_idx) / steps;
  c.m_prev = static_cast<double>(t_idx - 1) / steps;
  c.delta_t = 2.0 * s_bb * (c.m_t - c.m_t * c.m_t);
  c.delta_prev = 2.0 * s_bb * (c.m_prev - c.m_prev * c.m_prev);
  const double keep = (1.0 - c.m_t) / (1.0 - c.m_prev);
  c.delta_step = c.delta_t - c.delta_prev * keep * keep;

  if (c.delta_t > 0.0) {
    c.c_xt = c.delta_prev / c.delta_t * keep + (1.0 - c.m_prev) * c.delta_step / c.delta_t;
    c.c_yt = c.m_prev - c.m_t * keep * c.delta_prev / c.delta_t;
    c.c_et = (1.0 - c.m_prev) * c.delta_step / c.delta_t;
    c.posterior_var = c.delta_step * c.delta_prev / c.delta_t;
  } else {
    // m_t == 1: x_t is pinned to y and carries no information about x_0, so
    // the posterior is the forward marginal at t-1. These are the limits of
    // the interior formulas.
    c.c_xt = 1.0;
    c.c_yt = 0.0;
    c.c_et = (c.m_t - c.m_prev) / c.m_t;
    c.posterior_var = c.delta_prev;
  }
  return c;
}

Vector bbdm_posterior_mean(const BbdmCoefficients& c, const Vector& x_t, const Vector& y,
                           const Vector& x0) {
  // The bracketed noise term m_t (y - x_0) + sqrt(delta_t) eps equals x_t - x_0.
  return c.c_xt * x_t + c.c_yt * y - c.c_et * (x_t - x0);
}

BbdmCrossCheckReport bbdm_cross_check(int grid, double s_bb) {
  if (grid < 2) throw std::invalid_argument("bbdm_cross_check: grid must be >= 2");
  const double horizon = 2.0 * s_bb;
  const LatentPoint x0{0.3, -1.2, 2.0};
  const LatentPoint y{1.5, 0.4, -0.7};
  const std::array<LatentPoint, 2> states = {LatentPoint{0.9, -0.1, 0.6},
                                             LatentPoint{-2.0, 3.0, 0.25}};

  BbdmCrossCheckReport rep;
  for (int k = 1; k < grid; ++k) {
    const BbdmCoefficients c = bbdm_coefficients(k, grid, s_bb);
    const double t = horizon * k / grid;
    const double s = horizon * (k - 1) / grid;
    for (const LatentPoint& x_t : states) {
      const Vector bbdm_mean = bbdm_posterior_mean(c, x_t.values(), y.values(), x0.values());
      const IsotropicGaussian ours = backward_transition(x_t, t, s, x0);
      rep.max_mean_dev = std::max(rep.max_mean_dev, (bbdm_mean - ours.mean).cwiseAbs().maxCoeff());
      rep.max_var_dev = std::max(rep.max_var_dev, std::abs(c.posterior_var - ours.var));
      ++rep.comparisons;
    }
  }
  return rep;
}

}  // namespace cbbd
