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

#include "cbbd/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cbbd {

LatentPoint::LatentPoint(Vector values) : values_(std::move(values)) {
  if (values_.size() < 1) {
    throw std::invalid_argument("LatentPoint: dimension must be >= 1");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("LatentPoint: non-finite entry");
  }
}

LatentPoint::LatentPoint(std::initializer_list<double> values)
    : LatentPoint(Vector::Map(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

Triplet::Triplet(LatentPoint y_, LatentPoint x_, LatentPoint z_)
    : y(std::move(y_)), x(std::move(x_)), z(std::move(z_)) {
  if (y.dim() != x.dim() || z.dim() != x.dim()) {
    throw std::invalid_argument("Triplet: y, x, z must share a dimension");
  }
}

BridgeSchedule::BridgeSchedule() : BridgeSchedule(2.0, 1000, 50, 5.0) {}

BridgeSchedule::BridgeSchedule(double horizon, int train_steps, int sample_steps, double gamma)
    : horizon_(horizon), train_steps_(train_steps), sample_steps_(sample_steps), gamma_(gamma) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("BridgeSchedule: horizon must be positive");
  }
  if (train_steps < 1 || sample_steps < 1) {
    throw std::invalid_argument("BridgeSchedule: step counts must be >= 1");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("BridgeSchedule: gamma must be positive");
  }
}

double BridgeSchedule::grid_time(int k) const {
  const int n = sample_steps_;
  if (k < 0 || k > n) {
    throw std::out_of_range("BridgeSchedule::grid_time: index " + std::to_string(k));
  }
  if (k == 0) return 0.0;
  if (k == n) return horizon_;
  // The upper half is rounded once; the lower half is its exact complement
  // (Sterbenz), so grid_time(k) + grid_time(n - k) == T holds bit for bit.
  if (2 * k == n) return 0.5 * horizon_;
  if (2 * k > n) return horizon_ - horizon_ * (n - k) / n;
  return horizon_ - grid_time(n - k);
}

BridgeSchedule BridgeSchedule::with_sample_steps(int n) const {
  return BridgeSchedule(horizon_, train_steps_, n, gamma_);
}

BridgeSchedule make_bridge_schedule(double horizon, int train_steps, int sample_steps,
                                    double gamma) {
  return BridgeSchedule(horizon, train_steps, sample_steps, gamma);
}

double DdpmSchedule::alpha(int t) const {
  if (t == 0) return 1.0;
  return alphas.at(static_cast<std::size_t>(t - 1));
}

DdpmSchedule make_ddpm_schedule(double beta_start, double beta_end, int steps) {
  if (steps < 1) throw std::invalid_argument("make_ddpm_schedule: steps must be >= 1");
  if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_end < beta_start) {
    throw std::invalid_argument("make_ddpm_schedule: need 0 < beta_start <= beta_end < 1");
  }
  DdpmSchedule sched;
  const auto n = static_cast<std::size_t>(steps);
  sched.betas.resize(n);
  sched.alphas.resize(n);
  sched.posterior_vars.resize(n);
  double prod = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    const double beta = beta_start + (beta_end - beta_start) * frac;
    const double prev = prod;
    prod *= 1.0 - beta;
    sched.betas[i] = beta;
    sched.alphas[i] = prod;
    sched.posterior_vars[i] = (1.0 - prev) / ((1.0 - prev) + prev * beta) * beta;
  }
  return sched;
}

}  // namespace cbbd
