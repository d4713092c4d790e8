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

#include "cbbd/sde.hpp"

#include <cmath>
#include <stdexcept>

#include "cbbd/bridge.hpp"

namespace cbbd {
namespace {

Vector forward_step(const Vector& x, double t, double dt, const Vector& endpoint, double horizon,
                    RngStream& rng, bool inject_noise, bool last) {
  const auto d = static_cast<std::size_t>(x.size());
  // The exact pinned conditional over the final interval [t, T] is the
  // endpoint itself, with zero variance.
  if (last) return endpoint;
  Vector next = x + dt * (endpoint - x) / (horizon - t);
  if (inject_noise) next += std::sqrt(dt) * rng.normal_vector(d);
  return next;
}

}  // namespace

SdeConfig::SdeConfig(double horizon_, int n_steps_, LatentPoint endpoint_, LatentPoint start_)
    : horizon(horizon_), n_steps(n_steps_), endpoint(std::move(endpoint_)), start(std::move(start_)) {
  if (!(horizon > 0.0)) throw std::invalid_argument("SdeConfig: horizon must be positive");
  if (n_steps < 1) throw std::invalid_argument("SdeConfig: n_steps must be >= 1");
  if (endpoint.dim() != start.dim()) throw std::invalid_argument("SdeConfig: dimension mismatch");
}

Vector bridge_drift(const LatentPoint& x_t, double t, const LatentPoint& endpoint, double horizon) {
  if (x_t.dim() != endpoint.dim()) throw std::invalid_argument("bridge_drift: dimension mismatch");
  if (!(t >= 0.0 && t < horizon)) throw std::out_of_range("bridge_drift: need 0 <= t < T");
  return (endpoint.values() - x_t.values()) / (horizon - t);
}

SdePath euler_maruyama(const SdeConfig& cfg, RngStream& rng, bool inject_noise) {
  SdePath path;
  const double dt = cfg.step();
  Vector x = cfg.start.values();
  path.times.push_back(0.0);
  path.states.push_back(x);
  for (int k = 0; k < cfg.n_steps; ++k) {
    const double t = cfg.horizon * k / cfg.n_steps;
    const bool last = k + 1 == cfg.n_steps;
    x = forward_step(x, t, dt, cfg.endpoint.values(), cfg.horizon, rng, inject_noise, last);
    path.times.push_back(last ? cfg.horizon : cfg.horizon * (k + 1) / cfg.n_steps);
    path.states.push_back(x);
  }
  return path;
}

Matrix euler_maruyama_marginal(const SdeConfig& cfg, std::uint64_t seed, std::size_t n_paths,
                               int query_step) {
  if (query_step < 0 || query_step > cfg.n_steps) {
    throw std::out_of_range("euler_maruyama_marginal: query step outside the grid");
  }
  const double dt = cfg.step();
  const auto d = static_cast<Eigen::Index>(cfg.start.dim());
  Matrix out(d, static_cast<Eigen::Index>(n_paths));
  for (std::size_t i = 0; i < n_paths; ++i) {
    RngStream rng = substream(seed, i);
    Vector x = cfg.start.values();
    for (int k = 0; k < query_step; ++k) {
      const double t = cfg.horizon * k / cfg.n_steps;
      x = forward_step(x, t, dt, cfg.endpoint.values(), cfg.horizon, rng, true, k + 1 == cfg.n_steps);
    }
    out.col(static_cast<Eigen::Index>(i)) = x;
  }
  return out;
}

Vector analytic_score(const LatentPoint& x_t, double t, const LatentPoint& start,
                      const LatentPoint& endpoint, double horizon) {
  if (!(t > 0.0 && t < horizon)) throw std::out_of_range("analytic_score: need 0 < t < T");
  const IsotropicGaussian law = pinned_bridge(start, endpoint, t, horizon);
  if (x_t.dim() != law.dim()) throw std::invalid_argument("analytic_score: dimension mismatch");
  return -(x_t.values() - law.mean) / law.var;
}

Vector reverse_sde_step(const LatentPoint& x_t, double t, double delta, const LatentPoint& start,
                        const LatentPoint& endpoint, double horizon, RngStream& rng,
                        ReverseStepOptions opts) {
  if (!(delta > 0.0)) throw std::invalid_argument("reverse_sde_step: delta must be positive");
  if (!(t > 0.0 && t < horizon)) throw std::out_of_range("reverse_sde_step: need 0 < t < T");
  if (t - delta < 0.0) throw std::out_of_range("reverse_sde_step: step crosses t = 0");
  Vector drift = bridge_drift(x_t, t, endpoint, horizon);
  if (opts.use_score) drift -= analytic_score(x_t, t, start, endpoint, horizon);
  Vector next = x_t.values() - delta * drift;
  if (opts.inject_noise) next += std::sqrt(delta) * rng.normal_vector(x_t.dim());
  return next;
}

Matrix reverse_marginal(const LatentPoint& start, const LatentPoint& endpoint, double horizon,
                        double t_from, double t_to, int n_steps, std::uint64_t seed,
                        std::size_t n_paths) {
  if (!(0.0 < t_to && t_to < t_from && t_from < horizon)) {
    throw std::invalid_argument("reverse_marginal: need 0 < t_to < t_from < T");
  }
  if (n_steps < 1) throw std::invalid_argument("reverse_marginal: n_steps must be >= 1");
  const IsotropicGaussian init = pinned_bridge(start, endpoint, t_from, horizon);
  const double delta = (t_from - t_to) / n_steps;
  const double sd = std::sqrt(init.var);
  const auto d = static_cast<Eigen::Index>(start.dim());
  Matrix out(d, static_cast<Eigen::Index>(n_paths));
  for (std::size_t i = 0; i < n_paths; ++i) {
    RngStream rng = substream(seed, i);
    Vector x = init.mean + sd * rng.normal_vector(start.dim());
    for (int k = 0; k < n_steps; ++k) {
      const double t = t_from - (t_from - t_to) * k / n_steps;
      x = reverse_sde_step(LatentPoint(std::move(x)), t, delta, start, endpoint, horizon, rng);
    }
    out.col(static_cast<Eigen::Index>(i)) = x;
  }
  return out;
}

}  // namespace cbbd
