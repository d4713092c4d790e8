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

#include "cbbd/verification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "cbbd/ddpm.hpp"
#include "cbbd/sde.hpp"

namespace cbbd {
namespace {

// Predicts x_t - x for a known x; the exact drift target for one triplet.
class KnownTargetDenoiser final : public Denoiser {
 public:
  explicit KnownTargetDenoiser(Vector x) : x_(std::move(x)) {}
  Matrix predict_batch(const DenoiserBatch& batch) const override {
    batch.validate();
    return batch.x_t.colwise() - x_;
  }

 private:
  Vector x_;
};

double moment_deviation(const Vector& mean_a, double var_a, const GaussianMoments& b) {
  const auto d = mean_a.size();
  const double mean_dev = (mean_a - b.mean()).cwiseAbs().maxCoeff();
  const double cov_dev = (var_a * Matrix::Identity(d, d) - b.cov()).cwiseAbs().maxCoeff();
  return std::max(mean_dev, cov_dev);
}

// Joint law of (X_a, X_b) for a bridge pinned at p0 (time 0) and p1 (time T),
// coordinates stacked as [X_a; X_b].
GaussianMoments pinned_pair(const Vector& p0, const Vector& p1, double a, double b, double horizon) {
  const auto d = p0.size();
  auto cov_fn = [horizon](double u, double v) { return std::min(u, v) - u * v / horizon; };
  const Matrix eye = Matrix::Identity(d, d);
  Vector mean(2 * d);
  mean << (1.0 - a / horizon) * p0 + (a / horizon) * p1, (1.0 - b / horizon) * p0 + (b / horizon) * p1;
  Matrix cov(2 * d, 2 * d);
  cov << cov_fn(a, a) * eye, cov_fn(a, b) * eye, cov_fn(a, b) * eye, cov_fn(b, b) * eye;
  return GaussianMoments(std::move(mean), std::move(cov));
}

}  // namespace

double forward_marginal_oracle_deviation(const Triplet& trip, const BridgeSchedule& sched) {
  const double horizon = sched.horizon();
  const Vector& y = trip.y.values();
  const Vector& x = trip.x.values();
  const Vector& z = trip.z.values();
  double worst = 0.0;
  for (BridgeSide side : {BridgeSide::PrevEndpoint, BridgeSide::NextEndpoint}) {
    for (int k = 1; k <= 9; ++k) {
      const double t = horizon * k / 10.0;
      // Process time runs 0 (y) -> T (x) -> 2T (z); B = W - y starts at zero.
      const double tau = side == BridgeSide::PrevEndpoint ? horizon - t : horizon + t;
      std::array<double, 3> times{};
      std::array<std::size_t, 2> observed{};
      if (side == BridgeSide::PrevEndpoint) {
        times = {tau, horizon, 2.0 * horizon};
        observed = {1, 2};
      } else {
        times = {horizon, tau, 2.0 * horizon};
        observed = {0, 2};
      }
      const GaussianMoments scalar = wiener_cov(times);
      // Coordinates are independent; condition each one separately.
      Vector mean(x.size());
      double var = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector vals(2);
        vals << x[i] - y[i], z[i] - y[i];
        const GaussianMoments c = condition(scalar, observed, vals);
        mean[i] = c.mean()[0] + y[i];
        var = c.cov()(0, 0);
      }
      const IsotropicGaussian ours = forward_marginal(trip, side, t, sched);
      const auto d = x.size();
      worst = std::max(worst, moment_deviation(ours.mean, ours.var,
                                                GaussianMoments(mean, var * Matrix::Identity(d, d))));
    }
  }
  return worst;
}

double backward_transition_oracle_deviation(const Triplet& trip, const BridgeSchedule& sched) {
  const double horizon = sched.horizon();
  double worst = 0.0;
  for (BridgeSide side : {BridgeSide::PrevEndpoint, BridgeSide::NextEndpoint}) {
    const Vector& e = endpoint(trip, side).values();
    const Vector& x = trip.x.values();
    const auto d = x.size();
    for (int kt = 1; kt <= 8; ++kt) {
      for (int ks = 0; ks < kt; ++ks) {
        const double t = horizon * kt / 8.0;
        const double s = horizon * ks / 8.0;
        // An off-mean observation exercises the gain; at t = T the state is pinned.
        const Vector offset = Vector::LinSpaced(d, 0.4, -0.7);
        const Vector x_t = kt == 8 ? e : Vector((1.0 - t / horizon) * x + (t / horizon) * e + offset);
        std::vector<std::size_t> observed(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < observed.size(); ++i) observed[i] = static_cast<std::size_t>(d) + i;
        const GaussianMoments oracle = condition(pinned_pair(x, e, s, t, horizon), observed, x_t);
        const IsotropicGaussian ours = backward_transition(LatentPoint(x_t), t, s, trip.x);
        worst = std::max(worst, moment_deviation(ours.mean, ours.var, oracle));
      }
    }
  }
  return worst;
}

double ddpm_composition_deviation(const DdpmSchedule& sched, const LatentPoint& x0) {
  const auto d = static_cast<Eigen::Index>(x0.dim());
  const Matrix eye = Matrix::Identity(d, d);
  std::vector<std::size_t> observed(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < observed.size(); ++i) observed[i] = static_cast<std::size_t>(d) + i;
  double worst = 0.0;
  for (int t = 1; t <= sched.steps(); ++t) {
    const double beta = sched.beta(t);
    const double a_prev = sched.alpha(t - 1);
    const double v = 1.0 - a_prev;
    const double keep = std::sqrt(1.0 - beta);
    // x_{t-1} ~ N(sqrt(a_prev) x0, v), x_t = keep x_{t-1} + sqrt(beta) noise.
    Vector mean(2 * d);
    mean << std::sqrt(a_prev) * x0.values(), keep * std::sqrt(a_prev) * x0.values();
    Matrix cov(2 * d, 2 * d);
    cov << v * eye, keep * v * eye, keep * v * eye, (keep * keep * v + beta) * eye;
    const GaussianMoments joint(std::move(mean), std::move(cov));

    const Vector x_t = Vector::LinSpaced(d, -0.8, 1.3);
    const GaussianMoments oracle = condition(joint, observed, x_t);
    const IsotropicGaussian post = ddpm_posterior(x0, LatentPoint(x_t), t, sched);
    worst = std::max(worst, moment_deviation(post.mean, post.var, oracle));

    // Law of total mean/variance over x_t ~ q(x_t | x0) recovers q(x_{t-1} | x0).
    const IsotropicGaussian marg_t = ddpm_forward_marginal(x0, t, sched);
    const IsotropicGaussian at_zero = ddpm_posterior(x0, LatentPoint(Vector::Zero(d)), t, sched);
    const IsotropicGaussian at_one = ddpm_posterior(x0, LatentPoint(Vector::Ones(d)), t, sched);
    const double slope = at_one.mean[0] - at_zero.mean[0];
    const Vector total_mean = at_zero.mean + slope * marg_t.mean;
    const double total_var = slope * slope * marg_t.var + post.var;
    const Vector prev_mean = std::sqrt(a_prev) * x0.values();
    worst = std::max({worst, (total_mean - prev_mean).cwiseAbs().maxCoeff(), std::abs(total_var - v)});
  }
  return worst;
}

std::vector<MarginalCheck> sampler_marginal_checks(const Triplet& trip, const BridgeSchedule& sched,
                                                   const std::vector<int>& grid_indices,
                                                   std::uint64_t seed, std::size_t n_chains,
                                                   double k_sigma) {
  const int n = sched.sample_steps();
  for (int k : grid_indices) {
    if (k < 1 || k >= n) throw std::invalid_argument("sampler_marginal_checks: need interior grid indices");
  }
  const KnownTargetDenoiser den(trip.x.values());
  const auto d = static_cast<Eigen::Index>(trip.dim());
  std::vector<Matrix> states_y(grid_indices.size(), Matrix(d, static_cast<Eigen::Index>(n_chains)));
  std::vector<Matrix> states_z = states_y;

  SampleOptions opts;
  opts.record_trajectory = true;
  for (std::size_t c = 0; c < n_chains; ++c) {
    RngStream rng = substream(seed, c);
    const SampleReport r = sample(den, trip.y, trip.z, sched, opts, rng);
    for (std::size_t g = 0; g < grid_indices.size(); ++g) {
      const auto row = static_cast<std::size_t>(n - grid_indices[g]);
      states_y[g].col(static_cast<Eigen::Index>(c)) = r.trajectory_y[row].state;
      states_z[g].col(static_cast<Eigen::Index>(c)) = r.trajectory_z[row].state;
    }
  }

  std::vector<MarginalCheck> out;
  for (std::size_t g = 0; g < grid_indices.size(); ++g) {
    const double t = sched.grid_time(grid_indices[g]);
    for (BridgeSide side : {BridgeSide::PrevEndpoint, BridgeSide::NextEndpoint}) {
      const GaussianMoments target = forward_marginal(trip, side, t, sched).to_moments();
      const Matrix& states = side == BridgeSide::PrevEndpoint ? states_y[g] : states_z[g];
      out.push_back({t, side, moment_test(states, target, k_sigma)});
    }
  }
  return out;
}

SdeSuiteReport run_sde_suite(const SdeSuiteOptions& opts) {
  const LatentPoint start(opts.start);
  const LatentPoint end(opts.endpoint);
  const GaussianMoments target_fwd = pinned_bridge(start, end, opts.t_query, opts.horizon).to_moments();

  auto forward_at = [&](int steps) {
    const SdeConfig cfg(opts.horizon, steps, end, start);
    const double q = opts.t_query / cfg.step();
    const int query = static_cast<int>(std::lround(q));
    if (std::abs(q - query) > 1e-9) throw std::invalid_argument("run_sde_suite: t_query is off the grid");
    return euler_maruyama_marginal(cfg, opts.seed, opts.n_paths, query);
  };
  auto errors = [&](const Matrix& samples) {
    const Vector m = samples.rowwise().mean();
    const Matrix centered = samples.colwise() - m;
    const Vector v = centered.rowwise().squaredNorm() / static_cast<double>(samples.cols() - 1);
    const double var_target = target_fwd.cov()(0, 0);
    return std::pair{(m - target_fwd.mean()).cwiseAbs().maxCoeff(),
                     (v.array() - var_target).abs().maxCoeff()};
  };

  SdeSuiteReport rep;
  const Matrix fine = forward_at(opts.fine_steps);
  const Matrix coarse = forward_at(opts.coarse_steps);
  rep.forward = moment_test(fine, target_fwd);
  std::tie(rep.forward_mean_err_fine, rep.forward_var_err_fine) = errors(fine);
  std::tie(rep.forward_mean_err_coarse, rep.forward_var_err_coarse) = errors(coarse);

  const Matrix rev = reverse_marginal(start, end, opts.horizon, opts.t_from, opts.t_to,
                                      opts.reverse_steps, opts.seed + 1, opts.n_paths);
  rep.reverse = moment_test(rev, pinned_bridge(start, end, opts.t_to, opts.horizon).to_moments());
  // Euler steps carry the mean along the straight line exactly, so the
  // discretization bias lives in the variance. Both step counts share the
  // path seeds.
  const bool converges = rep.forward_var_err_fine <= rep.forward_var_err_coarse;
  rep.pass = rep.forward.pass && rep.reverse.pass && converges;
  return rep;
}

}  // namespace cbbd
