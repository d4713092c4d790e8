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

#include "cbbd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cbbd/bridge.hpp"
#include "cbbd/ddpm.hpp"
#include "cbbd/verification.hpp"

namespace cbbd {

TrainResult train_denoiser(std::span<const Triplet> train, const BridgeSchedule& sched,
                           const TrainOptions& opts) {
  if (train.empty()) throw std::invalid_argument("train_denoiser: empty training set");
  if (opts.batch_size < 1 || opts.iterations < 0 || opts.log_every < 1) {
    throw std::invalid_argument("train_denoiser: bad options");
  }
  RngStream init_rng = substream(opts.seed, 0);
  RngStream rng = substream(opts.seed, 1);
  TrainResult result{MlpDenoiser::with_default_shape(train.front().dim(), init_rng, opts.hidden), {}};
  AdamConfig adam;
  adam.learning_rate = opts.learning_rate;
  AdamState opt(result.net.parameter_count(), adam);

  std::vector<Triplet> batch;
  batch.reserve(static_cast<std::size_t>(opts.batch_size));
  double window = 0.0;
  int in_window = 0;
  for (int it = 1; it <= opts.iterations; ++it) {
    batch.clear();
    for (int b = 0; b < opts.batch_size; ++b) batch.push_back(train[rng.next_u64() % train.size()]);
    window += train_step(result.net, opt, batch, sched, rng).mean_loss;
    ++in_window;
    if (it % opts.log_every == 0 || it == opts.iterations) {
      result.log.push_back({it, window / in_window});
      window = 0.0;
      in_window = 0;
    }
  }
  return result;
}

double held_out_loss(const Denoiser& den, std::span<const Triplet> triplets, const BridgeSchedule& sched,
                     std::uint64_t seed, int repeats) {
  if (triplets.empty() || repeats < 1) throw std::invalid_argument("held_out_loss: nothing to evaluate");
  RngStream rng = substream(seed, 0);
  double total = 0.0;
  for (int r = 0; r < repeats; ++r) {
    TrainingBatch batch = draw_training_batch(triplets, sched, rng);
    total += evaluate_loss(den, batch);
  }
  return total / repeats;
}

SampleEval evaluate_sampler(const Denoiser& den, std::span<const Triplet> triplets,
                            const BridgeSchedule& sched, std::uint64_t seed, const SampleOptions& opts) {
  const int counts[] = {sched.sample_steps()};
  const SweepReport rep = step_count_sweep(den, triplets, counts, sched, seed, opts);
  return {rep.rows.front().rmse, rep.rows.front().max_abs_error};
}

TrainOptions train_options(const RunConfig& cfg) {
  TrainOptions opts;
  opts.iterations = cfg.iterations;
  opts.batch_size = cfg.batch_size;
  opts.learning_rate = cfg.learning_rate;
  opts.hidden = cfg.hidden;
  opts.seed = cfg.seed;
  return opts;
}

TaskSpec train_task(const RunConfig& cfg) {
  return {cfg.task, cfg.dim, cfg.noise_scale, cfg.train_count, cfg.task_seed};
}

TaskSpec eval_task(const RunConfig& cfg) {
  return {cfg.task, cfg.dim, cfg.noise_scale, cfg.eval_count, cfg.task_seed + 1};
}

std::unique_ptr<Denoiser> make_denoiser(const RunConfig& cfg) {
  switch (cfg.denoiser) {
    case DenoiserKind::Mlp:
      return std::make_unique<MlpDenoiser>(load_checkpoint(cfg.resolved_checkpoint()));
    case DenoiserKind::OracleMidpoint:
      return oracle_midpoint();
    case DenoiserKind::OracleGaussian:
      if (cfg.task != TaskKind::JointGaussian) {
        throw std::invalid_argument("oracle_gaussian needs the joint_gaussian task");
      }
      return oracle_gaussian(joint_gaussian_moments(cfg.dim, cfg.noise_scale), cfg.schedule());
  }
  throw std::invalid_argument("unknown denoiser");
}

VerifyReport run_verify_suite(std::uint64_t seed) {
  VerifyReport rep;
  const BridgeSchedule sched;
  const TaskData data = generate_triplets({TaskKind::Midpoint, 3, 0.0, 4, seed});
  for (const Triplet& trip : data.triplets) {
    rep.forward_marginal_max_dev =
        std::max(rep.forward_marginal_max_dev, forward_marginal_oracle_deviation(trip, sched));
    rep.backward_transition_max_dev =
        std::max(rep.backward_transition_max_dev, backward_transition_oracle_deviation(trip, sched));
  }

  const BbdmCrossCheckReport bb = bbdm_cross_check(1000, 1.0);
  rep.bbdm_max_dev = std::max(bb.max_mean_dev, bb.max_var_dev);

  const double split_cases[][5] = {
      {0.3, 0.9, 1.7, 0.4, -1.1}, {0.05, 1.0, 2.0, -0.2, 0.8}, {1.2, 1.3, 5.0, 2.5, -3.0}};
  for (const auto& c : split_cases) {
    const SplitPropertyReport sp = split_property_check(c[0], c[1], c[2], c[3], c[4]);
    rep.split_far_pin_max = std::max(rep.split_far_pin_max, std::abs(sp.far_pin_coefficient));
    rep.split_max_dev = std::max({rep.split_max_dev, sp.max_mean_diff, sp.var_diff});
  }

  const DdpmSchedule ddpm = make_ddpm_schedule(1e-4, 0.02, 1000);
  rep.ddpm_posterior_max_dev = ddpm_composition_deviation(ddpm, LatentPoint{0.7, -1.2, 0.1});

  const auto oracle = oracle_midpoint();
  RngStream rng = substream(seed, 1000);
  for (int steps : {1, 5, 50, 200}) {
    for (bool stochastic : {true, false}) {
      const Triplet& trip = data.triplets.front();
      const SampleReport r = sample(*oracle, trip.y, trip.z, sched.with_sample_steps(steps),
                                    CombineMode::Mean, rng, stochastic);
      rep.oracle_sampler_max_err = std::max(
          rep.oracle_sampler_max_err, (r.combined.values() - trip.x.values()).cwiseAbs().maxCoeff());
    }
  }

  rep.pass = rep.forward_marginal_max_dev <= kOracleTolerance &&
             rep.backward_transition_max_dev <= kOracleTolerance && rep.bbdm_max_dev <= kOracleTolerance &&
             rep.split_far_pin_max <= kSplitTolerance && rep.split_max_dev <= kSplitTolerance &&
             rep.ddpm_posterior_max_dev <= kOracleTolerance && rep.oracle_sampler_max_err <= kSamplerTolerance;
  return rep;
}

}  // namespace cbbd
