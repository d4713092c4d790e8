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

// Experiment drivers shared by the CLI and the acceptance tests.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cbbd/config.hpp"
#include "cbbd/mlp.hpp"
#include "cbbd/pipeline.hpp"
#include "cbbd/tasks.hpp"

namespace cbbd {

struct TrainOptions {
  int iterations = 20000;
  int batch_size = 64;
  double learning_rate = 1e-3;
  int hidden = 128;
  std::uint64_t seed = 7;
  int log_every = 100;
};

struct LossRow {
  int iteration = 0;   // last iteration of the window
  double loss = 0.0;   // mean training loss over the window
};

struct TrainResult {
  MlpDenoiser net;
  std::vector<LossRow> log;
};

/// Trains a default-shape MLP. Each iteration draws batch_size triplets
/// uniformly (with replacement) and applies one train_step. Initialization
/// uses substream(seed, 0) and training substream(seed, 1).
TrainResult train_denoiser(std::span<const Triplet> train, const BridgeSchedule& sched,
                           const TrainOptions& opts);

/// Mean weighted loss over `repeats` passes of draw_training_batch on the
/// given triplets, with noise keyed by seed. Identical across denoisers.
double held_out_loss(const Denoiser& den, std::span<const Triplet> triplets,
                     const BridgeSchedule& sched, std::uint64_t seed, int repeats = 4);

struct SampleEval {
  double rmse = 0.0;
  double max_abs_error = 0.0;
};

/// Samples every triplet (substream(seed, i)) and scores the combined output.
SampleEval evaluate_sampler(const Denoiser& den, std::span<const Triplet> triplets,
                            const BridgeSchedule& sched, std::uint64_t seed, const SampleOptions& opts);

TrainOptions train_options(const RunConfig& cfg);
TaskSpec train_task(const RunConfig& cfg);
/// Held-out set: same task under key task_seed + 1.
TaskSpec eval_task(const RunConfig& cfg);

/// Builds the configured denoiser. The MLP is loaded from the checkpoint; the
/// Gaussian oracle needs the task's joint law.
std::unique_ptr<Denoiser> make_denoiser(const RunConfig& cfg);

struct VerifyReport {
  double forward_marginal_max_dev = 0.0;
  double backward_transition_max_dev = 0.0;
  double bbdm_max_dev = 0.0;
  double split_far_pin_max = 0.0;
  double split_max_dev = 0.0;
  double ddpm_posterior_max_dev = 0.0;
  double oracle_sampler_max_err = 0.0;
  bool pass = false;
};

inline constexpr double kOracleTolerance = 1e-10;
inline constexpr double kSplitTolerance = 1e-12;
inline constexpr double kSamplerTolerance = 1e-9;

/// Oracle-equivalence, split-property and oracle-sampler checks on triplets
/// drawn from `seed`.
VerifyReport run_verify_suite(std::uint64_t seed);

}  // namespace cbbd
