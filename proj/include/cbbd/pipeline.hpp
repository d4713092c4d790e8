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

// Training (one branch per draw, min-SNR weighted) and two-chain sampling for
// the consecutive bridge, plus the encode/decode seam around the sampler.

#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "cbbd/adam.hpp"
#include "cbbd/bridge.hpp"
#include "cbbd/ddpm.hpp"
#include "cbbd/denoiser.hpp"
#include "cbbd/mlp.hpp"
#include "cbbd/rng.hpp"

namespace cbbd {

// ---------------------------------------------------------------------------
// Training

struct TrainStepRecord {
  double s = 0.0;  // distance from the endpoint, Uniform(0, T)
  BridgeSide branch = BridgeSide::PrevEndpoint;
  double weight = 0.0;
  double loss = 0.0;  // weighted squared error
};

/// One regression example: denoiser input, target x_t - x and loss weight.
struct TrainingExample {
  Vector state;
  double label = 0.0;
  Vector target;
  double weight = 0.0;
  double t = 0.0;
};

/// State at distance s from the chosen endpoint:
/// x_s = (s/T) x + (1 - s/T) e + sqrt(s (T - s) / T) eps.
TrainingExample make_training_example(const Triplet& trip, const BridgeSchedule& sched, double s,
                                      BridgeSide branch, const Vector& eps);

struct TrainingBatch {
  DenoiserBatch inputs;
  Matrix targets;
  Vector weights;
  std::vector<TrainStepRecord> records;
};

/// Per triplet, draws s ~ U(0, T), eps ~ N(0, I), then r ~ U(0, 1) picking the
/// y branch when r < 0.5.
TrainingBatch draw_training_batch(std::span<const Triplet> triplets, const BridgeSchedule& sched,
                                  RngStream& rng);

/// Fills records[i].loss and returns the mean weighted loss.
double evaluate_loss(const Denoiser& den, TrainingBatch& batch);

struct TrainStepResult {
  std::vector<TrainStepRecord> records;
  double mean_loss = 0.0;
};

/// Draws a batch, computes the mean weighted loss and applies one Adam step.
TrainStepResult train_step(MlpDenoiser& net, AdamState& opt, std::span<const Triplet> triplets,
                           const BridgeSchedule& sched, RngStream& rng);
TrainStepRecord train_step(MlpDenoiser& net, AdamState& opt, const Triplet& trip,
                           const BridgeSchedule& sched, RngStream& rng);

// ---------------------------------------------------------------------------
// Sampling

enum class CombineMode { YOnly, ZOnly, Mean };
enum class NoiseSharing { Shared, Independent };

std::string_view to_string(CombineMode mode);
CombineMode parse_combine_mode(std::string_view name);
std::string_view to_string(NoiseSharing noise);
NoiseSharing parse_noise_sharing(std::string_view name);

struct SampleOptions {
  CombineMode mode = CombineMode::Mean;
  bool stochastic = true;
  NoiseSharing noise = NoiseSharing::Shared;
  bool record_trajectory = false;
};

struct TrajectoryRow {
  double t = 0.0;
  Vector state;
  double injected_var = 0.0;
};

struct SampleReport {
  LatentPoint x_hat_y;
  LatentPoint x_hat_z;
  LatentPoint combined;
  VarianceLedger ledger_y;
  VarianceLedger ledger_z;
  int steps = 0;
  std::vector<TrajectoryRow> trajectory_y;
  std::vector<TrajectoryRow> trajectory_z;
};

/// Runs both endpoint chains from t = T down to t = 0 on the uniform grid:
/// x_s = x_t - (delta/t) eps_hat + sqrt(s delta / t) noise.
SampleReport sample(const Denoiser& den, const LatentPoint& y, const LatentPoint& z,
                    const BridgeSchedule& sched, const SampleOptions& opts, RngStream& rng);
SampleReport sample(const Denoiser& den, const LatentPoint& y, const LatentPoint& z,
                    const BridgeSchedule& sched, CombineMode mode, RngStream& rng, bool stochastic);

/// Closed-form per-chain noise ledger of a stochastic run: sum of s delta / t.
VarianceLedger cbb_cumulative_variance(const BridgeSchedule& sched);

struct EquivalenceReport {
  double max_abs_diff = 0.0;
  SampleReport stochastic;
  SampleReport deterministic;
};

EquivalenceReport sample_deterministic_equivalence(const Denoiser& den, const LatentPoint& y,
                                                   const LatentPoint& z, const BridgeSchedule& sched,
                                                   RngStream& rng);

struct SweepRow {
  int steps = 0;
  double rmse = 0.0;
  double max_abs_error = 0.0;
  std::vector<Vector> outputs;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

/// RMSE of the combined output against the ground truth for each step count.
/// Triplet i always samples with substream(seed, i), so counts are compared on
/// identical noise keys.
SweepReport step_count_sweep(const Denoiser& den, std::span<const Triplet> triplets,
                             std::span<const int> counts, const BridgeSchedule& sched,
                             std::uint64_t seed, const SampleOptions& opts = {});

// ---------------------------------------------------------------------------
// Encode/decode seam

/// Dense real array with a shape, standing in for an image.
struct Frame {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  bool operator==(const Frame&) const = default;
};

class Codec {
 public:
  virtual ~Codec() = default;
  virtual LatentPoint encode(const Frame& frame) const = 0;
  virtual Frame decode(const LatentPoint& latent) const = 0;
};

/// Flattens a frame of fixed shape into a latent and back, bit-exact.
class IdentityCodec final : public Codec {
 public:
  explicit IdentityCodec(std::vector<std::size_t> shape);

  LatentPoint encode(const Frame& frame) const override;
  Frame decode(const LatentPoint& latent) const override;

 private:
  std::vector<std::size_t> shape_;
  std::size_t size_;
};

std::unique_ptr<Codec> identity_codec(std::vector<std::size_t> shape);

struct InterpolationResult {
  Frame frame;
  SampleReport report;
};

/// Encodes both neighbours, samples the middle latent and decodes the
/// combined estimate.
InterpolationResult interpolate_frames(const Codec& codec, const Denoiser& den, const Frame& prev,
                                       const Frame& next, const BridgeSchedule& sched,
                                       const SampleOptions& opts, RngStream& rng);

}  // namespace cbbd
