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

#include "cbbd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cbbd {

TrainingExample make_training_example(const Triplet& trip, const BridgeSchedule& sched, double s,
                                      BridgeSide branch, const Vector& eps) {
  const double horizon = sched.horizon();
  if (!(s >= 0.0 && s <= horizon)) throw std::out_of_range("make_training_example: s outside [0, T]");
  if (static_cast<std::size_t>(eps.size()) != trip.dim()) {
    throw std::invalid_argument("make_training_example: noise dimension mismatch");
  }
  const double t = horizon - s;
  const Vector& e = endpoint(trip, branch).values();
  const Vector& x = trip.x.values();
  TrainingExample ex;
  ex.t = t;
  ex.state = (s / horizon) * x + (1.0 - s / horizon) * e + std::sqrt(bridge_variance(s, horizon)) * eps;
  ex.label = scaled_time_label(branch, t, horizon);
  ex.target = ex.state - x;
  ex.weight = snr_weight(t, sched);
  return ex;
}

TrainingBatch draw_training_batch(std::span<const Triplet> triplets, const BridgeSchedule& sched,
                                  RngStream& rng) {
  if (triplets.empty()) throw std::invalid_argument("draw_training_batch: empty batch");
  const auto d = static_cast<Eigen::Index>(triplets.front().dim());
  const auto n = static_cast<Eigen::Index>(triplets.size());
  TrainingBatch batch{{Matrix(d, n), Vector(n), Matrix(d, n), Matrix(d, n)}, Matrix(d, n), Vector(n), {}};
  batch.records.reserve(triplets.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const Triplet& trip = triplets[static_cast<std::size_t>(j)];
    if (static_cast<Eigen::Index>(trip.dim()) != d) {
      throw std::invalid_argument("draw_training_batch: mixed dimensions");
    }
    const double s = sched.horizon() * rng.uniform();
    const Vector eps = rng.normal_vector(trip.dim());
    const BridgeSide branch = rng.uniform() < 0.5 ? BridgeSide::PrevEndpoint : BridgeSide::NextEndpoint;
    const TrainingExample ex = make_training_example(trip, sched, s, branch, eps);
    batch.inputs.x_t.col(j) = ex.state;
    batch.inputs.labels[j] = ex.label;
    batch.inputs.y.col(j) = trip.y.values();
    batch.inputs.z.col(j) = trip.z.values();
    batch.targets.col(j) = ex.target;
    batch.weights[j] = ex.weight;
    batch.records.push_back({s, branch, ex.weight, 0.0});
  }
  return batch;
}

double evaluate_loss(const Denoiser& den, TrainingBatch& batch) {
  const Matrix pred = den.predict_batch(batch.inputs);
  double total = 0.0;
  for (Eigen::Index j = 0; j < pred.cols(); ++j) {
    const double loss = batch.weights[j] * (pred.col(j) - batch.targets.col(j)).squaredNorm();
    batch.records[static_cast<std::size_t>(j)].loss = loss;
    total += loss;
  }
  return total / static_cast<double>(pred.cols());
}

TrainStepResult train_step(MlpDenoiser& net, AdamState& opt, std::span<const Triplet> triplets,
                           const BridgeSchedule& sched, RngStream& rng) {
  if (triplets.front().dim() != net.dim()) throw std::invalid_argument("train_step: dimension mismatch");
  TrainingBatch batch = draw_training_batch(triplets, sched, rng);
  MlpCache cache;
  const Matrix pred = net.forward(MlpDenoiser::assemble_input(batch.inputs), &cache);
  const auto n = static_cast<double>(pred.cols());

  TrainStepResult result;
  Matrix grad(pred.rows(), pred.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < pred.cols(); ++j) {
    const Vector diff = pred.col(j) - batch.targets.col(j);
    const double w = batch.weights[j];
    batch.records[static_cast<std::size_t>(j)].loss = w * diff.squaredNorm();
    total += batch.records[static_cast<std::size_t>(j)].loss;
    grad.col(j) = (2.0 * w / n) * diff;
  }
  const std::vector<double> grads = net.backward(cache, grad);
  opt.apply(net.mutable_parameters(), grads);

  result.records = std::move(batch.records);
  result.mean_loss = total / n;
  return result;
}

TrainStepRecord train_step(MlpDenoiser& net, AdamState& opt, const Triplet& trip,
                           const BridgeSchedule& sched, RngStream& rng) {
  return train_step(net, opt, std::span<const Triplet>(&trip, 1), sched, rng).records.front();
}

std::string_view to_string(CombineMode mode) {
  switch (mode) {
    case CombineMode::YOnly: return "y_only";
    case CombineMode::ZOnly: return "z_only";
    case CombineMode::Mean: return "mean";
  }
  return "mean";
}

CombineMode parse_combine_mode(std::string_view name) {
  if (name == "y_only") return CombineMode::YOnly;
  if (name == "z_only") return CombineMode::ZOnly;
  if (name == "mean") return CombineMode::Mean;
  throw std::invalid_argument("unknown combine mode: " + std::string(name));
}

std::string_view to_string(NoiseSharing noise) {
  return noise == NoiseSharing::Shared ? "shared" : "independent";
}

NoiseSharing parse_noise_sharing(std::string_view name) {
  if (name == "shared") return NoiseSharing::Shared;
  if (name == "independent") return NoiseSharing::Independent;
  throw std::invalid_argument("unknown noise sharing: " + std::string(name));
}

SampleReport sample(const Denoiser& den, const LatentPoint& y, const LatentPoint& z,
                    const BridgeSchedule& sched, const SampleOptions& opts, RngStream& rng) {
  if (y.dim() != z.dim()) throw std::invalid_argument("sample: dimension mismatch");
  const auto d = static_cast<Eigen::Index>(y.dim());
  const double horizon = sched.horizon();
  const int n = sched.sample_steps();

  // Column 0 is the y chain, column 1 the z chain.
  DenoiserBatch batch{Matrix(d, 2), Vector(2), Matrix(d, 2), Matrix(d, 2)};
  batch.x_t << y.values(), z.values();
  batch.y << y.values(), y.values();
  batch.z << z.values(), z.values();

  VarianceLedger ledger_y;
  VarianceLedger ledger_z;
  std::vector<TrajectoryRow> traj_y;
  std::vector<TrajectoryRow> traj_z;
  if (opts.record_trajectory) {
    traj_y.push_back({horizon, y.values(), 0.0});
    traj_z.push_back({horizon, z.values(), 0.0});
  }

  for (int k = n; k >= 1; --k) {
    const double t = sched.grid_time(k);
    const double s = sched.grid_time(k - 1);
    const double delta = t - s;
    batch.labels << scaled_time_label(BridgeSide::PrevEndpoint, t, horizon),
        scaled_time_label(BridgeSide::NextEndpoint, t, horizon);
    const Matrix eps_hat = den.predict_batch(batch);
    const double injected = opts.stochastic ? s * delta / t : 0.0;

    Matrix next = batch.x_t - (delta / t) * eps_hat;
    if (opts.stochastic) {
      const Vector noise_y = rng.normal_vector(y.dim());
      const Vector noise_z = opts.noise == NoiseSharing::Shared ? noise_y : rng.normal_vector(y.dim());
      next.col(0) += std::sqrt(injected) * noise_y;
      next.col(1) += std::sqrt(injected) * noise_z;
    }
    batch.x_t = std::move(next);
    ledger_y.add(injected);
    ledger_z.add(injected);
    if (opts.record_trajectory) {
      traj_y.push_back({s, batch.x_t.col(0), injected});
      traj_z.push_back({s, batch.x_t.col(1), injected});
    }
  }

  LatentPoint out_y(Vector(batch.x_t.col(0)));
  LatentPoint out_z(Vector(batch.x_t.col(1)));
  Vector combined;
  switch (opts.mode) {
    case CombineMode::YOnly: combined = out_y.values(); break;
    case CombineMode::ZOnly: combined = out_z.values(); break;
    case CombineMode::Mean: combined = 0.5 * (out_y.values() + out_z.values()); break;
  }
  return SampleReport{std::move(out_y),    std::move(out_z),    LatentPoint(std::move(combined)),
                      std::move(ledger_y), std::move(ledger_z), n,
                      std::move(traj_y),   std::move(traj_z)};
}

SampleReport sample(const Denoiser& den, const LatentPoint& y, const LatentPoint& z,
                    const BridgeSchedule& sched, CombineMode mode, RngStream& rng, bool stochastic) {
  SampleOptions opts;
  opts.mode = mode;
  opts.stochastic = stochastic;
  return sample(den, y, z, sched, opts, rng);
}

VarianceLedger cbb_cumulative_variance(const BridgeSchedule& sched) {
  VarianceLedger ledger;
  for (int k = sched.sample_steps(); k >= 1; --k) {
    const double t = sched.grid_time(k);
    const double s = sched.grid_time(k - 1);
    ledger.add(s * (t - s) / t);
  }
  return ledger;
}

EquivalenceReport sample_deterministic_equivalence(const Denoiser& den, const LatentPoint& y,
                                                   const LatentPoint& z, const BridgeSchedule& sched,
                                                   RngStream& rng) {
  SampleOptions opts;
  opts.stochastic = true;
  SampleReport stoch = sample(den, y, z, sched, opts, rng);
  opts.stochastic = false;
  SampleReport det = sample(den, y, z, sched, opts, rng);
  const double diff = std::max({(stoch.combined.values() - det.combined.values()).cwiseAbs().maxCoeff(),
                                (stoch.x_hat_y.values() - det.x_hat_y.values()).cwiseAbs().maxCoeff(),
                                (stoch.x_hat_z.values() - det.x_hat_z.values()).cwiseAbs().maxCoeff()});
  return {diff, std::move(stoch), std::move(det)};
}

SweepReport step_count_sweep(const Denoiser& den, std::span<const Triplet> triplets,
                             std::span<const int> counts, const BridgeSchedule& sched,
                             std::uint64_t seed, const SampleOptions& opts) {
  if (triplets.empty()) throw std::invalid_argument("step_count_sweep: empty evaluation set");
  SweepReport rep;
  for (int count : counts) {
    if (count < 1) throw std::invalid_argument("step_count_sweep: counts must be >= 1");
    const BridgeSchedule s = sched.with_sample_steps(count);
    SweepRow row;
    row.steps = count;
    double sq = 0.0;
    std::size_t n_coords = 0;
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      RngStream rng = substream(seed, i);
      const SampleReport r = sample(den, triplets[i].y, triplets[i].z, s, opts, rng);
      const Vector err = r.combined.values() - triplets[i].x.values();
      sq += err.squaredNorm();
      n_coords += static_cast<std::size_t>(err.size());
      row.max_abs_error = std::max(row.max_abs_error, err.cwiseAbs().maxCoeff());
      row.outputs.push_back(r.combined.values());
    }
    row.rmse = std::sqrt(sq / static_cast<double>(n_coords));
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

IdentityCodec::IdentityCodec(std::vector<std::size_t> shape)
    : shape_(std::move(shape)),
      size_(std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>())) {
  if (shape_.empty() || size_ == 0) throw std::invalid_argument("IdentityCodec: empty shape");
}

LatentPoint IdentityCodec::encode(const Frame& frame) const {
  if (frame.shape != shape_ || frame.data.size() != size_) {
    throw std::invalid_argument("IdentityCodec: frame shape mismatch");
  }
  return LatentPoint(Vector::Map(frame.data.data(), static_cast<Eigen::Index>(size_)));
}

Frame IdentityCodec::decode(const LatentPoint& latent) const {
  if (latent.dim() != size_) throw std::invalid_argument("IdentityCodec: latent size mismatch");
  return Frame{shape_, std::vector<double>(latent.values().begin(), latent.values().end())};
}

std::unique_ptr<Codec> identity_codec(std::vector<std::size_t> shape) {
  return std::make_unique<IdentityCodec>(std::move(shape));
}

InterpolationResult interpolate_frames(const Codec& codec, const Denoiser& den, const Frame& prev,
                                       const Frame& next, const BridgeSchedule& sched,
                                       const SampleOptions& opts, RngStream& rng) {
  const LatentPoint y = codec.encode(prev);
  const LatentPoint z = codec.encode(next);
  SampleReport report = sample(den, y, z, sched, opts, rng);
  Frame frame = codec.decode(report.combined);
  return {std::move(frame), std::move(report)};
}

}  // namespace cbbd
