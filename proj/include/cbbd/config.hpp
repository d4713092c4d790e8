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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cbbd/core.hpp"
#include "cbbd/pipeline.hpp"
#include "cbbd/tasks.hpp"

namespace cbbd {

enum class DenoiserKind { Mlp, OracleMidpoint, OracleGaussian };

std::string_view to_string(DenoiserKind kind);
DenoiserKind parse_denoiser_kind(std::string_view name);

/// Everything a CLI run needs. Unset keys keep these defaults.
struct RunConfig {
  std::uint64_t seed = 7;

  double horizon = 2.0;
  int train_steps = 1000;
  int sample_steps = 50;
  double gamma = 5.0;

  TaskKind task = TaskKind::Midpoint;
  int dim = 2;
  double noise_scale = 0.3;
  int train_count = 16384;
  int eval_count = 1000;
  std::uint64_t task_seed = 1;

  DenoiserKind denoiser = DenoiserKind::Mlp;
  CombineMode combine = CombineMode::Mean;
  bool stochastic = true;
  NoiseSharing noise_sharing = NoiseSharing::Shared;

  int iterations = 20000;
  int batch_size = 64;
  double learning_rate = 1e-3;
  int hidden = 128;

  std::string output_dir;  // empty: $CBBD_OUTPUT_DIR, else ./cbbd_out
  std::string checkpoint;  // empty: <output_dir>/model.ckpt
  int trajectories = 4;
  std::vector<int> sweep_counts = {5, 20, 50, 100, 200};

  BridgeSchedule schedule() const;
  SampleOptions sample_options() const;
  std::filesystem::path resolved_output_dir() const;
  std::filesystem::path resolved_checkpoint() const;

  bool operator==(const RunConfig&) const = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sets one key from its textual value. Unknown keys and bad values throw
/// ConfigError naming the key.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses either a JSON object or flat `key = value` lines ('#' comments).
/// Duplicate and unknown keys are rejected.
RunConfig parse_config(std::string_view text);
RunConfig read_config(const std::filesystem::path& path);

/// Flat key=value text of every field; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& cfg);
void write_config(const RunConfig& cfg, const std::filesystem::path& path);

/// Validates every field by constructing the objects it parameterizes.
void validate(const RunConfig& cfg);

}  // namespace cbbd
