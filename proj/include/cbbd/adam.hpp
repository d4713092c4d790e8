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

#include <cstddef>
#include <span>
#include <vector>

namespace cbbd {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam (Kingma & Ba).
class AdamState {
 public:
  AdamState(std::size_t n_params, AdamConfig config = {});

  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  long step() const { return step_; }
  std::size_t size() const { return m_.size(); }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

  void apply(std::span<double> params, std::span<const double> grads);

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  long step_ = 0;
};

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

}  // namespace cbbd
