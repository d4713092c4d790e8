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
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cbbd/denoiser.hpp"
#include "cbbd/rng.hpp"

namespace cbbd {

enum class Activation { Softplus, Identity };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

/// Activations saved by a forward pass; valid only for the parameter version
/// it was computed with.
struct MlpCache {
  std::vector<Matrix> inputs;  // input to each layer (layer 0: network input)
  std::vector<Matrix> pre;     // pre-activation of each hidden layer
  std::uint64_t version = 0;
};

/*!
 * Fully connected denoiser: input concat(x_t, y, z, label) of length 3d + 1,
 * hidden layers with a smooth activation, linear output of length d.
 *
 * Parameters live in one flat buffer, layer by layer: W (out x in,
 * column-major) followed by b (out).
 */
class MlpDenoiser final : public Denoiser {
 public:
  /// Layer widths must start at 3d + 1 and end at d.
  MlpDenoiser(std::vector<int> widths, Activation act, RngStream& init_rng);
  MlpDenoiser(std::vector<int> widths, Activation act, std::vector<double> params);

  /// Default shape 3d+1 -> 128 -> 128 -> d.
  static MlpDenoiser with_default_shape(std::size_t dim, RngStream& init_rng,
                                        int hidden = 128, Activation act = Activation::Softplus);

  const std::vector<int>& widths() const { return widths_; }
  Activation activation() const { return act_; }
  std::size_t dim() const { return static_cast<std::size_t>(widths_.back()); }
  std::size_t parameter_count() const { return params_.size(); }
  std::uint64_t version() const { return version_; }

  std::span<const double> parameters() const { return params_; }
  /// Mutable view; invalidates outstanding caches.
  std::span<double> mutable_parameters();

  Matrix forward(const Matrix& input, MlpCache* cache = nullptr) const;
  /// Gradient of sum(output_grad .* output) w.r.t. the flat parameters.
  std::vector<double> backward(const MlpCache& cache, const Matrix& output_grad) const;

  Matrix predict_batch(const DenoiserBatch& batch) const override;

  static Matrix assemble_input(const DenoiserBatch& batch);

 private:
  struct LayerView {
    std::size_t w_offset;
    std::size_t b_offset;
    int in;
    int out;
  };

  void build_layout();

  std::vector<int> widths_;
  Activation act_;
  std::vector<double> params_;
  std::vector<LayerView> layers_;
  std::uint64_t version_ = 1;
};

std::pair<Vector, MlpCache> mlp_forward(const MlpDenoiser& net, const DenoiserInput& in);
std::vector<double> mlp_backward(const MlpDenoiser& net, const MlpCache& cache,
                                 const Matrix& output_grad);

/// Text checkpoint: header, widths, activation, parameters as hex floats
/// (bit-exact round trip).
void save_checkpoint(const MlpDenoiser& net, const std::filesystem::path& path);
MlpDenoiser load_checkpoint(const std::filesystem::path& path);

}  // namespace cbbd
