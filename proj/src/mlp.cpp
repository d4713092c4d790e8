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

#include "cbbd/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cbbd {
namespace {

constexpr const char* kCheckpointMagic = "cbbd-mlp";
constexpr int kCheckpointVersion = 1;

using MatMap = Eigen::Map<Matrix>;
using ConstMatMap = Eigen::Map<const Matrix>;
using ConstVecMap = Eigen::Map<const Vector>;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(Activation act) {
  return act == Activation::Softplus ? "softplus" : "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "softplus") return Activation::Softplus;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

MlpDenoiser::MlpDenoiser(std::vector<int> widths, Activation act, RngStream& init_rng)
    : widths_(std::move(widths)), act_(act) {
  build_layout();
  // Weights ~ N(0, 1/fan_in); biases start at zero.
  for (const LayerView& l : layers_) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (std::size_t i = 0; i < static_cast<std::size_t>(l.in) * static_cast<std::size_t>(l.out); ++i) {
      params_[l.w_offset + i] = scale * init_rng.normal();
    }
  }
}

MlpDenoiser::MlpDenoiser(std::vector<int> widths, Activation act, std::vector<double> params)
    : widths_(std::move(widths)), act_(act) {
  build_layout();
  if (params.size() != params_.size()) {
    throw std::invalid_argument("MlpDenoiser: parameter count does not match widths");
  }
  for (double p : params) {
    if (!std::isfinite(p)) throw std::invalid_argument("MlpDenoiser: non-finite parameter");
  }
  params_ = std::move(params);
}

MlpDenoiser MlpDenoiser::with_default_shape(std::size_t dim, RngStream& init_rng, int hidden,
                                            Activation act) {
  const int d = static_cast<int>(dim);
  return MlpDenoiser({3 * d + 1, hidden, hidden, d}, act, init_rng);
}

void MlpDenoiser::build_layout() {
  if (widths_.size() < 2) throw std::invalid_argument("MlpDenoiser: need at least two widths");
  for (int w : widths_) {
    if (w < 1) throw std::invalid_argument("MlpDenoiser: widths must be positive");
  }
  const int d = widths_.back();
  if (widths_.front() != 3 * d + 1) {
    throw std::invalid_argument("MlpDenoiser: input width must be 3 * output width + 1");
  }
  std::size_t offset = 0;
  layers_.clear();
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    LayerView v{offset, 0, widths_[l], widths_[l + 1]};
    offset += static_cast<std::size_t>(v.in) * static_cast<std::size_t>(v.out);
    v.b_offset = offset;
    offset += static_cast<std::size_t>(v.out);
    layers_.push_back(v);
  }
  params_.assign(offset, 0.0);
}

std::span<double> MlpDenoiser::mutable_parameters() {
  ++version_;
  return params_;
}

Matrix MlpDenoiser::forward(const Matrix& input, MlpCache* cache) const {
  if (input.rows() != widths_.front()) throw std::invalid_argument("mlp_forward: input width mismatch");
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->pre.clear();
    cache->version = version_;
  }
  Matrix h = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerView& v = layers_[l];
    const ConstMatMap w(params_.data() + v.w_offset, v.out, v.in);
    const ConstVecMap b(params_.data() + v.b_offset, v.out);
    Matrix z = w * h;
    z.colwise() += b;
    if (cache != nullptr) cache->inputs.push_back(h);
    if (l + 1 == layers_.size()) return z;
    if (cache != nullptr) cache->pre.push_back(z);
    h = act_ == Activation::Softplus ? Matrix(z.unaryExpr(&softplus)) : z;
  }
  return h;
}

std::vector<double> MlpDenoiser::backward(const MlpCache& cache, const Matrix& output_grad) const {
  if (cache.version != version_) throw std::logic_error("mlp_backward: stale cache");
  if (cache.inputs.size() != layers_.size() || cache.pre.size() + 1 != layers_.size()) {
    throw std::logic_error("mlp_backward: cache does not match network");
  }
  if (output_grad.rows() != widths_.back() || output_grad.cols() != cache.inputs.front().cols()) {
    throw std::invalid_argument("mlp_backward: output gradient shape mismatch");
  }
  std::vector<double> grads(params_.size(), 0.0);
  Matrix delta = output_grad;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const LayerView& v = layers_[li];
    MatMap gw(grads.data() + v.w_offset, v.out, v.in);
    Eigen::Map<Vector> gb(grads.data() + v.b_offset, v.out);
    gw.noalias() = delta * cache.inputs[li].transpose();
    gb = delta.rowwise().sum();
    if (li == 0) break;
    const ConstMatMap w(params_.data() + v.w_offset, v.out, v.in);
    Matrix upstream = w.transpose() * delta;
    if (act_ == Activation::Softplus) {
      upstream.array() *= cache.pre[li - 1].unaryExpr(&sigmoid).array();
    }
    delta = std::move(upstream);
  }
  return grads;
}

Matrix MlpDenoiser::assemble_input(const DenoiserBatch& batch) {
  batch.validate();
  const auto d = batch.x_t.rows();
  Matrix in(3 * d + 1, batch.size());
  in.topRows(d) = batch.x_t;
  in.middleRows(d, d) = batch.y;
  in.middleRows(2 * d, d) = batch.z;
  in.bottomRows(1) = batch.labels.transpose();
  return in;
}

Matrix MlpDenoiser::predict_batch(const DenoiserBatch& batch) const {
  if (batch.x_t.rows() != widths_.back()) throw std::invalid_argument("MlpDenoiser: dimension mismatch");
  return forward(assemble_input(batch));
}

std::pair<Vector, MlpCache> mlp_forward(const MlpDenoiser& net, const DenoiserInput& in) {
  if (in.x_t.dim() != net.dim()) throw std::invalid_argument("mlp_forward: dimension mismatch");
  const DenoiserBatch batch{in.x_t.values(), Vector::Constant(1, in.label), in.y.values(),
                            in.z.values()};
  MlpCache cache;
  Vector out = net.forward(MlpDenoiser::assemble_input(batch), &cache).col(0);
  return {std::move(out), std::move(cache)};
}

std::vector<double> mlp_backward(const MlpDenoiser& net, const MlpCache& cache,
                                 const Matrix& output_grad) {
  return net.backward(cache, output_grad);
}

void save_checkpoint(const MlpDenoiser& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "widths";
  for (int w : net.widths()) out << ' ' << w;
  out << "\nactivation " << to_string(net.activation()) << '\n';
  out << "params " << net.parameter_count() << '\n';
  char buf[64];
  for (double p : net.parameters()) {
    std::snprintf(buf, sizeof(buf), "%a\n", p);
    out << buf;
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

MlpDenoiser load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  auto fail = [&](const std::string& what) {
    return std::runtime_error("load_checkpoint: " + path.string() + ": " + what);
  };
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) throw fail("bad header");
  if (version != kCheckpointVersion) throw fail("unsupported version " + std::to_string(version));

  std::string line;
  std::getline(in, line);
  if (!std::getline(in, line)) throw fail("missing widths");
  std::istringstream ws(line);
  std::string key;
  ws >> key;
  if (key != "widths") throw fail("expected widths");
  std::vector<int> widths;
  for (int w; ws >> w;) widths.push_back(w);

  std::string act_name;
  if (!(in >> key >> act_name) || key != "activation") throw fail("expected activation");
  std::size_t count = 0;
  if (!(in >> key >> count) || key != "params") throw fail("expected params");

  std::vector<double> params;
  params.reserve(count);
  std::string tok;
  while (params.size() < count && in >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw fail("bad parameter token '" + tok + "'");
    params.push_back(v);
  }
  if (params.size() != count) throw fail("truncated parameter list");
  return MlpDenoiser(std::move(widths), parse_activation(act_name), std::move(params));
}

}  // namespace cbbd
