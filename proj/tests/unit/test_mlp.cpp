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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <doctest.h>

#include "cbbd/mlp.hpp"
#include "cbbd/rng.hpp"

using namespace cbbd;

namespace {

Matrix random_matrix(RngStream& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) m.col(j) = rng.normal_vector(static_cast<std::size_t>(rows));
  return m;
}

double probe(const MlpDenoiser& net, const Matrix& input, const Matrix& weights) {
  return (net.forward(input).array() * weights.array()).sum();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cbbd_test_" + name);
}

}  // namespace

TEST_CASE("gradient matches central differences on 200 parameters") {
  RngStream rng = substream(42, 0);
  MlpDenoiser net = MlpDenoiser::with_default_shape(2, rng);
  const Matrix input = random_matrix(rng, 7, 5);
  const Matrix weights = random_matrix(rng, 2, 5);

  MlpCache cache;
  net.forward(input, &cache);
  const std::vector<double> grads = net.backward(cache, weights);
  REQUIRE(grads.size() == net.parameter_count());

  std::set<std::size_t> picked;
  while (picked.size() < 200) picked.insert(static_cast<std::size_t>(rng.next_u64() % net.parameter_count()));

  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i : picked) {
    const double saved = net.parameters()[i];
    net.mutable_parameters()[i] = saved + h;
    const double up = probe(net, input, weights);
    net.mutable_parameters()[i] = saved - h;
    const double down = probe(net, input, weights);
    net.mutable_parameters()[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double rel = std::abs(fd - grads[i]) / std::max({std::abs(fd), std::abs(grads[i]), 1e-6});
    worst = std::max(worst, rel);
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("zero output gradient gives zero parameter gradient") {
  RngStream rng = substream(1, 0);
  const MlpDenoiser net = MlpDenoiser::with_default_shape(3, rng, 8);
  MlpCache cache;
  net.forward(random_matrix(rng, 10, 4), &cache);
  const std::vector<double> g = net.backward(cache, Matrix::Zero(3, 4));
  CHECK(std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("linear network reproduces the least-squares gradient") {
  // One linear layer W x + b with loss sum ||W x + b - target||^2:
  // dW = 2 R X^T, db = 2 R 1 with residual R.
  RngStream rng = substream(5, 0);
  const MlpDenoiser net({4, 1}, Activation::Identity, rng);
  const Matrix x = random_matrix(rng, 4, 6);
  const Matrix target = random_matrix(rng, 1, 6);
  MlpCache cache;
  const Matrix out = net.forward(x, &cache);
  const Matrix residual = out - target;
  const std::vector<double> g = net.backward(cache, 2.0 * residual);
  const Matrix dw = 2.0 * residual * x.transpose();
  for (int i = 0; i < 4; ++i) CHECK(g[static_cast<std::size_t>(i)] == doctest::Approx(dw(0, i)).epsilon(1e-13));
  CHECK(g[4] == doctest::Approx(2.0 * residual.sum()).epsilon(1e-13));

  // Deeper identity network: the composed map is still linear.
  const MlpDenoiser deep({4, 3, 1}, Activation::Identity, rng);
  const Matrix w1 = Eigen::Map<const Matrix>(deep.parameters().data(), 3, 4);
  const Vector b1 = Eigen::Map<const Vector>(deep.parameters().data() + 12, 3);
  const Matrix w2 = Eigen::Map<const Matrix>(deep.parameters().data() + 15, 1, 3);
  const double b2 = deep.parameters()[18];
  const Matrix expect = (w2 * ((w1 * x).colwise() + b1)).array() + b2;
  CHECK((deep.forward(x) - expect).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("stale caches are rejected") {
  RngStream rng = substream(3, 0);
  MlpDenoiser net = MlpDenoiser::with_default_shape(1, rng, 4);
  MlpCache cache;
  net.forward(random_matrix(rng, 4, 2), &cache);
  net.mutable_parameters()[0] += 0.1;
  CHECK_THROWS_AS(net.backward(cache, Matrix::Ones(1, 2)), std::logic_error);
}

TEST_CASE("shape validation") {
  RngStream rng = substream(3, 0);
  CHECK_THROWS_AS(MlpDenoiser({5, 8, 2}, Activation::Softplus, rng), std::invalid_argument);
  CHECK_THROWS_AS(MlpDenoiser({7}, Activation::Softplus, rng), std::invalid_argument);
  CHECK_THROWS_AS(MlpDenoiser({7, 2}, Activation::Softplus, std::vector<double>(3, 0.0)),
                  std::invalid_argument);
  const MlpDenoiser net = MlpDenoiser::with_default_shape(2, rng, 8);
  CHECK(net.parameter_count() == static_cast<std::size_t>(7 * 8 + 8 + 8 * 8 + 8 + 8 * 2 + 2));
  CHECK_THROWS_AS(net.forward(Matrix::Zero(6, 1)), std::invalid_argument);
  CHECK(parse_activation("softplus") == Activation::Softplus);
  CHECK_THROWS_AS(parse_activation("relu"), std::invalid_argument);
}

TEST_CASE("single-input helpers agree with the batch path") {
  RngStream rng = substream(6, 0);
  const MlpDenoiser net = MlpDenoiser::with_default_shape(2, rng, 8);
  const DenoiserInput in(LatentPoint{0.1, -0.3}, 0.6, LatentPoint{1.0, 2.0}, LatentPoint{-1.0, 0.5});
  const auto [out, cache] = mlp_forward(net, in);
  CHECK((out - net.predict(in).values()).cwiseAbs().maxCoeff() == 0.0);
  const std::vector<double> g = mlp_backward(net, cache, Matrix::Ones(2, 1));
  CHECK(g.size() == net.parameter_count());
}

TEST_CASE("checkpoint round trip is bit exact") {
  RngStream rng = substream(9, 0);
  const MlpDenoiser net = MlpDenoiser::with_default_shape(2, rng, 16);
  const auto path = temp_file("roundtrip.ckpt");
  save_checkpoint(net, path);
  const MlpDenoiser back = load_checkpoint(path);
  CHECK(back.widths() == net.widths());
  CHECK(back.activation() == net.activation());
  REQUIRE(back.parameter_count() == net.parameter_count());
  CHECK(std::equal(net.parameters().begin(), net.parameters().end(), back.parameters().begin()));
  std::filesystem::remove(path);
}

TEST_CASE("malformed checkpoints are reported") {
  const auto path = temp_file("bad.ckpt");
  {
    std::ofstream out(path);
    out << "cbbd-mlp 1\nwidths 4 1\nactivation softplus\nparams 5\n0x1p+0\n0x1p+0\n";
  }
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << "not-a-checkpoint\n";
  }
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
}
