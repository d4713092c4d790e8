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

#include <array>
#include <cmath>

#include <doctest.h>

#include "cbbd/bridge.hpp"
#include "cbbd/rng.hpp"
#include "cbbd/verification.hpp"

using namespace cbbd;

namespace {

const Triplet kScalar{LatentPoint{1.0}, LatentPoint{0.0}, LatentPoint{-1.0}};

Triplet sample_triplet(std::uint64_t seed, std::size_t d) {
  RngStream rng = substream(seed, 0);
  Vector y = rng.normal_vector(d);
  Vector x = rng.normal_vector(d);
  Vector z = rng.normal_vector(d);
  return Triplet(LatentPoint(y), LatentPoint(x), LatentPoint(z));
}

}  // namespace

TEST_CASE("pinned bridge endpoints and midpoint") {
  const LatentPoint a{0.0};
  const LatentPoint b{1.0};
  const IsotropicGaussian start = pinned_bridge(a, b, 0.0, 2.0);
  CHECK(start.mean[0] == 0.0);
  CHECK(start.var == 0.0);
  const IsotropicGaussian end = pinned_bridge(a, b, 2.0, 2.0);
  CHECK(end.mean[0] == 1.0);
  CHECK(end.var == 0.0);
  const IsotropicGaussian mid = pinned_bridge(a, b, 1.0, 2.0);
  CHECK(mid.mean[0] == 0.5);
  CHECK(mid.var == 0.5);
  CHECK_THROWS_AS(pinned_bridge(a, b, 2.5, 2.0), std::out_of_range);
  CHECK_THROWS_AS(pinned_bridge(a, LatentPoint{1.0, 2.0}, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("forward marginal pins and the scalar example") {
  const BridgeSchedule sched;
  const IsotropicGaussian at_x = forward_marginal(kScalar, BridgeSide::PrevEndpoint, 0.0, sched);
  CHECK(at_x.mean[0] == 0.0);
  CHECK(at_x.var == 0.0);
  const IsotropicGaussian at_y = forward_marginal(kScalar, BridgeSide::PrevEndpoint, 2.0, sched);
  CHECK(at_y.mean[0] == 1.0);
  CHECK(at_y.var == 0.0);
  const IsotropicGaussian mid_z = forward_marginal(kScalar, BridgeSide::NextEndpoint, 1.0, sched);
  CHECK(mid_z.mean[0] == -0.5);
  CHECK(mid_z.var == 0.5);
}

TEST_CASE("forward marginal variance is symmetric in t and T - t") {
  const BridgeSchedule sched;
  const Triplet trip = sample_triplet(3, 2);
  for (int k = 0; k <= 50; ++k) {
    const double t = sched.grid_time(k);
    const double tr = sched.grid_time(50 - k);
    CHECK(forward_marginal(trip, BridgeSide::PrevEndpoint, t, sched).var ==
          doctest::Approx(forward_marginal(trip, BridgeSide::NextEndpoint, tr, sched).var).epsilon(1e-15));
  }
}

TEST_CASE("forward marginal equals three-pin Wiener conditioning") {
  const BridgeSchedule sched;
  CHECK(forward_marginal_oracle_deviation(kScalar, sched) <= 1e-10);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CHECK(forward_marginal_oracle_deviation(sample_triplet(seed, 3), sched) <= 1e-10);
  }
  CHECK(forward_marginal_oracle_deviation(sample_triplet(9, 2), BridgeSchedule(0.7, 10, 7, 2)) <= 1e-10);
}

TEST_CASE("backward transition examples") {
  const LatentPoint x_t{4.0};
  const LatentPoint x_hat{0.0};
  const IsotropicGaussian last = backward_transition(x_t, 2.0, 0.0, x_hat);
  CHECK(last.mean[0] == 0.0);
  CHECK(last.var == 0.0);
  const IsotropicGaussian tiny = backward_transition(x_t, 2.0, 2.0 - 1e-12, x_hat);
  CHECK(tiny.mean[0] == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(tiny.var <= 1e-11);
  const IsotropicGaussian mid = backward_transition(x_t, 2.0, 1.0, x_hat);
  CHECK(mid.mean[0] == 2.0);
  CHECK(mid.var == 0.5);
  CHECK_THROWS_AS(backward_transition(x_t, 1.0, 1.0, x_hat), std::invalid_argument);
  CHECK_THROWS_AS(backward_transition(x_t, 0.0, 0.0, x_hat), std::invalid_argument);
}

TEST_CASE("backward transition equals conditioning the pinned pair") {
  const BridgeSchedule sched;
  CHECK(backward_transition_oracle_deviation(kScalar, sched) <= 1e-10);
  for (std::uint64_t seed : {4u, 5u}) {
    CHECK(backward_transition_oracle_deviation(sample_triplet(seed, 3), sched) <= 1e-10);
  }
}

TEST_CASE("composed backward transitions reproduce the forward marginals") {
  // Chains start at y (t = T) and step down with the true x substituted.
  const BridgeSchedule sched(2.0, 1000, 10, 5);
  const Triplet trip{LatentPoint{0.8}, LatentPoint{-0.4}, LatentPoint{1.3}};
  const int n = 100000;
  std::array<Matrix, 11> states;
  for (auto& m : states) m.resize(1, n);
  for (int c = 0; c < n; ++c) {
    RngStream rng = substream(21, static_cast<std::uint64_t>(c));
    Vector x = trip.y.values();
    states[10](0, c) = x[0];
    for (int k = 10; k >= 1; --k) {
      const IsotropicGaussian step =
          backward_transition(LatentPoint(x), sched.grid_time(k), sched.grid_time(k - 1), trip.x);
      x = step.mean + std::sqrt(step.var) * rng.normal_vector(1);
      states[static_cast<std::size_t>(k - 1)](0, c) = x[0];
    }
  }
  for (int k = 1; k <= 9; ++k) {
    const GaussianMoments target =
        forward_marginal(trip, BridgeSide::PrevEndpoint, sched.grid_time(k), sched).to_moments();
    CHECK(moment_test(states[static_cast<std::size_t>(k)], target).pass);
  }
  CHECK(moment_test(states[0], forward_marginal(trip, BridgeSide::PrevEndpoint, 0.0, sched).to_moments()).pass);
}

TEST_CASE("time labels") {
  CHECK(time_label(BridgeSide::PrevEndpoint, 0.0, 2.0) == 0.0);
  CHECK(time_label(BridgeSide::NextEndpoint, 0.0, 2.0) == 4.0);
  CHECK(time_label(BridgeSide::NextEndpoint, 2.0, 2.0) == 2.0);
  CHECK(time_label(BridgeSide::PrevEndpoint, 2.0, 2.0) == 2.0);
  CHECK(scaled_time_label(BridgeSide::NextEndpoint, 0.0, 2.0) == 1.0);
  CHECK(scaled_time_label(BridgeSide::PrevEndpoint, 0.5, 2.0) == 0.125);
  CHECK_THROWS_AS(time_label(BridgeSide::PrevEndpoint, -0.1, 2.0), std::out_of_range);

  for (double t : {0.0, 0.3, 1.0, 1.9}) {
    for (BridgeSide side : {BridgeSide::PrevEndpoint, BridgeSide::NextEndpoint}) {
      const SideAndTime back = decode_time_label(scaled_time_label(side, t, 2.0), 2.0);
      CHECK(back.side == side);
      CHECK(back.t == doctest::Approx(t).epsilon(1e-15));
    }
  }
  CHECK(decode_time_label(0.5, 2.0).side == BridgeSide::PrevEndpoint);
  CHECK_THROWS_AS(decode_time_label(1.5, 2.0), std::out_of_range);
}

TEST_CASE("min-SNR weights") {
  const BridgeSchedule sched;
  CHECK(snr_weight(1.0, sched) == 2.0);
  CHECK(snr_weight(0.0, sched) == 5.0);
  CHECK(snr_weight(1e-6, sched) == 5.0);
  CHECK(snr_weight(2.0, sched) == 5.0);
  double lowest = 1e300;
  double argmin = -1.0;
  for (int k = 0; k <= 200; ++k) {
    const double t = 2.0 * k / 200.0;
    const double w = snr_weight(t, sched);
    CHECK(w == doctest::Approx(snr_weight(2.0 - t, sched)).epsilon(1e-12));
    if (bridge_variance(t, 2.0) <= 1.0 / 5.0) CHECK(w == 5.0);
    if (w < lowest) {
      lowest = w;
      argmin = t;
    }
  }
  CHECK(argmin == 1.0);
  CHECK(lowest == doctest::Approx(4.0 / 2.0));
  CHECK_THROWS_AS(snr_weight(2.5, sched), std::out_of_range);
}

TEST_CASE("split property") {
  const SplitPropertyReport a = split_property_check(1, 2, 3, 2, 5);
  CHECK(std::abs(a.far_pin_coefficient) <= 1e-12);
  CHECK(a.three_point.mean()[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.three_point.cov()(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(a.two_point.mean()[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.max_mean_diff <= 1e-12);
  CHECK(a.var_diff <= 1e-12);

  const SplitPropertyReport far = split_property_check(1, 2, 3, 2, 999);
  CHECK(std::abs(far.three_point.mean()[0] - a.three_point.mean()[0]) <= 1e-12);
  CHECK(std::abs(far.three_point.cov()(0, 0) - a.three_point.cov()(0, 0)) <= 1e-12);

  const SplitPropertyReport c = split_property_check(0.5, 1.0, 2.0, 0.0, 0.0);
  CHECK(std::abs(c.three_point.mean()[0]) <= 1e-15);
  CHECK(c.three_point.cov()(0, 0) == doctest::Approx(0.25).epsilon(1e-14));

  CHECK_THROWS_AS(split_property_check(2, 1, 3, 0, 0), std::invalid_argument);
}

TEST_CASE("discrete bridge coefficients") {
  const BbdmCoefficients top = bbdm_coefficients(1000, 1000, 1.0);
  CHECK(top.m_t == 1.0);
  CHECK(top.delta_t == 0.0);
  const BbdmCoefficients mid = bbdm_coefficients(500, 1000, 1.0);
  CHECK(mid.delta_t == doctest::Approx(0.5).epsilon(1e-15));
  for (int k = 1; k <= 1000; ++k) {
    const BbdmCoefficients c = bbdm_coefficients(k, 1000, 1.0);
    CHECK(c.delta_step >= -1e-15);
    CHECK(std::abs(c.c_yt) <= 1e-12);
  }
  CHECK_THROWS_AS(bbdm_coefficients(0, 10, 1.0), std::out_of_range);
  CHECK_THROWS_AS(bbdm_coefficients(11, 10, 1.0), std::out_of_range);
  CHECK_THROWS_AS(bbdm_coefficients(1, 10, 0.0), std::invalid_argument);
}

TEST_CASE("discrete bridge posterior matches the closed-form transition") {
  const BbdmCrossCheckReport full = bbdm_cross_check(1000, 1.0);
  CHECK(full.comparisons == 2 * 999);
  CHECK(full.max_mean_dev <= 1e-10);
  CHECK(full.max_var_dev <= 1e-10);

  const BbdmCrossCheckReport two = bbdm_cross_check(2, 1.0);
  CHECK(two.comparisons == 2);
  CHECK(two.max_mean_dev <= 1e-14);
  CHECK(two.max_var_dev <= 1e-14);

  const BbdmCrossCheckReport half = bbdm_cross_check(1000, 0.5);
  CHECK(half.max_mean_dev <= 1e-10);
  CHECK(half.max_var_dev <= 1e-10);
}
