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

#include <cmath>

#include <doctest.h>

#include "cbbd/ddpm.hpp"
#include "cbbd/rng.hpp"
#include "cbbd/verification.hpp"

using namespace cbbd;

TEST_CASE("forward marginal") {
  const DdpmSchedule lin = make_ddpm_schedule(1e-4, 0.02, 1000);
  const IsotropicGaussian last = ddpm_forward_marginal(LatentPoint{1.0}, 1000, lin);
  CHECK(last.mean[0] < 0.01);
  CHECK(std::sqrt(lin.alpha(1000)) == doctest::Approx(0.00635).epsilon(0.01));

  const DdpmSchedule one = make_ddpm_schedule(0.5, 0.5, 1);
  const IsotropicGaussian q = ddpm_forward_marginal(LatentPoint{2.0, -1.0}, 1, one);
  CHECK(q.mean[0] == doctest::Approx(std::sqrt(0.5) * 2.0).epsilon(1e-15));
  CHECK(q.mean[1] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-15));
  CHECK(q.var == 0.5);

  for (int t : {1, 10, 999}) {
    const IsotropicGaussian zero = ddpm_forward_marginal(LatentPoint{0.0}, t, lin);
    CHECK(zero.mean[0] == 0.0);
    CHECK(zero.var == doctest::Approx(1.0 - lin.alpha(t)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(ddpm_forward_marginal(LatentPoint{0.0}, 1001, lin), std::out_of_range);
}

TEST_CASE("posterior boundary and ratio") {
  const DdpmSchedule lin = make_ddpm_schedule(1e-4, 0.02, 1000);
  const IsotropicGaussian first = ddpm_posterior(LatentPoint{0.3}, LatentPoint{1.0}, 1, lin);
  CHECK(first.var == 0.0);
  CHECK(first.mean[0] == doctest::Approx(0.3).epsilon(1e-14));
  const double ratio = lin.posterior_var(500) / lin.beta(500);
  CHECK(ratio > 0.99);
  CHECK(ratio < 1.0);
  CHECK(ratio == doctest::Approx(0.999135).epsilon(1e-5));
}

TEST_CASE("posterior equals Gaussian conditioning and composes with the marginal") {
  CHECK(ddpm_composition_deviation(make_ddpm_schedule(1e-4, 0.02, 1000), LatentPoint{0.7, -1.2}) <= 1e-10);
  CHECK(ddpm_composition_deviation(make_ddpm_schedule(0.01, 0.01, 100), LatentPoint{2.0}) <= 1e-10);
  CHECK(ddpm_composition_deviation(make_ddpm_schedule(0.5, 0.5, 1), LatentPoint{-1.0}) <= 1e-10);
}

TEST_CASE("reparameterized mean") {
  const DdpmSchedule lin = make_ddpm_schedule(1e-4, 0.02, 1000);
  RngStream rng = substream(2, 0);
  for (int t : {2, 50, 500, 1000}) {
    const LatentPoint x0(rng.normal_vector(3));
    const LatentPoint eps(rng.normal_vector(3));
    const double a = lin.alpha(t);
    const LatentPoint x_t(std::sqrt(a) * x0.values() + std::sqrt(1.0 - a) * eps.values());
    const LatentPoint reparam = ddpm_reparam_mean(x_t, eps, t, lin);
    const IsotropicGaussian post = ddpm_posterior(x0, x_t, t, lin);
    CHECK((reparam.values() - post.mean).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + post.mean.norm()));
  }

  const DdpmSchedule tiny = make_ddpm_schedule(1e-15, 1e-15, 3);
  const LatentPoint x_t{1.5, -0.5};
  const LatentPoint no_eps{0.0, 0.0};
  CHECK((ddpm_reparam_mean(x_t, no_eps, 3, tiny).values() - x_t.values()).cwiseAbs().maxCoeff() <= 1e-12);

  const DdpmSchedule half = make_ddpm_schedule(0.5, 0.5, 1);
  const double expect = (1.0 / std::sqrt(0.5)) * (1.0 - 0.5 / std::sqrt(0.5));
  CHECK(ddpm_reparam_mean(LatentPoint{1.0}, LatentPoint{1.0}, 1, half)[0] == doctest::Approx(expect).epsilon(1e-15));
  CHECK(expect == doctest::Approx(0.4142).epsilon(1e-4));
}

TEST_CASE("objective value") {
  CHECK(ddpm_objective_value(LatentPoint{0.3, 0.2}, LatentPoint{0.3, 0.2}) == 0.0);
  CHECK(ddpm_objective_value(LatentPoint{1.0}, LatentPoint{0.0}) == 1.0);
  CHECK(ddpm_objective_value(LatentPoint{1.0, 1.0}, LatentPoint{0.0, 0.0}) == 2.0);
  CHECK_THROWS_AS(ddpm_objective_value(LatentPoint{1.0}, LatentPoint{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("cumulative variance ledger") {
  const VarianceLedger lin = ddpm_cumulative_variance(make_ddpm_schedule(1e-4, 0.02, 1000));
  CHECK(lin.total == doctest::Approx(11.035506).epsilon(1e-6));
  CHECK(lin.initial_prior_var == 1.0);
  CHECK(lin.per_step_injected.size() == 999);

  const VarianceLedger single = ddpm_cumulative_variance(make_ddpm_schedule(0.3, 0.3, 1));
  CHECK(single.total == 1.0);

  const DdpmSchedule flat = make_ddpm_schedule(0.01, 0.01, 100);
  double direct = 1.0;
  double prod_prev = 1.0 - 0.01;
  for (int t = 2; t <= 100; ++t) {
    const double prod = prod_prev * (1.0 - 0.01);
    direct += (1.0 - prod_prev) / (1.0 - prod) * 0.01;
    prod_prev = prod;
  }
  const VarianceLedger fl = ddpm_cumulative_variance(flat);
  CHECK(fl.total == doctest::Approx(direct).epsilon(1e-13));
  CHECK(fl.total > 1.0);
  double sum = fl.initial_prior_var;
  for (double v : fl.per_step_injected) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(fl.total).epsilon(1e-14));
}

TEST_CASE("ledger rejects negative entries") {
  VarianceLedger ledger;
  ledger.add(0.5);
  CHECK(ledger.total == 0.5);
  CHECK_THROWS_AS(ledger.add(-1e-3), std::invalid_argument);
}
