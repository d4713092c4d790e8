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

#include "cbbd/ddpm.hpp"

#include <cmath>
#include <stdexcept>

namespace cbbd {
namespace {

void require_index(int t_idx, const DdpmSchedule& sched, const char* who) {
  if (t_idx < 1 || t_idx > sched.steps()) {
    throw std::out_of_range(std::string(who) + ": step index out of range");
  }
}

}  // namespace

void VarianceLedger::add(double v) {
  if (v < 0.0) throw std::invalid_argument("VarianceLedger: negative variance");
  per_step_injected.push_back(v);
  total += v;
}

IsotropicGaussian ddpm_forward_marginal(const LatentPoint& x0, int t_idx, const DdpmSchedule& sched) {
  require_index(t_idx, sched, "ddpm_forward_marginal");
  const double a = sched.alpha(t_idx);
  return {std::sqrt(a) * x0.values(), 1.0 - a};
}

IsotropicGaussian ddpm_posterior(const LatentPoint& x0, const LatentPoint& x_t, int t_idx,
                                 const DdpmSchedule& sched) {
  require_index(t_idx, sched, "ddpm_posterior");
  if (x0.dim() != x_t.dim()) throw std::invalid_argument("ddpm_posterior: dimension mismatch");
  const double beta = sched.beta(t_idx);
  const double a_prev = sched.alpha(t_idx - 1);
  // 1 - alpha_t written as (1 - alpha_{t-1}) + alpha_{t-1} beta_t: exact at t = 1.
  const double one_minus = (1.0 - a_prev) + a_prev * beta;
  const double c0 = std::sqrt(a_prev) * beta / one_minus;
  const double ct = std::sqrt(1.0 - beta) * (1.0 - a_prev) / one_minus;
  return {c0 * x0.values() + ct * x_t.values(), sched.posterior_var(t_idx)};
}

LatentPoint ddpm_reparam_mean(const LatentPoint& x_t, const LatentPoint& eps, int t_idx,
                              const DdpmSchedule& sched) {
  require_index(t_idx, sched, "ddpm_reparam_mean");
  if (x_t.dim() != eps.dim()) throw std::invalid_argument("ddpm_reparam_mean: dimension mismatch");
  const double beta = sched.beta(t_idx);
  const double a_t = sched.alpha(t_idx);
  return LatentPoint((x_t.values() - beta / std::sqrt(1.0 - a_t) * eps.values()) /
                     std::sqrt(1.0 - beta));
}

double ddpm_objective_value(const LatentPoint& eps_pred, const LatentPoint& eps) {
  if (eps_pred.dim() != eps.dim()) throw std::invalid_argument("ddpm_objective_value: dimension mismatch");
  return (eps_pred.values() - eps.values()).squaredNorm();
}

VarianceLedger ddpm_cumulative_variance(const DdpmSchedule& sched) {
  VarianceLedger ledger;
  ledger.initial_prior_var = 1.0;
  ledger.total = 1.0;
  for (int t = sched.steps(); t >= 2; --t) ledger.add(sched.posterior_var(t));
  return ledger;
}

}  // namespace cbbd
