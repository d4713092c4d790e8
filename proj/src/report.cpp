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

#include "cbbd/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace cbbd {
namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void put_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

nlohmann::json to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json to_json(const VarianceLedger& ledger, bool include_steps) {
  nlohmann::json out = {{"initial_prior_var", ledger.initial_prior_var},
                        {"steps", ledger.per_step_injected.size()},
                        {"total", ledger.total}};
  if (include_steps) out["per_step_injected"] = ledger.per_step_injected;
  return out;
}

nlohmann::json to_json(const MomentTestReport& rep) {
  return {{"n_samples", rep.n_samples},
          {"max_mean_z", rep.max_mean_z},
          {"max_var_ratio_dev", rep.max_var_ratio_dev},
          {"k_sigma", rep.k_sigma},
          {"pass", rep.pass}};
}

nlohmann::json to_json(const SweepReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& r : rep.rows) {
    rows.push_back({{"steps", r.steps}, {"rmse", r.rmse}, {"max_abs_error", r.max_abs_error}});
  }
  return {{"rows", rows}};
}

nlohmann::json to_json(const SdeSuiteReport& rep) {
  return {{"forward", to_json(rep.forward)},
          {"reverse", to_json(rep.reverse)},
          {"forward_mean_err_coarse", rep.forward_mean_err_coarse},
          {"forward_mean_err_fine", rep.forward_mean_err_fine},
          {"forward_var_err_coarse", rep.forward_var_err_coarse},
          {"forward_var_err_fine", rep.forward_var_err_fine},
          {"pass", rep.pass}};
}

nlohmann::json to_json(const VerifyReport& rep) {
  return {{"forward_marginal_max_dev", rep.forward_marginal_max_dev},
          {"backward_transition_max_dev", rep.backward_transition_max_dev},
          {"bbdm_max_dev", rep.bbdm_max_dev},
          {"split_far_pin_max", rep.split_far_pin_max},
          {"split_max_dev", rep.split_max_dev},
          {"ddpm_posterior_max_dev", rep.ddpm_posterior_max_dev},
          {"oracle_sampler_max_err", rep.oracle_sampler_max_err},
          {"pass", rep.pass}};
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  return {{"seed", cfg.seed},
          {"horizon", cfg.horizon},
          {"train_steps", cfg.train_steps},
          {"sample_steps", cfg.sample_steps},
          {"gamma", cfg.gamma},
          {"task", to_string(cfg.task)},
          {"dim", cfg.dim},
          {"noise_scale", cfg.noise_scale},
          {"train_count", cfg.train_count},
          {"eval_count", cfg.eval_count},
          {"task_seed", cfg.task_seed},
          {"denoiser", to_string(cfg.denoiser)},
          {"combine", to_string(cfg.combine)},
          {"stochastic", cfg.stochastic},
          {"noise_sharing", to_string(cfg.noise_sharing)},
          {"iterations", cfg.iterations},
          {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate},
          {"hidden", cfg.hidden},
          {"output_dir", cfg.output_dir},
          {"checkpoint", cfg.checkpoint},
          {"trajectories", cfg.trajectories},
          {"sweep_counts", cfg.sweep_counts}};
}

void write_report(nlohmann::json report, const std::string& command, const std::filesystem::path& path) {
  report["schema_version"] = kReportSchemaVersion;
  report["command"] = command;
  std::ofstream out = open_for_write(path);
  out << report.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_metadata(const std::string& command, const std::filesystem::path& report_path) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const nlohmann::json meta = {{"schema_version", kReportSchemaVersion},
                               {"command", command},
                               {"report", report_path.filename().string()},
                               {"written_at", stamp}};
  std::filesystem::path meta_path = report_path;
  meta_path.replace_extension(".meta.json");
  std::ofstream out = open_for_write(meta_path);
  out << meta.dump(2) << '\n';
}

void write_trajectory_csv(std::span<const TrajectoryRow> rows, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  const Eigen::Index d = rows.empty() ? 0 : rows.front().state.size();
  out << 't';
  for (Eigen::Index i = 0; i < d; ++i) out << ",coord_" << i;
  out << ",injected_var\n";
  for (const TrajectoryRow& r : rows) {
    put_double(out, r.t);
    for (Eigen::Index i = 0; i < d; ++i) {
      out << ',';
      put_double(out, r.state[i]);
    }
    out << ',';
    put_double(out, r.injected_var);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_loss_csv(std::span<const LossRow> rows, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  out << "iteration,loss\n";
  for (const LossRow& r : rows) {
    out << r.iteration << ',';
    put_double(out, r.loss);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace cbbd
