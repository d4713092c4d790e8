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

#include "cbbd/cli.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbbd/config.hpp"
#include "cbbd/ddpm.hpp"
#include "cbbd/experiments.hpp"
#include "cbbd/report.hpp"
#include "cbbd/sde.hpp"
#include "cbbd/tasks.hpp"
#include "cbbd/verification.hpp"

namespace cbbd {
namespace {

namespace fs = std::filesystem;

// Options shared by every subcommand. Precedence: defaults < --config <
// --set < dedicated flags.
struct CommonArgs {
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "key=value or JSON config file")->check(CLI::ExistingFile);
  sub->add_option("--set", args.settings, "override one config key (key=value), repeatable");
  sub->add_option("--seed", args.seed, "run seed");
  sub->add_option("--output-dir", args.output_dir, "report directory (default $CBBD_OUTPUT_DIR or ./cbbd_out)");
}

RunConfig build_config(const CommonArgs& args) {
  RunConfig cfg = args.config_path.empty() ? RunConfig{} : read_config(args.config_path);
  for (const std::string& s : args.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (args.seed) cfg.seed = *args.seed;
  if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  return cfg;
}

fs::path prepare_output_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.resolved_output_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory not writable: " + dir.string());
  return dir;
}

void emit(const nlohmann::json& report, const std::string& command, const fs::path& path, std::ostream& out) {
  write_report(report, command, path);
  write_metadata(command, path);
  out << "wrote " << path.string() << '\n';
}

int run_verify(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_output_dir(cfg);
  const VerifyReport rep = run_verify_suite(cfg.seed);
  nlohmann::json j = to_json(rep);
  j["seed"] = cfg.seed;
  out << "forward marginal max dev     " << rep.forward_marginal_max_dev << '\n'
      << "backward transition max dev  " << rep.backward_transition_max_dev << '\n'
      << "bbdm reduction max dev       " << rep.bbdm_max_dev << '\n'
      << "split far-pin coefficient    " << rep.split_far_pin_max << '\n'
      << "split max dev                " << rep.split_max_dev << '\n'
      << "ddpm posterior max dev       " << rep.ddpm_posterior_max_dev << '\n'
      << "oracle sampler max error     " << rep.oracle_sampler_max_err << '\n'
      << (rep.pass ? "verify: PASS" : "verify: FAIL") << '\n';
  emit(j, "verify", dir / "verify.json", out);
  return rep.pass ? kExitOk : kExitFailed;
}

int run_variance(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_output_dir(cfg);
  const VarianceLedger ddpm = ddpm_cumulative_variance(make_ddpm_schedule(1e-4, 0.02, 1000));
  const BridgeSchedule sched = cfg.schedule();

  nlohmann::json totals = nlohmann::json::array();
  for (int n : cfg.sweep_counts) {
    totals.push_back({{"steps", n}, {"total", cbb_cumulative_variance(sched.with_sample_steps(n)).total}});
  }
  const double cbb50 = cbb_cumulative_variance(sched.with_sample_steps(50)).total;
  nlohmann::json j = {{"ddpm_schedule", {{"kind", "linear"}, {"beta_start", 1e-4}, {"beta_end", 0.02}, {"steps", 1000}}},
                      {"ddpm_bound", ddpm.total},
                      {"ddpm_ledger", to_json(ddpm, true)},
                      {"horizon", sched.horizon()},
                      {"cbb_total_50steps", cbb50},
                      {"cbb_totals", totals},
                      {"cbb_ledger", to_json(cbb_cumulative_variance(sched), true)}};
  out << "ddpm bound (linear 1e-4..0.02, 1000 steps)  " << ddpm.total << '\n'
      << "cbb total, T = " << sched.horizon() << ", 50 steps          " << cbb50 << '\n';
  emit(j, "variance", dir / "variance.json", out);
  return kExitOk;
}

int run_train(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_output_dir(cfg);
  const BridgeSchedule sched = cfg.schedule();
  const TaskData train = generate_triplets(train_task(cfg));
  const TaskData eval = generate_triplets(eval_task(cfg));

  const TrainResult res = train_denoiser(train.triplets, sched, train_options(cfg));
  const fs::path ckpt = cfg.resolved_checkpoint();
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  save_checkpoint(res.net, ckpt);
  write_loss_csv(res.log, dir / "loss.csv");

  const double loss = held_out_loss(res.net, eval.triplets, sched, cfg.seed + 1);
  const SampleEval se = evaluate_sampler(res.net, eval.triplets, sched, cfg.seed + 2, cfg.sample_options());
  nlohmann::json j = {{"config", config_to_json(cfg)},
                      {"checkpoint", ckpt.string()},
                      {"final_train_loss", res.log.empty() ? 0.0 : res.log.back().loss},
                      {"held_out_loss", loss},
                      {"sample_rmse", se.rmse},
                      {"sample_max_abs_error", se.max_abs_error}};
  out << "held-out loss " << loss << ", sampled rmse " << se.rmse << '\n';
  if (train.joint) {
    const GaussianOracle oracle(*train.joint, sched);
    const double oracle_loss = held_out_loss(oracle, eval.triplets, sched, cfg.seed + 1);
    j["oracle_held_out_loss"] = oracle_loss;
    j["loss_ratio_to_oracle"] = loss / oracle_loss;
    out << "oracle held-out loss " << oracle_loss << '\n';
  }
  emit(j, "train", dir / "train.json", out);
  return kExitOk;
}

int run_sample(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_output_dir(cfg);
  const BridgeSchedule sched = cfg.schedule();
  const auto den = make_denoiser(cfg);
  const TaskData eval = generate_triplets(eval_task(cfg));

  SampleOptions opts = cfg.sample_options();
  nlohmann::json items = nlohmann::json::array();
  double sq = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < eval.triplets.size(); ++i) {
    const Triplet& trip = eval.triplets[i];
    opts.record_trajectory = static_cast<int>(i) < cfg.trajectories;
    RngStream rng = substream(cfg.seed, i);
    const SampleReport r = sample(*den, trip.y, trip.z, sched, opts, rng);
    const Vector err = r.combined.values() - trip.x.values();
    sq += err.squaredNorm();
    worst = std::max(worst, err.cwiseAbs().maxCoeff());
    items.push_back({{"index", i},
                     {"x", to_json(trip.x.values())},
                     {"x_hat_y", to_json(r.x_hat_y.values())},
                     {"x_hat_z", to_json(r.x_hat_z.values())},
                     {"combined", to_json(r.combined.values())},
                     {"ledger_y_total", r.ledger_y.total},
                     {"ledger_z_total", r.ledger_z.total}});
    if (opts.record_trajectory) {
      write_trajectory_csv(r.trajectory_y, dir / ("trajectory_" + std::to_string(i) + "_y.csv"));
      write_trajectory_csv(r.trajectory_z, dir / ("trajectory_" + std::to_string(i) + "_z.csv"));
    }
  }
  const double rmse = std::sqrt(sq / static_cast<double>(eval.triplets.size() * static_cast<std::size_t>(cfg.dim)));
  nlohmann::json j = {{"config", config_to_json(cfg)},
                      {"rmse", rmse},
                      {"max_abs_error", worst},
                      {"cbb_ledger", to_json(cbb_cumulative_variance(sched))},
                      {"samples", items}};
  out << "sampled " << eval.triplets.size() << " triplets, rmse " << rmse << '\n';
  emit(j, "sample", dir / "sample.json", out);
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_output_dir(cfg);
  const auto den = make_denoiser(cfg);
  const TaskData eval = generate_triplets(eval_task(cfg));
  const SweepReport rep =
      step_count_sweep(*den, eval.triplets, cfg.sweep_counts, cfg.schedule(), cfg.seed, cfg.sample_options());
  for (const SweepRow& r : rep.rows) out << "steps " << r.steps << "  rmse " << r.rmse << '\n';
  nlohmann::json j = to_json(rep);
  j["config"] = config_to_json(cfg);
  emit(j, "sweep", dir / "sweep.json", out);
  return kExitOk;
}

int run_sde(const RunConfig& cfg, std::size_t n_paths, int dump_paths, std::ostream& out) {
  const fs::path dir = prepare_output_dir(cfg);
  SdeSuiteOptions opts;
  opts.seed = cfg.seed;
  opts.n_paths = n_paths;
  const SdeSuiteReport rep = run_sde_suite(opts);

  const SdeConfig sde_cfg(opts.horizon, opts.fine_steps, LatentPoint(opts.endpoint), LatentPoint(opts.start));
  for (int p = 0; p < dump_paths; ++p) {
    RngStream rng = substream(cfg.seed, static_cast<std::uint64_t>(p));
    const SdePath path = euler_maruyama(sde_cfg, rng);
    std::vector<TrajectoryRow> rows;
    for (std::size_t k = 0; k < path.times.size(); ++k) rows.push_back({path.times[k], path.states[k], 0.0});
    write_trajectory_csv(rows, dir / ("sde_path_" + std::to_string(p) + ".csv"));
  }
  out << "forward moment test " << (rep.forward.pass ? "pass" : "fail") << ", reverse moment test "
      << (rep.reverse.pass ? "pass" : "fail") << '\n';
  nlohmann::json j = to_json(rep);
  j["seed"] = cfg.seed;
  emit(j, "sde", dir / "sde.json", out);
  return rep.pass ? kExitOk : kExitFailed;
}

}  // namespace

int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consecutive Brownian bridge diffusion toolkit", "cbbd"};
  app.require_subcommand(1, 1);

  CommonArgs common;
  CLI::App* verify = app.add_subcommand("verify", "closed-form oracle and split-property checks");
  CLI::App* variance = app.add_subcommand("variance", "cumulative variance ledgers");
  CLI::App* train = app.add_subcommand("train", "train the MLP denoiser, write checkpoint and loss CSV");
  CLI::App* samp = app.add_subcommand("sample", "sample a held-out set, write report and trajectories");
  CLI::App* sweep = app.add_subcommand("sweep", "RMSE across sampling step counts");
  CLI::App* sde = app.add_subcommand("sde", "SDE forward/reverse consistency suite");
  for (CLI::App* sub : {verify, variance, train, samp, sweep, sde}) add_common(sub, common);

  std::optional<std::string> task;
  std::optional<int> iterations;
  train->add_option("--task", task, "midpoint | joint_gaussian | nonlinear_arc");
  train->add_option("--iterations", iterations, "training iterations");

  std::optional<std::string> denoiser;
  std::optional<int> steps;
  bool deterministic = false;
  for (CLI::App* sub : {samp, sweep}) {
    sub->add_option("--denoiser", denoiser, "mlp | oracle_midpoint | oracle_gaussian");
    sub->add_option("--task", task, "midpoint | joint_gaussian | nonlinear_arc");
    sub->add_flag("--deterministic", deterministic, "skip noise injection");
  }
  samp->add_option("--steps", steps, "sampling steps");

  std::size_t n_paths = 100000;
  int dump_paths = 0;
  sde->add_option("--paths", n_paths, "Monte Carlo paths")->check(CLI::Range(std::size_t{100}, std::size_t{100000000}));
  sde->add_option("--dump-paths", dump_paths, "write this many forward paths as CSV")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  RunConfig cfg;
  try {
    cfg = build_config(common);
    if (task) cfg.task = parse_task_kind(*task);
    if (iterations) cfg.iterations = *iterations;
    if (denoiser) cfg.denoiser = parse_denoiser_kind(*denoiser);
    if (steps) cfg.sample_steps = *steps;
    if (deterministic) cfg.stochastic = false;
    validate(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (verify->parsed()) return run_verify(cfg, out);
    if (variance->parsed()) return run_variance(cfg, out);
    if (train->parsed()) return run_train(cfg, out);
    if (samp->parsed()) return run_sample(cfg, out);
    if (sweep->parsed()) return run_sweep(cfg, out);
    if (sde->parsed()) return run_sde(cfg, n_paths, dump_paths, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace cbbd
