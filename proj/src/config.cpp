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

#include "cbbd/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cbbd {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view what) {
  throw ConfigError("key '" + std::string(key) + "': " + std::string(what) + " (got '" +
                    std::string(value) + "')");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) bad_value(key, value, "expected a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<int> parse_int_list(std::string_view key, std::string_view value) {
  std::vector<int> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(parse_number<int>(key, trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  if (out.empty()) bad_value(key, value, "expected a comma separated list");
  return out;
}

template <typename Fn>
auto parse_enum(std::string_view key, std::string_view value, Fn fn) {
  try {
    return fn(value);
  } catch (const std::invalid_argument& e) {
    bad_value(key, value, e.what());
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

// JSON scalars and arrays are turned back into the flat textual form so both
// syntaxes share one setter.
std::string json_to_setting(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) bad_value(key, v.dump(), "expected a list of integers");
      if (i) out += ',';
      out += v[i].dump();
    }
    return out;
  }
  bad_value(key, v.dump(), "unsupported JSON value");
}

RunConfig parse_json(std::string_view text) {
  std::set<std::string> seen;
  auto cb = [&seen](int depth, nlohmann::json::parse_event_t event, nlohmann::json& parsed) {
    if (depth == 1 && event == nlohmann::json::parse_event_t::key) {
      const std::string key = parsed.get<std::string>();
      if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    }
    return true;
  };
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end(), cb);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("JSON config must be an object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) apply_setting(cfg, key, json_to_setting(key, value));
  return cfg;
}

RunConfig parse_flat(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!seen.emplace(key).second) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

}  // namespace

std::string_view to_string(DenoiserKind kind) {
  switch (kind) {
    case DenoiserKind::Mlp: return "mlp";
    case DenoiserKind::OracleMidpoint: return "oracle_midpoint";
    case DenoiserKind::OracleGaussian: return "oracle_gaussian";
  }
  return "mlp";
}

DenoiserKind parse_denoiser_kind(std::string_view name) {
  if (name == "mlp") return DenoiserKind::Mlp;
  if (name == "oracle_midpoint") return DenoiserKind::OracleMidpoint;
  if (name == "oracle_gaussian") return DenoiserKind::OracleGaussian;
  throw std::invalid_argument("unknown denoiser: " + std::string(name));
}

BridgeSchedule RunConfig::schedule() const {
  return BridgeSchedule(horizon, train_steps, sample_steps, gamma);
}

SampleOptions RunConfig::sample_options() const {
  SampleOptions opts;
  opts.mode = combine;
  opts.stochastic = stochastic;
  opts.noise = noise_sharing;
  return opts;
}

std::filesystem::path RunConfig::resolved_output_dir() const {
  if (!output_dir.empty()) return output_dir;
  if (const char* env = std::getenv("CBBD_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "cbbd_out";
}

std::filesystem::path RunConfig::resolved_checkpoint() const {
  if (!checkpoint.empty()) return checkpoint;
  return resolved_output_dir() / "model.ckpt";
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "horizon") cfg.horizon = parse_number<double>(key, value);
  else if (key == "train_steps") cfg.train_steps = parse_number<int>(key, value);
  else if (key == "sample_steps") cfg.sample_steps = parse_number<int>(key, value);
  else if (key == "gamma") cfg.gamma = parse_number<double>(key, value);
  else if (key == "task") cfg.task = parse_enum(key, value, parse_task_kind);
  else if (key == "dim") cfg.dim = parse_number<int>(key, value);
  else if (key == "noise_scale") cfg.noise_scale = parse_number<double>(key, value);
  else if (key == "train_count") cfg.train_count = parse_number<int>(key, value);
  else if (key == "eval_count") cfg.eval_count = parse_number<int>(key, value);
  else if (key == "task_seed") cfg.task_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "denoiser") cfg.denoiser = parse_enum(key, value, parse_denoiser_kind);
  else if (key == "combine") cfg.combine = parse_enum(key, value, parse_combine_mode);
  else if (key == "stochastic") cfg.stochastic = parse_bool(key, value);
  else if (key == "noise_sharing") cfg.noise_sharing = parse_enum(key, value, parse_noise_sharing);
  else if (key == "iterations") cfg.iterations = parse_number<int>(key, value);
  else if (key == "batch_size") cfg.batch_size = parse_number<int>(key, value);
  else if (key == "learning_rate") cfg.learning_rate = parse_number<double>(key, value);
  else if (key == "hidden") cfg.hidden = parse_number<int>(key, value);
  else if (key == "output_dir") cfg.output_dir = std::string(value);
  else if (key == "checkpoint") cfg.checkpoint = std::string(value);
  else if (key == "trajectories") cfg.trajectories = parse_number<int>(key, value);
  else if (key == "sweep_counts") cfg.sweep_counts = parse_int_list(key, value);
  else throw ConfigError("unknown key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text) {
  const std::string_view body = trim(text);
  if (!body.empty() && body.front() == '{') return parse_json(body);
  return parse_flat(text);
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string to_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "seed = " << cfg.seed << '\n'
      << "horizon = " << format_double(cfg.horizon) << '\n'
      << "train_steps = " << cfg.train_steps << '\n'
      << "sample_steps = " << cfg.sample_steps << '\n'
      << "gamma = " << format_double(cfg.gamma) << '\n'
      << "task = " << to_string(cfg.task) << '\n'
      << "dim = " << cfg.dim << '\n'
      << "noise_scale = " << format_double(cfg.noise_scale) << '\n'
      << "train_count = " << cfg.train_count << '\n'
      << "eval_count = " << cfg.eval_count << '\n'
      << "task_seed = " << cfg.task_seed << '\n'
      << "denoiser = " << to_string(cfg.denoiser) << '\n'
      << "combine = " << to_string(cfg.combine) << '\n'
      << "stochastic = " << (cfg.stochastic ? "true" : "false") << '\n'
      << "noise_sharing = " << to_string(cfg.noise_sharing) << '\n'
      << "iterations = " << cfg.iterations << '\n'
      << "batch_size = " << cfg.batch_size << '\n'
      << "learning_rate = " << format_double(cfg.learning_rate) << '\n'
      << "hidden = " << cfg.hidden << '\n'
      << "output_dir = " << cfg.output_dir << '\n'
      << "checkpoint = " << cfg.checkpoint << '\n'
      << "trajectories = " << cfg.trajectories << '\n'
      << "sweep_counts = " << join(cfg.sweep_counts) << '\n';
  return out.str();
}

void write_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << to_config_text(cfg);
  if (!out) throw ConfigError("failed writing config file " + path.string());
}

void validate(const RunConfig& cfg) {
  try {
    (void)cfg.schedule();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(std::string("key '") + key + "': " + what);
  };
  require(cfg.dim >= 1, "dim", "must be >= 1");
  require(cfg.task != TaskKind::NonlinearArc || cfg.dim >= 2, "dim", "nonlinear_arc needs dim >= 2");
  require(cfg.noise_scale >= 0.0, "noise_scale", "must be >= 0");
  require(cfg.train_count >= 1, "train_count", "must be >= 1");
  require(cfg.eval_count >= 1, "eval_count", "must be >= 1");
  require(cfg.iterations >= 0, "iterations", "must be >= 0");
  require(cfg.batch_size >= 1, "batch_size", "must be >= 1");
  require(cfg.learning_rate > 0.0, "learning_rate", "must be > 0");
  require(cfg.hidden >= 1, "hidden", "must be >= 1");
  require(cfg.trajectories >= 0, "trajectories", "must be >= 0");
  require(!cfg.sweep_counts.empty(), "sweep_counts", "must not be empty");
  for (int n : cfg.sweep_counts) require(n >= 1, "sweep_counts", "entries must be >= 1");
  require(cfg.denoiser != DenoiserKind::OracleGaussian || cfg.task == TaskKind::JointGaussian, "denoiser",
          "oracle_gaussian needs task = joint_gaussian");
}

}  // namespace cbbd
