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

// JSON and CSV report emission. Reports carry no timestamps, so identical
// runs give byte-identical files; run metadata goes to a sibling
// "<name>.meta.json".

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbbd/config.hpp"
#include "cbbd/ddpm.hpp"
#include "cbbd/experiments.hpp"
#include "cbbd/gaussian.hpp"
#include "cbbd/pipeline.hpp"
#include "cbbd/verification.hpp"

namespace cbbd {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const VarianceLedger& ledger, bool include_steps = false);
nlohmann::json to_json(const MomentTestReport& rep);
nlohmann::json to_json(const SweepReport& rep);
nlohmann::json to_json(const SdeSuiteReport& rep);
nlohmann::json to_json(const VerifyReport& rep);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Writes `report` with "schema_version" and "command" added at top level.
void write_report(nlohmann::json report, const std::string& command, const std::filesystem::path& path);

/// Sibling metadata file with the wall-clock time of the run.
void write_metadata(const std::string& command, const std::filesystem::path& report_path);

/// Columns: t,coord_0,...,coord_{d-1},injected_var.
void write_trajectory_csv(std::span<const TrajectoryRow> rows, const std::filesystem::path& path);

/// Columns: iteration,loss.
void write_loss_csv(std::span<const LossRow> rows, const std::filesystem::path& path);

}  // namespace cbbd
