// Copyright 2026 The omav-mpc Authors
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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "omav/simulator.hpp"

namespace omav {

/// One experiment: a simulator config plus training and output settings.
struct ExperimentConfig {
  SimConfig sim;
  std::string trajectory_type;
  double lambda = 1e5;     // ridge regularization for `train`
  std::string model_path;  // absolute; empty when no model is configured
  std::string out_dir = "out";
  std::string name = "run";
  /// Every leaf as {"value": ..., "source": "paper" | "non-paper" | "config" | "cli"}.
  nlohmann::json resolved;
};

/// Command-line settings applied after the file is parsed.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<bool> log_imu;
  std::optional<std::string> out_dir;
};

/// Parses a YAML config (or a resolved JSON config written by a previous run).
/// Unknown keys, type errors, missing required fields and invalid values
/// throw Error(kConfigInvalid) with the dotted path of the offending field.
ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".",
                              const ConfigOverrides& overrides = {});

/// A grid of trajectories (rows) and configuration overlays (columns) on a
/// shared base config.
struct MatrixCell {
  std::string row;
  std::string column;
  ExperimentConfig config;
};

struct MatrixConfig {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<MatrixCell> cells;  // row-major
  std::string out_dir = "out";
};

/// Matrix file keys: base (inline map or path), rows (name + trajectory
/// block), columns (name + overlay merged into the base), output.
MatrixConfig load_matrix(const std::string& path, const ConfigOverrides& overrides = {});

/// True when the file's top level has a `base` key.
bool is_matrix_config(const std::string& path);

/// Linear-features disturbance used by the residual-model experiments:
/// 5% thrust loss, 0.2 kg mass error, a 3.6 mm center-of-mass offset and
/// a constant bias, with white noise on top.
DisturbanceConfig synthetic_linear_disturbance();

}  // namespace omav
