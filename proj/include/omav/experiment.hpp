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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "omav/config.hpp"
#include "omav/metrics.hpp"

namespace omav {

ConstraintLimits limits_of(const SimConfig& cfg);

struct RunResult {
  SimLog log;
  TrackingReport report;
};

RunResult run_experiment(const ExperimentConfig& cfg);

struct RunOutputs {
  std::string csv;
  std::string report;
  std::string config;
  std::string solve_times;
};

/// <out_dir>/<name>.csv, .report.json, .config.json and .solve_times.csv.
/// Only the solve times depend on the machine.
RunOutputs write_outputs(const ExperimentConfig& cfg, const RunResult& result);

/// "controller trajectory mode pos=... att=..." on one line.
std::string summary_line(const TrackingReport& r);

struct MatrixResult {
  std::vector<std::optional<TrackingReport>> reports;  // same order as MatrixConfig::cells
  std::vector<std::string> errors;                     // empty when the cell succeeded
  int failed() const;
};

/// Runs all cells on up to `jobs` threads. A cell that throws is recorded and
/// the remaining cells still run. With write_cells, each cell's outputs are
/// written under <out_dir>/cells/.
MatrixResult run_matrix(const MatrixConfig& m, int jobs, bool write_cells = true);

/// Blocks "metric,trajectory,<column>..." with one row per trajectory.
/// Failed cells read FAILED.
void write_comparison_csv(const MatrixConfig& m, const MatrixResult& r, std::ostream& os);

struct TrainReport {
  int samples = 0;
  FitReport raw;
  std::vector<ResidualModel> models;  // one per lambda
  std::vector<FitReport> fits;
};

/// IMU rows of the logs -> residual wrenches -> one ridge fit per lambda.
TrainReport train_residual_model(const std::vector<SimLog>& logs, const InertialParams& params,
                                 const std::vector<double>& lambdas, double cutoff_hz = 20.0);

/// Force and torque RMSE (mean +- std of the error norm) per row.
void print_fit_table(const TrainReport& r, std::ostream& os);

/// Path of the solve-time sidecar that belongs to a log CSV.
std::string solve_times_path(const std::string& csv_path);
std::vector<double> read_solve_times(const std::string& path);

/// Long-format "t,channel,value" rows for every plant tick: position and
/// attitude errors, tilt angles, commanded tilt angles and rates, and the
/// solve time held since the last control tick when solve_times is given.
void write_plotdata(const SimLog& log, const std::vector<double>* solve_times, std::ostream& os);
std::vector<std::string> plot_channels(const SimLog& log, bool with_solve_times);

}  // namespace omav
