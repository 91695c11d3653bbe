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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "omav/config.hpp"
#include "omav/errors.hpp"
#include "omav/experiment.hpp"

namespace fs = std::filesystem;
using namespace omav;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  std::string out_dir;
  bool log_imu = false;
  bool no_cells = false;
  std::vector<std::string> logs;
  std::vector<double> lambdas;
  std::string features = "wrench_gravity";
  double cutoff = 20.0;
  std::string out;
};

ConfigOverrides overrides(const Options& o) {
  ConfigOverrides ov;
  if (o.seed_set) ov.seed = o.seed;
  if (o.log_imu) ov.log_imu = true;
  if (!o.out_dir.empty()) ov.out_dir = o.out_dir;
  return ov;
}

int cmd_run(const Options& o) {
  const ExperimentConfig cfg = load_config(o.config, overrides(o));
  const RunResult r = run_experiment(cfg);
  const RunOutputs out = write_outputs(cfg, r);
  spdlog::info("wrote {}, {}, {}", out.csv, out.report, out.config);
  std::cout << summary_line(r.report) << "\n";
  return 0;
}

int cmd_matrix(const Options& o) {
  const MatrixConfig m = load_matrix(o.config, overrides(o));
  spdlog::info("{} rows x {} columns, {} jobs", m.rows.size(), m.columns.size(), o.jobs);
  const MatrixResult r = run_matrix(m, o.jobs, !o.no_cells);
  fs::create_directories(m.out_dir);
  const std::string path = (fs::path(m.out_dir) / "comparison.csv").string();
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_comparison_csv(m, r, f);
  write_comparison_csv(m, r, std::cout);
  if (r.failed()) spdlog::warn("{} of {} cells failed", r.failed(), r.reports.size());
  return r.failed() ? kExitSolver : 0;
}

int cmd_train(const Options& o) {
  if (o.features != "wrench_gravity") {
    throw Error(ErrorCode::kConfigInvalid, "--features: only wrench_gravity is available");
  }
  InertialParams params;
  std::vector<double> lambdas = o.lambdas;
  std::string out = o.out;
  if (!o.config.empty()) {
    const ExperimentConfig cfg = load_config(o.config);
    params = cfg.sim.params;
    if (lambdas.empty()) lambdas.push_back(cfg.lambda);
    if (out.empty()) out = (fs::path(cfg.out_dir) / "model.json").string();
  }
  if (lambdas.empty()) lambdas.push_back(1e5);
  if (out.empty()) out = "model.json";

  std::vector<SimLog> logs;
  for (const std::string& p : o.logs) logs.push_back(read_csv(p));
  const TrainReport r = train_residual_model(logs, params, lambdas, o.cutoff);
  print_fit_table(r, std::cout);

  if (!fs::path(out).parent_path().empty()) fs::create_directories(fs::path(out).parent_path());
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    std::string path = out;
    if (r.models.size() > 1) {
      fs::path p(out);
      p.replace_extension("." + std::to_string(i) + p.extension().string());
      path = p.string();
    }
    save_model(r.models[i], path);
    std::cout << "model (lambda=" << r.models[i].lambda << ") -> " << path << "\n";
  }
  return 0;
}

int cmd_plotdata(const Options& o) {
  if (o.logs.size() != 1) throw Error(ErrorCode::kConfigInvalid, "plotdata takes exactly one --log");
  const std::string& log_path = o.logs.front();
  const SimLog log = read_csv(log_path);
  std::vector<double> solve;
  const std::string sp = solve_times_path(log_path);
  const bool have_solve = fs::exists(sp);
  if (have_solve) solve = read_solve_times(sp);
  std::string out = o.out;
  if (out.empty()) {
    fs::path p(log_path);
    p.replace_extension(".plot.csv");
    out = p.string();
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + out);
  write_plotdata(log, have_solve ? &solve : nullptr, f);
  std::cout << out << ": " << log.rows.size() << " ticks x " << plot_channels(log, have_solve).size()
            << " channels\n";
  return 0;
}

int cmd_validate(const Options& o) {
  if (is_matrix_config(o.config)) {
    const MatrixConfig m = load_matrix(o.config, overrides(o));
    std::cout << "matrix: " << m.rows.size() << " rows x " << m.columns.size() << " columns\n";
    for (const MatrixCell& c : m.cells) {
      std::cout << c.row << " | " << c.column << ": " << c.config.resolved.dump() << "\n";
    }
  } else {
    std::cout << load_config(o.config, overrides(o)).resolved.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop simulation experiments for a tilt-rotor aerial vehicle"};
  app.require_subcommand(1);
  app.fallthrough();  // --log-level may follow the verb
  Options o;
  std::string level = "info";
  app.add_option("--log-level", level, "trace, debug, info, warn, error, off");

  auto* run = app.add_subcommand("run", "run one episode and write log, report and resolved config");
  run->add_option("--config", o.config, "experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", o.seed, "override simulation.seed")->each([&](const std::string&) { o.seed_set = true; });
  run->add_option("--out-dir", o.out_dir, "override output.dir");
  run->add_flag("--log-imu", o.log_imu, "log IMU channels for training");

  auto* matrix = app.add_subcommand("matrix", "run a grid of trajectories x configurations");
  matrix->add_option("--config", o.config, "matrix config")->required()->check(CLI::ExistingFile);
  matrix->add_option("--jobs", o.jobs, "parallel episodes")->check(CLI::PositiveNumber);
  matrix->add_option("--seed", o.seed, "override the seed of every cell")->each([&](const std::string&) { o.seed_set = true; });
  matrix->add_option("--out-dir", o.out_dir, "override output.dir");
  matrix->add_flag("--log-imu", o.log_imu, "log IMU channels");
  matrix->add_flag("--no-cells", o.no_cells, "write only the comparison CSV");

  auto* train = app.add_subcommand("train", "fit the residual model on logged episodes");
  train->add_option("--log", o.logs, "log CSV with IMU channels (repeatable)")->required()->check(CLI::ExistingFile);
  train->add_option("--lambda", o.lambdas, "ridge regularization (repeatable)");
  train->add_option("--features", o.features, "feature preset");
  train->add_option("--cutoff", o.cutoff, "angular acceleration low-pass [Hz]");
  train->add_option("--config", o.config, "take mass, inertia and lambda from this config")->check(CLI::ExistingFile);
  train->add_option("--out", o.out, "model JSON path");

  auto* plot = app.add_subcommand("plotdata", "long-format time/channel/value CSV of a log");
  plot->add_option("--log", o.logs, "log CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", o.out, "output path (default <log>.plot.csv)");

  auto* validate = app.add_subcommand("validate-config", "check a config and print it resolved");
  validate->add_option("--config", o.config, "experiment or matrix config")->required()->check(CLI::ExistingFile);
  validate->add_option("--seed", o.seed, "override simulation.seed")->each([&](const std::string&) { o.seed_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  // Logs go to stderr; stdout carries the summaries and tables.
  spdlog::set_default_logger(spdlog::stderr_color_mt("omavsim"));
  spdlog::set_level(spdlog::level::from_str(level));

  try {
    if (*run) return cmd_run(o);
    if (*matrix) return cmd_matrix(o);
    if (*train) return cmd_train(o);
    if (*plot) return cmd_plotdata(o);
    if (*validate) return cmd_validate(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::kConfigInvalid) return kExitConfig;
    if (e.code() == ErrorCode::kSolverFailure) return kExitSolver;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
