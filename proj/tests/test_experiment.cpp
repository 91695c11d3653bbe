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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "omav/config.hpp"
#include "omav/errors.hpp"
#include "omav/experiment.hpp"

using namespace omav;
namespace fs = std::filesystem;

namespace {

const char* kHover = R"(
platform:
  mass: 4.36
trajectory:
  type: hover
  duration: 0.5
  position: [0, 0, 1]
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("omav_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int omavsim(const std::string& args) {
  const std::string cmd = std::string(OMAVSIM_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid);
    return e.what();
  }
  return "";
}

std::vector<std::vector<std::string>> read_table(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Config, FieldDiagnostics) {
  EXPECT_NE(error_of("trajectory: {type: hover}").find("platform.mass: required"), std::string::npos);
  EXPECT_NE(error_of(std::string(kHover) + "extra: 1\n").find("extra: unknown key"), std::string::npos);
  EXPECT_NE(error_of("platform: {mass: 4.36, inertai: 1}\ntrajectory: {type: hover}").find("platform.inertai"),
            std::string::npos);
  EXPECT_NE(error_of("platform: {mass: heavy}\ntrajectory: {type: hover}").find("platform.mass: expected a number"),
            std::string::npos);
  EXPECT_NE(error_of("platform: {mass: 4.36}\ntrajectory: {type: spiral}").find("trajectory.type"), std::string::npos);
  EXPECT_NE(error_of("platform: {mass: 4.36}\ntrajectory: {type: square, speed: 2}").find("trajectory.speed"),
            std::string::npos);
  EXPECT_NE(error_of("platform: {mass: 4.36}\ncontroller: {kind: ampc}\nresidual: {mode: In-MPC, model: x.json}\n"
                     "trajectory: {type: hover}")
                .find("residual.model"),
            std::string::npos);
  EXPECT_NE(error_of("platform: {mass: -1}\ntrajectory: {type: hover}"), "");
}

TEST(Config, SourcesAreTagged) {
  const ExperimentConfig c = parse_config(kHover);
  const nlohmann::json& r = c.resolved;
  EXPECT_EQ(r["platform"]["mass"]["source"], "config");
  EXPECT_EQ(r["platform"]["inertia"]["source"], "non-paper");
  EXPECT_EQ(r["controller"]["wmpc"]["horizon"]["source"], "paper");
  EXPECT_EQ(r["controller"]["wmpc"]["horizon"]["value"], 20);
  EXPECT_EQ(r["controller"]["ampc"]["tilt_rate_max"]["source"], "paper");
  EXPECT_EQ(r["controller"]["wmpc"]["force_rate_max"]["source"], "non-paper");
  EXPECT_EQ(r["estimator"]["force_noise"]["source"], "non-paper");
  EXPECT_EQ(r["residual"]["lambda"]["value"], 1e5);

  // Every leaf carries a tag.
  std::function<void(const nlohmann::json&)> check = [&](const nlohmann::json& j) {
    if (j.contains("value") && j.contains("source")) {
      const std::string s = j["source"];
      EXPECT_TRUE(s == "paper" || s == "non-paper" || s == "config" || s == "cli") << s;
      return;
    }
    for (const auto& item : j.items()) check(item.value());
  };
  check(r);

  ConfigOverrides ov;
  ov.seed = 9;
  const ExperimentConfig o = parse_config(kHover, ".", ov);
  EXPECT_EQ(o.sim.seed, 9u);
  EXPECT_EQ(o.resolved["simulation"]["seed"]["source"], "cli");
}

TEST(Config, ResolvedConfigReproducesRun) {
  const fs::path dir = scratch("resolved");
  std::string text = kHover;
  text += "disturbance: {preset: synthetic_linear}\nsimulation: {seed: 5, log_imu: true}\n";
  ExperimentConfig a = parse_config(text);
  a.out_dir = (dir / "a").string();
  write_outputs(a, run_experiment(a));

  ExperimentConfig b = load_config((dir / "a" / "run.config.json").string());
  EXPECT_EQ(b.resolved["disturbance"]["C"]["value"], a.resolved["disturbance"]["C"]["value"]);
  b.out_dir = (dir / "b").string();
  write_outputs(b, run_experiment(b));
  EXPECT_EQ(slurp(dir / "a" / "run.csv"), slurp(dir / "b" / "run.csv"));
}

TEST(Cli, ExitCodesAndDeterminism) {
  const fs::path dir = scratch("cli");
  write(dir / "nomass.yaml", "platform: {inertia: [0.08, 0.08, 0.14]}\ntrajectory: {type: hover}\n");
  EXPECT_EQ(omavsim("run --config " + (dir / "nomass.yaml").string()), 2);
  EXPECT_EQ(omavsim("validate-config --config " + (dir / "nomass.yaml").string()), 2);

  write(dir / "hover.yaml", kHover);
  const std::string run = "run --config " + (dir / "hover.yaml").string() + " --out-dir ";
  ASSERT_EQ(omavsim(run + (dir / "one").string()), 0);
  ASSERT_EQ(omavsim(run + (dir / "two").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "one" / "run.report.json"));
  EXPECT_EQ(slurp(dir / "one" / "run.csv"), slurp(dir / "two" / "run.csv"));

  // Diverging plant: solver failure exit.
  write(dir / "blowup.yaml", std::string(kHover) + "disturbance: {mode: constant_local, force: [0, 0, -1e5]}\n");
  EXPECT_EQ(omavsim("run --config " + (dir / "blowup.yaml").string() + " --out-dir " + (dir / "x").string()), 3);

  // A log without IMU rows cannot be trained on.
  EXPECT_NE(omavsim("train --log " + (dir / "one" / "run.csv").string() + " --out " + (dir / "m.json").string()), 0);
  EXPECT_FALSE(fs::exists(dir / "m.json"));
}

TEST(Matrix, ShapeOrderAndFailureMarking) {
  const fs::path dir = scratch("matrix");
  write(dir / "m.yaml", R"(
base:
  platform: {mass: 4.36}
  trajectory: {type: hover}
rows:
  - name: low
    trajectory: {type: hover, duration: 0.3, position: [0, 0, 1]}
  - name: high
    trajectory: {type: hover, duration: 0.3, position: [0, 0, 2]}
columns:
  - name: wmpc
    set: {controller: {kind: wmpc}}
  - name: broken
    set: {disturbance: {mode: constant_local, force: [0, 0, -1e5]}}
)");
  const MatrixConfig m = load_matrix((dir / "m.yaml").string());
  ASSERT_EQ(m.cells.size(), 4u);
  EXPECT_EQ(m.cells[1].row, "low");
  EXPECT_EQ(m.cells[1].column, "broken");
  EXPECT_EQ(m.cells[2].config.sim.trajectory->sample(0).p.z(), 2.0);

  const MatrixResult r = run_matrix(m, 3, false);
  EXPECT_EQ(r.failed(), 2);
  std::stringstream csv;
  write_comparison_csv(m, r, csv);
  const auto rows = read_table(csv);
  ASSERT_GE(rows.size(), 5u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"metric", "trajectory", "wmpc", "broken"}));
  std::map<std::string, int> per_metric;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 4u);
    ++per_metric[rows[i][0]];
    EXPECT_EQ(rows[i][3], "FAILED");
    EXPECT_NE(rows[i][2], "FAILED");
  }
  EXPECT_EQ(per_metric["position_rmse"], 2);
  EXPECT_EQ(per_metric["attitude_rmse"], 2);
  EXPECT_EQ(rows[1][1], "low");
  EXPECT_EQ(rows[2][1], "high");

  // Same results on one thread.
  const MatrixResult serial = run_matrix(m, 1, false);
  std::stringstream csv1;
  write_comparison_csv(m, serial, csv1);
  const auto rows1 = read_table(csv1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][0] != "solve_time_p50") EXPECT_EQ(rows[i], rows1[i]);
  }
}

TEST(Train, LambdaSweepIsMonotone) {
  const char* base = R"(
platform: {mass: 4.36}
disturbance: {preset: synthetic_linear}
simulation: {log_imu: true}
)";
  std::vector<SimLog> logs;
  for (const char* traj : {"trajectory: {type: attitude, duration: 9}\n",
                           "trajectory: {type: square, start_dwell: 0.5}\n"}) {
    logs.push_back(run_experiment(parse_config(std::string(base) + traj)).log);
  }
  const TrainReport r = train_residual_model(logs, InertialParams{}, {0.0, 1e2, 1e5});
  ASSERT_EQ(r.fits.size(), 3u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LE(r.fits[i].force_rmse, r.fits[i + 1].force_rmse + 1e-12);
    EXPECT_LE(r.fits[i].torque_rmse, r.fits[i + 1].torque_rmse + 1e-12);
  }
  EXPECT_LT(r.fits[2].force_rmse, r.raw.force_rmse);
  EXPECT_LT(r.fits[2].torque_rmse, r.raw.torque_rmse);
  std::ostringstream table;
  print_fit_table(r, table);
  EXPECT_NE(table.str().find("Raw"), std::string::npos);
  EXPECT_NE(table.str().find("lambda=100000"), std::string::npos);

  SimLog empty = logs[0];
  for (SimRow& row : empty.rows) row.imu_valid = false;
  EXPECT_THROW(train_residual_model({empty}, InertialParams{}, {1e5}), Error);
}

TEST(Plotdata, RowsAreTicksTimesChannels) {
  ExperimentConfig c = parse_config(std::string(kHover) +
                                    "controller: {state_source: truth}\nsensors: {sigma_p: 0, sigma_theta: 0}\n");
  const RunResult r = run_experiment(c);
  std::stringstream out;
  write_plotdata(r.log, &r.log.solve_times, out);
  const auto rows = read_table(out);
  const auto channels = plot_channels(r.log, true);
  EXPECT_EQ(channels.size(), 6u + 3u * 6u + 1u);
  ASSERT_EQ(rows.size(), 1 + r.log.rows.size() * channels.size());
  // Hover without noise: every channel but the solve time is constant up to round-off.
  std::map<std::string, std::pair<double, double>> range;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v = std::stod(rows[i][2]);
    auto [it, fresh] = range.try_emplace(rows[i][1], v, v);
    it->second.first = std::min(it->second.first, v);
    it->second.second = std::max(it->second.second, v);
  }
  for (const std::string& ch : channels) {
    ASSERT_TRUE(range.count(ch)) << ch;
    if (ch != "solve_time") EXPECT_LE(range[ch].second - range[ch].first, 1e-12) << ch;
  }
}

TEST(Matrix, AmpcHighTiltWeightSlowsTiltRates) {
  const char* base = R"(
platform: {mass: 4.36}
trajectory: {type: step_x}
)";
  const auto run = [&](const char* weights) {
    return run_experiment(parse_config(std::string(base) + weights)).report.constraints;
  };
  const ConstraintReport high = run("controller: {kind: ampc, ampc: {w_thrust: 1.0, w_tilt: 10, w_tilt_rate: 10}}\n");
  const ConstraintReport low = run("controller: {kind: ampc, ampc: {w_thrust: 0.1, w_tilt: 0.1, w_tilt_rate: 10}}\n");
  EXPECT_EQ(high.violations, 0);
  EXPECT_EQ(low.violations, 0);
  EXPECT_LT(high.max_tilt_rate, low.max_tilt_rate);
  EXPECT_LT(high.max_alpha_deviation, low.max_alpha_deviation);
}
