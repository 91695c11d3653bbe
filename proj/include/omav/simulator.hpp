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
#include <iosfwd>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "omav/allocation.hpp"
#include "omav/controllers.hpp"
#include "omav/ekf.hpp"
#include "omav/residual_model.hpp"
#include "omav/trajectories.hpp"

namespace omav {

enum class ControllerKind { kWmpc, kAmpc };
std::string_view to_string(ControllerKind k);
ControllerKind controller_kind_from_string(std::string_view s);

/// Rate-limited first-order servo and rotor models.
struct ActuatorPlantConfig {
  double servo_tau = 0.05;         // [s]
  double servo_rate_max = 10.0;    // [rad/s]
  double thrust_tau = 0.03;        // [s]
  double thrust_rate_max = 100.0;  // [N/s]
  double thrust_min = 0.0;         // [N]
  double thrust_max = 16.0;        // [N]

  void validate() const;
};

class ActuatorPlant {
 public:
  ActuatorPlant(ActuatorPlantConfig cfg, ActuatorCommand initial);

  /// Exact first-order step towards cmd, then the rate and range limits.
  void step(const ActuatorCommand& cmd, double dt);
  const ActuatorCommand& state() const { return x_; }

 private:
  ActuatorPlantConfig cfg_;
  ActuatorCommand x_;
};

/// Ground-truth residual wrench applied to the plant.
struct DisturbanceConfig {
  enum class Mode { kZero, kConstantLocal, kLinearFeatures, kConstantPlusNoise };
  Mode mode = Mode::kZero;
  /// Force in the yaw-local frame and body torque (kConstantLocal, kConstantPlusNoise).
  Wrench wrench;
  /// Rows map (applied wrench, third row of R_B, 1) to the body residual.
  Eigen::Matrix<double, 6, kNumFeatures + 1> C = Eigen::Matrix<double, 6, kNumFeatures + 1>::Zero();
  /// Per-axis std of additive white noise, held for 1 / noise_rate seconds.
  Vec6 noise_sigma = Vec6::Zero();
  double noise_rate = 100.0;

  void validate() const;
};

std::string_view to_string(DisturbanceConfig::Mode m);
DisturbanceConfig::Mode disturbance_mode_from_string(std::string_view s);

class DisturbanceGenerator {
 public:
  DisturbanceGenerator(DisturbanceConfig cfg, std::uint64_t seed);

  /// Body-frame residual at time t for attitude q and applied actuator wrench.
  Wrench evaluate(double t, const UnitQuaternion& q, const Wrench& applied);

 private:
  DisturbanceConfig cfg_;
  std::mt19937_64 rng_;
  long last_slot_ = -1;
  Vec6 noise_ = Vec6::Zero();
};

struct SensorConfig {
  double pose_rate = 100.0;             // [Hz]
  double sigma_p = 0.002;               // [m]
  double sigma_theta = 0.2 * std::numbers::pi / 180.0;  // [rad]
  double pose_latency = 0.0;            // [s]
  double imu_rate = 200.0;              // [Hz]
  double accel_noise_density = 0.004;   // [m/s^2/sqrt(Hz)]
  double gyro_noise_density = 3e-4;     // [rad/s/sqrt(Hz)]
  Vec3 accel_bias = Vec3(0.05, -0.03, 0.02);  // [m/s^2], exposed as ground truth

  void validate(double plant_rate, double control_rate) const;
};

struct SimConfig {
  InertialParams params;
  PlatformGeometry geometry = PlatformGeometry::default_hexa();
  ControllerKind controller = ControllerKind::kWmpc;
  ResidualMode residual_mode = ResidualMode::kNone;
  WmpcConfig wmpc;
  AmpcConfig ampc;
  ResidualModel residual_model;  // used by In-MPC and Post-MPC
  EkfNoise ekf;
  double ekf_sigma_force = 2.0;    // initial std of the force estimate [N]
  double ekf_sigma_torque = 0.2;   // [N m]
  bool controller_uses_truth = false;
  ActuatorPlantConfig actuators;
  DisturbanceConfig disturbance;
  SensorConfig sensors;
  double plant_dt = 0.001;
  double control_period = 0.01;
  double duration = 0.0;  // 0 runs the trajectory duration
  bool log_imu = false;
  int max_consecutive_fallbacks = 100;
  std::uint64_t seed = 1;
  TrajectoryPtr trajectory;

  void validate() const;
};

/// One plant tick.
struct SimRow {
  double t = 0.0;
  RigidState x;
  ReferencePoint ref;
  Wrench commanded;   // actuator wrench requested by the controller
  Wrench applied;     // forward_wrench of the actuator state
  Wrench dist_true;   // body frame
  Wrench dist_est;    // residual used by the controller, body frame
  Wrench offset;      // WMPC: wbar after the tick; AMPC: commanded minus hover
  Wrench offset_rate; // WMPC first input; zero for AMPC
  Eigen::VectorXd alpha_cmd, alpha, alpha_ref, tilt_rate_cmd, thrust_cmd, thrust, thrust_rate_cmd;
  Vec3 imu_accel = Vec3::Zero();
  Vec3 imu_gyro = Vec3::Zero();
  bool imu_valid = false;
  bool control_tick = false;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
  bool fallback = false;
};

struct SimLog {
  std::string controller;
  std::string residual_mode;
  std::string trajectory;
  std::uint64_t seed = 0;
  int arms = 0;
  int rotors = 0;
  double plant_dt = 0.0;
  Vec3 accel_bias = Vec3::Zero();
  std::vector<SimRow> rows;
  /// Wall-clock solve time per control tick [s]; not part of the CSV.
  std::vector<double> solve_times;
  int fallbacks = 0;
  int ekf_rejected = 0;
  int post_mpc_saturations = 0;
};

/// Runs one deterministic closed-loop episode. Throws kConfigInvalid for bad
/// configs and kSolverFailure when the controller keeps failing or the state diverges.
SimLog run_episode(const SimConfig& cfg);

/// CSV with a header row and one row per plant tick. Bitwise reproducible.
void write_csv(const SimLog& log, std::ostream& os);
void write_csv(const SimLog& log, const std::string& path);
SimLog read_csv(const std::string& path);
std::vector<std::string> csv_header(int arms, int rotors);

/// IMU samples of a log as a training set, accelerometer bias removed.
TrainingLog training_log(const SimLog& log);

}  // namespace omav
