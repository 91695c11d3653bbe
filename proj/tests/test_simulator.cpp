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

#include <cmath>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "omav/errors.hpp"
#include "omav/simulator.hpp"

using namespace omav;

namespace {

SimConfig hover_config(double duration) {
  SimConfig c;
  c.trajectory = hover(duration, Vec3(0, 0, 1));
  return c;
}

double rmse_position(const SimLog& log) {
  double s = 0.0;
  for (const SimRow& r : log.rows) s += (r.x.p - r.ref.p).squaredNorm();
  return std::sqrt(s / log.rows.size());
}

}  // namespace

TEST(ActuatorPlant, FirstOrderRiseTime) {
  ActuatorPlantConfig cfg;
  cfg.servo_rate_max = 1e3;
  cfg.thrust_rate_max = 1e4;
  ActuatorCommand init{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 2.0)};
  ActuatorPlant plant(cfg, init);
  const ActuatorCommand cmd{Eigen::VectorXd::Constant(1, 0.1), Eigen::VectorXd::Constant(1, 6.0)};
  const double dt = 1e-3;
  double t_servo = -1.0, t_thrust = -1.0;
  for (int k = 1; k <= 500; ++k) {
    plant.step(cmd, dt);
    if (t_servo < 0 && plant.state().alpha(0) >= 0.1 * (1 - std::exp(-1.0))) t_servo = k * dt;
    if (t_thrust < 0 && plant.state().thrust(0) >= 2.0 + 4.0 * (1 - std::exp(-1.0))) t_thrust = k * dt;
  }
  EXPECT_NEAR(t_servo, cfg.servo_tau, 0.02 * cfg.servo_tau);
  EXPECT_NEAR(t_thrust, cfg.thrust_tau, 0.02 * cfg.thrust_tau + dt);
}

TEST(ActuatorPlant, RateAndRangeLimits) {
  ActuatorPlantConfig cfg;
  ActuatorCommand init{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 5.0)};
  ActuatorPlant plant(cfg, init);
  const ActuatorCommand cmd{Eigen::VectorXd::Constant(1, 3.0), Eigen::VectorXd::Constant(1, 100.0)};
  plant.step(cmd, 1e-3);
  EXPECT_NEAR(plant.state().alpha(0), cfg.servo_rate_max * 1e-3, 1e-15);
  EXPECT_NEAR(plant.state().thrust(0), 5.0 + cfg.thrust_rate_max * 1e-3, 1e-12);
  for (int k = 0; k < 1000; ++k) plant.step(cmd, 1e-3);
  EXPECT_DOUBLE_EQ(plant.state().thrust(0), cfg.thrust_max);
}

TEST(Disturbance, LocalForceFollowsYawOnly) {
  DisturbanceConfig cfg;
  cfg.mode = DisturbanceConfig::Mode::kConstantLocal;
  cfg.wrench.force = Vec3(1, 0, 1);
  DisturbanceGenerator gen(cfg, 3);
  // Pure yaw leaves the local force unchanged in the body frame.
  const UnitQuaternion yaw = UnitQuaternion::from_rotation_vector(Vec3(0, 0, std::numbers::pi / 2));
  EXPECT_LT((gen.evaluate(0.0, yaw, Wrench{}).force - Vec3(1, 0, 1)).norm(), 1e-12);
  // Roll by 90 deg: local z is body y.
  const UnitQuaternion roll = UnitQuaternion::from_rotation_vector(Vec3(std::numbers::pi / 2, 0, 0));
  EXPECT_LT((gen.evaluate(0.0, roll, Wrench{}).force - Vec3(1, 1, 0)).norm(), 1e-12);
}

TEST(Simulator, HoverIsStationaryWithoutNoise) {
  SimConfig c = hover_config(2.0);
  c.sensors.sigma_p = 0.0;
  c.sensors.sigma_theta = 0.0;
  c.controller_uses_truth = true;
  const SimLog log = run_episode(c);
  ASSERT_EQ(log.rows.size(), 2000u);
  for (const SimRow& r : log.rows) {
    EXPECT_LT((r.x.p - Vec3(0, 0, 1)).norm(), 1e-6);
    EXPECT_LT(r.x.v.norm(), 1e-6);
  }
  EXPECT_EQ(log.fallbacks, 0);
}

TEST(Simulator, UncontrolledFallUnderLocalForce) {
  // Hover thrust plus a 2 N downward force gives 2 / 4.36 m/s^2 downward.
  SimConfig c = hover_config(0.5);
  c.disturbance.mode = DisturbanceConfig::Mode::kConstantLocal;
  c.disturbance.wrench.force = Vec3(0, 0, -2);
  c.controller_uses_truth = true;
  c.duration = 0.011;  // one control tick, before any correction reaches the rotors
  c.actuators.servo_rate_max = 1e-9;
  c.actuators.thrust_rate_max = 1e-9;
  const SimLog log = run_episode(c);
  const SimRow& a = log.rows[1];
  const SimRow& b = log.rows[10];
  const double acc = (b.x.v.z() - a.x.v.z()) / (b.t - a.t);
  EXPECT_NEAR(acc, -2.0 / c.params.mass, 1e-3);
  EXPECT_NEAR(2.0 / c.params.mass, 0.459, 1e-3);
}

TEST(Simulator, HoverRegulationBothControllers) {
  for (ControllerKind k : {ControllerKind::kWmpc, ControllerKind::kAmpc}) {
    SimConfig c = hover_config(10.0);
    c.controller = k;
    c.sensors.sigma_p = 0.0;
    c.sensors.sigma_theta = 0.0;
    const SimLog log = run_episode(c);
    EXPECT_LT(rmse_position(log), 1e-3) << to_string(k);
    EXPECT_EQ(log.fallbacks, 0);
  }
  // With pose noise the estimate jitter stays near the sensor noise level.
  EXPECT_LT(rmse_position(run_episode(hover_config(10.0))), 3e-3);
}

TEST(Simulator, PostMpcBeatsNoCompensationUnderConstantResidual) {
  SimConfig c = hover_config(4.0);
  c.disturbance.mode = DisturbanceConfig::Mode::kConstantLocal;
  c.disturbance.wrench.force = Vec3(1.5, -1.0, -2.0);
  c.residual_model.C.setZero();
  c.residual_model.C.col(kNumFeatures) << 1.5, -1.0, -2.0, 0, 0, 0;
  c.residual_mode = ResidualMode::kNone;
  const double nc = rmse_position(run_episode(c));
  c.residual_mode = ResidualMode::kPostMpc;
  const double post = rmse_position(run_episode(c));
  c.residual_mode = ResidualMode::kObserver;
  const double obs = rmse_position(run_episode(c));
  EXPECT_LT(post, nc);
  EXPECT_LT(obs, nc);
}

TEST(Simulator, DeterministicCsv) {
  SimConfig c = hover_config(1.0);
  c.log_imu = true;
  c.disturbance.mode = DisturbanceConfig::Mode::kConstantPlusNoise;
  c.disturbance.noise_sigma.setConstant(0.1);
  std::ostringstream a, b;
  write_csv(run_episode(c), a);
  write_csv(run_episode(c), b);
  EXPECT_EQ(a.str(), b.str());
  c.seed = 2;
  std::ostringstream d;
  write_csv(run_episode(c), d);
  EXPECT_NE(a.str(), d.str());
}

TEST(Simulator, CsvRoundTripIsExact) {
  SimConfig c = hover_config(0.3);
  c.log_imu = true;
  const SimLog log = run_episode(c);
  const auto path = std::filesystem::temp_directory_path() / "omav_sim_roundtrip.csv";
  write_csv(log, path.string());
  const SimLog back = read_csv(path.string());
  std::filesystem::remove(path);
  ASSERT_EQ(back.rows.size(), log.rows.size());
  EXPECT_EQ(back.controller, log.controller);
  EXPECT_EQ(back.residual_mode, log.residual_mode);
  EXPECT_EQ(back.accel_bias, log.accel_bias);
  for (std::size_t i = 0; i < log.rows.size(); i += 37) {
    EXPECT_EQ(back.rows[i].x.p, log.rows[i].x.p);
    EXPECT_EQ(back.rows[i].thrust, log.rows[i].thrust);
    EXPECT_EQ(back.rows[i].imu_accel, log.rows[i].imu_accel);
  }
  const TrainingLog tl = training_log(back);
  EXPECT_EQ(tl.size(), 60u);
}

TEST(Simulator, RejectsBadConfigs) {
  SimConfig c = hover_config(1.0);
  c.control_period = 0.0105;
  EXPECT_THROW(run_episode(c), Error);
  c = hover_config(1.0);
  c.controller = ControllerKind::kAmpc;
  c.residual_mode = ResidualMode::kInMpc;
  EXPECT_THROW(run_episode(c), Error);
  c = hover_config(1.0);
  c.trajectory = nullptr;
  EXPECT_THROW(run_episode(c), Error);
  c = hover_config(1.0);
  c.params.mass = -1.0;
  try {
    run_episode(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigInvalid);
  }
  EXPECT_THROW(training_log(run_episode(hover_config(0.1))), Error);
}
