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

#include <numbers>

#include <Eigen/Dense>

#include "omav/rigid_body.hpp"

namespace omav {

using Mat18 = Eigen::Matrix<double, 18, 18>;
using Vec18 = Eigen::Matrix<double, 18, 1>;

/// Mean (p, v, q, w, df_L, dtau) and error-state covariance. The error state
/// is (dp, dv, dtheta, dw, ddf_L, ddtau) with q = q_hat * exp(dtheta).
struct EkfState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();  // body frame
  UnitQuaternion q;
  Vec3 w = Vec3::Zero();
  Vec3 df_local = Vec3::Zero();
  Vec3 dtau = Vec3::Zero();
  Mat18 P = Mat18::Identity();

  RigidState rigid() const { return {p, q, v, w}; }
};

/// Continuous-time process spectral densities (per second) and pose noise.
struct EkfNoise {
  Vec3 force = Vec3::Constant(1e-3);        // Sigma_f [N^2/s]
  Vec3 torque = Vec3::Constant(1e-6);       // Sigma_tau [(N m)^2/s]
  Vec3 position = Vec3::Constant(1e-6);     // [m^2/s]
  Vec3 velocity = Vec3::Constant(1e-3);     // [(m/s)^2/s]
  Vec3 attitude = Vec3::Constant(1e-5);     // [rad^2/s]
  Vec3 rate = Vec3::Constant(1e-3);         // [(rad/s)^2/s]
  double sigma_p = 0.002;                   // pose position std [m]
  double sigma_theta = 0.2 * std::numbers::pi / 180.0;  // pose attitude std [rad]

  void validate() const;
  Vec18 process_diagonal() const;
  Eigen::Matrix<double, 6, 6> measurement_covariance() const;
};

struct PoseMeasurement {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  UnitQuaternion q;
};

/// Error-state transition Jacobian of one RK4 step of length dt.
Mat18 ekf_error_jacobian(const EkfState& s, const Wrench& u, double dt,
                         const InertialParams& params);

/// RK4 mean propagation with constant disturbance states; P <- F P F' + Q dt.
EkfState ekf_predict(const EkfState& s, const Wrench& u, double dt, const EkfNoise& noise,
                     const InertialParams& params);

/// Chi-square 0.999 quantile with 6 degrees of freedom.
constexpr double kInnovationGate = 22.458;

struct EkfUpdateResult {
  EkfState state;
  bool accepted = true;
  double mahalanobis2 = 0.0;
};

/// Joseph-form update with a pose measurement. Innovations beyond
/// kInnovationGate are rejected and the state is returned unchanged.
/// A gate of infinity accepts every measurement.
EkfUpdateResult ekf_update(const EkfState& s, const PoseMeasurement& z, const EkfNoise& noise,
                           double gate = kInnovationGate);

/// (R_B' R_z(yaw) df_L, dtau). Throws kGimbalDegenerate at pitch +-90 deg.
Wrench disturbance_in_body(const EkfState& s);

/// Stateful wrapper used by the simulator.
class DisturbanceEkf {
 public:
  DisturbanceEkf(EkfNoise noise, InertialParams params);

  /// Starts from a known rigid state with diagonal initial standard deviations.
  void reset(const RigidState& x, double sigma_rigid = 0.01, double sigma_force = 2.0,
             double sigma_torque = 0.2);
  void predict(const Wrench& u, double dt);
  /// Gated update. After max_rejections consecutive rejections the next
  /// measurement is applied ungated so a diverged estimate can recover.
  bool update(const PoseMeasurement& z);
  int max_rejections = 5;

  const EkfState& state() const { return s_; }
  Wrench disturbance_body() const { return disturbance_in_body(s_); }
  /// (df_L, dtau) as estimated, force in the yaw-local frame.
  Wrench disturbance_local() const { return {s_.df_local, s_.dtau}; }
  int rejected() const { return rejected_; }

 private:
  EkfNoise noise_;
  InertialParams params_;
  EkfState s_;
  int rejected_ = 0;
  int consecutive_rejections_ = 0;
};

}  // namespace omav
