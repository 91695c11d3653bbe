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

#include <Eigen/Dense>

#include "omav/so3.hpp"

namespace omav {

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Force/torque pair acting at the centre of mass, body frame.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();

  static Wrench from_vector(const Vec6& w) { return {w.head<3>(), w.tail<3>()}; }
  Vec6 vector() const {
    Vec6 w;
    w << force, torque;
    return w;
  }
  Wrench operator+(const Wrench& o) const { return {force + o.force, torque + o.torque}; }
  Wrench operator-(const Wrench& o) const { return {force - o.force, torque - o.torque}; }
};

/// Pose and twist. Position in world frame, velocities in body frame.
struct RigidState {
  Vec3 p = Vec3::Zero();
  UnitQuaternion q;
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();
};

struct InertialParams {
  double mass = 4.36;
  Mat3 inertia = Eigen::Vector3d(0.08, 0.08, 0.14).asDiagonal();
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);

  /// Throws Error(kConfigInvalid) if mass <= 0 or inertia is not SPD.
  void validate() const;
};

/// Raw time derivative; q_dot is not a unit quaternion.
struct StateDerivative {
  Vec3 p_dot;
  Vec4 q_dot;
  Vec3 v_dot;
  Vec3 w_dot;
};

StateDerivative dynamics(const RigidState& x, const Wrench& actuator, const Wrench& residual,
                         const InertialParams& params);

/// Classical RK4 step with the wrenches held constant; quaternion renormalized.
RigidState rk4_step(const RigidState& x, const Wrench& actuator, const Wrench& residual,
                    const InertialParams& params, double dt);

/// Wrench needed to hover at attitude q: (-m R^T g, 0).
Wrench hover_wrench(const UnitQuaternion& q, const InertialParams& params);

}  // namespace omav
