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

#include "omav/rigid_body.hpp"

#include <string>

#include "omav/detail/math.hpp"
#include "omav/errors.hpp"

namespace omav {

void InertialParams::validate() const {
  if (!(mass > 0.0)) throw Error(ErrorCode::kConfigInvalid, "platform.mass must be > 0");
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::kConfigInvalid, "platform.inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "platform.inertia must be positive definite");
  }
}

StateDerivative dynamics(const RigidState& x, const Wrench& actuator, const Wrench& residual,
                         const InertialParams& params) {
  StateDerivative d;
  const Mat3 J_inv = params.inertia.inverse();
  const Vec3 f = actuator.force + residual.force;
  const Vec3 tau = actuator.torque + residual.torque;
  detail::rigid_rhs<double>(x.p, x.q.wxyz(), x.v, x.w, f, tau, params.mass, params.inertia, J_inv,
                            params.gravity, d.p_dot, d.q_dot, d.v_dot, d.w_dot);
  return d;
}

RigidState rk4_step(const RigidState& x, const Wrench& actuator, const Wrench& residual,
                    const InertialParams& params, double dt) {
  using V13 = Eigen::Matrix<double, 13, 1>;
  const Mat3 J_inv = params.inertia.inverse();
  const Vec3 f = actuator.force + residual.force;
  const Vec3 tau = actuator.torque + residual.torque;

  auto rhs = [&](const V13& s) {
    V13 out;
    Vec3 pd, vd, wd;
    Vec4 qd;
    detail::rigid_rhs<double>(s.segment<3>(0), s.segment<4>(3), s.segment<3>(7),
                              s.segment<3>(10), f, tau, params.mass, params.inertia, J_inv,
                              params.gravity, pd, qd, vd, wd);
    out << pd, qd, vd, wd;
    return out;
  };

  V13 s;
  s << x.p, x.q.wxyz(), x.v, x.w;
  const V13 k1 = rhs(s);
  const V13 k2 = rhs(s + 0.5 * dt * k1);
  const V13 k3 = rhs(s + 0.5 * dt * k2);
  const V13 k4 = rhs(s + dt * k3);
  const V13 n = s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  RigidState out;
  out.p = n.segment<3>(0);
  out.q = UnitQuaternion(Vec4(n.segment<4>(3)));
  out.v = n.segment<3>(7);
  out.w = n.segment<3>(10);
  return out;
}

Wrench hover_wrench(const UnitQuaternion& q, const InertialParams& params) {
  return {-params.mass * (q.to_rotation_matrix().transpose() * params.gravity), Vec3::Zero()};
}

}  // namespace omav
