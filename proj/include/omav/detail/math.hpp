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

// Scalar-generic rotation and rigid-body kernels. Instantiated with double
// for simulation and with Eigen::AutoDiffScalar for exact Jacobians.

#include <cmath>

#include <Eigen/Dense>

namespace omav::detail {

template <class S>
using V3 = Eigen::Matrix<S, 3, 1>;
template <class S>
using V4 = Eigen::Matrix<S, 4, 1>;
template <class S>
using M3 = Eigen::Matrix<S, 3, 3>;

// Hamilton product, storage (w, x, y, z).
template <class S>
V4<S> qmul(const V4<S>& a, const V4<S>& b) {
  V4<S> r;
  r(0) = a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3);
  r(1) = a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2);
  r(2) = a(0) * b(2) - a(1) * b(3) + a(2) * b(0) + a(3) * b(1);
  r(3) = a(0) * b(3) + a(1) * b(2) - a(2) * b(1) + a(3) * b(0);
  return r;
}

template <class S>
V4<S> qconj(const V4<S>& q) {
  V4<S> r;
  r << q(0), -q(1), -q(2), -q(3);
  return r;
}

template <class S>
V4<S> qnormalize(const V4<S>& q) {
  using std::sqrt;
  const S n = sqrt(q(0) * q(0) + q(1) * q(1) + q(2) * q(2) + q(3) * q(3));
  V4<S> r;
  for (int i = 0; i < 4; ++i) r(i) = q(i) / n;
  return r;
}

// Body-to-world rotation matrix of a unit quaternion.
template <class S>
M3<S> qrotmat(const V4<S>& q) {
  const S w = q(0), x = q(1), y = q(2), z = q(3);
  M3<S> R;
  R(0, 0) = S(1) - S(2) * (y * y + z * z);
  R(0, 1) = S(2) * (x * y - w * z);
  R(0, 2) = S(2) * (x * z + w * y);
  R(1, 0) = S(2) * (x * y + w * z);
  R(1, 1) = S(1) - S(2) * (x * x + z * z);
  R(1, 2) = S(2) * (y * z - w * x);
  R(2, 0) = S(2) * (x * z - w * y);
  R(2, 1) = S(2) * (y * z + w * x);
  R(2, 2) = S(1) - S(2) * (x * x + y * y);
  return R;
}

template <class S>
V3<S> cross(const V3<S>& a, const V3<S>& b) {
  V3<S> r;
  r(0) = a(1) * b(2) - a(2) * b(1);
  r(1) = a(2) * b(0) - a(0) * b(2);
  r(2) = a(0) * b(1) - a(1) * b(0);
  return r;
}

template <class S>
V3<S> matvec(const M3<S>& M, const V3<S>& v) {
  V3<S> r;
  for (int i = 0; i < 3; ++i) r(i) = M(i, 0) * v(0) + M(i, 1) * v(1) + M(i, 2) * v(2);
  return r;
}

template <class S>
V3<S> matTvec(const M3<S>& M, const V3<S>& v) {
  V3<S> r;
  for (int i = 0; i < 3; ++i) r(i) = M(0, i) * v(0) + M(1, i) * v(1) + M(2, i) * v(2);
  return r;
}

// Constant (double) matrix applied to a generic vector.
template <class S>
V3<S> cmatvec(const Eigen::Matrix3d& M, const V3<S>& v) {
  V3<S> r;
  for (int i = 0; i < 3; ++i) r(i) = M(i, 0) * v(0) + M(i, 1) * v(1) + M(i, 2) * v(2);
  return r;
}

// ZYX yaw angle.
template <class S>
S qyaw(const V4<S>& q) {
  using std::atan2;
  return atan2(S(2) * (q(0) * q(3) + q(1) * q(2)), S(1) - S(2) * (q(2) * q(2) + q(3) * q(3)));
}

template <class S>
M3<S> rot_z(const S& psi) {
  using std::cos;
  using std::sin;
  const S c = cos(psi), s = sin(psi);
  M3<S> R;
  R << c, -s, S(0), s, c, S(0), S(0), S(0), S(1);
  return R;
}

// Rigid-body state derivative (Newton-Euler in body frame).
// State layout: p(3) q(4) v(3) w(3).
template <class S>
void rigid_rhs(const V3<S>& p, const V4<S>& q, const V3<S>& v, const V3<S>& w,
               const V3<S>& force, const V3<S>& torque, double mass,
               const Eigen::Matrix3d& J, const Eigen::Matrix3d& J_inv,
               const Eigen::Vector3d& gravity, V3<S>& p_dot, V4<S>& q_dot, V3<S>& v_dot,
               V3<S>& w_dot) {
  (void)p;
  const M3<S> R = qrotmat(q);
  p_dot = matvec(R, v);
  V4<S> w_quat;
  w_quat << S(0), w(0), w(1), w(2);
  q_dot = qmul(q, w_quat);
  for (int i = 0; i < 4; ++i) q_dot(i) *= S(0.5);
  const V3<S> g(S(gravity(0)), S(gravity(1)), S(gravity(2)));
  const V3<S> g_body = matTvec(R, g);
  const V3<S> wxv = cross(w, v);
  for (int i = 0; i < 3; ++i) v_dot(i) = force(i) / mass + g_body(i) - wxv(i);
  const V3<S> Jw = cmatvec(J, w);
  const V3<S> gyro = cross(w, Jw);
  V3<S> net;
  for (int i = 0; i < 3; ++i) net(i) = torque(i) - gyro(i);
  w_dot = cmatvec(J_inv, net);
}

}  // namespace omav::detail
