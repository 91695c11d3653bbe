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

namespace omav {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion stored as (w, x, y, z), Hamilton convention, acting
/// body-to-world: v_W = q * v_B * q^-1.
///
/// Every constructor normalizes and flips the sign so that w >= 0. A zero
/// or non-finite input throws Error(kDimensionMismatch).
class UnitQuaternion {
 public:
  UnitQuaternion() : wxyz_(1.0, 0.0, 0.0, 0.0) {}
  UnitQuaternion(double w, double x, double y, double z);
  explicit UnitQuaternion(const Vec4& wxyz);

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  /// Rotation vector (axis * angle).
  static UnitQuaternion from_rotation_vector(const Vec3& rv);
  static UnitQuaternion from_rotation_matrix(const Mat3& R);
  /// R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static UnitQuaternion from_euler_zyx(double roll, double pitch, double yaw);

  double w() const { return wxyz_(0); }
  double x() const { return wxyz_(1); }
  double y() const { return wxyz_(2); }
  double z() const { return wxyz_(3); }
  Vec3 vec() const { return wxyz_.tail<3>(); }
  const Vec4& wxyz() const { return wxyz_; }

  UnitQuaternion inverse() const { return {w(), -x(), -y(), -z()}; }
  Mat3 to_rotation_matrix() const;
  Vec3 rotate(const Vec3& v) const;

 private:
  Vec4 wxyz_;
};

UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b);
inline UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
  return quat_multiply(a, b);
}

Mat3 quat_to_rotmat(const UnitQuaternion& q);
UnitQuaternion rotmat_to_quat(const Mat3& R);

/// True when R^T R = I and det R = +1 within tol.
bool is_rotation_matrix(const Mat3& R, double tol = 1e-9);

/// Vector part of q^-1 * q_r divided by its (positive) scalar part, so that
/// q_r = q * [1, q_e] up to normalization. Throws kAttitudeAntipodal for 180 deg errors.
Vec3 attitude_error(const UnitQuaternion& q, const UnitQuaternion& q_r);

/// (roll, pitch, yaw) of the ZYX decomposition. Throws kGimbalDegenerate
/// when |pitch| is within 1e-6 of pi/2.
Vec3 euler_zyx(const UnitQuaternion& q);

double yaw_of(const UnitQuaternion& q);

/// Euler angles of the actual attitude relative to the reference,
/// euler_zyx(q_r^-1 * q). Metrics only.
Vec3 error_euler(const UnitQuaternion& q, const UnitQuaternion& q_r);

/// Rotation vector (axis * angle, angle in [0, pi]) of q.
Vec3 rotation_vector(const UnitQuaternion& q);

/// Geodesic angle between two attitudes, in [0, pi].
double geodesic_angle(const UnitQuaternion& a, const UnitQuaternion& b);

Mat3 rot_z(double psi);
Mat3 skew(const Vec3& v);

}  // namespace omav
