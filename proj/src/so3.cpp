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

#include "omav/so3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "omav/detail/math.hpp"
#include "omav/errors.hpp"

namespace omav {

namespace {

Vec4 canonical(const Vec4& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kDimensionMismatch, "quaternion with zero or non-finite norm");
  }
  Vec4 r = q / n;
  if (r(0) < 0.0) r = -r;
  return r;
}

}  // namespace

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z)
    : wxyz_(canonical(Vec4(w, x, y, z))) {}

UnitQuaternion::UnitQuaternion(const Vec4& wxyz) : wxyz_(canonical(wxyz)) {}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 a = axis.normalized();
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), a.x() * s, a.y() * s, a.z() * s};
}

UnitQuaternion UnitQuaternion::from_rotation_vector(const Vec3& rv) {
  const double angle = rv.norm();
  if (angle < 1e-12) return {1.0, 0.5 * rv.x(), 0.5 * rv.y(), 0.5 * rv.z()};
  return from_axis_angle(rv / angle, angle);
}

UnitQuaternion UnitQuaternion::from_rotation_matrix(const Mat3& R) {
  // Shepperd's method: pick the largest diagonal term for stability.
  const double tr = R.trace();
  Vec4 q;
  if (tr > R(0, 0) && tr > R(1, 1) && tr > R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q << 0.25 * s, (R(2, 1) - R(1, 2)) / s, (R(0, 2) - R(2, 0)) / s, (R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2));
    q << (R(2, 1) - R(1, 2)) / s, 0.25 * s, (R(0, 1) + R(1, 0)) / s, (R(0, 2) + R(2, 0)) / s;
  } else if (R(1, 1) > R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2));
    q << (R(0, 2) - R(2, 0)) / s, (R(0, 1) + R(1, 0)) / s, 0.25 * s, (R(1, 2) + R(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1));
    q << (R(1, 0) - R(0, 1)) / s, (R(0, 2) + R(2, 0)) / s, (R(1, 2) + R(2, 1)) / s, 0.25 * s;
  }
  return UnitQuaternion(q);
}

UnitQuaternion UnitQuaternion::from_euler_zyx(double roll, double pitch, double yaw) {
  const UnitQuaternion qz = from_axis_angle(Vec3::UnitZ(), yaw);
  const UnitQuaternion qy = from_axis_angle(Vec3::UnitY(), pitch);
  const UnitQuaternion qx = from_axis_angle(Vec3::UnitX(), roll);
  return qz * qy * qx;
}

Mat3 UnitQuaternion::to_rotation_matrix() const { return detail::qrotmat<double>(wxyz_); }

Vec3 UnitQuaternion::rotate(const Vec3& v) const { return to_rotation_matrix() * v; }

UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b) {
  return UnitQuaternion(detail::qmul<double>(a.wxyz(), b.wxyz()));
}

Mat3 quat_to_rotmat(const UnitQuaternion& q) { return q.to_rotation_matrix(); }

UnitQuaternion rotmat_to_quat(const Mat3& R) { return UnitQuaternion::from_rotation_matrix(R); }

bool is_rotation_matrix(const Mat3& R, double tol) {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

Vec3 attitude_error(const UnitQuaternion& q, const UnitQuaternion& q_r) {
  Vec4 dq = detail::qmul<double>(q.inverse().wxyz(), q_r.wxyz());
  if (dq(0) < 0.0) dq = -dq;
  if (dq(0) < 1e-9) {
    throw Error(ErrorCode::kAttitudeAntipodal, "attitude error of 180 degrees");
  }
  return dq.tail<3>() / dq(0);
}

Vec3 euler_zyx(const UnitQuaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double sinp = std::clamp(2.0 * (w * y - x * z), -1.0, 1.0);
  const double pitch = std::asin(sinp);
  if (std::numbers::pi / 2 - std::abs(pitch) < 1e-6) {
    throw Error(ErrorCode::kGimbalDegenerate, "pitch at +-90 degrees");
  }
  const double roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  const double yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return {roll, pitch, yaw};
}

double yaw_of(const UnitQuaternion& q) { return euler_zyx(q)(2); }

Vec3 error_euler(const UnitQuaternion& q, const UnitQuaternion& q_r) {
  return euler_zyx(q_r.inverse() * q);
}

Vec3 rotation_vector(const UnitQuaternion& q) {
  const double s = q.vec().norm();
  if (s < 1e-12) return 2.0 * q.vec();
  return q.vec() * (2.0 * std::atan2(s, q.w()) / s);
}

double geodesic_angle(const UnitQuaternion& a, const UnitQuaternion& b) {
  const Vec4 d = detail::qmul<double>(a.inverse().wxyz(), b.wxyz());
  return 2.0 * std::atan2(d.tail<3>().norm(), std::abs(d(0)));
}

Mat3 rot_z(double psi) { return detail::rot_z<double>(psi); }

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return S;
}

}  // namespace omav
