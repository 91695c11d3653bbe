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

#include "omav/ekf.hpp"

#include <cmath>

#include <limits>

#include <spdlog/spdlog.h>
#include <unsupported/Eigen/AutoDiff>

#include "omav/detail/math.hpp"
#include "omav/errors.hpp"

namespace omav {

namespace {

// Full mean: p(3) v(3) q(4) w(3) df_L(3) dtau(3).
template <class S>
using X19 = Eigen::Matrix<S, 19, 1>;

template <class S>
X19<S> ekf_rhs(const X19<S>& x, const Wrench& u, const InertialParams& prm, const Mat3& J_inv) {
  using detail::V3;
  using detail::V4;
  const V3<S> p = x.template segment<3>(0);
  const V3<S> v = x.template segment<3>(3);
  const V4<S> q = x.template segment<4>(6);
  const V3<S> w = x.template segment<3>(10);
  const V3<S> fl = x.template segment<3>(13);
  const V3<S> dt = x.template segment<3>(16);

  const V3<S> df = detail::matTvec(detail::qrotmat(q), detail::matvec(detail::rot_z(detail::qyaw(q)), fl));
  V3<S> f, tau;
  for (int i = 0; i < 3; ++i) {
    f(i) = S(u.force(i)) + df(i);
    tau(i) = S(u.torque(i)) + dt(i);
  }
  V3<S> pd, vd, wd;
  V4<S> qd;
  detail::rigid_rhs(p, q, v, w, f, tau, prm.mass, prm.inertia, J_inv, prm.gravity, pd, qd, vd, wd);
  X19<S> xd;
  xd << pd, vd, qd, wd, V3<S>::Zero(), V3<S>::Zero();
  return xd;
}

template <class S>
X19<S> ekf_rk4(const X19<S>& x, const Wrench& u, double h, const InertialParams& prm,
               const Mat3& J_inv) {
  const X19<S> k1 = ekf_rhs<S>(x, u, prm, J_inv);
  const X19<S> k2 = ekf_rhs<S>(x + S(0.5 * h) * k1, u, prm, J_inv);
  const X19<S> k3 = ekf_rhs<S>(x + S(0.5 * h) * k2, u, prm, J_inv);
  const X19<S> k4 = ekf_rhs<S>(x + S(h) * k3, u, prm, J_inv);
  X19<S> n = x + S(h / 6.0) * (k1 + S(2) * k2 + S(2) * k3 + k4);
  n.template segment<4>(6) = detail::qnormalize<S>(n.template segment<4>(6));
  return n;
}

X19<double> pack(const EkfState& s) {
  X19<double> x;
  x << s.p, s.v, s.q.wxyz(), s.w, s.df_local, s.dtau;
  return x;
}

}  // namespace

void EkfNoise::validate() const {
  for (const Vec3* v : {&force, &torque, &position, &velocity, &attitude, &rate}) {
    if ((v->array() < 0.0).any() || !v->allFinite()) {
      throw Error(ErrorCode::kConfigInvalid, "EKF process noise must be finite and >= 0");
    }
  }
  if (!(sigma_p > 0.0) || !(sigma_theta > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "EKF measurement noise must be > 0");
  }
}

Vec18 EkfNoise::process_diagonal() const {
  Vec18 d;
  d << position, velocity, attitude, rate, force, torque;
  return d;
}

Eigen::Matrix<double, 6, 6> EkfNoise::measurement_covariance() const {
  Eigen::Matrix<double, 6, 1> d;
  d << Vec3::Constant(sigma_p * sigma_p), Vec3::Constant(sigma_theta * sigma_theta);
  return d.asDiagonal();
}

Mat18 ekf_error_jacobian(const EkfState& s, const Wrench& u, double dt,
                         const InertialParams& params) {
  using AD = Eigen::AutoDiffScalar<Eigen::Matrix<double, 18, 1>>;
  const Mat3 J_inv = params.inertia.inverse();
  const X19<double> x0 = pack(s);
  const X19<double> y0 = ekf_rk4<double>(x0, u, dt, params, J_inv);

  // Perturb around zero error: q = q_hat * (1, dtheta / 2), normalized.
  X19<AD> x;
  for (int i = 0; i < 19; ++i) x(i) = AD(x0(i));
  for (int i = 0; i < 3; ++i) {
    x(i) = AD(x0(i), 18, i);
    x(3 + i) = AD(x0(3 + i), 18, 3 + i);
    x(10 + i) = AD(x0(10 + i), 18, 9 + i);
    x(13 + i) = AD(x0(13 + i), 18, 12 + i);
    x(16 + i) = AD(x0(16 + i), 18, 15 + i);
  }
  detail::V4<AD> dq;
  dq << AD(1.0), AD(0.0, 18, 6) * 0.5, AD(0.0, 18, 7) * 0.5, AD(0.0, 18, 8) * 0.5;
  const detail::V4<AD> qh(AD(x0(6)), AD(x0(7)), AD(x0(8)), AD(x0(9)));
  x.segment<4>(6) = detail::qnormalize<AD>(detail::qmul<AD>(qh, dq));

  const X19<AD> y = ekf_rk4<AD>(x, u, dt, params, J_inv);

  // Error of y against the nominal propagation: dtheta = 2 vec(q0^-1 * q).
  const detail::V4<AD> q0inv(AD(y0(6)), AD(-y0(7)), AD(-y0(8)), AD(-y0(9)));
  const detail::V4<AD> e = detail::qmul<AD>(q0inv, detail::V4<AD>(y.segment<4>(6)));
  Mat18 F;
  for (int i = 0; i < 3; ++i) {
    F.row(i) = y(i).derivatives().transpose();
    F.row(3 + i) = y(3 + i).derivatives().transpose();
    F.row(6 + i) = 2.0 * e(1 + i).derivatives().transpose();
    F.row(9 + i) = y(10 + i).derivatives().transpose();
    F.row(12 + i) = y(13 + i).derivatives().transpose();
    F.row(15 + i) = y(16 + i).derivatives().transpose();
  }
  return F;
}

EkfState ekf_predict(const EkfState& s, const Wrench& u, double dt, const EkfNoise& noise,
                     const InertialParams& params) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kConfigInvalid, "EKF predict needs dt > 0");
  const Mat18 F = ekf_error_jacobian(s, u, dt, params);
  const X19<double> y = ekf_rk4<double>(pack(s), u, dt, params, params.inertia.inverse());
  EkfState n;
  n.p = y.segment<3>(0);
  n.v = y.segment<3>(3);
  n.q = UnitQuaternion(Vec4(y.segment<4>(6)));
  n.w = y.segment<3>(10);
  n.df_local = y.segment<3>(13);
  n.dtau = y.segment<3>(16);
  n.P = F * s.P * F.transpose();
  n.P.diagonal() += noise.process_diagonal() * dt;
  n.P = 0.5 * (n.P + n.P.transpose()).eval();
  return n;
}

EkfUpdateResult ekf_update(const EkfState& s, const PoseMeasurement& z, const EkfNoise& noise,
                           double gate) {
  Eigen::Matrix<double, 6, 1> y;
  // UnitQuaternion keeps w >= 0, so the attitude innovation stays below pi.
  y << z.p - s.p, rotation_vector(s.q.inverse() * z.q);
  Eigen::Matrix<double, 6, 18> H = Eigen::Matrix<double, 6, 18>::Zero();
  H.block<3, 3>(0, 0).setIdentity();
  H.block<3, 3>(3, 6).setIdentity();
  const Eigen::Matrix<double, 6, 6> Rm = noise.measurement_covariance();
  const Eigen::Matrix<double, 6, 6> S = H * s.P * H.transpose() + Rm;
  const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(S);

  EkfUpdateResult r;
  r.state = s;
  r.mahalanobis2 = y.dot(ldlt.solve(y));
  if (!(r.mahalanobis2 <= gate)) {
    r.accepted = false;
    return r;
  }
  const Eigen::Matrix<double, 18, 6> K = ldlt.solve(H * s.P).transpose();
  const Vec18 dx = K * y;
  const Mat18 IKH = Mat18::Identity() - K * H;
  EkfState& n = r.state;
  n.P = IKH * s.P * IKH.transpose() + K * Rm * K.transpose();
  n.P = 0.5 * (n.P + n.P.transpose()).eval();
  n.p += dx.segment<3>(0);
  n.v += dx.segment<3>(3);
  n.q = s.q * UnitQuaternion::from_rotation_vector(dx.segment<3>(6));
  n.w += dx.segment<3>(9);
  n.df_local += dx.segment<3>(12);
  n.dtau += dx.segment<3>(15);
  return r;
}

Wrench disturbance_in_body(const EkfState& s) {
  const double psi = yaw_of(s.q);
  return {s.q.to_rotation_matrix().transpose() * rot_z(psi) * s.df_local, s.dtau};
}

DisturbanceEkf::DisturbanceEkf(EkfNoise noise, InertialParams params)
    : noise_(std::move(noise)), params_(std::move(params)) {
  noise_.validate();
  params_.validate();
  reset(RigidState{});
}

void DisturbanceEkf::reset(const RigidState& x, double sigma_rigid, double sigma_force,
                           double sigma_torque) {
  s_ = EkfState{};
  s_.p = x.p;
  s_.v = x.v;
  s_.q = x.q;
  s_.w = x.w;
  Vec18 d;
  d << Eigen::Matrix<double, 12, 1>::Constant(sigma_rigid * sigma_rigid),
      Vec3::Constant(sigma_force * sigma_force), Vec3::Constant(sigma_torque * sigma_torque);
  s_.P = d.asDiagonal();
  rejected_ = 0;
  consecutive_rejections_ = 0;
}

void DisturbanceEkf::predict(const Wrench& u, double dt) { s_ = ekf_predict(s_, u, dt, noise_, params_); }

bool DisturbanceEkf::update(const PoseMeasurement& z) {
  const bool force = consecutive_rejections_ >= max_rejections;
  EkfUpdateResult r = ekf_update(s_, z, noise_, force ? std::numeric_limits<double>::infinity() : kInnovationGate);
  if (!r.accepted) {
    if (rejected_ == 0 || (rejected_ + 1) % 1000 == 0) {
      spdlog::warn("EKF innovation rejected (d2 = {:.3g}, {} so far)", r.mahalanobis2, rejected_ + 1);
    }
    ++rejected_;
    ++consecutive_rejections_;
  } else {
    if (force) spdlog::debug("EKF accepted a measurement past the gate (d2 = {:.3g})", r.mahalanobis2);
    consecutive_rejections_ = 0;
  }
  s_ = std::move(r.state);
  return r.accepted;
}

}  // namespace omav
