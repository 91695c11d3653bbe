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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "omav/detail/math.hpp"
#include "omav/rigid_body.hpp"

namespace omav {

constexpr int kNumFeatures = 9;

/// (w_a, third row of R_B): the commanded wrench plus (-sin(pitch),
/// cos(pitch) sin(roll), cos(pitch) cos(roll)).
Eigen::VectorXd build_features(const Wrench& w_a, const UnitQuaternion& q);

/// Linear residual model dw = C (x; 1). C carries one extra bias column.
struct ResidualModel {
  Eigen::Matrix<double, 6, Eigen::Dynamic> C = Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, kNumFeatures + 1);
  double lambda = 0.0;
  int num_samples = 0;
  Vec6 training_rmse = Vec6::Zero();

  int num_features() const { return static_cast<int>(C.cols()) - 1; }
};

/// Rows of X are (features, 1); rows of Y are measured residual wrenches.
/// Each row of C solves (X'X + lambda I) c' = X'y with a Cholesky factorization.
/// Throws kSingularNormalEquations when the system is not positive definite
/// and kDimensionMismatch when n_s <= n_f + 1 or sizes disagree.
ResidualModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lambda);

Wrench predict_residual(const ResidualModel& model, const Eigen::VectorXd& features);

/// Design matrix with the trailing column of ones.
Eigen::MatrixXd design_matrix(const std::vector<Eigen::VectorXd>& features);

struct FitReport {
  Vec6 rmse_axis = Vec6::Zero();
  double force_rmse = 0.0;   // sqrt(mean |e_f|^2)
  double force_std = 0.0;    // std of |e_f|
  double torque_rmse = 0.0;
  double torque_std = 0.0;
};

/// Errors of C x against Y. A zero model gives the raw residual statistics.
FitReport training_rmse(const ResidualModel& model, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& Y);

struct TrainingSample {
  double t = 0.0;
  Wrench command;             // commanded actuator wrench, body frame
  UnitQuaternion q;
  Vec3 specific_force = Vec3::Zero();  // bias-corrected accelerometer, body frame [m/s^2]
  Vec3 gyro = Vec3::Zero();            // [rad/s]
};

using TrainingLog = std::vector<TrainingSample>;

/// dw_m = (m a_IMU - f_a, J dw_IMU - tau_a). The angular acceleration is a
/// central difference of the gyro followed by a zero-phase second-order
/// Butterworth low-pass (default cutoff 20 Hz).
/// Throws kEmptyLog, kRateTooLow (< 100 Hz) or kNonUniformSampling.
std::vector<Wrench> compute_residuals(const TrainingLog& log, const InertialParams& params,
                                      double cutoff_hz = 20.0);

/// Zero-phase (forward-backward) second-order Butterworth low-pass.
std::vector<double> filtfilt_butter2(const std::vector<double>& x, double cutoff_hz,
                                     double sample_hz);

void save_model(const ResidualModel& model, const std::string& path);
ResidualModel load_model(const std::string& path);

/// Residual wrench assumed by a controller's prediction model.
struct ResidualSource {
  enum class Kind { kZero, kBodyConstant, kLocalConstant, kLinearFeatures };
  Kind kind = Kind::kZero;
  /// Body wrench (kBodyConstant) or (force in the yaw-local frame, body torque).
  Wrench wrench;
  Eigen::Matrix<double, 6, kNumFeatures + 1> C = Eigen::Matrix<double, 6, kNumFeatures + 1>::Zero();

  static ResidualSource zero() { return {}; }
  static ResidualSource body(const Wrench& w);
  static ResidualSource local(const Wrench& w);
  static ResidualSource linear(const ResidualModel& model);

  /// Residual at attitude q given the full actuator wrench.
  Wrench evaluate(const UnitQuaternion& q, const Wrench& actuator) const;
};

namespace detail {

template <class S>
void residual_eval(const ResidualSource& src, const V4<S>& q, const V3<S>& f_a, const V3<S>& tau_a,
                   V3<S>& df, V3<S>& dtau) {
  for (int i = 0; i < 3; ++i) {
    df(i) = S(0);
    dtau(i) = S(0);
  }
  switch (src.kind) {
    case ResidualSource::Kind::kZero:
      break;
    case ResidualSource::Kind::kBodyConstant:
      for (int i = 0; i < 3; ++i) {
        df(i) = S(src.wrench.force(i));
        dtau(i) = S(src.wrench.torque(i));
      }
      break;
    case ResidualSource::Kind::kLocalConstant: {
      const M3<S> R = qrotmat(q);
      const M3<S> Rz = rot_z(qyaw(q));
      const V3<S> fl(S(src.wrench.force(0)), S(src.wrench.force(1)), S(src.wrench.force(2)));
      df = matTvec(R, matvec(Rz, fl));
      for (int i = 0; i < 3; ++i) dtau(i) = S(src.wrench.torque(i));
      break;
    }
    case ResidualSource::Kind::kLinearFeatures: {
      const M3<S> R = qrotmat(q);
      Eigen::Matrix<S, kNumFeatures + 1, 1> x;
      for (int i = 0; i < 3; ++i) {
        x(i) = f_a(i);
        x(3 + i) = tau_a(i);
        x(6 + i) = R(2, i);
      }
      x(9) = S(1);
      for (int r = 0; r < 3; ++r) {
        S a = S(0), b = S(0);
        for (int c = 0; c < kNumFeatures + 1; ++c) {
          a += src.C(r, c) * x(c);
          b += src.C(3 + r, c) * x(c);
        }
        df(r) = a;
        dtau(r) = b;
      }
      break;
    }
  }
}

}  // namespace detail

}  // namespace omav
