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
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "omav/errors.hpp"
#include "omav/residual_model.hpp"

using namespace omav;

namespace {

// Ridge solution through the augmented least-squares problem [X; sqrt(l) I] c = [y; 0].
Eigen::MatrixXd ridge_oracle(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lambda) {
  const int p = static_cast<int>(X.cols());
  Eigen::MatrixXd Xa(X.rows() + p, p);
  Xa << X, std::sqrt(lambda) * Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd Ya = Eigen::MatrixXd::Zero(X.rows() + p, Y.cols());
  Ya.topRows(X.rows()) = Y;
  return Xa.colPivHouseholderQr().solve(Ya).transpose();
}

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = n(rng);
  return M;
}

}  // namespace

TEST(RidgeFit, MatchesAugmentedLeastSquares) {
  std::mt19937_64 rng(3);
  for (double lambda : {0.0, 1e-3, 1.0, 1e5}) {
    Eigen::MatrixXd X = random_matrix(200, 10, rng);
    X.col(9).setOnes();
    const Eigen::MatrixXd Y = random_matrix(200, 6, rng);
    const ResidualModel m = ridge_fit(X, Y, lambda);
    const Eigen::MatrixXd C = ridge_oracle(X, Y, lambda);
    EXPECT_LT((m.C - C).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + C.cwiseAbs().maxCoeff())) << lambda;
    EXPECT_EQ(m.num_samples, 200);
  }
}

TEST(RidgeFit, RecoversNoiselessModel) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd C_true = random_matrix(6, 10, rng);
  Eigen::MatrixXd X = random_matrix(500, 10, rng);
  X.col(9).setOnes();
  const Eigen::MatrixXd Y = X * C_true.transpose();
  const ResidualModel m = ridge_fit(X, Y, 0.0);
  EXPECT_LT((m.C - C_true).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(m.training_rmse.maxCoeff(), 1e-10);
}

TEST(RidgeFit, ShrinksWithLambda) {
  std::mt19937_64 rng(7);
  Eigen::MatrixXd X = random_matrix(100, 10, rng);
  const Eigen::MatrixXd Y = random_matrix(100, 6, rng);
  double prev = 1e300;
  for (double lambda : {0.0, 1.0, 10.0, 100.0, 1e4}) {
    const double n = ridge_fit(X, Y, lambda).C.norm();
    EXPECT_LE(n, prev + 1e-12);
    prev = n;
  }
}

TEST(RidgeFit, Errors) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(50, 10);
  const Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(50, 6);
  try {
    ridge_fit(X, Y, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularNormalEquations);
  }
  EXPECT_NO_THROW(ridge_fit(X, Y, 1.0));
  try {
    ridge_fit(Eigen::MatrixXd::Ones(5, 10), Eigen::MatrixXd::Ones(5, 6), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  try {
    ridge_fit(X, Eigen::MatrixXd::Zero(49, 6), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Features, ThirdRowOfRotation) {
  const double roll = 0.3, pitch = -0.2;
  const UnitQuaternion q = UnitQuaternion::from_euler_zyx(roll, pitch, 1.1);
  const Wrench w{Vec3(1, 2, 3), Vec3(4, 5, 6)};
  const Eigen::VectorXd x = build_features(w, q);
  ASSERT_EQ(x.size(), kNumFeatures);
  EXPECT_NEAR(x(6), -std::sin(pitch), 1e-12);
  EXPECT_NEAR(x(7), std::cos(pitch) * std::sin(roll), 1e-12);
  EXPECT_NEAR(x(8), std::cos(pitch) * std::cos(roll), 1e-12);
  EXPECT_EQ(x(0), 1.0);
  EXPECT_EQ(x(5), 6.0);
}

TEST(Predict, BiasAndSourceAgree) {
  std::mt19937_64 rng(11);
  ResidualModel m;
  m.C = random_matrix(6, 10, rng);
  const UnitQuaternion q = UnitQuaternion::from_euler_zyx(0.2, 0.1, -0.4);
  const Wrench w{Vec3(0.5, -1, 40), Vec3(0.1, 0.2, -0.3)};
  const Eigen::VectorXd x = build_features(w, q);
  const Wrench a = predict_residual(m, x);
  Vec6 expect = m.C.leftCols(9) * x + m.C.col(9);
  EXPECT_LT((a.vector() - expect).norm(), 1e-12);
  const Wrench b = ResidualSource::linear(m).evaluate(q, w);
  EXPECT_LT((a.vector() - b.vector()).norm(), 1e-12);
  EXPECT_THROW(predict_residual(m, Eigen::VectorXd::Zero(3)), Error);
}

TEST(ResidualSource, LocalFrameRotatesWithRollAndPitchOnly) {
  const Wrench local{Vec3(1.0, -0.5, -2.0), Vec3(0.1, 0.0, 0.0)};
  const ResidualSource s = ResidualSource::local(local);
  // Pure yaw: local and body frames coincide.
  const Wrench a = s.evaluate(UnitQuaternion::from_euler_zyx(0, 0, 1.3), Wrench{});
  EXPECT_LT((a.force - local.force).norm(), 1e-12);
  // Roll and pitch: body force = (R_y(pitch) R_x(roll))^T f_L.
  const double roll = 0.4, pitch = -0.3;
  const Mat3 Rx = Eigen::AngleAxisd(roll, Vec3::UnitX()).toRotationMatrix();
  const Mat3 Ry = Eigen::AngleAxisd(pitch, Vec3::UnitY()).toRotationMatrix();
  const Wrench b = s.evaluate(UnitQuaternion::from_euler_zyx(roll, pitch, 2.0), Wrench{});
  EXPECT_LT((b.force - (Ry * Rx).transpose() * local.force).norm(), 1e-12);
  EXPECT_LT((b.torque - local.torque).norm(), 1e-15);
  EXPECT_EQ(ResidualSource::zero().evaluate(UnitQuaternion(), local).vector(), Vec6::Zero());
}

TEST(Filter, PassbandAndStopbandMatchButterworthMagnitude) {
  const double fs = 1000.0, fc = 20.0;
  for (double f : {2.0, 20.0, 80.0}) {
    std::vector<double> x(4000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * f * i / fs);
    const std::vector<double> y = filtfilt_butter2(x, fc, fs);
    // Zero-phase: the output is the input scaled by |H|^2.
    const double ratio = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
    const double gain = 1.0 / (1.0 + std::pow(ratio, 4));
    double err = 0.0;
    for (std::size_t i = 1000; i < 3000; ++i) err = std::max(err, std::abs(y[i] - gain * x[i]));
    EXPECT_LT(err, 2e-3) << f;
  }
  const std::vector<double> c(100, 3.5);
  for (double v : filtfilt_butter2(c, fc, fs)) EXPECT_NEAR(v, 3.5, 1e-12);
}

TEST(ComputeResiduals, RecoversConstantResidual) {
  InertialParams prm;
  const Wrench truth{Vec3(0.7, -1.2, -2.0), Vec3(0.0, 0.0, 0.15)};
  TrainingLog log;
  RigidState x;
  x.w = Vec3(0, 0, 0.2);
  const double dt = 0.005;
  for (int i = 0; i < 400; ++i) {
    const double t = i * dt;
    Wrench cmd = hover_wrench(x.q, prm);
    cmd.torque = Vec3(0, 0, 0.1 * std::sin(3.0 * t));
    TrainingSample s;
    s.t = t;
    s.command = cmd;
    s.q = x.q;
    s.specific_force = (cmd.force + truth.force) / prm.mass;
    s.gyro = x.w;
    log.push_back(s);
    x = rk4_step(x, cmd, truth, prm, dt);
  }
  const std::vector<Wrench> r = compute_residuals(log, prm);
  ASSERT_EQ(r.size(), log.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_LT((r[i].force - truth.force).norm(), 1e-12);
  }
  // Rotation about a principal axis, so the gyroscopic term vanishes.
  for (std::size_t i = 20; i + 20 < r.size(); ++i) {
    EXPECT_LT((r[i].torque - truth.torque).norm(), 2e-3) << i;
  }
}

TEST(ComputeResiduals, RejectsBadSampling) {
  InertialParams prm;
  TrainingLog log(10);
  for (int i = 0; i < 10; ++i) log[i].t = 0.02 * i;
  try {
    compute_residuals(log, prm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRateTooLow);
  }
  for (int i = 0; i < 10; ++i) log[i].t = 0.005 * i;
  log[5].t += 0.001;
  try {
    compute_residuals(log, prm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonUniformSampling);
  }
  try {
    compute_residuals(TrainingLog(2), prm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyLog);
  }
}

TEST(ModelIo, RoundTrip) {
  std::mt19937_64 rng(13);
  ResidualModel m;
  m.C = random_matrix(6, 10, rng);
  m.lambda = 1e5;
  m.num_samples = 1234;
  m.training_rmse << 1, 2, 3, 4, 5, 6;
  const auto path = std::filesystem::temp_directory_path() / "omav_model_roundtrip.json";
  save_model(m, path.string());
  const ResidualModel r = load_model(path.string());
  EXPECT_EQ(r.C, m.C);
  EXPECT_EQ(r.lambda, m.lambda);
  EXPECT_EQ(r.num_samples, m.num_samples);
  EXPECT_EQ(r.training_rmse, m.training_rmse);
  std::filesystem::remove(path);
  EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}
