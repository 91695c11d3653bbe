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

#include "omav/residual_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "omav/errors.hpp"

namespace omav {

Eigen::VectorXd build_features(const Wrench& w_a, const UnitQuaternion& q) {
  Eigen::VectorXd x(kNumFeatures);
  x << w_a.force, w_a.torque, q.to_rotation_matrix().row(2).transpose();
  return x;
}

Eigen::MatrixXd design_matrix(const std::vector<Eigen::VectorXd>& features) {
  if (features.empty()) throw Error(ErrorCode::kEmptyLog, "no feature rows");
  const int nf = static_cast<int>(features.front().size());
  Eigen::MatrixXd X(features.size(), nf + 1);
  for (std::size_t i = 0; i < features.size(); ++i) {
    X.row(i).head(nf) = features[i].transpose();
    X(i, nf) = 1.0;
  }
  return X;
}

ResidualModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lambda) {
  if (X.rows() != Y.rows() || Y.cols() != 6) {
    throw Error(ErrorCode::kDimensionMismatch, "ridge_fit expects X (n_s x p) and Y (n_s x 6)");
  }
  if (X.rows() < X.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "ridge_fit needs at least as many samples as columns");
  }
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kConfigInvalid, "ridge lambda must be >= 0");

  const Eigen::MatrixXd XtX = X.transpose() * X;
  const Eigen::MatrixXd Nrm =
      XtX + lambda * Eigen::MatrixXd::Identity(X.cols(), X.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(Nrm);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-14) {
    throw Error(ErrorCode::kSingularNormalEquations,
                "X'X + lambda I is not positive definite (lambda = " + std::to_string(lambda) + ")");
  }
  ResidualModel model;
  model.lambda = lambda;
  model.num_samples = static_cast<int>(X.rows());
  model.C.resize(6, X.cols());
  for (int i = 0; i < 6; ++i) {
    model.C.row(i) = llt.solve(X.transpose() * Y.col(i)).transpose();
  }
  const Eigen::MatrixXd E = X * model.C.transpose() - Y;
  for (int i = 0; i < 6; ++i) model.training_rmse(i) = std::sqrt(E.col(i).squaredNorm() / E.rows());
  return model;
}

Wrench predict_residual(const ResidualModel& model, const Eigen::VectorXd& features) {
  const int nf = model.num_features();
  if (features.size() != nf) {
    throw Error(ErrorCode::kDimensionMismatch, "feature vector size does not match the model");
  }
  return Wrench::from_vector(model.C.leftCols(nf) * features + model.C.col(nf));
}

FitReport training_rmse(const ResidualModel& model, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& Y) {
  if (X.rows() == 0) throw Error(ErrorCode::kEmptyLog, "no samples");
  if (X.cols() != model.C.cols() || Y.rows() != X.rows() || Y.cols() != 6) {
    throw Error(ErrorCode::kDimensionMismatch, "training_rmse sizes");
  }
  const Eigen::MatrixXd E = X * model.C.transpose() - Y;
  const double n = static_cast<double>(E.rows());
  FitReport r;
  for (int i = 0; i < 6; ++i) r.rmse_axis(i) = std::sqrt(E.col(i).squaredNorm() / n);
  const Eigen::VectorXd ef = E.leftCols(3).rowwise().norm();
  const Eigen::VectorXd et = E.rightCols(3).rowwise().norm();
  r.force_rmse = std::sqrt(ef.squaredNorm() / n);
  r.torque_rmse = std::sqrt(et.squaredNorm() / n);
  r.force_std = std::sqrt((ef.array() - ef.mean()).square().sum() / n);
  r.torque_std = std::sqrt((et.array() - et.mean()).square().sum() / n);
  return r;
}

std::vector<double> filtfilt_butter2(const std::vector<double>& x, double cutoff_hz,
                                     double sample_hz) {
  const std::size_t n = x.size();
  if (n < 2 || cutoff_hz >= 0.5 * sample_hz) return x;

  // Bilinear-transform coefficients.
  const double K = std::tan(std::numbers::pi * cutoff_hz / sample_hz);
  const double s2 = std::numbers::sqrt2;
  const double norm = 1.0 / (1.0 + s2 * K + K * K);
  const double b0 = K * K * norm, b1 = 2.0 * b0, b2 = b0;
  const double a1 = 2.0 * (K * K - 1.0) * norm;
  const double a2 = (1.0 - s2 * K + K * K) * norm;

  auto run = [&](const std::vector<double>& in) {
    std::vector<double> out(in.size());
    // Transposed direct form II, state initialized at the DC steady state of in[0].
    double z2 = (b2 - a2) * in[0];
    double z1 = (b1 - a1) * in[0] + z2;
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double y = b0 * in[i] + z1;
      z1 = b1 * in[i] - a1 * y + z2;
      z2 = b2 * in[i] - a2 * y;
      out[i] = y;
    }
    return out;
  };

  // Odd extension at both ends against start-up transients.
  const std::size_t pad = std::min<std::size_t>(n - 1, 60);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> y = run(ext);
  std::reverse(y.begin(), y.end());
  y = run(y);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(pad),
          y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<Wrench> compute_residuals(const TrainingLog& log, const InertialParams& params,
                                      double cutoff_hz) {
  if (log.size() < 3) throw Error(ErrorCode::kEmptyLog, "training log needs at least 3 samples");
  const std::size_t n = log.size();
  const double dt = (log.back().t - log.front().t) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw Error(ErrorCode::kNonUniformSampling, "timestamps not increasing");
  for (std::size_t i = 1; i < n; ++i) {
    const double d = log[i].t - log[i - 1].t;
    if (!(d > 0.0) || std::abs(d - dt) > 1e-3 * dt) {
      throw Error(ErrorCode::kNonUniformSampling,
                  "sample interval " + std::to_string(d) + " s at index " + std::to_string(i));
    }
  }
  const double rate = 1.0 / dt;
  if (rate < 100.0 - 1e-6) {
    throw Error(ErrorCode::kRateTooLow, "log rate " + std::to_string(rate) + " Hz < 100 Hz");
  }

  std::vector<std::vector<double>> wdot(3, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      if (i == 0) {
        wdot[a][i] = (log[1].gyro(a) - log[0].gyro(a)) / dt;
      } else if (i == n - 1) {
        wdot[a][i] = (log[n - 1].gyro(a) - log[n - 2].gyro(a)) / dt;
      } else {
        wdot[a][i] = (log[i + 1].gyro(a) - log[i - 1].gyro(a)) / (2.0 * dt);
      }
    }
  }
  for (int a = 0; a < 3; ++a) wdot[a] = filtfilt_butter2(wdot[a], cutoff_hz, rate);

  std::vector<Wrench> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 wd(wdot[0][i], wdot[1][i], wdot[2][i]);
    out[i].force = params.mass * log[i].specific_force - log[i].command.force;
    out[i].torque = params.inertia * wd - log[i].command.torque;
  }
  return out;
}

void save_model(const ResidualModel& model, const std::string& path) {
  nlohmann::json j;
  j["rows"] = 6;
  j["cols"] = model.C.cols();
  std::vector<double> data;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < model.C.cols(); ++c) data.push_back(model.C(r, c));
  j["C"] = data;
  j["lambda"] = model.lambda;
  j["num_samples"] = model.num_samples;
  j["training_rmse"] = std::vector<double>(model.training_rmse.data(), model.training_rmse.data() + 6);
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  f << j.dump(2) << "\n";
}

ResidualModel load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path);
  nlohmann::json j;
  try {
    f >> j;
    ResidualModel m;
    const int cols = j.at("cols").get<int>();
    const auto data = j.at("C").get<std::vector<double>>();
    if (j.at("rows").get<int>() != 6 || static_cast<int>(data.size()) != 6 * cols) {
      throw Error(ErrorCode::kConfigInvalid, path + ": C has wrong shape");
    }
    m.C.resize(6, cols);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < cols; ++c) m.C(r, c) = data[r * cols + c];
    m.lambda = j.value("lambda", 0.0);
    m.num_samples = j.value("num_samples", 0);
    if (j.contains("training_rmse")) {
      const auto rm = j["training_rmse"].get<std::vector<double>>();
      for (int i = 0; i < 6 && i < static_cast<int>(rm.size()); ++i) m.training_rmse(i) = rm[i];
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, path + ": " + e.what());
  }
}

ResidualSource ResidualSource::body(const Wrench& w) {
  ResidualSource s;
  s.kind = Kind::kBodyConstant;
  s.wrench = w;
  return s;
}

ResidualSource ResidualSource::local(const Wrench& w) {
  ResidualSource s;
  s.kind = Kind::kLocalConstant;
  s.wrench = w;
  return s;
}

ResidualSource ResidualSource::linear(const ResidualModel& model) {
  if (model.C.cols() != kNumFeatures + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "residual model must use the 9-feature preset");
  }
  ResidualSource s;
  s.kind = Kind::kLinearFeatures;
  s.C = model.C;
  return s;
}

Wrench ResidualSource::evaluate(const UnitQuaternion& q, const Wrench& actuator) const {
  Vec3 df, dt;
  detail::residual_eval<double>(*this, q.wxyz(), actuator.force, actuator.torque, df, dt);
  return {df, dt};
}

}  // namespace omav
