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

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "omav/simulator.hpp"

namespace omav {

/// Box limits checked on every control tick.
struct ConstraintLimits {
  double alpha_max = 3.141592653589793;  // |alpha|
  double tilt_rate_max = 10.0;
  double thrust_min = 0.1;
  double thrust_max = 16.0;
  double thrust_rate_max = 29.0;
  double force_max = 20.0;   // |wbar| force part
  double torque_max = 20.0;
  double force_rate_max = 348.0;
  double torque_rate_max = 104.0;
  double tolerance = 1e-6;

  static ConstraintLimits from(const WmpcConfig& w, const AmpcConfig& a);
};

struct ConstraintReport {
  int ticks = 0;
  /// Ticks where the controller's own boxes are violated: wrench and wrench
  /// rate for WMPC, tilt, thrust, tilt rate and thrust rate for AMPC.
  int violations = 0;
  /// Ticks whose commanded tilt rate exceeds tilt_rate_max, for either controller.
  int tilt_rate_exceedances = 0;
  double max_tilt_rate = 0.0;
  double max_thrust_rate = 0.0;
  double max_abs_alpha = 0.0;
  double min_thrust = std::numeric_limits<double>::infinity();
  double max_thrust = 0.0;
  double max_force_offset = 0.0;
  double max_torque_offset = 0.0;
  double max_force_rate = 0.0;
  double max_torque_rate = 0.0;
  /// max over ticks of |alpha_cmd - alpha*|_inf.
  double max_alpha_deviation = 0.0;
  /// Mean over arms of (alpha_cmd - alpha*) at the end minus at the start.
  double alpha_drift = 0.0;
};

struct SolverStats {
  int ticks = 0;
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
  double budget = 0.01;
  double exceedance = 0.0;  // fraction of ticks above budget
  int fallbacks = 0;
};

struct TrackingReport {
  std::string controller;
  std::string residual_mode;
  std::string trajectory;
  std::uint64_t seed = 0;
  int samples = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  double position_rmse = 0.0;  // [m]
  double attitude_rmse = 0.0;  // [rad], error Euler angles
  Vec3 position_rmse_axis = Vec3::Zero();
  Vec3 attitude_rmse_axis = Vec3::Zero();
  ConstraintReport constraints;
  SolverStats solver;
  int ekf_rejected = 0;
  int post_mpc_saturations = 0;
};

/// RMSE of p - p_r and of error_euler(q, q_r) over the plant ticks in
/// [t_begin, t_end]. Throws kEmptyLog when no tick falls in the window.
TrackingReport tracking_rmse(const SimLog& log, double t_begin = 0.0,
                             double t_end = std::numeric_limits<double>::infinity());

/// Percentiles use the nearest-rank definition.
SolverStats solver_stats(const std::vector<double>& solve_times, double budget = 0.01);
SolverStats solver_stats(const SimLog& log, double budget = 0.01);

ConstraintReport constraint_report(const SimLog& log, const ConstraintLimits& limits);

/// Tracking, constraint and solver statistics of one episode.
TrackingReport evaluate(const SimLog& log, const ConstraintLimits& limits, double budget = 0.01);

void to_json(nlohmann::json& j, const TrackingReport& r);

}  // namespace omav
