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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "omav/errors.hpp"
#include "omav/metrics.hpp"

using namespace omav;

namespace {

// n rows at 1 kHz; err(t) gives (position error, roll error).
template <class F>
SimLog synthetic(int n, const UnitQuaternion& q_ref, F err) {
  SimLog log;
  log.controller = "wmpc";
  for (int k = 0; k < n; ++k) {
    SimRow r;
    r.t = k * 1e-3;
    r.ref.p = Vec3(1, 2, 3);
    r.ref.q = q_ref;
    const auto [dp, droll] = err(r.t);
    r.x.p = r.ref.p + dp;
    r.x.q = q_ref * UnitQuaternion::from_euler_zyx(droll, 0.0, 0.0);
    r.control_tick = k % 10 == 0;
    log.rows.push_back(r);
  }
  return log;
}

}  // namespace

TEST(TrackingRmse, PerfectAndConstantOffset) {
  const UnitQuaternion q = UnitQuaternion::from_euler_zyx(1.2, -1.3, 0.4);
  const TrackingReport perfect = tracking_rmse(synthetic(500, q, [](double) {
    return std::pair{Vec3::Zero().eval(), 0.0};
  }));
  // Exactly zero even at large roll and pitch.
  EXPECT_EQ(perfect.position_rmse, 0.0);
  EXPECT_EQ(perfect.attitude_rmse, 0.0);

  const TrackingReport off = tracking_rmse(synthetic(500, q, [](double) {
    return std::pair{Vec3(0.1, 0, 0), 0.0};
  }));
  EXPECT_NEAR(off.position_rmse, 0.1, 1e-15);
  EXPECT_NEAR(off.position_rmse_axis.x(), 0.1, 1e-15);
  EXPECT_EQ(off.position_rmse_axis.y(), 0.0);
}

TEST(TrackingRmse, SinusoidClosedForm) {
  // Whole periods sampled uniformly: mean of sin^2 is exactly 1/2.
  const double a = 0.03, f = 2.0;
  const auto err = [&](double t) {
    const double s = a * std::sin(2 * std::numbers::pi * f * t);
    return std::pair{Vec3(0, s, 0), s};
  };
  const TrackingReport r = tracking_rmse(synthetic(2000, UnitQuaternion(), err));
  EXPECT_NEAR(r.position_rmse, a / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(r.attitude_rmse, a / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(r.attitude_rmse_axis.x(), a / std::sqrt(2.0), 1e-6);
}

TEST(TrackingRmse, InvariantUnderReindexing) {
  std::mt19937 rng(4);
  std::normal_distribution<double> n(0.0, 0.01);
  SimLog log = synthetic(777, UnitQuaternion::from_euler_zyx(0.3, 0.2, 0.1), [&](double) {
    return std::pair{Vec3(n(rng), n(rng), n(rng)), n(rng)};
  });
  const TrackingReport a = tracking_rmse(log);
  std::shuffle(log.rows.begin(), log.rows.end(), rng);
  for (std::size_t k = 0; k < log.rows.size(); ++k) log.rows[k].t = 5.0 + 1e-3 * k;
  const TrackingReport b = tracking_rmse(log);
  EXPECT_NEAR(a.position_rmse, b.position_rmse, 1e-15);
  EXPECT_NEAR(a.attitude_rmse, b.attitude_rmse, 1e-15);
}

TEST(TrackingRmse, WindowAndEmpty) {
  const SimLog log = synthetic(1000, UnitQuaternion(), [](double t) {
    return std::pair{Vec3(t < 0.5 ? 1.0 : 0.0, 0, 0), 0.0};
  });
  EXPECT_EQ(tracking_rmse(log, 0.5).position_rmse, 0.0);
  EXPECT_THROW(tracking_rmse(SimLog{}), Error);
  EXPECT_THROW(tracking_rmse(log, 5.0), Error);
}

TEST(SolverStats, BudgetExceedance) {
  const SolverStats one = solver_stats(std::vector<double>(100, 1e-3));
  EXPECT_EQ(one.exceedance, 0.0);
  EXPECT_EQ(one.p50, 1e-3);
  std::vector<double> alt;
  for (int k = 0; k < 100; ++k) alt.push_back(k % 2 ? 15e-3 : 5e-3);
  const SolverStats s = solver_stats(alt);
  EXPECT_EQ(s.exceedance, 0.5);
  EXPECT_EQ(s.p50, 5e-3);
  EXPECT_EQ(s.p95, 15e-3);
  EXPECT_EQ(s.max, 15e-3);
  EXPECT_THROW(solver_stats(std::vector<double>{}), Error);
}

TEST(Constraints, CountsPerController) {
  SimLog log = synthetic(30, UnitQuaternion(), [](double) { return std::pair{Vec3::Zero().eval(), 0.0}; });
  for (SimRow& r : log.rows) {
    r.alpha_cmd = Eigen::VectorXd::Constant(2, 0.2);
    r.alpha_ref = Eigen::VectorXd::Constant(2, 0.1);
    r.tilt_rate_cmd = Eigen::VectorXd::Constant(2, 12.0);
    r.thrust_cmd = Eigen::VectorXd::Constant(4, 5.0);
    r.thrust_rate_cmd = Eigen::VectorXd::Zero(4);
  }
  log.rows[20].offset.force.x() = 25.0;
  const ConstraintLimits lim;
  ConstraintReport w = constraint_report(log, lim);
  EXPECT_EQ(w.ticks, 3);
  EXPECT_EQ(w.violations, 1);  // the wrench box only
  EXPECT_EQ(w.tilt_rate_exceedances, 3);
  EXPECT_NEAR(w.max_alpha_deviation, 0.1, 1e-15);
  EXPECT_NEAR(w.alpha_drift, 0.0, 1e-15);
  log.controller = "ampc";
  ConstraintReport a = constraint_report(log, lim);
  EXPECT_EQ(a.violations, 3);  // the tilt-rate box on every tick
  EXPECT_EQ(a.max_tilt_rate, 12.0);
}

TEST(Report, JsonHasAllSections) {
  SimLog log = synthetic(30, UnitQuaternion(), [](double) { return std::pair{Vec3(0.1, 0, 0), 0.0}; });
  log.solve_times = {1e-3, 2e-3, 3e-3};
  const nlohmann::json j = evaluate(log, ConstraintLimits{});
  EXPECT_NEAR(j.at("position_rmse").get<double>(), 0.1, 1e-12);
  EXPECT_EQ(j.at("solver").at("ticks").get<int>(), 3);
  EXPECT_TRUE(j.at("constraints").contains("violations"));
}
