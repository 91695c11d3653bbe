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
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "omav/errors.hpp"
#include "omav/trajectories.hpp"

using namespace omav;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Largest violation of v = dp/dt and w = log(q(t-h)^-1 q(t+h)) / 2h at 1 kHz,
// relative to max(1, |v|) and max(1, |w|). Skips samples within h of `skip`.
double derivative_mismatch(const ReferenceTrajectory& tr, const std::vector<double>& skip = {}) {
  const double h = 1e-3;
  double worst = 0.0;
  for (double t = h; t < tr.duration() - h; t += h) {
    bool near = false;
    for (double s : skip) near |= std::abs(t - s) < 2 * h;
    if (near) continue;
    const ReferencePoint a = tr.sample(t - h), b = tr.sample(t), c = tr.sample(t + h);
    const Vec3 v = (c.p - a.p) / (2 * h);
    const Vec3 w = rotation_vector(a.q.inverse() * c.q) / (2 * h);
    worst = std::max(worst, (v - b.v).norm() / std::max(1.0, b.v.norm()));
    worst = std::max(worst, (w - b.w).norm() / std::max(1.0, b.w.norm()));
  }
  return worst;
}

double peak_speed(const ReferenceTrajectory& tr) {
  double m = 0.0;
  for (double t = 0.0; t < tr.duration(); t += 1e-3) m = std::max(m, tr.sample(t).v.norm());
  return m;
}

}  // namespace

TEST(Square, VisitsCornersInOrderAndCloses) {
  SquareOptions o;
  const TrajectoryPtr tr = square(o);
  const double t0 = o.start_dwell;
  const double seg = (tr->duration() - t0) / 4.0;
  const Vec3 corners[4] = {{1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 0}};
  for (int k = 0; k < 4; ++k) {
    // End of leg k, during the corner dwell.
    const ReferencePoint r = tr->sample(t0 + (k + 1) * seg - 0.5 * o.corner_dwell);
    EXPECT_LT((r.p - corners[k]).norm(), 1e-12) << k;
    EXPECT_LT(r.v.norm(), 1e-12);
  }
  EXPECT_LT((tr->sample(tr->duration()).p - tr->sample(0.0).p).norm(), 1e-12);
  EXPECT_LT(derivative_mismatch(*tr), 1e-3);
}

TEST(Square, ReachesPeakSpeed) {
  for (double v : {1.0, 3.0}) {
    SquareOptions o;
    o.v_max = v;
    const TrajectoryPtr tr = square(o);
    // Middle of the first leg is in the cruise phase.
    const double t_leg = o.leg / v + v / (2.0 * v * v / o.leg);
    EXPECT_NEAR(tr->sample(o.start_dwell + 0.5 * t_leg).v.norm(), v, 1e-9);
    EXPECT_LE(peak_speed(*tr), v + 1e-9);
  }
}

TEST(Attitude, ProfileShape) {
  const TrajectoryPtr tr = attitude_profile();
  EXPECT_DOUBLE_EQ(tr->duration(), 27.0);
  double max_roll = 0.0, max_pitch = 0.0;
  for (double t = 0.0; t <= tr->duration(); t += 1e-3) {
    const ReferencePoint r = tr->sample(t);
    EXPECT_EQ(r.p, Vec3::Zero());
    const Vec3 e = euler_zyx(r.q);
    max_roll = std::max(max_roll, std::abs(e(0)));
    max_pitch = std::max(max_pitch, std::abs(e(1)));
    // Roll and pitch excursions never overlap.
    EXPECT_LT(std::min(std::abs(e(0)), std::abs(e(1))), 1e-12);
  }
  EXPECT_NEAR(max_roll, 45 * kDeg, 1e-9);
  EXPECT_NEAR(max_pitch, 45 * kDeg, 1e-9);
  EXPECT_LT(derivative_mismatch(*tr), 1e-3);
}

TEST(Lemniscate, SpeedClassesAndPitch) {
  const TrajectoryPtr slow = lemniscate(lemniscate_slow());
  const TrajectoryPtr fast = lemniscate(lemniscate_fast());
  EXPECT_DOUBLE_EQ(slow->duration(), 15.0);
  EXPECT_DOUBLE_EQ(fast->duration(), 5.5);
  const double vs = peak_speed(*slow), vf = peak_speed(*fast);
  EXPECT_GE(vs, 0.85);
  EXPECT_LE(vs, 0.95);
  EXPECT_GE(vf, 2.7);
  EXPECT_LE(vf, 3.0);
  double pitch = 0.0;
  for (double t = 0.0; t < slow->duration(); t += 1e-3) {
    pitch = std::max(pitch, std::abs(euler_zyx(slow->sample(t).q)(1)));
  }
  EXPECT_NEAR(pitch, 30 * kDeg, 0.5 * kDeg);
  EXPECT_LT(derivative_mismatch(*slow), 1e-3);
  EXPECT_LT(derivative_mismatch(*fast), 1e-3);
}

TEST(StepX, JumpAndDwell) {
  StepOptions o;
  const TrajectoryPtr tr = step_x(o);
  EXPECT_NEAR(tr->sample(o.lead).p.x() - tr->sample(o.lead - 1e-9).p.x(), 1.0, 1e-15);
  EXPECT_NEAR(tr->sample(o.lead + o.dwell - 1e-9).p.x() - tr->sample(o.lead + o.dwell).p.x(), 1.0, 1e-15);
  EXPECT_GE(o.dwell, 5.0);
  for (double t = 0.0; t < tr->duration() + 1.0; t += 1e-2) {
    const ReferencePoint r = tr->sample(t);
    EXPECT_EQ(r.v, Vec3::Zero());
    EXPECT_EQ(r.w, Vec3::Zero());
  }
  EXPECT_LT(derivative_mismatch(*tr, {o.lead, o.lead + o.dwell}), 1e-12);
}

TEST(Trajectories, HoldPastEnd) {
  const TrajectoryPtr tr = lemniscate(lemniscate_slow());
  const ReferencePoint end = tr->sample(tr->duration() - 1e-12);
  const ReferencePoint r = tr->sample(tr->duration() + 3.0);
  EXPECT_LT((r.p - end.p).norm(), 1e-9);
  EXPECT_EQ(r.v, Vec3::Zero());
  const auto win = tr->window(1.0, 0.05, 21);
  ASSERT_EQ(win.size(), 21u);
  EXPECT_DOUBLE_EQ(win[20].t, 2.0);
}

TEST(Trajectories, CsvRoundTrip) {
  const TrajectoryPtr src = attitude_profile();
  const auto path = std::filesystem::temp_directory_path() / "omav_traj_roundtrip.csv";
  {
    std::ofstream f(path);
    f << "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz\n";
    for (double t = 0.0; t <= src->duration() + 1e-9; t += 0.01) {
      const ReferencePoint r = src->sample(t);
      char buf[512];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    t, r.p.x(), r.p.y(), r.p.z(), r.v.x(), r.v.y(), r.v.z(), r.q.w(), r.q.x(),
                    r.q.y(), r.q.z(), r.w.x(), r.w.y(), r.w.z());
      f << buf;
    }
  }
  const TrajectoryPtr tr = load_csv_trajectory(path.string());
  EXPECT_NEAR(tr->duration(), src->duration(), 1e-6);
  for (double t = 0.005; t < 26.9; t += 0.37) {
    EXPECT_LT(geodesic_angle(tr->sample(t).q, src->sample(t).q), 1e-4) << t;
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_csv_trajectory("/nonexistent.csv"), Error);
}

TEST(Trajectories, RejectBadOptions) {
  SquareOptions s;
  s.leg = 0.0;
  EXPECT_THROW(square(s), Error);
  EXPECT_THROW(attitude_profile(2.0), Error);
  LemniscateOptions l;
  l.period = -1.0;
  EXPECT_THROW(lemniscate(l), Error);
  StepOptions st;
  st.dwell = 0.0;
  EXPECT_THROW(step_x(st), Error);
}
