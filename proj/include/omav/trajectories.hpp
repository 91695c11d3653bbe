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

#include <memory>
#include <string>
#include <vector>

#include "omav/reference.hpp"

namespace omav {

/// Time-parameterized reference. sample() clamps t to [0, duration]; past the
/// end the final pose is held with zero twist.
class ReferenceTrajectory {
 public:
  virtual ~ReferenceTrajectory() = default;

  virtual ReferencePoint sample(double t) const = 0;
  double duration() const { return duration_; }
  const std::string& name() const { return name_; }

  /// n points spaced by dt starting at t0. Without preview every point
  /// holds the target at t0.
  std::vector<ReferencePoint> window(double t0, double dt, int n) const;
  bool preview() const { return preview_; }

 protected:
  ReferenceTrajectory(std::string name, double duration, bool preview = true)
      : name_(std::move(name)), duration_(duration), preview_(preview) {}
  ReferencePoint hold_end(double t) const;

 private:
  std::string name_;
  double duration_;
  bool preview_;
};

using TrajectoryPtr = std::shared_ptr<const ReferenceTrajectory>;

struct SquareOptions {
  double leg = 1.0;
  double v_max = 1.0;
  /// Acceleration used on each leg; 0 picks 2 v_max^2 / leg (a quarter of
  /// the leg spent accelerating).
  double accel = 0.0;
  double altitude = 0.0;
  double corner_dwell = 0.5;
  double start_dwell = 1.0;
  int laps = 1;
};

/// Horizontal square through (0,0), (leg,0), (leg,leg), (0,leg) with a
/// trapezoidal speed profile per leg and fixed attitude.
TrajectoryPtr square(const SquareOptions& opt = {});

/// Roll to +max, to -max and back, then the same in pitch. Sinusoidal C2
/// ramps, position fixed. The default schedule lasts 27 s.
TrajectoryPtr attitude_profile(double max_angle = 0.7853981633974483, double duration = 27.0);

struct LemniscateOptions {
  double period = 15.0;        // one figure eight
  double peak_speed = 0.9;     // amplitude is scaled so max |v_r| equals this
  double bend_ratio = 0.25;    // vertical bend height / amplitude
  double pitch_max = 0.5235987755982988;
  double start_dwell = 0.0;
  int laps = 1;
};

/// Gerono lemniscate x = A sin(phi), y = A/2 sin(2 phi), bent upward at the
/// lobes by z = B sin^2(phi), with pitch theta_max sin(phi).
TrajectoryPtr lemniscate(const LemniscateOptions& opt = {});
LemniscateOptions lemniscate_slow();
LemniscateOptions lemniscate_fast();

struct StepOptions {
  double length = 1.0;
  double dwell = 5.0;
  double lead = 1.0;  // time at the origin before the first step
  int repeats = 1;    // forward/backward pairs
  /// Setpoint steps by default: the controller sees only the current target.
  bool preview = false;
};

/// Position steps along x: origin, +length after `lead`, back after `dwell`.
TrajectoryPtr step_x(const StepOptions& opt = {});

/// Hover at p.
TrajectoryPtr hover(double duration, const Vec3& p = Vec3::Zero());

/// Rows: t, px, py, pz, vx, vy, vz, qw, qx, qy, qz, wx, wy, wz with strictly
/// increasing t. Linear interpolation in position/twist, slerp in attitude.
TrajectoryPtr load_csv_trajectory(const std::string& path);

/// Body rates of ZYX Euler angle rates.
Vec3 euler_rates_to_body(const Vec3& rpy, const Vec3& rpy_dot);

}  // namespace omav
