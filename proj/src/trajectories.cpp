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

#include "omav/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "omav/errors.hpp"

namespace omav {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// C2 ramp on [0, 1]: value, first and second derivative.
struct Ramp {
  double s, ds, dds;
};

Ramp ramp(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return {tau - std::sin(kTwoPi * tau) / kTwoPi, 1.0 - std::cos(kTwoPi * tau),
          kTwoPi * std::sin(kTwoPi * tau)};
}

ReferencePoint attitude_point(double t, const Vec3& p, const Vec3& rpy, const Vec3& rpy_dot) {
  ReferencePoint r;
  r.t = t;
  r.p = p;
  r.q = UnitQuaternion::from_euler_zyx(rpy(0), rpy(1), rpy(2));
  r.w = euler_rates_to_body(rpy, rpy_dot);
  return r;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kConfigInvalid, what);
}

struct SquareTiming {
  double accel, peak, t_acc, t_cruise, t_leg, duration;
};

SquareTiming square_timing(const SquareOptions& o) {
  SquareTiming s;
  s.accel = o.accel > 0.0 ? o.accel : 2.0 * o.v_max * o.v_max / o.leg;
  // Triangular profile when the leg is too short to reach v_max.
  s.peak = std::min(o.v_max, std::sqrt(s.accel * o.leg));
  s.t_acc = s.peak / s.accel;
  s.t_cruise = (o.leg - s.peak * s.t_acc) / s.peak;
  s.t_leg = 2.0 * s.t_acc + s.t_cruise;
  s.duration = o.start_dwell + o.laps * 4 * (s.t_leg + o.corner_dwell);
  return s;
}

class SquareTrajectory final : public ReferenceTrajectory {
 public:
  SquareTrajectory(const SquareOptions& o, const SquareTiming& tm)
      : ReferenceTrajectory("square", tm.duration), o_(o), tm_(tm) {}

  ReferencePoint sample(double t) const override {
    if (t >= duration()) return hold_end(t);
    static const Vec3 kCorners[5] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 0}};
    ReferencePoint r;
    r.t = t;
    const Vec3 up(0, 0, o_.altitude);
    double tau = t - o_.start_dwell;
    if (tau < 0.0) {
      r.p = up;
      return r;
    }
    const double seg = tm_.t_leg + o_.corner_dwell;
    const int k = static_cast<int>(std::floor(tau / seg)) % 4;
    tau = std::fmod(tau, seg);
    const Vec3 a = o_.leg * kCorners[k] + up;
    const Vec3 b = o_.leg * kCorners[k + 1] + up;
    const Vec3 dir = (b - a) / o_.leg;
    double s = 0.0, v = 0.0;
    if (tau >= tm_.t_leg) {
      s = o_.leg;
    } else if (tau < tm_.t_acc) {
      s = 0.5 * tm_.accel * tau * tau;
      v = tm_.accel * tau;
    } else if (tau < tm_.t_acc + tm_.t_cruise) {
      s = 0.5 * tm_.peak * tm_.t_acc + tm_.peak * (tau - tm_.t_acc);
      v = tm_.peak;
    } else {
      const double d = tm_.t_leg - tau;
      s = o_.leg - 0.5 * tm_.accel * d * d;
      v = tm_.accel * d;
    }
    r.p = a + s * dir;
    r.v = v * dir;
    return r;
  }

 private:
  SquareOptions o_;
  SquareTiming tm_;
};

class AttitudeProfile final : public ReferenceTrajectory {
 public:
  AttitudeProfile(double max_angle, double duration)
      : ReferenceTrajectory("attitude", duration), max_(max_angle) {
    // Six ramps of 3 s and seven equal holds on the 27 s schedule.
    const double scale = duration / 27.0;
    ramp_ = 3.0 * scale;
    hold_ = 9.0 / 7.0 * scale;
  }

  ReferencePoint sample(double t) const override {
    if (t >= duration()) return hold_end(t);
    // Ramp i goes from kFrom[i] to kTo[i] in units of max; ramps 0-2 roll, 3-5 pitch.
    static const double kFrom[6] = {0, 1, -1, 0, 1, -1};
    static const double kTo[6] = {1, -1, 0, 1, -1, 0};
    Vec3 rpy = Vec3::Zero(), rate = Vec3::Zero();
    double tau = t - hold_;
    for (int i = 0; i < 6 && tau >= 0.0; ++i) {
      const int axis = i < 3 ? 0 : 1;
      const Ramp r = ramp(tau / ramp_);
      const double span = (kTo[i] - kFrom[i]) * max_;
      rpy(axis) = kFrom[i] * max_ + span * r.s;
      rate(axis) = tau < ramp_ ? span * r.ds / ramp_ : 0.0;
      tau -= ramp_ + hold_;
    }
    return attitude_point(t, Vec3::Zero(), rpy, rate);
  }

 private:
  double max_, ramp_, hold_;
};

class Lemniscate final : public ReferenceTrajectory {
 public:
  explicit Lemniscate(const LemniscateOptions& o)
      : ReferenceTrajectory("lemniscate", o.start_dwell + o.laps * o.period), o_(o) {
    omega_ = kTwoPi / o.period;
    // Amplitude from the peak of |dp/dphi| / A over one period.
    double g = 0.0;
    for (int i = 0; i <= 200000; ++i) {
      const double phi = kTwoPi * i / 200000.0;
      const double c = std::cos(phi), c2 = std::cos(2 * phi), s2 = std::sin(2 * phi);
      g = std::max(g, std::sqrt(c * c + c2 * c2 + o.bend_ratio * o.bend_ratio * s2 * s2));
    }
    amp_ = o.peak_speed / (omega_ * g);
  }

  ReferencePoint sample(double t) const override {
    if (t >= duration()) return hold_end(t);
    const double tau = t - o_.start_dwell;
    if (tau < 0.0) {
      ReferencePoint r;
      r.t = t;
      return r;
    }
    const double phi = omega_ * tau;
    const double A = amp_, B = o_.bend_ratio * amp_;
    const double s = std::sin(phi), c = std::cos(phi);
    ReferencePoint r = attitude_point(t, Vec3(A * s, 0.5 * A * std::sin(2 * phi), B * s * s),
                                      Vec3(0, o_.pitch_max * s, 0),
                                      Vec3(0, o_.pitch_max * c * omega_, 0));
    r.v = omega_ * Vec3(A * c, A * std::cos(2 * phi), B * std::sin(2 * phi));
    return r;
  }

 private:
  LemniscateOptions o_;
  double omega_ = 0.0, amp_ = 0.0;
};

class StepX final : public ReferenceTrajectory {
 public:
  explicit StepX(const StepOptions& o)
      : ReferenceTrajectory("step_x", o.lead + 2.0 * o.repeats * o.dwell, o.preview), o_(o) {}

  ReferencePoint sample(double t) const override {
    ReferencePoint r;
    r.t = t;
    const double tau = std::min(t, duration()) - o_.lead;
    if (tau >= 0.0 && tau < duration() - o_.lead) {
      const int k = static_cast<int>(std::floor(tau / o_.dwell));
      if (k % 2 == 0) r.p.x() = o_.length;
    }
    return r;
  }

 private:
  StepOptions o_;
};

class Hover final : public ReferenceTrajectory {
 public:
  Hover(double duration, const Vec3& p) : ReferenceTrajectory("hover", duration), p_(p) {}
  ReferencePoint sample(double t) const override {
    ReferencePoint r;
    r.t = t;
    r.p = p_;
    return r;
  }

 private:
  Vec3 p_;
};

class SampledTrajectory final : public ReferenceTrajectory {
 public:
  SampledTrajectory(std::string name, std::vector<ReferencePoint> pts)
      : ReferenceTrajectory(std::move(name), pts.back().t - pts.front().t), pts_(std::move(pts)) {}

  ReferencePoint sample(double t) const override {
    if (t >= duration()) return hold_end(t);
    const double ts = pts_.front().t + std::max(t, 0.0);
    auto it = std::upper_bound(pts_.begin(), pts_.end(), ts,
                               [](double v, const ReferencePoint& p) { return v < p.t; });
    const std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - pts_.begin(), 1), pts_.size() - 1);
    const ReferencePoint& a = pts_[i - 1];
    const ReferencePoint& b = pts_[i];
    const double u = (ts - a.t) / (b.t - a.t);
    ReferencePoint r;
    r.t = t;
    r.p = (1 - u) * a.p + u * b.p;
    r.v = (1 - u) * a.v + u * b.v;
    r.w = (1 - u) * a.w + u * b.w;
    const Eigen::Quaterniond qa(a.q.w(), a.q.x(), a.q.y(), a.q.z());
    const Eigen::Quaterniond qb(b.q.w(), b.q.x(), b.q.y(), b.q.z());
    const Eigen::Quaterniond qs = qa.slerp(u, qb);
    r.q = UnitQuaternion(qs.w(), qs.x(), qs.y(), qs.z());
    return r;
  }

 private:
  std::vector<ReferencePoint> pts_;
};

}  // namespace

std::vector<ReferencePoint> ReferenceTrajectory::window(double t0, double dt, int n) const {
  std::vector<ReferencePoint> out;
  out.reserve(n);
  const ReferencePoint now = sample(t0);
  for (int k = 0; k < n; ++k) {
    if (preview_) {
      out.push_back(sample(t0 + k * dt));
    } else {
      out.push_back(now);
      out.back().t = t0 + k * dt;
    }
  }
  return out;
}

ReferencePoint ReferenceTrajectory::hold_end(double t) const {
  ReferencePoint r = sample(duration_ - 1e-12);
  r.t = t;
  r.v.setZero();
  r.w.setZero();
  return r;
}

Vec3 euler_rates_to_body(const Vec3& rpy, const Vec3& rd) {
  const double sr = std::sin(rpy(0)), cr = std::cos(rpy(0));
  const double sp = std::sin(rpy(1)), cp = std::cos(rpy(1));
  return {rd(0) - rd(2) * sp, rd(1) * cr + rd(2) * sr * cp, -rd(1) * sr + rd(2) * cr * cp};
}

TrajectoryPtr square(const SquareOptions& o) {
  require(o.leg > 0.0 && o.v_max > 0.0 && o.accel >= 0.0, "square needs leg > 0, v_max > 0, accel >= 0");
  require(o.corner_dwell >= 0.0 && o.start_dwell >= 0.0 && o.laps >= 1, "square dwell >= 0, laps >= 1");
  return std::make_shared<SquareTrajectory>(o, square_timing(o));
}

TrajectoryPtr attitude_profile(double max_angle, double duration) {
  require(max_angle > 0.0 && max_angle < 0.5 * std::numbers::pi, "attitude max_angle must be in (0, pi/2)");
  require(duration > 0.0, "attitude duration must be > 0");
  return std::make_shared<AttitudeProfile>(max_angle, duration);
}

TrajectoryPtr lemniscate(const LemniscateOptions& o) {
  require(o.period > 0.0 && o.peak_speed > 0.0 && o.laps >= 1, "lemniscate period, peak_speed > 0, laps >= 1");
  require(std::abs(o.pitch_max) < 0.5 * std::numbers::pi, "lemniscate pitch_max must be below pi/2");
  return std::make_shared<Lemniscate>(o);
}

LemniscateOptions lemniscate_slow() { return {}; }

LemniscateOptions lemniscate_fast() {
  LemniscateOptions o;
  o.period = 5.5;
  o.peak_speed = 2.9;
  return o;
}

TrajectoryPtr step_x(const StepOptions& o) {
  require(o.length > 0.0 && o.dwell > 0.0 && o.lead >= 0.0 && o.repeats >= 1,
          "step_x needs length > 0, dwell > 0, lead >= 0, repeats >= 1");
  return std::make_shared<StepX>(o);
}

TrajectoryPtr hover(double duration, const Vec3& p) {
  require(duration > 0.0, "hover duration must be > 0");
  return std::make_shared<Hover>(duration, p);
}

TrajectoryPtr load_csv_trajectory(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::vector<ReferencePoint> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double v[14];
    int n = 0;
    while (n < 14 && ss >> v[n]) ++n;
    if (n == 0 && lineno == 1) continue;  // header
    if (n != 14) {
      throw Error(ErrorCode::kConfigInvalid, path + ":" + std::to_string(lineno) + ": expected 14 columns");
    }
    ReferencePoint r;
    r.t = v[0];
    r.p = Vec3(v[1], v[2], v[3]);
    r.v = Vec3(v[4], v[5], v[6]);
    r.q = UnitQuaternion(v[7], v[8], v[9], v[10]);
    r.w = Vec3(v[11], v[12], v[13]);
    if (!pts.empty() && !(r.t > pts.back().t)) {
      throw Error(ErrorCode::kConfigInvalid, path + ":" + std::to_string(lineno) + ": time not increasing");
    }
    pts.push_back(r);
  }
  if (pts.size() < 2) throw Error(ErrorCode::kEmptyLog, path + ": need at least two rows");
  return std::make_shared<SampledTrajectory>(path, std::move(pts));
}

}  // namespace omav
