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

#include "omav/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "omav/errors.hpp"

namespace omav {

ConstraintLimits ConstraintLimits::from(const WmpcConfig& w, const AmpcConfig& a) {
  ConstraintLimits l;
  l.tilt_rate_max = a.tilt_rate_max;
  l.thrust_min = a.thrust_min;
  l.thrust_max = a.thrust_max;
  l.thrust_rate_max = a.thrust_rate_max;
  l.force_max = w.force_max;
  l.torque_max = w.torque_max;
  l.force_rate_max = w.force_rate_max;
  l.torque_rate_max = w.torque_rate_max;
  return l;
}

TrackingReport tracking_rmse(const SimLog& log, double t_begin, double t_end) {
  TrackingReport r;
  r.controller = log.controller;
  r.residual_mode = log.residual_mode;
  r.trajectory = log.trajectory;
  r.seed = log.seed;
  Vec3 sp = Vec3::Zero(), sa = Vec3::Zero();
  bool first = true;
  for (const SimRow& row : log.rows) {
    if (row.t < t_begin || row.t > t_end) continue;
    if (first) r.t_begin = row.t;
    first = false;
    r.t_end = row.t;
    sp += (row.x.p - row.ref.p).cwiseAbs2();
    sa += error_euler(row.x.q, row.ref.q).cwiseAbs2();
    ++r.samples;
  }
  if (r.samples == 0) throw Error(ErrorCode::kEmptyLog, "no log rows in the evaluation window");
  const double n = r.samples;
  r.position_rmse = std::sqrt(sp.sum() / n);
  r.attitude_rmse = std::sqrt(sa.sum() / n);
  r.position_rmse_axis = (sp / n).cwiseSqrt();
  r.attitude_rmse_axis = (sa / n).cwiseSqrt();
  r.ekf_rejected = log.ekf_rejected;
  r.post_mpc_saturations = log.post_mpc_saturations;
  return r;
}

SolverStats solver_stats(const std::vector<double>& solve_times, double budget) {
  if (solve_times.empty()) throw Error(ErrorCode::kEmptyLog, "no solve times recorded");
  std::vector<double> s = solve_times;
  std::sort(s.begin(), s.end());
  const auto rank = [&](double p) {
    const auto k = static_cast<std::size_t>(std::ceil(p * s.size()));
    return s[std::clamp<std::size_t>(k, 1, s.size()) - 1];
  };
  SolverStats st;
  st.ticks = static_cast<int>(s.size());
  st.p50 = rank(0.50);
  st.p95 = rank(0.95);
  st.max = s.back();
  st.budget = budget;
  const auto over = std::count_if(s.begin(), s.end(), [&](double t) { return t > budget; });
  st.exceedance = static_cast<double>(over) / s.size();
  return st;
}

SolverStats solver_stats(const SimLog& log, double budget) {
  SolverStats st = solver_stats(log.solve_times, budget);
  st.fallbacks = log.fallbacks;
  return st;
}

ConstraintReport constraint_report(const SimLog& log, const ConstraintLimits& l) {
  ConstraintReport c;
  const bool ampc = log.controller == "ampc";
  const double tol = l.tolerance;
  const SimRow* first = nullptr;
  const SimRow* last = nullptr;
  for (const SimRow& r : log.rows) {
    if (!r.control_tick) continue;
    if (!first) first = &r;
    last = &r;
    ++c.ticks;
    const double tilt_rate = r.tilt_rate_cmd.size() ? r.tilt_rate_cmd.cwiseAbs().maxCoeff() : 0.0;
    const double thrust_rate = r.thrust_rate_cmd.size() ? r.thrust_rate_cmd.cwiseAbs().maxCoeff() : 0.0;
    const double abs_alpha = r.alpha_cmd.size() ? r.alpha_cmd.cwiseAbs().maxCoeff() : 0.0;
    const double fo = r.offset.force.cwiseAbs().maxCoeff(), to = r.offset.torque.cwiseAbs().maxCoeff();
    const double fr = r.offset_rate.force.cwiseAbs().maxCoeff(), tr = r.offset_rate.torque.cwiseAbs().maxCoeff();
    c.max_tilt_rate = std::max(c.max_tilt_rate, tilt_rate);
    c.max_thrust_rate = std::max(c.max_thrust_rate, thrust_rate);
    c.max_abs_alpha = std::max(c.max_abs_alpha, abs_alpha);
    if (r.thrust_cmd.size()) {
      c.min_thrust = std::min(c.min_thrust, r.thrust_cmd.minCoeff());
      c.max_thrust = std::max(c.max_thrust, r.thrust_cmd.maxCoeff());
    }
    c.max_force_offset = std::max(c.max_force_offset, fo);
    c.max_torque_offset = std::max(c.max_torque_offset, to);
    c.max_force_rate = std::max(c.max_force_rate, fr);
    c.max_torque_rate = std::max(c.max_torque_rate, tr);
    if (r.alpha_ref.size() == r.alpha_cmd.size() && r.alpha_cmd.size()) {
      c.max_alpha_deviation = std::max(c.max_alpha_deviation, (r.alpha_cmd - r.alpha_ref).cwiseAbs().maxCoeff());
    }
    if (tilt_rate > l.tilt_rate_max + tol) ++c.tilt_rate_exceedances;

    bool bad = false;
    if (ampc) {
      bad |= abs_alpha > l.alpha_max + tol;
      bad |= tilt_rate > l.tilt_rate_max + tol;
      bad |= thrust_rate > l.thrust_rate_max + tol;
      bad |= r.thrust_cmd.size() &&
             (r.thrust_cmd.minCoeff() < l.thrust_min - tol || r.thrust_cmd.maxCoeff() > l.thrust_max + tol);
    } else {
      bad |= fo > l.force_max + tol || to > l.torque_max + tol;
      bad |= fr > l.force_rate_max + tol || tr > l.torque_rate_max + tol;
    }
    if (bad) ++c.violations;
  }
  if (!c.ticks) throw Error(ErrorCode::kEmptyLog, "no control ticks in log");
  if (first->alpha_ref.size() && first->alpha_ref.size() == first->alpha_cmd.size()) {
    c.alpha_drift = (last->alpha_cmd - last->alpha_ref).mean() - (first->alpha_cmd - first->alpha_ref).mean();
  }
  if (!std::isfinite(c.min_thrust)) c.min_thrust = 0.0;
  return c;
}

TrackingReport evaluate(const SimLog& log, const ConstraintLimits& limits, double budget) {
  TrackingReport r = tracking_rmse(log);
  r.constraints = constraint_report(log, limits);
  r.solver = solver_stats(log, budget);
  return r;
}

namespace {

nlohmann::json vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

void to_json(nlohmann::json& j, const TrackingReport& r) {
  const ConstraintReport& c = r.constraints;
  const SolverStats& s = r.solver;
  j = {
      {"controller", r.controller},
      {"residual_mode", r.residual_mode},
      {"trajectory", r.trajectory},
      {"seed", r.seed},
      {"samples", r.samples},
      {"window", {r.t_begin, r.t_end}},
      {"rmse_over", "plant ticks"},
      {"position_rmse", r.position_rmse},
      {"attitude_rmse", r.attitude_rmse},
      {"position_rmse_axis", vec(r.position_rmse_axis)},
      {"attitude_rmse_axis", vec(r.attitude_rmse_axis)},
      {"constraints",
       {{"ticks", c.ticks},
        {"violations", c.violations},
        {"tilt_rate_exceedances", c.tilt_rate_exceedances},
        {"max_tilt_rate", c.max_tilt_rate},
        {"max_thrust_rate", c.max_thrust_rate},
        {"max_abs_alpha", c.max_abs_alpha},
        {"min_thrust", c.min_thrust},
        {"max_thrust", c.max_thrust},
        {"max_force_offset", c.max_force_offset},
        {"max_torque_offset", c.max_torque_offset},
        {"max_force_rate", c.max_force_rate},
        {"max_torque_rate", c.max_torque_rate},
        {"max_alpha_deviation", c.max_alpha_deviation},
        {"alpha_drift", c.alpha_drift}}},
      {"solver",
       {{"ticks", s.ticks},
        {"p50", s.p50},
        {"p95", s.p95},
        {"max", s.max},
        {"budget", s.budget},
        {"exceedance", s.exceedance},
        {"fallbacks", s.fallbacks}}},
      {"ekf_rejected", r.ekf_rejected},
      {"post_mpc_saturations", r.post_mpc_saturations},
  };
}

}  // namespace omav
