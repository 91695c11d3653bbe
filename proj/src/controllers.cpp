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

#include "omav/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <spdlog/spdlog.h>
#include <unsupported/Eigen/AutoDiff>

#include "omav/detail/math.hpp"
#include "omav/errors.hpp"

namespace omav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class S>
using WState = Eigen::Matrix<S, WmpcModel::kStateDim, 1>;
template <class S>
using WInput = Eigen::Matrix<S, WmpcModel::kInputDim, 1>;

template <class S>
WState<S> wmpc_rhs(const WState<S>& x, const WInput<S>& u, const InertialParams& prm,
                   const Mat3& J_inv, const ResidualSource& residual) {
  using detail::V3;
  using detail::V4;
  const V3<S> wf = x.template segment<3>(0);
  const V3<S> wt = x.template segment<3>(3);
  const V3<S> p = x.template segment<3>(6);
  const V3<S> v = x.template segment<3>(9);
  const V4<S> q = x.template segment<4>(12);
  const V3<S> w = x.template segment<3>(16);

  const detail::M3<S> R = detail::qrotmat(q);
  const V3<S> g(S(prm.gravity(0)), S(prm.gravity(1)), S(prm.gravity(2)));
  const V3<S> g_body = detail::matTvec(R, g);
  V3<S> f_a, tau_a;
  for (int i = 0; i < 3; ++i) {
    f_a(i) = wf(i) - prm.mass * g_body(i);
    tau_a(i) = wt(i);
  }
  V3<S> df, dtau;
  detail::residual_eval(residual, q, f_a, tau_a, df, dtau);
  V3<S> f, tau;
  for (int i = 0; i < 3; ++i) {
    f(i) = f_a(i) + df(i);
    tau(i) = tau_a(i) + dtau(i);
  }
  V3<S> pd, vd, wd;
  V4<S> qd;
  detail::rigid_rhs(p, q, v, w, f, tau, prm.mass, prm.inertia, J_inv, prm.gravity, pd, qd, vd, wd);

  WState<S> xd;
  xd.template segment<6>(0) = u;
  xd.template segment<3>(6) = pd;
  xd.template segment<3>(9) = vd;
  xd.template segment<4>(12) = qd;
  xd.template segment<3>(16) = wd;
  return xd;
}

template <class S>
WState<S> wmpc_rk4(const WState<S>& x, const WInput<S>& u, const InertialParams& prm,
                   const Mat3& J_inv, const ResidualSource& residual, double dt) {
  const S h(dt);
  const S half(0.5 * dt);
  const WState<S> k1 = wmpc_rhs<S>(x, u, prm, J_inv, residual);
  const WState<S> k2 = wmpc_rhs<S>(x + half * k1, u, prm, J_inv, residual);
  const WState<S> k3 = wmpc_rhs<S>(x + half * k2, u, prm, J_inv, residual);
  const WState<S> k4 = wmpc_rhs<S>(x + h * k3, u, prm, J_inv, residual);
  WState<S> n = x + S(dt / 6.0) * (k1 + S(2) * k2 + S(2) * k3 + k4);
  const detail::V4<S> q = detail::qnormalize<S>(n.template segment<4>(12));
  n.template segment<4>(12) = q;
  return n;
}

void normalize_quaternion(Eigen::VectorXd& x, int offset) {
  const double n = x.segment<4>(offset).norm();
  if (n > 0.0) x.segment<4>(offset) /= n;
}

Eigen::MatrixXd diag(const Eigen::VectorXd& d) { return d.asDiagonal(); }

double wrap_towards(double a, double target) {
  return a + 2.0 * std::numbers::pi * std::round((target - a) / (2.0 * std::numbers::pi));
}

}  // namespace

std::string_view to_string(ResidualMode mode) {
  switch (mode) {
    case ResidualMode::kNone: return "N/c";
    case ResidualMode::kInMpc: return "In-MPC";
    case ResidualMode::kPostMpc: return "Post-MPC";
    case ResidualMode::kObserver: return "D/o";
  }
  return "N/c";
}

ResidualMode residual_mode_from_string(std::string_view s) {
  if (s == "N/c" || s == "none") return ResidualMode::kNone;
  if (s == "In-MPC" || s == "in_mpc") return ResidualMode::kInMpc;
  if (s == "Post-MPC" || s == "post_mpc") return ResidualMode::kPostMpc;
  if (s == "D/o" || s == "observer") return ResidualMode::kObserver;
  throw Error(ErrorCode::kConfigInvalid, "unknown residual mode '" + std::string(s) + "'");
}

Eigen::Matrix<double, 12, 1> TrackingWeights::diagonal() const {
  Eigen::Matrix<double, 12, 1> d;
  d << position, velocity, attitude, rate;
  return d;
}

Eigen::Matrix<double, 12, 1> tracking_residual(const Vec3& p, const Vec3& v,
                                               const UnitQuaternion& q, const Vec3& w,
                                               const ReferencePoint& ref) {
  const Mat3 Rt = q.to_rotation_matrix().transpose();
  Eigen::Matrix<double, 12, 1> r;
  r << p - ref.p, v - Rt * ref.v, attitude_error(q, ref.q),
      w - Rt * ref.q.to_rotation_matrix() * ref.w;
  return r;
}

// ---------------------------------------------------------------- WMPC

void WmpcConfig::validate() const {
  if (horizon <= 0 || !(dt > 0.0) || !(control_period > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "controller horizon, dt and control_period must be > 0");
  }
  if (!(force_max > 0.0) || !(torque_max > 0.0) || !(force_rate_max > 0.0) ||
      !(torque_rate_max > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "controller wrench bounds must be > 0");
  }
  if ((wrench_rate_weight.array() <= 0.0).any()) {
    throw Error(ErrorCode::kConfigInvalid, "controller wrench_rate_weight must be > 0");
  }
}

WmpcModel::WmpcModel(const InertialParams& params, double dt)
    : params_(params), J_inv_(params.inertia.inverse()), dt_(dt) {}

Eigen::VectorXd WmpcModel::pack(const Wrench& wbar, const RigidState& x) {
  Eigen::VectorXd s(kStateDim);
  s << wbar.force, wbar.torque, x.p, x.v, x.q.wxyz(), x.w;
  return s;
}

Eigen::VectorXd WmpcModel::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  return wmpc_rk4<double>(x, u, params_, J_inv_, residual_, dt_);
}

void WmpcModel::step_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               Eigen::MatrixXd& A, Eigen::MatrixXd& B) const {
  constexpr int n = kStateDim, m = kInputDim;
  using Deriv = Eigen::Matrix<double, n + m, 1>;
  using AD = Eigen::AutoDiffScalar<Deriv>;
  WState<AD> xa;
  WInput<AD> ua;
  for (int i = 0; i < n; ++i) xa(i) = AD(x(i), n + m, i);
  for (int i = 0; i < m; ++i) ua(i) = AD(u(i), n + m, n + i);
  const WState<AD> y = wmpc_rk4<AD>(xa, ua, params_, J_inv_, residual_, dt_);
  A.resize(n, n);
  B.resize(n, m);
  for (int r = 0; r < n; ++r) {
    A.row(r) = y(r).derivatives().head<n>().transpose();
    B.row(r) = y(r).derivatives().tail<m>().transpose();
  }
}

Eigen::VectorXd WmpcModel::stage_residual(const Eigen::VectorXd& x, int k) const {
  const ReferencePoint& ref = refs_.at(std::min<std::size_t>(k, refs_.size() - 1));
  return tracking_residual(x.segment<3>(6), x.segment<3>(9), UnitQuaternion(Vec4(x.segment<4>(12))),
                           x.segment<3>(16), ref);
}

void WmpcModel::normalize_state(Eigen::VectorXd& x) const { normalize_quaternion(x, 12); }

WrenchMpc::WrenchMpc(WmpcConfig cfg, InertialParams params)
    : cfg_(std::move(cfg)), params_(std::move(params)), model_(params_, cfg_.dt) {
  cfg_.validate();
  params_.validate();
  problem_.model = &model_;
  problem_.horizon = cfg_.horizon;
  problem_.dt = cfg_.dt;
  const Eigen::Matrix<double, 12, 1> q = cfg_.weights.diagonal();
  problem_.Q = diag(q);
  problem_.Q_terminal = diag(cfg_.weights.terminal_scale * q);
  problem_.R = diag(cfg_.wrench_rate_weight);
  Eigen::VectorXd xlo = Eigen::VectorXd::Constant(WmpcModel::kStateDim, -kInf);
  Eigen::VectorXd xhi = Eigen::VectorXd::Constant(WmpcModel::kStateDim, kInf);
  xlo.head<3>().setConstant(-cfg_.force_max);
  xhi.head<3>().setConstant(cfg_.force_max);
  xlo.segment<3>(3).setConstant(-cfg_.torque_max);
  xhi.segment<3>(3).setConstant(cfg_.torque_max);
  problem_.state_lower = xlo;
  problem_.state_upper = xhi;
  Vec6 rate;
  rate << Vec3::Constant(cfg_.force_rate_max), Vec3::Constant(cfg_.torque_rate_max);
  problem_.input_lower = -rate;
  problem_.input_upper = rate;
  problem_.finalize();
}

WmpcOutput WrenchMpc::step(const RigidState& x, const Wrench& offset,
                           const std::vector<ReferencePoint>& refs, const ResidualSource& residual) {
  if (static_cast<int>(refs.size()) != cfg_.horizon + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "WMPC needs horizon + 1 reference points");
  }
  model_.set_references(refs);
  model_.set_residual(residual);
  const Eigen::VectorXd x_now = WmpcModel::pack(offset, x);

  if (!has_guess_) {
    guess_.X = x_now.replicate(1, cfg_.horizon + 1);
    guess_.U = Eigen::MatrixXd::Zero(WmpcModel::kInputDim, cfg_.horizon);
  } else {
    guess_ = nmpc::shift_guess(model_, guess_, cfg_.control_period / cfg_.dt);
  }

  WmpcOutput out;
  Vec6 u0 = Vec6::Zero();
  try {
    const nmpc::OcpSolution sol = nmpc::rti_step(problem_, guess_, x_now, cfg_.sqp);
    guess_ = {sol.X, sol.U};
    has_guess_ = true;
    u0 = sol.U.col(0);
    out.solve_time = sol.solve_time;
    out.qp_iterations = sol.qp_iterations;
    out.kkt_residual = sol.kkt_residual;
    out.predicted_states = sol.X;
  } catch (const Error& e) {
    spdlog::warn("WMPC solve failed ({}); holding the previous wrench", e.what());
    has_guess_ = false;
    out.fallback = true;
  }
  const Vec6 lim_rate = problem_.input_upper;
  const Vec6 lim = problem_.state_upper.head<6>();
  u0 = u0.cwiseMax(-lim_rate).cwiseMin(lim_rate);
  const Vec6 w = (offset.vector() + cfg_.control_period * u0).cwiseMax(-lim).cwiseMin(lim);
  out.rate = Wrench::from_vector(u0);
  out.offset = Wrench::from_vector(w);
  out.actuator = out.offset + hover_wrench(x.q, params_);
  return out;
}

PostMpcResult post_mpc_correct(const Wrench& w_star, const Wrench& dw_model, const WmpcConfig& cfg) {
  Vec6 lim;
  lim << Vec3::Constant(cfg.force_max), Vec3::Constant(cfg.torque_max);
  const Vec6 raw = w_star.vector() - dw_model.vector();
  const Vec6 c = raw.cwiseMax(-lim).cwiseMin(lim);
  return {Wrench::from_vector(c), (c - raw).cwiseAbs().maxCoeff() > 0.0};
}

ActuatorCommand hover_allocation(const UnitQuaternion& q, const InertialParams& params,
                                 const Allocator& alloc) {
  return alloc.allocate(hover_wrench(q, params)).command;
}

// ---------------------------------------------------------------- AMPC

void AmpcConfig::validate() const {
  if (horizon <= 0 || !(dt > 0.0) || !(control_period > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "controller horizon, dt and control_period must be > 0");
  }
  if (!(thrust_min >= 0.0) || !(thrust_max > thrust_min) || !(thrust_rate_max > 0.0) ||
      !(tilt_rate_max > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "actuator bounds must satisfy 0 <= t_min < t_max, rates > 0");
  }
  if (!(w_thrust >= 0.0) || !(w_tilt >= 0.0) || !(w_tilt_rate > 0.0) || !(w_thrust_rate > 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "AMPC weights must be >= 0 and input weights > 0");
  }
}

AmpcModel::AmpcModel(const InertialParams& params, const Allocator& alloc, double dt)
    : params_(params),
      alloc_(&alloc),
      J_inv_(params.inertia.inverse()),
      dt_(dt),
      na_(alloc.geometry().arms),
      nr_(alloc.geometry().rotors()) {}

Eigen::VectorXd AmpcModel::pack(const ActuatorCommand& cmd, const RigidState& x) const {
  Eigen::VectorXd s(state_dim());
  s << cmd.alpha, cmd.thrust, x.p, x.v, x.q.wxyz(), x.w;
  return s;
}

Eigen::VectorXd AmpcModel::rhs(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  const int o = na_ + nr_;
  const ActuatorCommand cmd{x.head(na_), x.segment(na_, nr_)};
  const Wrench w_a = alloc_->forward_wrench(cmd);
  const Vec4 q = x.segment<4>(o + 6);
  Vec3 df, dtau;
  detail::residual_eval<double>(residual_, q, w_a.force, w_a.torque, df, dtau);
  Vec3 pd, vd, wd;
  Vec4 qd;
  detail::rigid_rhs<double>(x.segment<3>(o), q, x.segment<3>(o + 3), x.segment<3>(o + 10),
                            w_a.force + df, w_a.torque + dtau, params_.mass, params_.inertia,
                            J_inv_, params_.gravity, pd, qd, vd, wd);
  Eigen::VectorXd xd(state_dim());
  xd << u, pd, vd, qd, wd;
  return xd;
}

Eigen::VectorXd AmpcModel::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
  const Eigen::VectorXd k1 = rhs(x, u);
  const Eigen::VectorXd k2 = rhs(x + 0.5 * dt_ * k1, u);
  const Eigen::VectorXd k3 = rhs(x + 0.5 * dt_ * k2, u);
  const Eigen::VectorXd k4 = rhs(x + dt_ * k3, u);
  Eigen::VectorXd n = x + dt_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  normalize_state(n);
  return n;
}

Eigen::VectorXd ampc_stage_residual(const AmpcModel& model, const Eigen::VectorXd& x,
                                    const ReferencePoint& ref, const ActuatorCommand& star) {
  const int na = model.arms(), nr = model.rotors(), o = na + nr;
  Eigen::VectorXd r(12 + o);
  r.head<12>() = tracking_residual(x.segment<3>(o), x.segment<3>(o + 3),
                                   UnitQuaternion(Vec4(x.segment<4>(o + 6))),
                                   x.segment<3>(o + 10), ref);
  r.segment(12, na) = x.head(na) - star.alpha;
  r.segment(12 + na, nr) = x.segment(na, nr) - star.thrust;
  return r;
}

Eigen::VectorXd AmpcModel::stage_residual(const Eigen::VectorXd& x, int k) const {
  return ampc_stage_residual(*this, x, refs_.at(std::min<std::size_t>(k, refs_.size() - 1)), star_);
}

void AmpcModel::normalize_state(Eigen::VectorXd& x) const {
  normalize_quaternion(x, na_ + nr_ + 6);
}

ActuatorMpc::ActuatorMpc(AmpcConfig cfg, InertialParams params,
                         std::shared_ptr<const Allocator> alloc)
    : cfg_(std::move(cfg)),
      params_(std::move(params)),
      alloc_(std::move(alloc)),
      model_(params_, *alloc_, cfg_.dt) {
  cfg_.validate();
  params_.validate();
  const int na = model_.arms(), nr = model_.rotors();
  problem_.model = &model_;
  problem_.horizon = cfg_.horizon;
  problem_.dt = cfg_.dt;
  Eigen::VectorXd q(12 + na + nr);
  q << cfg_.weights.diagonal(), Eigen::VectorXd::Constant(na, cfg_.w_tilt),
      Eigen::VectorXd::Constant(nr, cfg_.w_thrust);
  Eigen::VectorXd qN = q;
  qN.head<12>() *= cfg_.weights.terminal_scale;
  problem_.Q = diag(q);
  problem_.Q_terminal = diag(qN);
  Eigen::VectorXd r(na + nr);
  r << Eigen::VectorXd::Constant(na, cfg_.w_tilt_rate), Eigen::VectorXd::Constant(nr, cfg_.w_thrust_rate);
  problem_.R = diag(r);
  Eigen::VectorXd xlo = Eigen::VectorXd::Constant(model_.state_dim(), -kInf);
  Eigen::VectorXd xhi = Eigen::VectorXd::Constant(model_.state_dim(), kInf);
  xlo.head(na).setConstant(-std::numbers::pi);
  xhi.head(na).setConstant(std::numbers::pi);
  xlo.segment(na, nr).setConstant(cfg_.thrust_min);
  xhi.segment(na, nr).setConstant(cfg_.thrust_max);
  problem_.state_lower = xlo;
  problem_.state_upper = xhi;
  Eigen::VectorXd ulim(na + nr);
  ulim << Eigen::VectorXd::Constant(na, cfg_.tilt_rate_max),
      Eigen::VectorXd::Constant(nr, cfg_.thrust_rate_max);
  problem_.input_lower = -ulim;
  problem_.input_upper = ulim;
  problem_.finalize();
}

AmpcOutput ActuatorMpc::step(const RigidState& x, const ActuatorCommand& current,
                             const std::vector<ReferencePoint>& refs,
                             const ResidualSource& residual) {
  if (static_cast<int>(refs.size()) != cfg_.horizon + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "AMPC needs horizon + 1 reference points");
  }
  const int na = model_.arms(), nr = model_.rotors();
  AmpcOutput out;
  out.reference = hover_allocation(x.q, params_, *alloc_);
  for (int j = 0; j < na; ++j) {
    out.reference.alpha(j) = wrap_towards(out.reference.alpha(j), current.alpha(j));
  }
  model_.set_references(refs);
  model_.set_actuator_reference(out.reference);
  model_.set_residual(residual);
  const Eigen::VectorXd x_now = model_.pack(current, x);

  if (!has_guess_) {
    guess_.X = x_now.replicate(1, cfg_.horizon + 1);
    guess_.U = Eigen::MatrixXd::Zero(na + nr, cfg_.horizon);
  } else {
    guess_ = nmpc::shift_guess(model_, guess_, cfg_.control_period / cfg_.dt);
  }

  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(na + nr);
  try {
    const nmpc::OcpSolution sol = nmpc::rti_step(problem_, guess_, x_now, cfg_.sqp);
    guess_ = {sol.X, sol.U};
    has_guess_ = true;
    u0 = sol.U.col(0);
    out.solve_time = sol.solve_time;
    out.qp_iterations = sol.qp_iterations;
    out.kkt_residual = sol.kkt_residual;
  } catch (const Error& e) {
    spdlog::warn("AMPC solve failed ({}); commanding zero actuator rates", e.what());
    has_guess_ = false;
    out.fallback = true;
  }
  u0 = u0.cwiseMax(problem_.input_lower).cwiseMin(problem_.input_upper);
  out.tilt_rate = u0.head(na);
  out.thrust_rate = u0.tail(nr);
  out.command.alpha = (current.alpha + cfg_.control_period * out.tilt_rate)
                          .cwiseMax(-std::numbers::pi)
                          .cwiseMin(std::numbers::pi);
  out.command.thrust = (current.thrust + cfg_.control_period * out.thrust_rate)
                           .cwiseMax(cfg_.thrust_min)
                           .cwiseMin(cfg_.thrust_max);
  return out;
}

}  // namespace omav
