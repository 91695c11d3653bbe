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
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "omav/allocation.hpp"
#include "omav/nmpc/ocp.hpp"
#include "omav/reference.hpp"
#include "omav/residual_model.hpp"
#include "omav/rigid_body.hpp"

namespace omav {

/// N/c, In-MPC, Post-MPC, D/o.
enum class ResidualMode { kNone, kInMpc, kPostMpc, kObserver };

std::string_view to_string(ResidualMode mode);
/// Accepts the table labels ("N/c", "In-MPC", ...) and snake_case names.
ResidualMode residual_mode_from_string(std::string_view s);

/// Diagonal weights of the 12 tracking residuals.
struct TrackingWeights {
  Vec3 position = Vec3::Constant(60.0);
  Vec3 velocity = Vec3::Constant(6.0);
  Vec3 attitude = Vec3::Constant(60.0);
  Vec3 rate = Vec3::Constant(2.0);
  double terminal_scale = 5.0;

  Eigen::Matrix<double, 12, 1> diagonal() const;
};

/// (p - p_r, v - R_B' v_r, q_e, w - R_B' R_r w_r). v is body frame, v_r world frame.
Eigen::Matrix<double, 12, 1> tracking_residual(const Vec3& p, const Vec3& v,
                                               const UnitQuaternion& q, const Vec3& w,
                                               const ReferencePoint& ref);

struct WmpcConfig {
  int horizon = 20;
  double dt = 0.05;
  double control_period = 0.01;
  double force_max = 20.0;
  double torque_max = 20.0;
  // 12 rotors at 29 N/s; torque bound uses the 0.3 m arm.
  double force_rate_max = 348.0;
  double torque_rate_max = 104.0;
  TrackingWeights weights;
  Vec6 wrench_rate_weight = (Vec6() << 1e-4, 1e-4, 1e-4, 1e-3, 1e-3, 1e-3).finished();
  nmpc::SqpSettings sqp;

  void validate() const;
};

/// WMPC state: wrench beyond static hover compensation (6), p, v, q(4), w.
/// The actuator wrench is w_a = wbar + (-m R_B' g, 0), so the wrench box
/// bounds the part of the command that does not hold the weight.
/// Input: d(wbar)/dt.
class WmpcModel : public nmpc::OcpModel {
 public:
  static constexpr int kStateDim = 19;
  static constexpr int kInputDim = 6;

  WmpcModel(const InertialParams& params, double dt);

  int state_dim() const override { return kStateDim; }
  int input_dim() const override { return kInputDim; }
  int residual_dim() const override { return 12; }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  /// Exact Jacobians by forward-mode automatic differentiation.
  void step_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                      Eigen::MatrixXd& B) const override;
  Eigen::VectorXd stage_residual(const Eigen::VectorXd& x, int k) const override;
  void normalize_state(Eigen::VectorXd& x) const override;

  void set_references(std::vector<ReferencePoint> refs) { refs_ = std::move(refs); }
  void set_residual(const ResidualSource& src) { residual_ = src; }
  const ResidualSource& residual() const { return residual_; }

  static Eigen::VectorXd pack(const Wrench& wbar, const RigidState& x);

 private:
  InertialParams params_;
  Mat3 J_inv_;
  double dt_;
  std::vector<ReferencePoint> refs_;
  ResidualSource residual_;
};

struct WmpcOutput {
  Wrench offset;     // wbar after one control period
  Wrench rate;       // first optimal input
  Wrench actuator;   // offset + hover compensation at the current attitude
  bool fallback = false;
  double solve_time = 0.0;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
  Eigen::MatrixXd predicted_states;
};

class WrenchMpc {
 public:
  WrenchMpc(WmpcConfig cfg, InertialParams params);

  /// refs holds N+1 points spaced by cfg.dt starting at the current time.
  WmpcOutput step(const RigidState& x, const Wrench& offset, const std::vector<ReferencePoint>& refs,
                  const ResidualSource& residual);
  void reset() { has_guess_ = false; }

  const WmpcConfig& config() const { return cfg_; }
  const nmpc::OcpProblem& problem() const { return problem_; }

 private:
  WmpcConfig cfg_;
  InertialParams params_;
  WmpcModel model_;
  nmpc::OcpProblem problem_;
  nmpc::OcpGuess guess_;
  bool has_guess_ = false;
};

/// Post-MPC correction of the wrench offset: clamp(w* - dw) to the wrench box.
struct PostMpcResult {
  Wrench offset;
  bool saturated = false;
};
PostMpcResult post_mpc_correct(const Wrench& w_star, const Wrench& dw_model, const WmpcConfig& cfg);

/// Minimum-norm allocation of the static hover wrench at attitude q.
ActuatorCommand hover_allocation(const UnitQuaternion& q, const InertialParams& params,
                                 const Allocator& alloc);

struct AmpcConfig {
  int horizon = 10;
  double dt = 0.05;
  double control_period = 0.01;
  double thrust_min = 0.1;
  double thrust_max = 16.0;
  double thrust_rate_max = 29.0;
  double tilt_rate_max = 10.0;
  TrackingWeights weights;
  double w_thrust = 1.0;        // w_T on t - t*
  double w_tilt = 10.0;         // w_alpha on alpha - alpha*
  double w_tilt_rate = 10.0;    // w_alpha_dot on the tilt-rate input
  double w_thrust_rate = 0.01;  // on the thrust-rate input
  nmpc::SqpSettings sqp;

  void validate() const;
};

/// AMPC state: alpha (n_a), t (n_r), p, v, q(4), w. Input: (alpha_dot, t_dot).
class AmpcModel : public nmpc::OcpModel {
 public:
  AmpcModel(const InertialParams& params, const Allocator& alloc, double dt);

  int state_dim() const override { return na_ + nr_ + 13; }
  int input_dim() const override { return na_ + nr_; }
  int residual_dim() const override { return 12 + na_ + nr_; }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
  Eigen::VectorXd stage_residual(const Eigen::VectorXd& x, int k) const override;
  void normalize_state(Eigen::VectorXd& x) const override;

  void set_references(std::vector<ReferencePoint> refs) { refs_ = std::move(refs); }
  void set_actuator_reference(const ActuatorCommand& star) { star_ = star; }
  void set_residual(const ResidualSource& src) { residual_ = src; }

  Eigen::VectorXd pack(const ActuatorCommand& cmd, const RigidState& x) const;
  int arms() const { return na_; }
  int rotors() const { return nr_; }

 private:
  Eigen::VectorXd rhs(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  InertialParams params_;
  const Allocator* alloc_;
  Mat3 J_inv_;
  double dt_;
  int na_, nr_;
  std::vector<ReferencePoint> refs_;
  ActuatorCommand star_;
  ResidualSource residual_;
};

/// (tracking residual, alpha - alpha*, t - t*).
Eigen::VectorXd ampc_stage_residual(const AmpcModel& model, const Eigen::VectorXd& x,
                                    const ReferencePoint& ref, const ActuatorCommand& star);

struct AmpcOutput {
  ActuatorCommand command;     // after one control period
  Eigen::VectorXd tilt_rate;
  Eigen::VectorXd thrust_rate;
  ActuatorCommand reference;   // alpha*, t* (alpha* unwrapped towards the current tilt)
  bool fallback = false;
  double solve_time = 0.0;
  int qp_iterations = 0;
  double kkt_residual = 0.0;
};

class ActuatorMpc {
 public:
  ActuatorMpc(AmpcConfig cfg, InertialParams params, std::shared_ptr<const Allocator> alloc);

  AmpcOutput step(const RigidState& x, const ActuatorCommand& current,
                  const std::vector<ReferencePoint>& refs, const ResidualSource& residual);
  void reset() { has_guess_ = false; }

  const AmpcConfig& config() const { return cfg_; }
  const AmpcModel& model() const { return model_; }

 private:
  AmpcConfig cfg_;
  InertialParams params_;
  std::shared_ptr<const Allocator> alloc_;
  AmpcModel model_;
  nmpc::OcpProblem problem_;
  nmpc::OcpGuess guess_;
  bool has_guess_ = false;
};

}  // namespace omav
