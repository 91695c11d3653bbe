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

#include <Eigen/Dense>

#include "omav/nmpc/qp.hpp"

namespace omav::nmpc {

/// Discrete-time model and least-squares cost of an optimal control problem.
/// Implementations hold their own reference sequence; stage_residual(x, k)
/// compares x against the reference at node k (k = N is the terminal node).
class OcpModel {
 public:
  virtual ~OcpModel() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int residual_dim() const = 0;

  /// x_{k+1} = g(x_k, u_k) over one shooting interval.
  virtual Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const = 0;

  /// Default: forward differences with step 1e-6 * max(1, |x_i|).
  virtual void step_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                              Eigen::MatrixXd& A, Eigen::MatrixXd& B) const;

  virtual Eigen::VectorXd stage_residual(const Eigen::VectorXd& x, int k) const = 0;

  /// Default: forward differences.
  virtual Eigen::MatrixXd stage_residual_jacobian(const Eigen::VectorXd& x, int k) const;

  /// Projection back onto the state manifold (e.g. quaternion normalization).
  virtual void normalize_state(Eigen::VectorXd& /*x*/) const {}
};

/// Box-constrained OCP:
///   min sum_{k<N} |h(x_k)|^2_Q + |u_k|^2_R + |h(x_N)|^2_{Q_N}
///   s.t. x_{k+1} = g(x_k, u_k), x_0 = x(t), state and input boxes.
/// State boxes apply to nodes 1..N.
struct OcpProblem {
  const OcpModel* model = nullptr;
  int horizon = 0;
  double dt = 0.0;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd Q_terminal;
  Eigen::MatrixXd R;
  Eigen::VectorXd state_lower;
  Eigen::VectorXd state_upper;
  Eigen::VectorXd input_lower;
  Eigen::VectorXd input_upper;

  /// Fills unset bounds with +-inf and checks sizes, symmetry and bound order.
  void finalize();
};

/// States are columns of X (n x N+1), inputs columns of U (m x N).
struct OcpGuess {
  Eigen::MatrixXd X;
  Eigen::MatrixXd U;
};

struct OcpSolution {
  Eigen::MatrixXd X;
  Eigen::MatrixXd U;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int sqp_iterations = 0;
  int qp_iterations = 0;
  double solve_time = 0.0;  // [s]
};

/// Condensed Gauss-Newton QP in the input increments dU. The state
/// increments follow dX = G dU + e, stacked over nodes 1..N.
struct LinearizedOcp {
  QpProblem qp;
  Eigen::MatrixXd G;
  Eigen::VectorXd e;
  double gap_norm = 0.0;      // max |g(x_k, u_k) - x_{k+1}| and |x_now - x_0|
  Eigen::VectorXd state_rows;  // state component of each row of qp.constraints
};

LinearizedOcp linearize(const OcpProblem& problem, const OcpGuess& guess,
                        const Eigen::VectorXd& x_now);

double evaluate_objective(const OcpProblem& problem, const Eigen::MatrixXd& X,
                          const Eigen::MatrixXd& U);

struct SqpSettings {
  int max_iterations = 1;  // 1 = real-time iteration
  double kkt_tolerance = 1e-9;
  QpSettings qp;
};

/// One (or, with max_iterations > 1, several) Gauss-Newton SQP iterations
/// starting from the guess, with the initial state fixed to x_now.
OcpSolution rti_step(const OcpProblem& problem, const OcpGuess& guess,
                     const Eigen::VectorXd& x_now, const SqpSettings& settings = {});

/// Warm start advanced by a fraction of one shooting interval, interpolating
/// linearly between nodes and repeating the last node/input.
OcpGuess shift_guess(const OcpModel& model, const OcpGuess& previous, double fraction);

}  // namespace omav::nmpc
