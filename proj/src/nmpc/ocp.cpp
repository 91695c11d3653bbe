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

#include "omav/nmpc/ocp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "omav/errors.hpp"

namespace omav::nmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fd_step(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

void require_finite(const Eigen::MatrixXd& M, const char* what, int k) {
  if (!M.allFinite()) {
    throw Error(ErrorCode::kNonFiniteLinearization,
                std::string(what) + " at node " + std::to_string(k));
  }
}

}  // namespace

void OcpModel::step_jacobians(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                              Eigen::MatrixXd& A, Eigen::MatrixXd& B) const {
  const int n = state_dim();
  const int m = input_dim();
  const Eigen::VectorXd f0 = step(x, u);
  A.resize(n, n);
  B.resize(n, m);
  Eigen::VectorXd xp = x;
  for (int i = 0; i < n; ++i) {
    const double h = fd_step(x(i));
    xp(i) = x(i) + h;
    A.col(i) = (step(xp, u) - f0) / h;
    xp(i) = x(i);
  }
  Eigen::VectorXd up = u;
  for (int i = 0; i < m; ++i) {
    const double h = fd_step(u(i));
    up(i) = u(i) + h;
    B.col(i) = (step(x, up) - f0) / h;
    up(i) = u(i);
  }
}

Eigen::MatrixXd OcpModel::stage_residual_jacobian(const Eigen::VectorXd& x, int k) const {
  const Eigen::VectorXd r0 = stage_residual(x, k);
  Eigen::MatrixXd J(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double h = fd_step(x(i));
    xp(i) = x(i) + h;
    J.col(i) = (stage_residual(xp, k) - r0) / h;
    xp(i) = x(i);
  }
  return J;
}

void OcpProblem::finalize() {
  if (model == nullptr) throw Error(ErrorCode::kConfigInvalid, "OCP without model");
  if (horizon <= 0 || !(dt > 0.0)) throw Error(ErrorCode::kConfigInvalid, "OCP horizon/dt");
  const int n = model->state_dim();
  const int m = model->input_dim();
  const int nh = model->residual_dim();
  auto fill = [](Eigen::VectorXd& v, int size, double value) {
    if (v.size() == 0) v = Eigen::VectorXd::Constant(size, value);
    if (v.size() != size) throw Error(ErrorCode::kDimensionMismatch, "OCP bound size");
  };
  fill(state_lower, n, -kInf);
  fill(state_upper, n, kInf);
  fill(input_lower, m, -kInf);
  fill(input_upper, m, kInf);
  if ((state_lower.array() > state_upper.array()).any() ||
      (input_lower.array() > input_upper.array()).any()) {
    throw Error(ErrorCode::kConfigInvalid, "OCP bounds with lower > upper");
  }
  if (Q.rows() != nh || Q.cols() != nh || Q_terminal.rows() != nh || Q_terminal.cols() != nh ||
      R.rows() != m || R.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "OCP weight sizes");
  }
  if (!Q.isApprox(Q.transpose()) || !Q_terminal.isApprox(Q_terminal.transpose()) ||
      !R.isApprox(R.transpose())) {
    throw Error(ErrorCode::kConfigInvalid, "OCP weights must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kConfigInvalid, "OCP input weight R must be positive definite");
  }
}

LinearizedOcp linearize(const OcpProblem& problem, const OcpGuess& guess,
                        const Eigen::VectorXd& x_now) {
  const OcpModel& model = *problem.model;
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int N = problem.horizon;
  if (guess.X.rows() != n || guess.X.cols() != N + 1 || guess.U.rows() != m ||
      guess.U.cols() != N || x_now.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "OCP guess dimensions");
  }

  LinearizedOcp lin;
  lin.G = Eigen::MatrixXd::Zero(N * n, N * m);
  lin.e = Eigen::VectorXd::Zero(N * n);

  // Forward sweep: dx_{k+1} = A_k dx_k + B_k du_k + c_k with dx_0 = x_now - X_0.
  Eigen::VectorXd e_prev = x_now - guess.X.col(0);
  lin.gap_norm = e_prev.cwiseAbs().maxCoeff();
  Eigen::MatrixXd A, B;
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd xk = guess.X.col(k);
    const Eigen::VectorXd uk = guess.U.col(k);
    model.step_jacobians(xk, uk, A, B);
    require_finite(A, "state Jacobian", k);
    require_finite(B, "input Jacobian", k);
    const Eigen::VectorXd gap = model.step(xk, uk) - guess.X.col(k + 1);
    require_finite(gap, "shooting gap", k);
    lin.gap_norm = std::max(lin.gap_norm, gap.cwiseAbs().maxCoeff());

    const int row = k * n;
    lin.e.segment(row, n) = A * e_prev + gap;
    e_prev = lin.e.segment(row, n);
    lin.G.block(row, k * m, n, m) = B;
    if (k > 0) {
      lin.G.block(row, 0, n, k * m).noalias() = A * lin.G.block(row - n, 0, n, k * m);
    }
  }

  // Gauss-Newton Hessian and gradient over nodes 1..N.
  QpProblem& qp = lin.qp;
  qp.hessian = Eigen::MatrixXd::Zero(N * m, N * m);
  qp.gradient = Eigen::VectorXd::Zero(N * m);
  for (int k = 0; k < N; ++k) {
    qp.hessian.block(k * m, k * m, m, m) = problem.R;
    qp.gradient.segment(k * m, m) = problem.R * guess.U.col(k);
  }
  for (int k = 1; k <= N; ++k) {
    const Eigen::VectorXd xk = guess.X.col(k);
    const Eigen::VectorXd r = model.stage_residual(xk, k);
    const Eigen::MatrixXd J = model.stage_residual_jacobian(xk, k);
    require_finite(J, "residual Jacobian", k);
    const Eigen::MatrixXd& W = (k == N) ? problem.Q_terminal : problem.Q;
    const int cols = k * m;
    const Eigen::MatrixXd T = J * lin.G.block((k - 1) * n, 0, n, cols);
    const Eigen::MatrixXd WT = W * T;
    qp.hessian.topLeftCorner(cols, cols).noalias() += T.transpose() * WT;
    const Eigen::VectorXd r_lin = r + J * lin.e.segment((k - 1) * n, n);
    qp.gradient.head(cols).noalias() += WT.transpose() * r_lin;
  }
  // Symmetrize against round-off before the Cholesky factorization.
  qp.hessian = 0.5 * (qp.hessian + qp.hessian.transpose()).eval();

  qp.lower.resize(N * m);
  qp.upper.resize(N * m);
  for (int k = 0; k < N; ++k) {
    qp.lower.segment(k * m, m) = problem.input_lower - guess.U.col(k);
    qp.upper.segment(k * m, m) = problem.input_upper - guess.U.col(k);
  }

  std::vector<int> bounded;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(problem.state_lower(i)) || std::isfinite(problem.state_upper(i))) {
      bounded.push_back(i);
    }
  }
  const int rows = static_cast<int>(bounded.size()) * N;
  qp.constraints = Eigen::MatrixXd::Zero(rows, N * m);
  qp.constraint_lower.resize(rows);
  qp.constraint_upper.resize(rows);
  lin.state_rows.resize(rows);
  int r = 0;
  for (int k = 1; k <= N; ++k) {
    for (int i : bounded) {
      const int gi = (k - 1) * n + i;
      qp.constraints.row(r) = lin.G.row(gi);
      const double base = guess.X(i, k) + lin.e(gi);
      qp.constraint_lower(r) = problem.state_lower(i) - base;
      qp.constraint_upper(r) = problem.state_upper(i) - base;
      lin.state_rows(r) = i;
      ++r;
    }
  }
  return lin;
}

double evaluate_objective(const OcpProblem& problem, const Eigen::MatrixXd& X,
                          const Eigen::MatrixXd& U) {
  const int N = problem.horizon;
  double J = 0.0;
  for (int k = 0; k < N; ++k) {
    const Eigen::VectorXd r = problem.model->stage_residual(X.col(k), k);
    J += r.dot(problem.Q * r) + U.col(k).dot(problem.R * U.col(k));
  }
  const Eigen::VectorXd rN = problem.model->stage_residual(X.col(N), N);
  J += rN.dot(problem.Q_terminal * rN);
  return J;
}

OcpSolution rti_step(const OcpProblem& problem, const OcpGuess& guess,
                     const Eigen::VectorXd& x_now, const SqpSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  const OcpModel& model = *problem.model;
  const int n = model.state_dim();
  const int m = model.input_dim();
  const int N = problem.horizon;

  OcpSolution sol;
  sol.X = guess.X;
  sol.U = guess.U;
  for (int it = 0; it < std::max(1, settings.max_iterations); ++it) {
    const LinearizedOcp lin = linearize(problem, {sol.X, sol.U}, x_now);
    const QpSolution qp_sol = solve_qp(lin.qp, settings.qp);
    sol.qp_iterations += qp_sol.iterations;
    ++sol.sqp_iterations;

    const Eigen::VectorXd dX = lin.G * qp_sol.x + lin.e;
    sol.X.col(0) = x_now;
    for (int k = 1; k <= N; ++k) {
      sol.X.col(k) += dX.segment((k - 1) * n, n);
      Eigen::VectorXd xk = sol.X.col(k);
      model.normalize_state(xk);
      sol.X.col(k) = xk;
    }
    for (int k = 0; k < N; ++k) sol.U.col(k) += qp_sol.x.segment(k * m, m);

    sol.kkt_residual = std::max(lin.gap_norm, qp_sol.x.cwiseAbs().maxCoeff());
    if (sol.kkt_residual < settings.kkt_tolerance) break;
  }
  sol.objective = evaluate_objective(problem, sol.X, sol.U);
  sol.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

OcpGuess shift_guess(const OcpModel& model, const OcpGuess& previous, double fraction) {
  const int N = static_cast<int>(previous.U.cols());
  OcpGuess g = previous;
  if (fraction <= 0.0) return g;
  for (int k = 0; k <= N; ++k) {
    const int a = std::min(k, N);
    const int b = std::min(k + 1, N);
    Eigen::VectorXd xk = (1.0 - fraction) * previous.X.col(a) + fraction * previous.X.col(b);
    model.normalize_state(xk);
    g.X.col(k) = xk;
  }
  for (int k = 0; k < N; ++k) {
    const int a = std::min(k, N - 1);
    const int b = std::min(k + 1, N - 1);
    g.U.col(k) = (1.0 - fraction) * previous.U.col(a) + fraction * previous.U.col(b);
  }
  return g;
}

}  // namespace omav::nmpc
