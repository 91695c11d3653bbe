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

namespace omav::nmpc {

/// min 1/2 x'Hx + g'x  s.t.  lower <= x <= upper,  c_lower <= C x <= c_upper.
/// Infinite bounds are allowed; empty bound vectors mean "unbounded".
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::MatrixXd constraints;
  Eigen::VectorXd constraint_lower;
  Eigen::VectorXd constraint_upper;

  int num_variables() const { return static_cast<int>(gradient.size()); }
  int num_constraints() const { return static_cast<int>(constraints.rows()); }
};

/// Multipliers are signed: positive for an active lower bound, negative for an
/// active upper bound, so that H x + g - bound_multipliers - C' constraint_multipliers = 0.
struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd bound_multipliers;
  Eigen::VectorXd constraint_multipliers;
  int iterations = 0;
  double objective = 0.0;
};

struct QpSettings {
  int max_iterations = 2000;
  double feasibility_tolerance = 1e-10;
};

/// Dense dual active-set solver (Goldfarb-Idnani). Requires H positive definite.
/// Violated constraints enter most-violated first, ties broken by lowest index.
/// Throws Error(kQpNotConvex), Error(kQpInfeasible) or Error(kMaxIterations).
QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings = {});

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
  double dual = 0.0;  // most negative wrong-signed multiplier, as a positive number
};

KktResiduals kkt_residuals(const QpProblem& qp, const QpSolution& sol);

}  // namespace omav::nmpc
