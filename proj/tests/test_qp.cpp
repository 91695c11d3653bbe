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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "omav/errors.hpp"
#include "omav/nmpc/qp.hpp"
#include "oracles.hpp"

using namespace omav;
using namespace omav::nmpc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(Qp, UnconstrainedClosedForm) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  QpProblem qp;
  qp.hessian = oracle::random_spd(12, rng);
  qp.gradient = Eigen::VectorXd(12);
  for (int i = 0; i < 12; ++i) qp.gradient(i) = nd(rng);
  const QpSolution s = solve_qp(qp);
  const Eigen::VectorXd x = -qp.hessian.inverse() * qp.gradient;
  EXPECT_LT((s.x - x).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(s.iterations, 0);
}

TEST(Qp, SingleActiveBound) {
  QpProblem qp;
  qp.hessian = Eigen::MatrixXd::Identity(1, 1);
  qp.gradient = Eigen::VectorXd::Constant(1, -1.0);
  qp.lower = Eigen::VectorXd::Constant(1, -kInf);
  qp.upper = Eigen::VectorXd::Constant(1, 0.5);
  const QpSolution s = solve_qp(qp);
  EXPECT_NEAR(s.x(0), 0.5, 1e-12);
  EXPECT_NEAR(s.bound_multipliers(0), -0.5, 1e-12);
}

TEST(Qp, RandomBoxQpsMatchEnumeration) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> dim(5, 30), act(0, 3);
  int solved = 0;
  while (solved < 50) {
    const int n = dim(rng);
    QpProblem qp;
    qp.hessian = oracle::random_spd(n, rng);
    qp.gradient = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) qp.gradient(i) = 3.0 * nd(rng);
    const Eigen::VectorXd x_unc = qp.hessian.ldlt().solve(-qp.gradient);
    qp.lower = Eigen::VectorXd::Constant(n, -kInf);
    qp.upper = Eigen::VectorXd::Constant(n, kInf);
    const int n_cut = act(rng);
    const int n_bounded = std::min(n, 10);
    for (int j = 0; j < n_bounded; ++j) {
      if (j < n_cut) {
        if (u01(rng) < 0.5) {
          qp.upper(j) = x_unc(j) - 0.1 - u01(rng);
        } else {
          qp.lower(j) = x_unc(j) + 0.1 + u01(rng);
        }
      } else {
        qp.lower(j) = x_unc(j) - 1.0 - 2.0 * u01(rng);
        qp.upper(j) = x_unc(j) + 1.0 + 2.0 * u01(rng);
      }
    }
    const auto ref = oracle::box_qp_enumerate(qp.hessian, qp.gradient, qp.lower, qp.upper, 3);
    if (!ref) continue;  // more than three active bounds; not part of this family
    const QpSolution s = solve_qp(qp);
    EXPECT_LT((s.x - *ref).cwiseAbs().maxCoeff(), 1e-6);
    const KktResiduals k = kkt_residuals(qp, s);
    EXPECT_LT(k.stationarity, 1e-8);
    EXPECT_LT(k.primal, 1e-8);
    EXPECT_LT(k.complementarity, 1e-8);
    EXPECT_LT(k.dual, 1e-12);
    ++solved;
  }
}

TEST(Qp, GeneralRowsSatisfyKkt) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 8, m = 5;
    QpProblem qp;
    qp.hessian = oracle::random_spd(n, rng);
    qp.gradient = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) qp.gradient(i) = 4.0 * nd(rng);
    qp.lower = Eigen::VectorXd::Constant(n, -1.0);
    qp.upper = Eigen::VectorXd::Constant(n, 1.0);
    qp.constraints = Eigen::MatrixXd(m, n);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) qp.constraints(r, c) = nd(rng);
    qp.constraint_lower = Eigen::VectorXd::Constant(m, -0.5);
    qp.constraint_upper = Eigen::VectorXd::Constant(m, 0.5);
    const QpSolution s = solve_qp(qp);

    // Independent check of the signed-multiplier KKT system.
    const Eigen::VectorXd stat = qp.hessian * s.x + qp.gradient - s.bound_multipliers -
                                 qp.constraints.transpose() * s.constraint_multipliers;
    EXPECT_LT(stat.cwiseAbs().maxCoeff(), 1e-8);
    const Eigen::VectorXd cx = qp.constraints * s.x;
    for (int j = 0; j < n; ++j) {
      EXPECT_GE(s.x(j), -1.0 - 1e-8);
      EXPECT_LE(s.x(j), 1.0 + 1e-8);
      const double lam = s.bound_multipliers(j);
      if (lam > 1e-12) EXPECT_NEAR(s.x(j), -1.0, 1e-8);
      if (lam < -1e-12) EXPECT_NEAR(s.x(j), 1.0, 1e-8);
    }
    for (int r = 0; r < m; ++r) {
      EXPECT_GE(cx(r), -0.5 - 1e-8);
      EXPECT_LE(cx(r), 0.5 + 1e-8);
      const double mu = s.constraint_multipliers(r);
      if (mu > 1e-12) EXPECT_NEAR(cx(r), -0.5, 1e-8);
      if (mu < -1e-12) EXPECT_NEAR(cx(r), 0.5, 1e-8);
    }
  }
}

TEST(Qp, Deterministic) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> nd;
  QpProblem qp;
  qp.hessian = oracle::random_spd(20, rng);
  qp.gradient = Eigen::VectorXd(20);
  for (int i = 0; i < 20; ++i) qp.gradient(i) = 5.0 * nd(rng);
  qp.lower = Eigen::VectorXd::Constant(20, -0.2);
  qp.upper = Eigen::VectorXd::Constant(20, 0.2);
  const QpSolution a = solve_qp(qp);
  const QpSolution b = solve_qp(qp);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE((a.x.array() == b.x.array()).all());
}

TEST(Qp, ErrorPaths) {
  QpProblem qp;
  qp.hessian = Eigen::MatrixXd::Identity(2, 2);
  qp.gradient = Eigen::VectorXd::Zero(2);
  qp.lower = Eigen::VectorXd::Constant(2, 1.0);
  qp.upper = Eigen::VectorXd::Constant(2, 0.0);
  try {
    solve_qp(qp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kQpInfeasible);
  }

  // x0 + x1 >= 1 and x0 + x1 <= -1 via two rows: inconsistent.
  qp.lower = Eigen::VectorXd::Constant(2, -kInf);
  qp.upper = Eigen::VectorXd::Constant(2, kInf);
  qp.constraints = Eigen::MatrixXd::Ones(2, 2);
  qp.constraint_lower = Eigen::Vector2d(1.0, -kInf);
  qp.constraint_upper = Eigen::Vector2d(kInf, -1.0);
  try {
    solve_qp(qp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kQpInfeasible);
  }

  QpProblem nc;
  nc.hessian = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  nc.gradient = Eigen::VectorXd::Zero(2);
  try {
    solve_qp(nc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kQpNotConvex);
  }

  std::mt19937_64 rng(35);
  QpProblem big;
  big.hessian = oracle::random_spd(10, rng);
  big.gradient = Eigen::VectorXd::Constant(10, 50.0);
  big.lower = Eigen::VectorXd::Constant(10, -0.01);
  big.upper = Eigen::VectorXd::Constant(10, 0.01);
  QpSettings tight;
  tight.max_iterations = 1;
  try {
    solve_qp(big, tight);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMaxIterations);
  }
}
