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

#include "omav/nmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "omav/errors.hpp"

namespace omav::nmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-sided constraint n'x >= b. Ids: 2j / 2j+1 are lower / upper bounds of
// variable j, 2n + 2r / 2n + 2r + 1 are lower / upper sides of row r of C.
class ConstraintSet {
 public:
  explicit ConstraintSet(const QpProblem& qp) : qp_(qp), n_(qp.num_variables()) {
    const int m = qp.num_constraints();
    for (int j = 0; j < n_; ++j) {
      if (qp.lower.size() > 0 && std::isfinite(qp.lower(j))) ids_.push_back(2 * j);
      if (qp.upper.size() > 0 && std::isfinite(qp.upper(j))) ids_.push_back(2 * j + 1);
    }
    for (int r = 0; r < m; ++r) {
      if (std::isfinite(qp.constraint_lower(r))) ids_.push_back(2 * n_ + 2 * r);
      if (std::isfinite(qp.constraint_upper(r))) ids_.push_back(2 * n_ + 2 * r + 1);
    }
  }

  const std::vector<int>& ids() const { return ids_; }

  Eigen::VectorXd normal(int id) const {
    Eigen::VectorXd nv;
    if (id < 2 * n_) {
      nv = Eigen::VectorXd::Zero(n_);
      nv(id / 2) = (id % 2 == 0) ? 1.0 : -1.0;
    } else {
      const int r = (id - 2 * n_) / 2;
      nv = qp_.constraints.row(r).transpose();
      if (id % 2 == 1) nv = -nv;
    }
    return nv;
  }

  double rhs(int id) const {
    if (id < 2 * n_) {
      const int j = id / 2;
      return (id % 2 == 0) ? qp_.lower(j) : -qp_.upper(j);
    }
    const int r = (id - 2 * n_) / 2;
    return (id % 2 == 0) ? qp_.constraint_lower(r) : -qp_.constraint_upper(r);
  }

  // Cx must be C * x (empty when there are no rows).
  double slack(int id, const Eigen::VectorXd& x, const Eigen::VectorXd& Cx) const {
    if (id < 2 * n_) {
      const int j = id / 2;
      return (id % 2 == 0) ? x(j) - qp_.lower(j) : qp_.upper(j) - x(j);
    }
    const int r = (id - 2 * n_) / 2;
    return (id % 2 == 0) ? Cx(r) - qp_.constraint_lower(r) : qp_.constraint_upper(r) - Cx(r);
  }

  double slack(int id, const Eigen::VectorXd& x) const {
    if (id < 2 * n_) return slack(id, x, Eigen::VectorXd());
    const int r = (id - 2 * n_) / 2;
    const double cx = qp_.constraints.row(r).dot(x);
    return (id % 2 == 0) ? cx - qp_.constraint_lower(r) : qp_.constraint_upper(r) - cx;
  }

 private:
  const QpProblem& qp_;
  int n_;
  std::vector<int> ids_;
};

void check_dimensions(const QpProblem& qp) {
  const int n = qp.num_variables();
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kDimensionMismatch, what); };
  if (qp.hessian.rows() != n || qp.hessian.cols() != n) bad("QP Hessian size");
  if (qp.lower.size() != 0 && qp.lower.size() != n) bad("QP lower bound size");
  if (qp.upper.size() != 0 && qp.upper.size() != n) bad("QP upper bound size");
  const int m = qp.num_constraints();
  if (m > 0 && qp.constraints.cols() != n) bad("QP constraint matrix columns");
  if (qp.constraint_lower.size() != m || qp.constraint_upper.size() != m) {
    bad("QP constraint bound size");
  }
}

}  // namespace

QpSolution solve_qp(const QpProblem& qp, const QpSettings& settings) {
  check_dimensions(qp);
  const int n = qp.num_variables();
  const int m = qp.num_constraints();

  for (int j = 0; j < n; ++j) {
    const double lo = qp.lower.size() ? qp.lower(j) : -kInf;
    const double hi = qp.upper.size() ? qp.upper(j) : kInf;
    if (lo > hi) throw Error(ErrorCode::kQpInfeasible, "empty box on variable " + std::to_string(j));
  }
  for (int r = 0; r < m; ++r) {
    if (qp.constraint_lower(r) > qp.constraint_upper(r)) {
      throw Error(ErrorCode::kQpInfeasible, "empty range on constraint " + std::to_string(r));
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(qp.hessian);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kQpNotConvex, "Hessian is not positive definite");
  }
  const auto L = llt.matrixL();
  const auto U = llt.matrixU();

  const ConstraintSet cs(qp);
  Eigen::VectorXd x = llt.solve(-qp.gradient);

  std::vector<int> active;
  std::vector<double> mult;
  std::vector<Eigen::VectorXd> mcols;  // L^-1 n_i of the active constraints
  std::vector<char> is_active(2 * n + 2 * m, 0);
  int iterations = 0;

  Eigen::VectorXd Cx;
  while (true) {
    if (m > 0) Cx = qp.constraints * x;
    int p = -1;
    double worst = 0.0;
    for (int id : cs.ids()) {
      if (is_active[id]) continue;
      const double s = cs.slack(id, x, Cx);
      const double tol = settings.feasibility_tolerance * std::max(1.0, std::abs(cs.rhs(id)));
      if (s < -tol && s < worst) {
        worst = s;
        p = id;
      }
    }
    if (p < 0) break;

    const Eigen::VectorXd np = cs.normal(p);
    const Eigen::VectorXd wv = L.solve(np);
    double mult_p = 0.0;

    while (true) {
      if (++iterations > settings.max_iterations) {
        throw Error(ErrorCode::kMaxIterations,
                    "QP exceeded " + std::to_string(settings.max_iterations) + " iterations");
      }
      const int q = static_cast<int>(active.size());
      Eigen::VectorXd r;
      Eigen::VectorXd perp = wv;
      if (q > 0) {
        Eigen::MatrixXd M(n, q);
        for (int k = 0; k < q; ++k) M.col(k) = mcols[k];
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
        r = qr.solve(wv);
        perp = wv - M * r;
      }
      const Eigen::VectorXd z = U.solve(perp);
      const double denom = perp.squaredNorm();

      double t2 = kInf;
      if (denom > 1e-14 * std::max(1.0, wv.squaredNorm())) {
        t2 = -cs.slack(p, x) / denom;
        t2 = std::max(t2, 0.0);
      }
      double t1 = kInf;
      int drop = -1;
      for (int k = 0; k < q; ++k) {
        if (r(k) > 1e-12) {
          const double ratio = mult[k] / r(k);
          if (ratio < t1 || (ratio == t1 && drop >= 0 && active[k] < active[drop])) {
            t1 = ratio;
            drop = k;
          }
        }
      }
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        throw Error(ErrorCode::kQpInfeasible, "constraints are inconsistent");
      }

      if (std::isfinite(t2)) x += t * z;
      for (int k = 0; k < q; ++k) mult[k] -= t * r(k);
      mult_p += t;

      if (std::isfinite(t2) && t2 <= t1) {
        active.push_back(p);
        mult.push_back(mult_p);
        mcols.push_back(wv);
        is_active[p] = 1;
        break;
      }
      is_active[active[drop]] = 0;
      active.erase(active.begin() + drop);
      mult.erase(mult.begin() + drop);
      mcols.erase(mcols.begin() + drop);
    }
  }

  QpSolution sol;
  sol.x = x;
  sol.iterations = iterations;
  sol.bound_multipliers = Eigen::VectorXd::Zero(n);
  sol.constraint_multipliers = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const int id = active[k];
    const double sign = (id % 2 == 0) ? 1.0 : -1.0;
    if (id < 2 * n) {
      sol.bound_multipliers(id / 2) += sign * mult[k];
    } else {
      sol.constraint_multipliers((id - 2 * n) / 2) += sign * mult[k];
    }
  }
  sol.objective = 0.5 * x.dot(qp.hessian * x) + qp.gradient.dot(x);
  return sol;
}

KktResiduals kkt_residuals(const QpProblem& qp, const QpSolution& sol) {
  const int n = qp.num_variables();
  const int m = qp.num_constraints();
  KktResiduals res;
  Eigen::VectorXd stat = qp.hessian * sol.x + qp.gradient - sol.bound_multipliers;
  if (m > 0) stat -= qp.constraints.transpose() * sol.constraint_multipliers;
  res.stationarity = stat.cwiseAbs().maxCoeff();

  auto side = [&](double value, double lo, double hi, double lambda) {
    if (std::isfinite(lo)) res.primal = std::max(res.primal, lo - value);
    if (std::isfinite(hi)) res.primal = std::max(res.primal, value - hi);
    if (lambda > 0.0) {
      res.complementarity = std::max(res.complementarity, lambda * std::abs(value - lo));
      if (!std::isfinite(lo)) res.dual = std::max(res.dual, lambda);
    } else if (lambda < 0.0) {
      res.complementarity = std::max(res.complementarity, -lambda * std::abs(hi - value));
      if (!std::isfinite(hi)) res.dual = std::max(res.dual, -lambda);
    }
  };
  for (int j = 0; j < n; ++j) {
    side(sol.x(j), qp.lower.size() ? qp.lower(j) : -kInf, qp.upper.size() ? qp.upper(j) : kInf,
         sol.bound_multipliers(j));
  }
  if (m > 0) {
    const Eigen::VectorXd Cx = qp.constraints * sol.x;
    for (int r = 0; r < m; ++r) {
      side(Cx(r), qp.constraint_lower(r), qp.constraint_upper(r), sol.constraint_multipliers(r));
    }
  }
  return res;
}

}  // namespace omav::nmpc
