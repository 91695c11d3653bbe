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

// Small OCP models with known solutions.

#include <vector>

#include <Eigen/Dense>

#include "omav/nmpc/ocp.hpp"

namespace oracle {

// x_{k+1} = A x_k + B u_k with stage residual x_k - r_k.
class LinearModel : public omav::nmpc::OcpModel {
 public:
  LinearModel(Eigen::MatrixXd A, Eigen::MatrixXd B, std::vector<Eigen::VectorXd> ref)
      : A_(std::move(A)), B_(std::move(B)), ref_(std::move(ref)) {}
  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int input_dim() const override { return static_cast<int>(B_.cols()); }
  int residual_dim() const override { return state_dim(); }
  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override {
    return A_ * x + B_ * u;
  }
  void step_jacobians(const Eigen::VectorXd&, const Eigen::VectorXd&, Eigen::MatrixXd& A,
                      Eigen::MatrixXd& B) const override {
    A = A_;
    B = B_;
  }
  Eigen::VectorXd stage_residual(const Eigen::VectorXd& x, int k) const override {
    return x - ref_[k];
  }
  Eigen::MatrixXd stage_residual_jacobian(const Eigen::VectorXd&, int) const override {
    return Eigen::MatrixXd::Identity(state_dim(), state_dim());
  }

 private:
  Eigen::MatrixXd A_, B_;
  std::vector<Eigen::VectorXd> ref_;
};

}  // namespace oracle
