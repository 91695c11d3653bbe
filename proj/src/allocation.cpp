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

#include "omav/allocation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "omav/errors.hpp"

namespace omav {

namespace {

constexpr double kRankTolerance = 1e-10;

Eigen::MatrixXd pseudo_inverse_checked(const AllocationMatrix& A, ErrorCode code) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  cod.setThreshold(kRankTolerance);
  if (cod.rank() < 6) {
    throw Error(code, "allocation matrix rank " + std::to_string(cod.rank()) + " < 6");
  }
  return cod.pseudoInverse();
}

ActuatorCommand command_from(const PlatformGeometry& geom, const ExtendedThrust& t_ext) {
  ActuatorCommand cmd;
  cmd.alpha = Eigen::VectorXd::Zero(geom.arms);
  cmd.thrust = Eigen::VectorXd::Zero(geom.rotors());
  for (int j = 0; j < geom.arms; ++j) {
    double lateral = 0.0, vertical = 0.0;
    for (int k = 0; k < geom.rotors_per_arm; ++k) {
      const int i = j * geom.rotors_per_arm + k;
      lateral += t_ext(2 * i);
      vertical += t_ext(2 * i + 1);
    }
    // atan2(+-0, -0) would give +-pi; an idle arm keeps zero tilt.
    if (std::abs(lateral) < 1e-15 && std::abs(vertical) < 1e-15) {
      cmd.alpha(j) = 0.0;
    } else {
      cmd.alpha(j) = std::atan2(lateral, vertical);
    }
  }
  for (int i = 0; i < geom.rotors(); ++i) {
    cmd.thrust(i) = std::hypot(t_ext(2 * i), t_ext(2 * i + 1));
  }
  return cmd;
}

ExtendedThrust apply_seed(const AllocationMatrix& A, const Eigen::MatrixXd& A_pinv,
                          const Wrench& w, const Eigen::VectorXd& b) {
  ExtendedThrust t_ext = A_pinv * w.vector();
  if (b.size() > 0) {
    if (b.size() != A.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "nullspace seed must have 2 n_r entries");
    }
    t_ext += b - A_pinv * (A * b);
  }
  return t_ext;
}

}  // namespace

PlatformGeometry PlatformGeometry::regular(int arms, int rotors_per_arm, double radius,
                                           double drag_coefficient, SpinLayout layout) {
  PlatformGeometry g;
  g.arms = arms;
  g.rotors_per_arm = rotors_per_arm;
  g.drag_coefficient = drag_coefficient;
  for (int j = 0; j < arms; ++j) {
    const double az = 2.0 * std::numbers::pi * j / arms;
    g.arm_azimuths.push_back(az);
    g.arm_positions.emplace_back(radius * std::cos(az), radius * std::sin(az), 0.0);
  }
  for (int i = 0; i < g.rotors(); ++i) {
    const int arm = i / rotors_per_arm;
    const int k = i % rotors_per_arm;
    if (layout == SpinLayout::kAlternatingArms) {
      g.spin.push_back(arm % 2 == 0 ? 1 : -1);
    } else {
      g.spin.push_back(k % 2 == 0 ? 1 : -1);
    }
  }
  return g;
}

void PlatformGeometry::validate() const {
  if (arms <= 0 || rotors_per_arm <= 0) {
    throw Error(ErrorCode::kConfigInvalid, "geometry needs at least one arm and one rotor per arm");
  }
  if (static_cast<int>(arm_positions.size()) != arms ||
      static_cast<int>(arm_azimuths.size()) != arms) {
    throw Error(ErrorCode::kConfigInvalid, "geometry arm_positions/arm_azimuths size != arms");
  }
  if (static_cast<int>(spin.size()) != rotors()) {
    throw Error(ErrorCode::kConfigInvalid, "geometry spin size != arms * rotors_per_arm");
  }
  for (const auto& r : arm_positions) {
    if (r.norm() == 0.0) throw Error(ErrorCode::kConfigInvalid, "geometry arm position is zero");
  }
}

AllocationMatrix build_allocation_matrix(const PlatformGeometry& geom) {
  const int n_r = geom.rotors();
  if (static_cast<int>(geom.arm_positions.size()) != geom.arms ||
      static_cast<int>(geom.arm_azimuths.size()) != geom.arms ||
      static_cast<int>(geom.spin.size()) != n_r) {
    throw Error(ErrorCode::kDimensionMismatch, "geometry vectors inconsistent with arm count");
  }
  AllocationMatrix A(6, 2 * n_r);
  for (int i = 0; i < n_r; ++i) {
    const int arm = geom.arm_of(i);
    const Vec3& r = geom.arm_positions[arm];
    const double az = geom.arm_azimuths[arm];
    const Vec3 lateral(-std::sin(az), std::cos(az), 0.0);
    const Vec3 vertical = Vec3::UnitZ();
    const double drag = geom.spin[i] * geom.drag_coefficient;
    A.col(2 * i) << lateral, r.cross(lateral) + drag * lateral;
    A.col(2 * i + 1) << vertical, r.cross(vertical) + drag * vertical;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
  cod.setThreshold(kRankTolerance);
  if (cod.rank() < 6) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "allocation matrix rank " + std::to_string(cod.rank()) + " < 6");
  }
  return A;
}

ExtendedThrust extended_thrust(const PlatformGeometry& geom, const ActuatorCommand& cmd) {
  const int n_r = geom.rotors();
  ExtendedThrust t_ext(2 * n_r);
  for (int i = 0; i < n_r; ++i) {
    const double a = cmd.alpha(geom.arm_of(i));
    t_ext(2 * i) = std::sin(a) * cmd.thrust(i);
    t_ext(2 * i + 1) = std::cos(a) * cmd.thrust(i);
  }
  return t_ext;
}

Wrench forward_wrench(const PlatformGeometry& geom, const AllocationMatrix& A,
                      const ActuatorCommand& cmd) {
  return Wrench::from_vector(A * extended_thrust(geom, cmd));
}

Allocator::Allocator(PlatformGeometry geom)
    : geom_(std::move(geom)),
      A_(build_allocation_matrix(geom_)),
      A_pinv_(pseudo_inverse_checked(A_, ErrorCode::kDegenerateGeometry)) {}

Eigen::MatrixXd Allocator::nullspace_projector() const {
  const int n = static_cast<int>(A_.cols());
  return Eigen::MatrixXd::Identity(n, n) - A_pinv_ * A_;
}

Wrench Allocator::forward_wrench(const ActuatorCommand& cmd) const {
  return omav::forward_wrench(geom_, A_, cmd);
}

AllocationResult Allocator::allocate(const Wrench& w, const Eigen::VectorXd& b) const {
  AllocationResult out;
  out.extended = apply_seed(A_, A_pinv_, w, b);
  out.command = command_from(geom_, out.extended);
  return out;
}

ActuatorCommand Allocator::command_from_extended(const ExtendedThrust& t_ext) const {
  return command_from(geom_, t_ext);
}

AllocationResult allocate(const PlatformGeometry& geom, const AllocationMatrix& A, const Wrench& w,
                          const Eigen::VectorXd& b) {
  const Eigen::MatrixXd A_pinv = pseudo_inverse_checked(A, ErrorCode::kRankDeficient);
  AllocationResult out;
  out.extended = apply_seed(A, A_pinv, w, b);
  out.command = command_from(geom, out.extended);
  return out;
}

}  // namespace omav
