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

#include <vector>

#include <Eigen/Dense>

#include "omav/rigid_body.hpp"

namespace omav {

enum class SpinLayout {
  /// Both rotors of an arm spin the same way; the direction alternates between arms.
  kAlternatingArms,
  /// The two rotors of each arm counter-rotate.
  kCounterRotatingPairs,
};

/// n_a tiltable arms with n_rpa rotors each. Rotor i sits on arm i / n_rpa.
/// Tilting arm j by alpha rotates its thrust direction from body z towards
/// the arm's tangent e_t = (-sin(az), cos(az), 0).
struct PlatformGeometry {
  int arms = 6;
  int rotors_per_arm = 2;
  std::vector<Vec3> arm_positions;   // body frame [m]
  std::vector<double> arm_azimuths;  // [rad]
  std::vector<int> spin;             // +1 / -1 per rotor; drag torque = spin * k * thrust vector
  double drag_coefficient = 0.016;   // [m]

  int rotors() const { return arms * rotors_per_arm; }
  int arm_of(int rotor) const { return rotor / rotors_per_arm; }

  /// Arms equally spaced on a circle of the given radius, first arm on +x.
  static PlatformGeometry regular(int arms, int rotors_per_arm, double radius,
                                  double drag_coefficient,
                                  SpinLayout layout = SpinLayout::kAlternatingArms);
  static PlatformGeometry default_hexa() { return regular(6, 2, 0.3, 0.016); }

  /// Throws Error(kConfigInvalid) on inconsistent sizes or zero arm positions.
  void validate() const;
};

using AllocationMatrix = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Interleaved (lateral, vertical) thrust components per rotor, 2 n_r entries.
using ExtendedThrust = Eigen::VectorXd;

struct ActuatorCommand {
  Eigen::VectorXd alpha;   // tilt per arm [rad]
  Eigen::VectorXd thrust;  // per rotor [N]
};

/// Columns (2i, 2i+1) map (f_{i,l}, f_{i,v}) of rotor i to the body wrench.
/// Throws Error(kDegenerateGeometry) if rank(A) < 6.
AllocationMatrix build_allocation_matrix(const PlatformGeometry& geom);

/// t~(alpha, t) of the command.
ExtendedThrust extended_thrust(const PlatformGeometry& geom, const ActuatorCommand& cmd);

Wrench forward_wrench(const PlatformGeometry& geom, const AllocationMatrix& A,
                      const ActuatorCommand& cmd);

struct AllocationResult {
  ActuatorCommand command;
  ExtendedThrust extended;
};

/// Minimum-norm allocation with an optional nullspace seed b (size 2 n_r or empty).
/// Precomputes A and its pseudoinverse once; immutable afterwards.
class Allocator {
 public:
  explicit Allocator(PlatformGeometry geom);

  const PlatformGeometry& geometry() const { return geom_; }
  const AllocationMatrix& matrix() const { return A_; }
  const Eigen::MatrixXd& pseudo_inverse() const { return A_pinv_; }
  Eigen::MatrixXd nullspace_projector() const;

  Wrench forward_wrench(const ActuatorCommand& cmd) const;
  AllocationResult allocate(const Wrench& w, const Eigen::VectorXd& b = {}) const;

  /// Tilt angles and thrusts from extended thrust components.
  ActuatorCommand command_from_extended(const ExtendedThrust& t_ext) const;

 private:
  PlatformGeometry geom_;
  AllocationMatrix A_;
  Eigen::MatrixXd A_pinv_;
};

/// Free-function form; factors A on every call. Throws kRankDeficient when
/// A is not full row rank at relative tolerance 1e-10.
AllocationResult allocate(const PlatformGeometry& geom, const AllocationMatrix& A, const Wrench& w,
                          const Eigen::VectorXd& b = {});

}  // namespace omav
