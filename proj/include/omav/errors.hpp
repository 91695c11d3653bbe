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

#include <stdexcept>
#include <string>
#include <string_view>

namespace omav {

enum class ErrorCode {
  kAttitudeAntipodal,
  kGimbalDegenerate,
  kDegenerateGeometry,
  kRankDeficient,
  kNonFiniteLinearization,
  kQpInfeasible,
  kQpNotConvex,
  kMaxIterations,
  kSolverFailure,
  kRateTooLow,
  kNonUniformSampling,
  kSingularNormalEquations,
  kDimensionMismatch,
  kEmptyLog,
  kConfigInvalid,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAttitudeAntipodal: return "AttitudeAntipodal";
    case ErrorCode::kGimbalDegenerate: return "GimbalDegenerate";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNonFiniteLinearization: return "NonFiniteLinearization";
    case ErrorCode::kQpInfeasible: return "QpInfeasible";
    case ErrorCode::kQpNotConvex: return "QpNotConvex";
    case ErrorCode::kMaxIterations: return "MaxIterations";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kRateTooLow: return "RateTooLow";
    case ErrorCode::kNonUniformSampling: return "NonUniformSampling";
    case ErrorCode::kSingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyLog: return "EmptyLog";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace omav
