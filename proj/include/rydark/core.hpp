// Copyright 2026 The rydark Authors
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

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rydark {

inline constexpr const char* kVersion = "rydark 1.0.0";

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Internal units: angular frequency in rad/us, time in us.
// User-facing values follow the nu = omega / 2pi convention.
constexpr double from_mhz(double nu_mhz) { return nu_mhz * kTwoPi; }
constexpr double from_khz(double nu_khz) { return nu_khz * 1e-3 * kTwoPi; }
constexpr double to_mhz(double omega) { return omega / kTwoPi; }
constexpr double to_khz(double omega) { return omega / kTwoPi * 1e3; }

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input. `field()` names the offending key or argument.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A requested Hilbert space exceeds the configured dimension cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Operands built on different spaces or with incompatible shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step size collapsed; the problem is too stiff for explicit RK.
class StiffnessError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace rydark
