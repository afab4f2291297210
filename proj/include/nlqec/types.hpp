// Copyright 2026 The nlqec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NLQEC_TYPES_HPP
#define NLQEC_TYPES_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nlqec {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using IntMatrix = Eigen::MatrixXi;

/// Numerical tolerances shared across the library. All decomposition
/// tolerances are relative to the Frobenius norm of the input.
struct Tolerances {
    double herm_tol = 1e-10;
    double eig_tol = 1e-10;
    double polar_tol = 1e-9;
    double svd_tol = 1e-10;
    double rank_tol = 1e-8;
    double norm_tol = 1e-10;
    double trunc_tol = 1e-10;
    double tp_tol = 1e-10;
    double block_tol = 1e-8;
    double mixed_tol = 1e-10;
};

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonHermitianInput : Error {
    using Error::Error;
};
struct NonAntiHermitianInput : Error {
    using Error::Error;
};
struct ConvergenceFailure : Error {
    int iterations = 0;
    ConvergenceFailure(const std::string& msg, int iters) : Error(msg), iterations(iters) {}
};
struct TruncationError : Error {
    using Error::Error;
};
struct DegenerateInput : Error {
    using Error::Error;
};
struct IndexOutOfRange : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct NonUnitaryTransform : Error {
    using Error::Error;
};
struct DomainViolation : Error {
    using Error::Error;
};
struct DomainEmpty : Error {
    using Error::Error;
};
struct DegenerateSampleSet : Error {
    using Error::Error;
};
struct IllConditionedSolve : Error {
    using Error::Error;
};
struct ZeroCoefficientBlock : Error {
    using Error::Error;
};
struct ZeroTrace : Error {
    using Error::Error;
};
struct InconsistentGamma : Error {
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace nlqec

#endif  // NLQEC_TYPES_HPP
