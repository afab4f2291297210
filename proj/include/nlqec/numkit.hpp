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

#ifndef NLQEC_NUMKIT_HPP
#define NLQEC_NUMKIT_HPP

#include <utility>
#include <vector>

#include "nlqec/types.hpp"

namespace nlqec::numkit {

struct EigResult {
    RealVector eigenvalues;   // ascending
    ComplexMatrix eigenvectors;  // unitary, column k pairs with eigenvalues[k]
};

struct SvdResult {
    ComplexMatrix u;
    RealVector singular_values;  // descending, >= 0
    ComplexMatrix v;             // M ~= u * diag(s) * v^dagger
};

struct PolarResult {
    ComplexMatrix v_iso;  // unitary factor (kernel completed, deterministic)
    ComplexMatrix h;      // PSD factor, h = sqrt(M^dagger M)
};

struct OrthonormalBasis {
    ComplexMatrix q;  // dim x rank, Q^dagger Q = I
    int rank = 0;
};

/// max_ij |M - M^dagger| scaled by max(1, ||M||_F).
double hermiticity_defect(const ComplexMatrix& m);

/// max_ij |M + M^dagger| scaled by max(1, ||M||_F).
double anti_hermiticity_defect(const ComplexMatrix& m);

bool all_finite(const ComplexMatrix& m);

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
/// Throws NonHermitianInput when the symmetry defect exceeds herm_tol.
EigResult eig_hermitian(const ComplexMatrix& m, const Tolerances& tol = {});

SvdResult svd(const ComplexMatrix& m);

/// M = v_iso * h with h = sqrt(M^dagger M). The unitary factor is completed
/// on ker(h) by pairing left and right null vectors of the SVD in index
/// order, which makes the result deterministic.
PolarResult polar_decompose(const ComplexMatrix& m, const Tolerances& tol = {});

/// Orthonormal basis of the column span. rank counts singular values above
/// rank_tol * sigma_max; rank 0 is allowed for zero input.
OrthonormalBasis orthonormalize(const ComplexMatrix& columns, double rank_tol);

/// exp(G) for anti-Hermitian G, computed through the eigendecomposition of
/// -iG so the result is unitary by construction.
ComplexMatrix expm_antihermitian(const ComplexMatrix& g, const Tolerances& tol = {});

/// Multiplies each column by a phase making its first significant entry
/// real nonnegative. Used for reproducible eigenbases.
void phase_normalize_columns(ComplexMatrix& m, double significance = 1e-8);

struct SpanMap {
    ComplexMatrix op;       // dim x dim, supported on span(states)
    ComplexMatrix basis;    // orthonormal basis Q of span(states)
    double fit_defect = 0;  // max_j ||op * states_j - targets_j||
    double cond = 1.0;      // condition of the rank-truncated solve
};

/// Least-squares operator with op * states_j ~= targets_j and support
/// restricted to span(states). Throws IllConditionedSolve when the
/// rank-truncated system is worse conditioned than cond_max.
SpanMap span_map(const ComplexMatrix& states, const ComplexMatrix& targets, double rank_tol,
                 double cond_max);

}  // namespace nlqec::numkit

#endif  // NLQEC_NUMKIT_HPP
