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

#ifndef NLQEC_HILBERT_HPP
#define NLQEC_HILBERT_HPP

#include <vector>

#include "nlqec/types.hpp"

namespace nlqec::hilbert {

/// Truncated oscillator space, Fock levels 0..n_max.
struct FockSpace {
    int dim;  // n_max + 1
    explicit FockSpace(int n_max) : dim(n_max + 1) {
        if (dim < 2) throw DomainViolation("FockSpace: dim must be >= 2");
    }
    int n_max() const { return dim - 1; }
};

struct QubitRegister {
    int n_qubits;
    int dim;
    explicit QubitRegister(int n) : n_qubits(n), dim(1 << n) {
        if (n < 1) throw DomainViolation("QubitRegister: need at least one qubit");
    }
};

enum class Pauli { X, Y, Z };

/// Levels inside the guard band count as truncation-compromised; states whose
/// tail mass there exceeds trunc_tol are rejected by the constructors below.
inline constexpr int kDefaultGuardBand = 10;

ComplexMatrix annihilation_op(const FockSpace& space);
ComplexMatrix number_op(const FockSpace& space);
ComplexMatrix sqrt_number_op(const FockSpace& space);

/// T with <n|T|n+1> = 1; satisfies T^dagger T = I - |0><0| on the truncated
/// space and a = T sqrt(n_hat) exactly.
ComplexMatrix left_shift_op(const FockSpace& space);

/// Probability mass of v in the top guard_band levels.
double truncation_defect(const ComplexVector& v, int guard_band);

/// Truncated coherent amplitudes, renormalized; no tail-mass check.
ComplexVector coherent_state_unchecked(Complex alpha, const FockSpace& space);

/// Coherent state |alpha>; throws TruncationError when the guard-band tail
/// mass exceeds trunc_tol.
ComplexVector coherent_state(Complex alpha, const FockSpace& space, const Tolerances& tol = {});

ComplexMatrix displacement_op(Complex alpha, const FockSpace& space);
ComplexMatrix squeeze_op(Complex xi, const FockSpace& space);

ComplexVector even_cat_state(Complex alpha, const FockSpace& space, const Tolerances& tol = {});
ComplexVector odd_cat_state(Complex alpha, const FockSpace& space, const Tolerances& tol = {});

/// Diagonal projectors onto the even / odd Fock levels.
ComplexMatrix parity_projector(const FockSpace& space, bool odd);

ComplexMatrix pauli_op(const QubitRegister& reg, Pauli which, int site);
ComplexMatrix tensor(const std::vector<ComplexMatrix>& factors);

/// ceil(|a|^2 + 6|a| + 20) levels, the default truncation policy.
int default_n_max(double alpha_max);

}  // namespace nlqec::hilbert

#endif  // NLQEC_HILBERT_HPP
