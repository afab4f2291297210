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

#include "nlqec/hilbert.hpp"

#include <cmath>

#include "nlqec/numkit.hpp"

namespace nlqec::hilbert {

ComplexMatrix annihilation_op(const FockSpace& space) {
    ComplexMatrix a = ComplexMatrix::Zero(space.dim, space.dim);
    for (int n = 1; n < space.dim; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

ComplexMatrix number_op(const FockSpace& space) {
    ComplexMatrix n = ComplexMatrix::Zero(space.dim, space.dim);
    for (int k = 0; k < space.dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

ComplexMatrix sqrt_number_op(const FockSpace& space) {
    ComplexMatrix n = ComplexMatrix::Zero(space.dim, space.dim);
    for (int k = 0; k < space.dim; ++k) n(k, k) = std::sqrt(static_cast<double>(k));
    return n;
}

ComplexMatrix left_shift_op(const FockSpace& space) {
    ComplexMatrix t = ComplexMatrix::Zero(space.dim, space.dim);
    for (int n = 0; n + 1 < space.dim; ++n) t(n, n + 1) = 1.0;
    return t;
}

double truncation_defect(const ComplexVector& v, int guard_band) {
    if (guard_band >= v.size()) {
        throw DomainViolation("truncation_defect: guard_band must be smaller than dim");
    }
    double mass = 0.0;
    for (int n = static_cast<int>(v.size()) - guard_band; n < v.size(); ++n) {
        mass += std::norm(v(n));
    }
    return mass;
}

ComplexVector coherent_state_unchecked(Complex alpha, const FockSpace& space) {
    ComplexVector v(space.dim);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < space.dim; ++n) {
        v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    }
    double norm = v.norm();
    if (norm == 0.0) throw NumericalError("coherent_state: zero norm after truncation");
    return v / norm;
}

ComplexVector coherent_state(Complex alpha, const FockSpace& space, const Tolerances& tol) {
    ComplexVector v = coherent_state_unchecked(alpha, space);
    int guard = std::min(kDefaultGuardBand, space.dim - 1);
    if (truncation_defect(v, guard) > tol.trunc_tol) {
        throw TruncationError("coherent_state: tail mass exceeds trunc_tol; increase n_max");
    }
    return v;
}

ComplexMatrix displacement_op(Complex alpha, const FockSpace& space) {
    ComplexMatrix a = annihilation_op(space);
    ComplexMatrix g = alpha * a.adjoint() - std::conj(alpha) * a;
    return numkit::expm_antihermitian(g);
}

ComplexMatrix squeeze_op(Complex xi, const FockSpace& space) {
    ComplexMatrix a = annihilation_op(space);
    ComplexMatrix a2 = a * a;
    ComplexMatrix g = 0.5 * (std::conj(xi) * a2 - xi * a2.adjoint());
    return numkit::expm_antihermitian(g);
}

namespace {

ComplexVector cat_state(Complex alpha, const FockSpace& space, bool odd, const Tolerances& tol) {
    if (odd && std::abs(alpha) == 0.0) {
        throw DegenerateInput("odd_cat_state: alpha = 0 has no odd cat");
    }
    ComplexVector plus = coherent_state_unchecked(alpha, space);
    ComplexVector minus = coherent_state_unchecked(-alpha, space);
    ComplexVector v = odd ? ComplexVector(plus - minus) : ComplexVector(plus + minus);
    double norm = v.norm();
    if (norm < 1e-14) {
        throw DegenerateInput("cat_state: components cancel; alpha too small");
    }
    v /= norm;
    int guard = std::min(kDefaultGuardBand, space.dim - 1);
    if (truncation_defect(v, guard) > tol.trunc_tol) {
        throw TruncationError("cat_state: tail mass exceeds trunc_tol; increase n_max");
    }
    return v;
}

}  // namespace

ComplexVector even_cat_state(Complex alpha, const FockSpace& space, const Tolerances& tol) {
    return cat_state(alpha, space, /*odd=*/false, tol);
}

ComplexVector odd_cat_state(Complex alpha, const FockSpace& space, const Tolerances& tol) {
    return cat_state(alpha, space, /*odd=*/true, tol);
}

ComplexMatrix parity_projector(const FockSpace& space, bool odd) {
    ComplexMatrix p = ComplexMatrix::Zero(space.dim, space.dim);
    for (int n = odd ? 1 : 0; n < space.dim; n += 2) p(n, n) = 1.0;
    return p;
}

ComplexMatrix pauli_op(const QubitRegister& reg, Pauli which, int site) {
    if (site < 0 || site >= reg.n_qubits) {
        throw IndexOutOfRange("pauli_op: site out of range");
    }
    ComplexMatrix op(2, 2);
    const Complex im(0.0, 1.0);
    switch (which) {
        case Pauli::X: op << 0, 1, 1, 0; break;
        case Pauli::Y: op << 0, -im, im, 0; break;
        case Pauli::Z: op << 1, 0, 0, -1; break;
    }
    std::vector<ComplexMatrix> factors;
    factors.reserve(reg.n_qubits);
    for (int q = 0; q < reg.n_qubits; ++q) {
        factors.push_back(q == site ? op : ComplexMatrix::Identity(2, 2));
    }
    return tensor(factors);
}

ComplexMatrix tensor(const std::vector<ComplexMatrix>& factors) {
    if (factors.empty()) throw DomainViolation("tensor: empty factor list");
    ComplexMatrix out = factors.front();
    for (size_t k = 1; k < factors.size(); ++k) {
        const ComplexMatrix& f = factors[k];
        ComplexMatrix next(out.rows() * f.rows(), out.cols() * f.cols());
        for (int i = 0; i < out.rows(); ++i) {
            for (int j = 0; j < out.cols(); ++j) {
                next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = out(i, j) * f;
            }
        }
        out = std::move(next);
    }
    return out;
}

int default_n_max(double alpha_max) {
    double a = std::abs(alpha_max);
    return static_cast<int>(std::ceil(a * a + 6.0 * a + 20.0));
}

}  // namespace nlqec::hilbert
