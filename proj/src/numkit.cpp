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

#include "nlqec/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace nlqec::numkit {

double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
    return defect / std::max(1.0, m.norm());
}

double anti_hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    double defect = (m + m.adjoint()).cwiseAbs().maxCoeff();
    return defect / std::max(1.0, m.norm());
}

bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

EigResult eig_hermitian(const ComplexMatrix& m, const Tolerances& tol) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("eig_hermitian: matrix must be square");
    }
    double defect = hermiticity_defect(m);
    if (defect > tol.herm_tol) {
        throw NonHermitianInput("eig_hermitian: symmetry defect " + std::to_string(defect) +
                                " exceeds herm_tol");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver;
    solver.compute((m + m.adjoint()) / 2.0);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceFailure("eig_hermitian: solver did not converge",
                                 static_cast<int>(m.rows()));
    }
    EigResult out{solver.eigenvalues(), solver.eigenvectors()};
    if (!all_finite(out.eigenvectors)) {
        throw NumericalError("eig_hermitian: non-finite eigenvectors");
    }
    return out;
}

SvdResult svd(const ComplexMatrix& m) {
    Eigen::JacobiSVD<ComplexMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    if (!all_finite(out.u) || !all_finite(out.v)) {
        throw ConvergenceFailure("svd: non-finite factors", 0);
    }
    return out;
}

PolarResult polar_decompose(const ComplexMatrix& m, const Tolerances& tol) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("polar_decompose: matrix must be square");
    }
    SvdResult s = svd(m);
    // Full SVD pairs left/right null vectors in index order, which is
    // exactly the deterministic kernel completion rule.
    PolarResult out;
    out.v_iso = s.u * s.v.adjoint();
    out.h = s.v * s.singular_values.asDiagonal() * s.v.adjoint();
    out.h = (out.h + out.h.adjoint()) / 2.0;
    double recon = (out.v_iso * out.h - m).norm();
    if (recon > tol.polar_tol * (1.0 + m.norm())) {
        throw ConvergenceFailure("polar_decompose: reconstruction defect too large", 0);
    }
    return out;
}

OrthonormalBasis orthonormalize(const ComplexMatrix& columns, double rank_tol) {
    if (rank_tol <= 0) {
        throw DomainViolation("orthonormalize: rank_tol must be positive");
    }
    OrthonormalBasis out;
    if (columns.cols() == 0 || columns.norm() == 0.0) {
        out.q = ComplexMatrix(columns.rows(), 0);
        out.rank = 0;
        return out;
    }
    Eigen::JacobiSVD<ComplexMatrix> solver(columns, Eigen::ComputeThinU);
    const RealVector& sv = solver.singularValues();
    double smax = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    for (int k = 0; k < sv.size(); ++k) {
        if (sv(k) > rank_tol * smax) ++rank;
    }
    out.q = solver.matrixU().leftCols(rank);
    out.rank = rank;
    return out;
}

ComplexMatrix expm_antihermitian(const ComplexMatrix& g, const Tolerances& tol) {
    if (g.rows() != g.cols()) {
        throw DimensionMismatch("expm_antihermitian: matrix must be square");
    }
    double defect = anti_hermiticity_defect(g);
    if (defect > tol.herm_tol) {
        throw NonAntiHermitianInput("expm_antihermitian: defect " + std::to_string(defect) +
                                    " exceeds herm_tol");
    }
    const Complex im(0.0, 1.0);
    ComplexMatrix h = (g - g.adjoint()) / (2.0 * im);  // Hermitian, g = i*h
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceFailure("expm_antihermitian: eigensolver failed", 0);
    }
    ComplexVector phases(h.rows());
    for (int k = 0; k < h.rows(); ++k) {
        phases(k) = std::exp(im * solver.eigenvalues()(k));
    }
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

SpanMap span_map(const ComplexMatrix& states, const ComplexMatrix& targets, double rank_tol,
                 double cond_max) {
    if (states.rows() != targets.rows() || states.cols() != targets.cols()) {
        throw DimensionMismatch("span_map: states/targets shape mismatch");
    }
    SpanMap out;
    OrthonormalBasis basis = orthonormalize(states, rank_tol);
    if (basis.rank == 0) throw DegenerateSampleSet("span_map: zero-rank state set");
    out.basis = basis.q;
    ComplexMatrix coords = basis.q.adjoint() * states;  // rank x S
    Eigen::JacobiSVD<ComplexMatrix> s(coords, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = s.singularValues();
    double smax = sv(0);
    int rank = 0;
    for (int k = 0; k < sv.size(); ++k) {
        if (sv(k) > rank_tol * smax) ++rank;
    }
    out.cond = rank > 0 ? smax / sv(rank - 1) : 1.0;
    if (out.cond > cond_max) {
        throw IllConditionedSolve("span_map: sample Gram condition " + std::to_string(out.cond) +
                                  " exceeds cond_max; re-prune the sample set");
    }
    RealVector inv = RealVector::Zero(sv.size());
    for (int k = 0; k < rank; ++k) inv(k) = 1.0 / sv(k);
    ComplexMatrix pinv = s.matrixV() * inv.asDiagonal() * s.matrixU().adjoint();
    out.op = targets * pinv * basis.q.adjoint();
    out.fit_defect = 0.0;
    for (int j = 0; j < states.cols(); ++j) {
        out.fit_defect = std::max(out.fit_defect, (out.op * states.col(j) - targets.col(j)).norm());
    }
    return out;
}

void phase_normalize_columns(ComplexMatrix& m, double significance) {
    for (int c = 0; c < m.cols(); ++c) {
        double cap = m.col(c).cwiseAbs().maxCoeff();
        if (cap == 0.0) continue;
        int lead = 0;
        for (int r = 0; r < m.rows(); ++r) {
            if (std::abs(m(r, c)) > significance * cap) {
                lead = r;
                break;
            }
        }
        Complex z = m(lead, c);
        if (std::abs(z) > 0) {
            m.col(c) *= std::conj(z) / std::abs(z);
        }
    }
}

}  // namespace nlqec::numkit
