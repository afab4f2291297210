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

#ifndef NLQEC_CRITERION_HPP
#define NLQEC_CRITERION_HPP

#include <vector>

#include "nlqec/alphabets.hpp"
#include "nlqec/channels.hpp"
#include "nlqec/types.hpp"

namespace nlqec::criterion {

/// V[n][m](i,j) = <psi_i| E_n^dagger E_m |psi_j>, stored as one
/// num_errors x num_errors slice per sample pair (i, j).
struct VTensor {
    int num_errors = 0;
    int num_samples = 0;
    std::vector<ComplexMatrix> slices;  // index i * num_samples + j
    ComplexMatrix gram;
    std::string channel_label;

    const ComplexMatrix& slice(int i, int j) const { return slices[i * num_samples + j]; }
    ComplexMatrix& slice(int i, int j) { return slices[i * num_samples + j]; }
    double frobenius() const;
};

struct SolveOptions {
    int max_iters = 200;
    double refine_tol = 1e-12;
    double spec_gap_tol = 1e-6;
    double gamma_threshold = 0.5;
    double floor_eps = 1e-14;
    double overlap_floor_rel = 1e-10;
    double c_zero_rel = 1e-8;
    int flip_budget = 2;
    int jd_max_slices = 64;
    uint64_t seed = 0x243f6a8885a308d3ull;
    Tolerances tol{};
};

struct GammaAlternative {
    int n = 0;
    int m = 0;
    int flipped_to = 0;
    double residual_rel = 0.0;
};

struct CriterionSolution {
    ComplexMatrix u;            // unitary over the error index
    ComplexMatrix c;            // num_errors x num_samples coefficient table
    IntMatrix gamma;            // 0/1 symmetric, unit diagonal
    std::vector<bool> zero_mask;
    double residual_rel = 0.0;
    std::vector<ComplexMatrix> epsilon;  // per (i,j) residual slices
    bool converged = true;
    int iterations = 0;
    bool degenerate_spectrum = false;
    bool dichotomy_ok = true;
    std::vector<int> dichotomy_violations;
    int gamma_repairs = 0;
    std::vector<GammaAlternative> gamma_alternatives;
};

struct SpectralInit {
    ComplexMatrix u0;
    bool degenerate = false;
    double min_gap = 0.0;
};

struct NecessaryConditionReport {
    double max_violation = 0.0;   // defect of w_nm(a,b) = conj(w_mn(b,a))
    double psd_min_eig = 0.0;     // smallest eigenvalue of the stacked moment matrix
    double psd_max_eig = 0.0;
    bool psd_ok = true;
    int pairs_skipped = 0;
};

struct ApproximateMetrics {
    double eps_max = 0.0;
    double eps_frobenius = 0.0;
    double ratio_max = 0.0;                  // |eps_nm| / |c_n c_m| where defined
    double near_orthogonality_defect = 0.0;  // ratio over Gamma = 0 entries
};

struct KlReductionReport {
    bool kl_holds = false;
    ComplexMatrix h;
    double kl_defect = 0.0;
    double nlqec_residual = 0.0;
    double c_spread = 0.0;  // max deviation of c_n(alpha) from its sample mean
    IntMatrix gamma;
    bool nlqec_ok = false;
};

VTensor build_v_tensor(const channels::KrausChannel& channel, const alphabets::SampleSet& samples);

/// Eigenbasis of the sample-averaged normalized diagonal slice, columns
/// ordered by descending eigenvalue with a deterministic phase/lexicographic
/// tie-break. degenerate flags eigenvalue gaps below spec_gap_tol.
SpectralInit spectral_init(const VTensor& v, const SolveOptions& opts = {});

/// Closed-form coefficient extraction at a given u: magnitudes from the
/// diagonal slices, phases propagated from the reference sample along a
/// maximum-overlap tree.
ComplexMatrix extract_coefficients(const VTensor& v, const ComplexMatrix& u,
                                   const SolveOptions& opts = {});

/// Median-statistic Gamma inference. Throws InconsistentGamma when the
/// transitive-closure repair changes more than flip_budget entries.
IntMatrix infer_gamma(const VTensor& v, const ComplexMatrix& u, const SolveOptions& opts = {});

double residual_rel(const VTensor& v, const ComplexMatrix& u, const ComplexMatrix& c,
                    const IntMatrix& gamma);

CriterionSolution solve_factorization(const VTensor& v, const SolveOptions& opts = {});

/// Gamma equivalence classes over the unmasked error indices, each sorted,
/// ordered by lowest member.
std::vector<std::vector<int>> solution_blocks(const CriterionSolution& sol);

NecessaryConditionReport necessary_condition_check(const VTensor& v,
                                                   const SolveOptions& opts = {});

ApproximateMetrics approximate_metrics(const VTensor& v, const CriterionSolution& sol,
                                       const SolveOptions& opts = {});

KlReductionReport kl_reduction_check(const std::vector<ComplexVector>& codewords,
                                     const channels::KrausChannel& channel,
                                     const SolveOptions& opts = {});

/// J_n materialized on span{psi_j}: J_n psi_j = c_n(alpha_j) psi_j.
ComplexMatrix jn_operator(const CriterionSolution& sol, const alphabets::SampleSet& samples,
                          int n, double rank_tol = 1e-8);

// Example-3 diagnostics (squeezed coherent states, fixed xi).

/// Omega(a, b) = b cosh r - conj(a) e^{i theta} sinh r.
Complex squeezed_omega(Complex alpha, Complex beta, Complex xi);

struct OrthogonalRatio {
    double formula = 0.0;  // sinh^2 r / (|Omega(a,a)|^2 + sinh^2 r)
    double direct = 0.0;   // from the explicit orthogonal component of a|a>_xi
};
OrthogonalRatio squeezed_orthogonal_ratio(const hilbert::FockSpace& space, Complex xi,
                                          Complex alpha);

/// |Omega(a,b)<a|b> - Omega(b,b)<a|b>| against (conj(b)-conj(a)) e^{i theta} sinh r <a|b>.
struct EpsilonBound {
    Complex direct;
    Complex formula;
};
EpsilonBound squeezed_epsilon_term(Complex alpha, Complex beta, Complex xi);

/// Defect of <a_e|b_e> - <a_o|b_o> = <-a|b> + <a|-b> with 1/sqrt(2) cats.
double cat_overlap_identity_defect(const hilbert::FockSpace& space, Complex alpha, Complex beta);

}  // namespace nlqec::criterion

#endif  // NLQEC_CRITERION_HPP
