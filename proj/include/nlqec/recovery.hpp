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

#ifndef NLQEC_RECOVERY_HPP
#define NLQEC_RECOVERY_HPP

#include <string>
#include <vector>

#include "nlqec/criterion.hpp"

namespace nlqec::recovery {

struct RecoveryOptions {
    double rank_tol = 1e-8;
    double cond_max = 1e8;
    double block_tol = 1e-8;
    double accept_residual = 1e-8;
    bool approx_mode = false;  // allow building above accept_residual
    Tolerances tol{};
};

/// Code projector P, per-block isometries U_q, error projectors P_q and
/// recovery operators R_q = U_q^dagger P_q, with the lambda table
/// lambda_qn(alpha_i) and its measured defects.
struct RecoveryChannel {
    ComplexMatrix code_projector;
    std::vector<std::vector<int>> blocks;     // Gamma equivalence classes
    std::vector<ComplexMatrix> isometries;    // per block, support on the code span
    std::vector<ComplexMatrix> projectors;    // P_q
    std::vector<ComplexMatrix> recovery_ops;  // R_q (R_0 = P appended last when used)
    std::vector<ComplexMatrix> lambda;        // per block: num_errors x num_samples
    bool includes_r0 = false;
    double completeness_defect = 0.0;  // ||sum R^dag R - I|| on the relevant support
    double u_equality_defect = 0.0;    // max ||(U_n - U_m) P|| over Gamma-equal pairs
    double isometry_fit_defect = 0.0;  // max per-sample least-squares defect
    double lambda_defect = 0.0;        // max ||R_q E_n psi - lambda psi|| / ||E_n psi||
    std::vector<double> lambda_defect_per_sample;
    std::string mode = "span";
};

struct IsometryBuild {
    std::vector<std::vector<int>> blocks;
    std::vector<ComplexMatrix> block_isometry;
    double fit_defect = 0.0;
    double u_equality_defect = 0.0;
};

struct FidelityResult {
    double fidelity = 0.0;
    double probability = 0.0;
};

struct MixedStateReport {
    double defect = 0.0;               // || R(E(rho)) - rho ||_F
    std::vector<double> c_values;      // sum_qn |lambda_qn(alpha_j)|^2 per sample
    double trace_in = 0.0;
    double trace_out = 0.0;
};

ComplexMatrix build_code_projector(const alphabets::SampleSet& samples, double rank_tol = 1e-8);

/// Least-squares isometries on the sampled span: U_q psi_j = F_n psi_j / c_n,
/// polar-projected to an exact isometry on the code span. Every Gamma-equal
/// index is solved and compared, not assumed equal.
IsometryBuild build_isometries(const criterion::CriterionSolution& sol,
                               const channels::KrausChannel& channel,
                               const alphabets::SampleSet& samples,
                               const RecoveryOptions& opts = {});

RecoveryChannel build_recovery(const criterion::CriterionSolution& sol,
                               const channels::KrausChannel& channel,
                               const alphabets::SampleSet& samples,
                               const RecoveryOptions& opts = {});

/// Global unitary recovery with a trivial syndrome: R = V^dagger where V is
/// the unitary polar factor of the single block's transformed error (for
/// amplitude damping this is R = I). Trace preserving by construction.
RecoveryChannel build_identity_polar_recovery(const criterion::CriterionSolution& sol,
                                              const channels::KrausChannel& channel,
                                              const alphabets::SampleSet& samples,
                                              const RecoveryOptions& opts = {});

/// Cat-code style recovery: syndrome projectors are the full even/odd parity
/// subspaces and each block isometry is the unitary polar factor of the
/// transformed error operator itself (for the loss channel this recovers the
/// left-shift structure a = T sqrt(n)). Requires exactly two blocks.
RecoveryChannel build_parity_shift_recovery(const criterion::CriterionSolution& sol,
                                            const channels::KrausChannel& channel,
                                            const alphabets::SampleSet& samples,
                                            const hilbert::FockSpace& space,
                                            const RecoveryOptions& opts = {});

ComplexMatrix apply_channel(const channels::KrausChannel& channel, const ComplexMatrix& rho,
                            const Tolerances& tol = {});

ComplexMatrix apply_recovery(const RecoveryChannel& rec, const ComplexMatrix& rho,
                             const Tolerances& tol = {});

/// Unnormalized post-measurement branches R_q rho R_q^dagger.
std::vector<ComplexMatrix> apply_recovery_branches(const RecoveryChannel& rec,
                                                   const ComplexMatrix& rho);

/// fidelity = <psi| R(E(|psi><psi|)) |psi> / tr(...); probability =
/// tr(R(E(rho))) / tr(E(rho)).
FidelityResult recovery_fidelity(const ComplexVector& psi, const channels::KrausChannel& channel,
                                 const RecoveryChannel& rec);

/// Conditional fidelity of syndrome branch q.
double branch_fidelity(const RecoveryChannel& rec, const channels::KrausChannel& channel,
                       const ComplexVector& psi, int q);

MixedStateReport mixed_state_recovery_check(const RecoveryChannel& rec,
                                            const channels::KrausChannel& channel,
                                            const std::vector<double>& weights,
                                            const alphabets::SampleSet& samples,
                                            const Tolerances& tol = {});

}  // namespace nlqec::recovery

#endif  // NLQEC_RECOVERY_HPP
