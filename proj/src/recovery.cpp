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

#include "nlqec/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "nlqec/numkit.hpp"

namespace nlqec::recovery {

namespace {

ComplexMatrix transformed_error(const channels::KrausChannel& channel, const ComplexMatrix& u,
                                int n) {
    ComplexMatrix f = ComplexMatrix::Zero(channel.dim(), channel.dim());
    for (int k = 0; k < channel.num_ops(); ++k) f += channel.ops[k] * u(k, n);
    return f;
}

/// Polar projection of a span map onto the isometries: the least-squares
/// operator restricted to the code span, snapped to U^dagger U = P.
ComplexMatrix isometry_on_span(const ComplexMatrix& states, const ComplexMatrix& targets,
                               const RecoveryOptions& opts, double* fit_defect) {
    numkit::SpanMap raw = numkit::span_map(states, targets, opts.rank_tol, opts.cond_max);
    ComplexMatrix a = raw.op * raw.basis;  // dim x rank
    numkit::SvdResult s = numkit::svd(a);
    const int rank = static_cast<int>(raw.basis.cols());
    ComplexMatrix iso = s.u.leftCols(rank) * s.v.adjoint();
    ComplexMatrix u_q = iso * raw.basis.adjoint();
    if (fit_defect) {
        for (int j = 0; j < states.cols(); ++j) {
            *fit_defect = std::max(*fit_defect, (u_q * states.col(j) - targets.col(j)).norm());
        }
    }
    return u_q;
}

void check_density_input(const ComplexMatrix& rho, const Tolerances& tol) {
    if (rho.rows() != rho.cols()) throw DimensionMismatch("density matrix must be square");
    if (numkit::hermiticity_defect(rho) > tol.herm_tol) {
        throw NonHermitianInput("density matrix is not Hermitian within herm_tol");
    }
}

ComplexMatrix kraus_sum(const std::vector<ComplexMatrix>& ops, const ComplexMatrix& rho) {
    ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (const ComplexMatrix& k : ops) out += k * rho * k.adjoint();
    return (out + out.adjoint()) / 2.0;
}

ComplexMatrix per_error_targets(const criterion::CriterionSolution& sol,
                                const channels::KrausChannel& channel,
                                const alphabets::SampleSet& samples, int n) {
    ComplexMatrix f = transformed_error(channel, sol.u, n);
    ComplexMatrix targets(samples.states.rows(), samples.size());
    for (int j = 0; j < samples.size(); ++j) {
        Complex cn = sol.c(n, j);
        if (std::abs(cn) < 1e-300) {
            throw ZeroCoefficientBlock("build_isometries: zero coefficient inside a block");
        }
        targets.col(j) = f * samples.states.col(j) / cn;
    }
    return targets;
}

void fill_lambda_and_defect(RecoveryChannel& rec, const criterion::CriterionSolution& sol,
                            const channels::KrausChannel& channel,
                            const alphabets::SampleSet& samples) {
    const int n_err = channel.num_ops();
    const int s = samples.size();
    rec.lambda.clear();
    rec.lambda_defect = 0.0;
    rec.lambda_defect_per_sample.assign(s, 0.0);
    for (size_t q = 0; q < rec.blocks.size(); ++q) {
        int rep = rec.blocks[q].front();
        ComplexMatrix lam = ComplexMatrix::Zero(n_err, s);
        for (int n = 0; n < n_err; ++n) {
            for (int i = 0; i < s; ++i) {
                Complex total = 0.0;
                for (int np = 0; np < n_err; ++np) {
                    if (sol.gamma(rep, np) == 0) continue;
                    total += std::conj(sol.u(n, np)) * sol.c(np, i);
                }
                lam(n, i) = total;
            }
        }
        for (int n = 0; n < n_err; ++n) {
            for (int i = 0; i < s; ++i) {
                ComplexVector err_state = channel.ops[n] * samples.states.col(i);
                double scale = err_state.norm();
                if (scale < 1e-14) continue;
                double defect =
                    (rec.recovery_ops[q] * err_state - lam(n, i) * samples.states.col(i)).norm() /
                    scale;
                rec.lambda_defect = std::max(rec.lambda_defect, defect);
                rec.lambda_defect_per_sample[i] = std::max(rec.lambda_defect_per_sample[i], defect);
            }
        }
        rec.lambda.push_back(std::move(lam));
    }
}

/// Probability loss of the recovery on the sampled channel outputs:
/// max_j |tr(sum R^dag R E(rho_j)) / tr(E(rho_j)) - 1|. This is the support
/// that matters; measuring on blindly orthonormalized subspaces would count
/// numerically tilted directions that carry no probability mass. For the
/// pure-state outputs this is a sum of squared matvec norms.
double completeness_defect_on_outputs(const RecoveryChannel& rec,
                                      const channels::KrausChannel& channel,
                                      const alphabets::SampleSet& samples) {
    double defect = 0.0;
    for (int j = 0; j < samples.size(); ++j) {
        double trace_rec = 0.0, trace_err = 0.0;
        for (const ComplexMatrix& e : channel.ops) {
            ComplexVector corrupted = e * samples.states.col(j);
            trace_err += corrupted.squaredNorm();
            for (const ComplexMatrix& r : rec.recovery_ops) {
                trace_rec += (r * corrupted).squaredNorm();
            }
        }
        if (trace_err < 1e-300) continue;
        defect = std::max(defect, std::abs(trace_rec / trace_err - 1.0));
    }
    return defect;
}

void finish_completeness(RecoveryChannel& rec, const channels::KrausChannel& channel,
                         const alphabets::SampleSet& samples, const RecoveryOptions& opts) {
    rec.completeness_defect = completeness_defect_on_outputs(rec, channel, samples);
    if (rec.completeness_defect > opts.block_tol && !rec.includes_r0) {
        rec.recovery_ops.push_back(rec.code_projector);
        rec.includes_r0 = true;
        rec.completeness_defect = completeness_defect_on_outputs(rec, channel, samples);
    }
}

}  // namespace

ComplexMatrix build_code_projector(const alphabets::SampleSet& samples, double rank_tol) {
    numkit::OrthonormalBasis basis = numkit::orthonormalize(samples.states, rank_tol);
    if (basis.rank == 0) throw DegenerateSampleSet("build_code_projector: zero-rank samples");
    return basis.q * basis.q.adjoint();
}

IsometryBuild build_isometries(const criterion::CriterionSolution& sol,
                               const channels::KrausChannel& channel,
                               const alphabets::SampleSet& samples, const RecoveryOptions& opts) {
    if (!opts.approx_mode && sol.residual_rel > opts.accept_residual) {
        throw DomainViolation(
            "build_isometries: solution residual above accept threshold; enable approx mode");
    }
    IsometryBuild out;
    out.blocks = criterion::solution_blocks(sol);
    if (out.blocks.empty()) {
        throw ZeroCoefficientBlock("build_isometries: every error has zero coefficients");
    }
    numkit::OrthonormalBasis basis = numkit::orthonormalize(samples.states, opts.rank_tol);
    for (const auto& block : out.blocks) {
        std::vector<ComplexMatrix> members;
        for (int n : block) {
            ComplexMatrix targets = per_error_targets(sol, channel, samples, n);
            members.push_back(isometry_on_span(samples.states, targets, opts, &out.fit_defect));
        }
        for (size_t a = 0; a + 1 < members.size(); ++a) {
            for (size_t b = a + 1; b < members.size(); ++b) {
                // ||(U_a - U_b) P||_F = ||(U_a - U_b) Q||_F
                out.u_equality_defect =
                    std::max(out.u_equality_defect, ((members[a] - members[b]) * basis.q).norm());
            }
        }
        out.block_isometry.push_back(members.front());  // lowest index is the representative
    }
    return out;
}

RecoveryChannel build_recovery(const criterion::CriterionSolution& sol,
                               const channels::KrausChannel& channel,
                               const alphabets::SampleSet& samples, const RecoveryOptions& opts) {
    RecoveryChannel rec;
    rec.mode = "span";
    numkit::OrthonormalBasis basis = numkit::orthonormalize(samples.states, opts.rank_tol);
    if (basis.rank == 0) throw DegenerateSampleSet("build_recovery: zero-rank samples");
    rec.code_projector = basis.q * basis.q.adjoint();
    IsometryBuild iso = build_isometries(sol, channel, samples, opts);
    rec.blocks = iso.blocks;
    rec.isometries = iso.block_isometry;
    rec.isometry_fit_defect = iso.fit_defect;
    rec.u_equality_defect = iso.u_equality_defect;
    for (const ComplexMatrix& u_q : rec.isometries) {
        // U_q is supported on the code span, so P_q = (U_q Q)(U_q Q)^dag and
        // R_q = U_q^dag P_q = Q (U_q Q)^dag without any dense dim^3 products
        ComplexMatrix image = u_q * basis.q;
        ComplexMatrix p_q = image * image.adjoint();
        p_q = (p_q + p_q.adjoint()) / 2.0;
        rec.recovery_ops.push_back(basis.q * image.adjoint());
        rec.projectors.push_back(std::move(p_q));
    }
    fill_lambda_and_defect(rec, sol, channel, samples);
    finish_completeness(rec, channel, samples, opts);
    return rec;
}

RecoveryChannel build_identity_polar_recovery(const criterion::CriterionSolution& sol,
                                              const channels::KrausChannel& channel,
                                              const alphabets::SampleSet& samples,
                                              const RecoveryOptions& opts) {
    RecoveryChannel rec;
    rec.mode = "identity_polar";
    rec.code_projector = build_code_projector(samples, opts.rank_tol);
    rec.blocks = criterion::solution_blocks(sol);
    if (rec.blocks.size() != 1) {
        throw DomainViolation("identity_polar recovery expects a single error block");
    }
    int rep = rec.blocks[0].front();
    ComplexMatrix f = transformed_error(channel, sol.u, rep);
    ComplexMatrix u = numkit::polar_decompose(f, opts.tol).v_iso;
    const auto dim = channel.dim();
    rec.isometries.push_back(u);
    rec.projectors.push_back(ComplexMatrix::Identity(dim, dim));  // trivial syndrome
    rec.recovery_ops.push_back(u.adjoint());
    fill_lambda_and_defect(rec, sol, channel, samples);
    rec.completeness_defect = 0.0;  // U^dagger U = I exactly
    return rec;
}

RecoveryChannel build_parity_shift_recovery(const criterion::CriterionSolution& sol,
                                            const channels::KrausChannel& channel,
                                            const alphabets::SampleSet& samples,
                                            const hilbert::FockSpace& space,
                                            const RecoveryOptions& opts) {
    RecoveryChannel rec;
    rec.mode = "parity_shift";
    rec.code_projector = build_code_projector(samples, opts.rank_tol);
    rec.blocks = criterion::solution_blocks(sol);
    if (rec.blocks.size() != 2) {
        throw DomainViolation("parity_shift recovery expects exactly two error blocks");
    }
    ComplexMatrix even = hilbert::parity_projector(space, false);
    ComplexMatrix odd = hilbert::parity_projector(space, true);

    std::vector<double> odd_weight(2, 0.0);
    std::vector<ComplexMatrix> unitaries;
    for (size_t q = 0; q < 2; ++q) {
        int rep = rec.blocks[q].front();
        ComplexMatrix f = transformed_error(channel, sol.u, rep);
        // Unitary factor of the full operator polar decomposition; for the
        // loss channel this is the left-shift structure of a = T sqrt(n).
        unitaries.push_back(numkit::polar_decompose(f, opts.tol).v_iso);
        double w_odd = 0.0, w_all = 0.0;
        for (int j = 0; j < samples.size(); ++j) {
            ComplexVector img = f * samples.states.col(j);
            w_odd += (odd * img).squaredNorm();
            w_all += img.squaredNorm();
        }
        odd_weight[q] = w_all > 0 ? w_odd / w_all : 0.0;
    }
    if ((odd_weight[0] > 0.5) == (odd_weight[1] > 0.5)) {
        throw DomainViolation("parity_shift recovery: blocks do not split by parity");
    }
    for (size_t q = 0; q < 2; ++q) {
        ComplexMatrix p_q = odd_weight[q] > 0.5 ? odd : even;
        rec.isometries.push_back(unitaries[q]);
        rec.recovery_ops.push_back(unitaries[q].adjoint() * p_q);
        rec.projectors.push_back(std::move(p_q));
    }
    fill_lambda_and_defect(rec, sol, channel, samples);
    ComplexMatrix sum = ComplexMatrix::Zero(space.dim, space.dim);
    for (const ComplexMatrix& r : rec.recovery_ops) sum += r.adjoint() * r;
    rec.completeness_defect = (sum - ComplexMatrix::Identity(space.dim, space.dim)).norm();
    return rec;
}

ComplexMatrix apply_channel(const channels::KrausChannel& channel, const ComplexMatrix& rho,
                            const Tolerances& tol) {
    if (channel.dim() != rho.rows()) throw DimensionMismatch("apply_channel: dimension mismatch");
    check_density_input(rho, tol);
    return kraus_sum(channel.ops, rho);
}

ComplexMatrix apply_recovery(const RecoveryChannel& rec, const ComplexMatrix& rho,
                             const Tolerances& tol) {
    if (rec.code_projector.rows() != rho.rows()) {
        throw DimensionMismatch("apply_recovery: dimension mismatch");
    }
    check_density_input(rho, tol);
    return kraus_sum(rec.recovery_ops, rho);
}

std::vector<ComplexMatrix> apply_recovery_branches(const RecoveryChannel& rec,
                                                   const ComplexMatrix& rho) {
    std::vector<ComplexMatrix> out;
    out.reserve(rec.recovery_ops.size());
    for (const ComplexMatrix& r : rec.recovery_ops) out.push_back(r * rho * r.adjoint());
    return out;
}

// For a pure input, R(E(|psi><psi|)) = sum_{q,n} (R_q E_n psi)(R_q E_n psi)^dag,
// so fidelities reduce to matrix-vector products; no dense density matrix is
// ever formed.
FidelityResult recovery_fidelity(const ComplexVector& psi, const channels::KrausChannel& channel,
                                 const RecoveryChannel& rec) {
    double trace_error = 0.0, trace_rec = 0.0, overlap = 0.0;
    for (const ComplexMatrix& e : channel.ops) {
        ComplexVector corrupted = e * psi;
        trace_error += corrupted.squaredNorm();
        for (const ComplexMatrix& r : rec.recovery_ops) {
            ComplexVector recovered = r * corrupted;
            trace_rec += recovered.squaredNorm();
            overlap += std::norm(psi.dot(recovered));
        }
    }
    if (trace_error < 1e-300) throw ZeroTrace("recovery_fidelity: channel annihilated the state");
    if (trace_rec < 1e-300) throw ZeroTrace("recovery_fidelity: recovery annihilated the state");
    FidelityResult out;
    out.fidelity = overlap / trace_rec;
    out.probability = trace_rec / trace_error;
    return out;
}

double branch_fidelity(const RecoveryChannel& rec, const channels::KrausChannel& channel,
                       const ComplexVector& psi, int q) {
    if (q < 0 || q >= static_cast<int>(rec.recovery_ops.size())) {
        throw IndexOutOfRange("branch_fidelity: bad block index");
    }
    double trace = 0.0, overlap = 0.0;
    for (const ComplexMatrix& e : channel.ops) {
        ComplexVector recovered = rec.recovery_ops[q] * (e * psi);
        trace += recovered.squaredNorm();
        overlap += std::norm(psi.dot(recovered));
    }
    if (trace < 1e-300) throw ZeroTrace("branch_fidelity: empty syndrome branch");
    return overlap / trace;
}

MixedStateReport mixed_state_recovery_check(const RecoveryChannel& rec,
                                            const channels::KrausChannel& channel,
                                            const std::vector<double>& weights,
                                            const alphabets::SampleSet& samples,
                                            const Tolerances& tol) {
    if (!channel.trace_preserving(tol.tp_tol)) {
        throw DomainViolation("mixed_state_recovery_check: channel must be trace preserving");
    }
    if (static_cast<int>(weights.size()) != samples.size()) {
        throw DimensionMismatch("mixed_state_recovery_check: weights/samples size mismatch");
    }
    double total = 0.0;
    for (double w : weights) {
        if (w < 0) throw DomainViolation("mixed_state_recovery_check: negative weight");
        total += w;
    }
    if (total <= 0) throw DomainViolation("mixed_state_recovery_check: zero weight sum");
    ComplexMatrix rho = ComplexMatrix::Zero(samples.states.rows(), samples.states.rows());
    for (int j = 0; j < samples.size(); ++j) {
        rho += (weights[j] / total) * samples.states.col(j) * samples.states.col(j).adjoint();
    }
    MixedStateReport out;
    out.trace_in = std::real(rho.trace());
    ComplexMatrix recovered = apply_recovery(rec, apply_channel(channel, rho));
    out.trace_out = std::real(recovered.trace());
    out.defect = (recovered - rho).norm();
    for (int j = 0; j < samples.size(); ++j) {
        double c = 0.0;
        for (const ComplexMatrix& lam : rec.lambda) c += lam.col(j).squaredNorm();
        out.c_values.push_back(c);
    }
    return out;
}

}  // namespace nlqec::recovery
