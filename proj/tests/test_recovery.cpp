#include "nlqec/recovery.hpp"

#include "doctest.h"
#include "nlqec/numkit.hpp"
#include "test_support.hpp"

using namespace nlqec;
using namespace nlqec::recovery;
using nlqec::hilbert::FockSpace;

namespace {

alphabets::SampleSet coherent_samples(const FockSpace& space, std::vector<double> res) {
    alphabets::AlphabetFamily fam = alphabets::coherent_family(space);
    alphabets::SamplerOptions opts;
    opts.strategy = alphabets::SampleStrategy::Explicit;
    for (double re : res) opts.explicit_params.push_back({re, 0.0});
    return alphabets::sample_parameters(fam, opts);
}

alphabets::SampleSet dephasing_samples() {
    alphabets::AlphabetFamily fam = alphabets::dephasing_pair_family();
    fam.domain[1].range = alphabets::Discrete{{M_PI / 8, M_PI / 3}};
    fam.domain[2].range = alphabets::Discrete{{0.0, M_PI / 2}};
    alphabets::SamplerOptions opts;
    opts.strategy = alphabets::SampleStrategy::Explicit;
    return alphabets::sample_parameters(fam, opts);
}

alphabets::SampleSet fixed_phase_samples(double phi0) {
    alphabets::AlphabetFamily fam = alphabets::fixed_phase_family(phi0);
    alphabets::SamplerOptions opts;
    opts.strategy = alphabets::SampleStrategy::Explicit;
    opts.explicit_params = {{0.3}, {0.65}, {1.0}, {1.35}};
    return alphabets::sample_parameters(fam, opts);
}

alphabets::SampleSet cat_samples(const FockSpace& space, std::vector<double> res) {
    alphabets::AlphabetFamily fam = alphabets::even_cat_family(1.5, space);
    alphabets::SamplerOptions opts;
    opts.strategy = alphabets::SampleStrategy::Explicit;
    for (double re : res) opts.explicit_params.push_back({re, 0.0});
    return alphabets::sample_parameters(fam, opts);
}

}  // namespace

TEST_CASE("code projector") {
    FockSpace space(60);

    SUBCASE("single sample gives a rank-1 projector") {
        alphabets::AlphabetFamily fam = alphabets::coherent_family(space);
        alphabets::SampleSet one = alphabets::make_sample_set(fam, {{1.3, 0.0}});
        ComplexMatrix p = build_code_projector(one);
        ComplexVector psi = one.states.col(0);
        CHECK((p - psi * psi.adjoint()).norm() < 1e-12);
    }

    SUBCASE("projector algebra and reconstruction on coherent samples") {
        alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0, 2.5, 3.0});
        ComplexMatrix p = build_code_projector(samples);
        CHECK((p * p - p).norm() < 1e-10);
        CHECK(numkit::hermiticity_defect(p) < 1e-12);
        CHECK(std::abs(p.trace().real() - 5.0) < 1e-8);  // oracle: Gram rank 5
        for (int j = 0; j < samples.size(); ++j) {
            CHECK((p * samples.states.col(j) - samples.states.col(j)).norm() < 1e-9);
        }
    }
}

TEST_CASE("Example 1 recovery acts as the identity on the code span") {
    FockSpace space(60);
    alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0, 2.5});
    channels::KrausChannel ch = channels::simplified_loss(space);
    criterion::VTensor v = criterion::build_v_tensor(ch, samples);
    criterion::CriterionSolution sol = criterion::solve_factorization(v);
    RecoveryChannel rec = build_recovery(sol, ch, samples);

    CHECK(rec.blocks.size() == 1);  // Gamma all ones: one error space
    CHECK_FALSE(rec.includes_r0);
    // single block, R = P: identity action on the alphabet rays
    CHECK((rec.recovery_ops[0] - rec.code_projector).norm() < 1e-6);
    CHECK(rec.isometry_fit_defect < 1e-8);
    CHECK(rec.u_equality_defect < 1e-6);

    for (int i = 0; i < samples.size(); ++i) {
        FidelityResult f = recovery_fidelity(samples.states.col(i), ch, rec);
        CHECK(f.fidelity == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("Example 2 recovery: dephasing") {
    SUBCASE("first alphabet: R = P recovers up to a global phase") {
        alphabets::SampleSet samples = dephasing_samples();
        for (double p : {0.1, 0.5, 0.9}) {
            channels::KrausChannel ch = channels::collective_dephasing(p);
            criterion::VTensor v = criterion::build_v_tensor(ch, samples);
            criterion::CriterionSolution sol = criterion::solve_factorization(v);
            RecoveryChannel rec = build_recovery(sol, ch, samples);
            CHECK(rec.blocks.size() == 1);
            for (int i = 0; i < samples.size(); ++i) {
                FidelityResult f = recovery_fidelity(samples.states.col(i), ch, rec);
                CHECK(f.fidelity == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(f.probability == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }

    SUBCASE("second alphabet: R_1 matches Z1Z2 on the code span") {
        alphabets::SampleSet samples = fixed_phase_samples(0.7);
        channels::KrausChannel ch = channels::collective_dephasing(0.3);
        criterion::VTensor v = criterion::build_v_tensor(ch, samples);
        criterion::CriterionSolution sol = criterion::solve_factorization(v);
        RecoveryChannel rec = build_recovery(sol, ch, samples);
        REQUIRE(rec.blocks.size() == 2);
        hilbert::QubitRegister reg(2);
        ComplexMatrix zz = hilbert::pauli_op(reg, hilbert::Pauli::Z, 0) *
                           hilbert::pauli_op(reg, hilbert::Pauli::Z, 1);
        const ComplexMatrix& p1 = rec.projectors[1];
        CHECK(((rec.recovery_ops[1] - zz * p1) * p1).norm() <= 1e-10);
        for (int i = 0; i < samples.size(); ++i) {
            FidelityResult f = recovery_fidelity(samples.states.col(i), ch, rec);
            CHECK(f.fidelity == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("cat code recovery") {
    FockSpace space(80);
    alphabets::SampleSet samples = cat_samples(space, {3.0, 4.0, 5.0});
    channels::KrausChannel ch = channels::simplified_loss(space);
    criterion::VTensor v = criterion::build_v_tensor(ch, samples);
    criterion::CriterionSolution sol = criterion::solve_factorization(v);
    RecoveryOptions opts;
    opts.approx_mode = true;

    SUBCASE("span recovery: isometries split by parity") {
        RecoveryChannel rec = build_recovery(sol, ch, samples, opts);
        REQUIRE(rec.blocks.size() == 2);
        // the odd-block isometry maps even cats to odd cats
        ComplexVector even4 = hilbert::even_cat_state(4.0, space);
        ComplexVector odd4 = hilbert::odd_cat_state(4.0, space);
        ComplexVector mapped = rec.isometries[1] * even4;
        CHECK((mapped - odd4).norm() <= 0.1 / 4.0);
        // parity projectors are orthogonal
        CHECK((rec.projectors[0] * rec.projectors[1]).norm() <= 1e-10);
    }

    SUBCASE("parity-shift recovery reproduces the fidelity law") {
        RecoveryChannel rec = build_parity_shift_recovery(sol, ch, samples, space, opts);
        REQUIRE(rec.blocks.size() == 2);
        CHECK((rec.projectors[0] * rec.projectors[1]).norm() <= 1e-12);
        // the odd-branch isometry is the left shift away from the completion column
        ComplexMatrix t = hilbert::left_shift_op(space);
        ComplexMatrix diff = rec.isometries[1] - t;
        diff.col(0).setZero();  // kernel completion pairs |0> with the top level
        CHECK(diff.norm() < 1e-12);

        for (double a : {3.0, 4.0, 5.0}) {
            ComplexVector psi = hilbert::even_cat_state(a, space);
            double expect = 1.0 - 1.0 / (4.0 * a * a);
            double odd_branch = branch_fidelity(rec, ch, psi, 1);
            CHECK(std::abs(odd_branch - expect) < 5e-3);
            double even_branch = branch_fidelity(rec, ch, psi, 0);
            CHECK(even_branch == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("lambda tables") {
    SUBCASE("Example 2 first alphabet: lambda carries the (-1)^j sign") {
        alphabets::SampleSet samples = dephasing_samples();
        double p = 0.75;
        channels::KrausChannel ch = channels::collective_dephasing(p);
        criterion::VTensor v = criterion::build_v_tensor(ch, samples);
        criterion::CriterionSolution sol = criterion::solve_factorization(v);
        RecoveryChannel rec = build_recovery(sol, ch, samples);
        REQUIRE(rec.lambda.size() == 1);
        for (int i = 0; i < samples.size(); ++i) {
            double sign = samples.params[i][0] == 0.0 ? 1.0 : -1.0;
            CHECK(std::abs(rec.lambda[0](0, i) - Complex(std::sqrt(p), 0)) < 1e-10);
            CHECK(std::abs(rec.lambda[0](1, i) - Complex(sign * std::sqrt(1 - p), 0)) < 1e-10);
            // trace-preserving channel: sum_qn |lambda|^2 = 1
            double total = 0.0;
            for (const ComplexMatrix& lam : rec.lambda) total += lam.col(i).squaredNorm();
            CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        }
        CHECK(rec.lambda_defect < 1e-9);
    }

    SUBCASE("identity channel: lambda = 1") {
        FockSpace space(30);
        alphabets::SampleSet samples = coherent_samples(space, {0.5, 1.0, 1.5});
        channels::KrausChannel id = channels::custom_channel(
            {ComplexMatrix::Identity(space.dim, space.dim)}, "identity");
        criterion::VTensor v = criterion::build_v_tensor(id, samples);
        criterion::CriterionSolution sol = criterion::solve_factorization(v);
        RecoveryChannel rec = build_recovery(sol, id, samples);
        for (int i = 0; i < samples.size(); ++i) {
            CHECK(std::abs(rec.lambda[0](0, i) - Complex(1, 0)) < 1e-8);
        }
    }
}

TEST_CASE("channel application") {
    SUBCASE("identity channel leaves rho unchanged") {
        channels::KrausChannel id =
            channels::custom_channel({ComplexMatrix::Identity(4, 4)}, "identity");
        ComplexMatrix rho = testing::random_density(4, 5);
        CHECK((apply_channel(id, rho) - rho).norm() < 1e-14);
    }

    SUBCASE("collective dephasing preserves the trace exactly") {
        channels::KrausChannel ch = channels::collective_dephasing(0.5);
        ComplexVector plus(4);
        plus << 0.5, 0.5, 0.5, 0.5;
        ComplexMatrix rho = plus * plus.adjoint();
        CHECK(std::abs(apply_channel(ch, rho).trace().real() - 1.0) < 1e-14);
    }

    SUBCASE("simplified loss scales a coherent ray by 1 + |alpha|^2") {
        FockSpace space(60);
        channels::KrausChannel ch = channels::simplified_loss(space);
        ComplexVector psi = hilbert::coherent_state(1.5, space);
        ComplexMatrix out = apply_channel(ch, ComplexMatrix(psi * psi.adjoint()));
        CHECK(out.trace().real() == doctest::Approx(1.0 + 2.25).epsilon(1e-8));
    }

    SUBCASE("non-Hermitian input is rejected") {
        channels::KrausChannel id =
            channels::custom_channel({ComplexMatrix::Identity(4, 4)}, "identity");
        ComplexMatrix bad = testing::random_matrix(4, 4, 9);
        CHECK_THROWS_AS(apply_channel(id, bad), NonHermitianInput);
    }
}

TEST_CASE("recovery action bound on every sample and error") {
    alphabets::SampleSet samples = fixed_phase_samples(0.4);
    channels::KrausChannel ch = channels::collective_dephasing(0.35);
    criterion::VTensor v = criterion::build_v_tensor(ch, samples);
    criterion::CriterionSolution sol = criterion::solve_factorization(v);
    RecoveryChannel rec = build_recovery(sol, ch, samples);
    double bound = std::max(10.0 * sol.residual_rel, 1e-10);
    for (size_t q = 0; q < rec.recovery_ops.size(); ++q) {
        for (int n = 0; n < ch.num_ops(); ++n) {
            for (int i = 0; i < samples.size(); ++i) {
                ComplexVector err = ch.ops[n] * samples.states.col(i);
                ComplexVector lhs = rec.recovery_ops[q] * err;
                ComplexVector rhs = rec.lambda[q](n, i) * samples.states.col(i);
                CHECK((lhs - rhs).norm() <= bound * std::max(err.norm(), 1e-6));
            }
        }
    }
}

TEST_CASE("superposition of alphabet states is deformed, components are not") {
    FockSpace space(60);
    alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0, 2.5});
    channels::KrausChannel ch = channels::simplified_loss(space);
    criterion::VTensor v = criterion::build_v_tensor(ch, samples);
    criterion::CriterionSolution sol = criterion::solve_factorization(v);
    RecoveryChannel rec = build_recovery(sol, ch, samples);

    ComplexVector a1 = hilbert::coherent_state(1.0, space);
    ComplexVector a2 = hilbert::coherent_state(2.5, space);
    CHECK(recovery_fidelity(a1, ch, rec).fidelity >= 1.0 - 1e-8);
    CHECK(recovery_fidelity(a2, ch, rec).fidelity >= 1.0 - 1e-8);

    ComplexVector super = a1 + a2;
    super /= super.norm();
    double f = recovery_fidelity(super, ch, rec).fidelity;
    CHECK(f < 0.99);  // deformation margin above 0.01
}

TEST_CASE("mixed state recovery for a trace-preserving channel") {
    alphabets::SampleSet samples = dephasing_samples();
    channels::KrausChannel ch = channels::collective_dephasing(0.6);
    criterion::VTensor v = criterion::build_v_tensor(ch, samples);
    criterion::CriterionSolution sol = criterion::solve_factorization(v);
    RecoveryChannel rec = build_recovery(sol, ch, samples);

    std::vector<double> weights(samples.size(), 0.0);
    weights[0] = weights[1] = weights[2] = weights[3] = 0.25;
    MixedStateReport rep = mixed_state_recovery_check(rec, ch, weights, samples);
    CHECK(rep.defect <= 1e-10);
    for (int j = 0; j < 4; ++j) {
        CHECK(rep.c_values[j] == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(std::abs(rep.trace_out - rep.trace_in) <= 1e-10);

    SUBCASE("single component reduces to the pure-state fidelity") {
        std::vector<double> one(samples.size(), 0.0);
        one[2] = 1.0;
        MixedStateReport single = mixed_state_recovery_check(rec, ch, one, samples);
        CHECK(single.defect <= 1e-10);
    }

    SUBCASE("non trace-preserving channels are rejected") {
        FockSpace space(20);
        channels::KrausChannel lossy = channels::simplified_loss(space);
        CHECK_THROWS_AS(
            mixed_state_recovery_check(rec, lossy, weights, samples), DomainViolation);
    }
}

TEST_CASE("projector algebra across blocks") {
    alphabets::SampleSet samples = fixed_phase_samples(0.7);
    channels::KrausChannel ch = channels::collective_dephasing(0.2);
    criterion::VTensor v = criterion::build_v_tensor(ch, samples);
    criterion::CriterionSolution sol = criterion::solve_factorization(v);
    RecoveryChannel rec = build_recovery(sol, ch, samples);
    REQUIRE(rec.blocks.size() == 2);
    for (size_t q = 0; q < 2; ++q) {
        const ComplexMatrix& p = rec.projectors[q];
        CHECK((p * p - p).norm() < 1e-10);
        CHECK(numkit::hermiticity_defect(p) < 1e-10);
    }
    CHECK((rec.projectors[0] * rec.projectors[1]).norm() < 1e-8);
    ComplexMatrix sum = rec.projectors[0] + rec.projectors[1];
    numkit::EigResult eig = numkit::eig_hermitian(sum);
    CHECK(eig.eigenvalues.maxCoeff() <= 1.0 + 1e-8);
    CHECK(rec.completeness_defect <= 1e-8);
}

TEST_CASE("Appendix F: amplitude damping on coherent states") {
    FockSpace space(60);
    double gamma = 0.999;
    Complex alpha(2.0, 0.0);
    channels::KrausChannel ch = channels::amplitude_damping(gamma, space, 6);

    // || |sqrt(gamma) alpha> - |alpha> || ~ eps |alpha| / 2
    ComplexVector damped = hilbert::coherent_state(std::sqrt(gamma) * alpha, space);
    ComplexVector orig = hilbert::coherent_state(alpha, space);
    double dist = (damped - orig).norm();
    double predicted = (1.0 - gamma) * std::abs(alpha) / 2.0;
    CHECK(dist <= 1.1 * predicted);
    CHECK(dist >= predicted / 1.1);

    alphabets::SampleSet samples = coherent_samples(space, {1.6, 1.8, 2.0, 2.2, 2.4});
    criterion::VTensor v = criterion::build_v_tensor(ch, samples);
    criterion::SolveOptions so;
    criterion::CriterionSolution sol = criterion::solve_factorization(v, so);
    RecoveryOptions ro;
    ro.approx_mode = true;
    RecoveryChannel rec = build_recovery(sol, ch, samples, ro);
    FidelityResult f = recovery_fidelity(orig, ch, rec);
    CHECK(f.fidelity >= 0.999);
}

TEST_CASE("ill-conditioned sample spans are rejected with a re-prune hint") {
    FockSpace space(60);
    // closely spaced coherent states make the Gram spectrum collapse
    alphabets::SampleSet samples =
        coherent_samples(space, {2.0, 2.05, 2.1, 2.15, 2.2, 2.25});
    channels::KrausChannel ch = channels::simplified_loss(space);
    criterion::VTensor v = criterion::build_v_tensor(ch, samples);
    criterion::CriterionSolution sol = criterion::solve_factorization(v);
    RecoveryOptions opts;
    opts.rank_tol = 1e-14;
    opts.cond_max = 1e3;
    CHECK_THROWS_AS(build_isometries(sol, ch, samples, opts), IllConditionedSolve);
}

TEST_CASE("solver needs at least two samples") {
    FockSpace space(40);
    alphabets::AlphabetFamily fam = alphabets::coherent_family(space);
    alphabets::SampleSet one = alphabets::make_sample_set(fam, {{1.0, 0.0}});
    channels::KrausChannel ch = channels::simplified_loss(space);
    criterion::VTensor v = criterion::build_v_tensor(ch, one);
    CHECK_THROWS_AS(criterion::solve_factorization(v), DegenerateSampleSet);
}

TEST_CASE("empty domains are rejected") {
    FockSpace space(40);
    alphabets::AlphabetFamily fam = alphabets::coherent_family(space);
    fam.domain.clear();
    alphabets::SamplerOptions so;
    CHECK_THROWS_AS(alphabets::sample_parameters(fam, so), DomainEmpty);
}

TEST_CASE("FUJ representation: F_n P = U_n J_n P on the sampled span") {
    FockSpace space(60);
    alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0, 2.5});
    channels::KrausChannel ch = channels::simplified_loss(space);
    criterion::VTensor v = criterion::build_v_tensor(ch, samples);
    criterion::CriterionSolution sol = criterion::solve_factorization(v);
    RecoveryChannel rec = build_recovery(sol, ch, samples);
    // single block: U from the block; F_n = sum_k E_k u(k, n)
    for (int n = 0; n < 2; ++n) {
        ComplexMatrix f = ComplexMatrix::Zero(space.dim, space.dim);
        for (int k = 0; k < 2; ++k) f += ch.ops[k] * sol.u(k, n);
        ComplexMatrix jn = criterion::jn_operator(sol, samples, n);
        CHECK(((f - rec.isometries[0] * jn) * rec.code_projector).norm() < 1e-5);
    }
}
