#include "nlqec/criterion.hpp"

#include "doctest.h"
#include "nlqec/numkit.hpp"
#include "test_support.hpp"

using namespace nlqec;
using namespace nlqec::criterion;
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

void check_solution_invariants(const CriterionSolution& sol) {
    const auto n = sol.u.rows();
    CHECK((sol.u.adjoint() * sol.u - ComplexMatrix::Identity(n, n)).norm() < 1e-10);
    CHECK((sol.gamma - sol.gamma.transpose()).cwiseAbs().maxCoeff() == 0);
    for (int k = 0; k < n; ++k) {
        CHECK(sol.gamma(k, k) == 1);
        for (int m = 0; m < n; ++m) {
            bool zero_or_one = sol.gamma(k, m) == 0 || sol.gamma(k, m) == 1;
            CHECK(zero_or_one);
        }
    }
}

}  // namespace

TEST_CASE("V tensor for coherent states under simplified loss") {
    FockSpace space(60);
    alphabets::SampleSet samples = coherent_samples(space, {1.0, 2.0});
    VTensor v = build_v_tensor(channels::simplified_loss(space), samples);
    REQUIRE(v.num_errors == 2);
    REQUIRE(v.num_samples == 2);
    // V(alpha, beta) = [[1, beta], [alpha*, alpha* beta]] <alpha|beta> with
    // <1|2> = e^{-1/2} = 0.6065306597...
    const ComplexMatrix& s01 = v.slice(0, 1);
    CHECK(std::abs(s01(0, 0) - Complex(0.6065306597126334, 0)) < 1e-10);
    CHECK(std::abs(s01(0, 1) - Complex(1.2130613194252668, 0)) < 1e-10);
    CHECK(std::abs(s01(1, 0) - Complex(0.6065306597126334, 0)) < 1e-10);
    CHECK(std::abs(s01(1, 1) - Complex(1.2130613194252668, 0)) < 1e-10);

    // Hermitian symmetry slice(i,j) = slice(j,i)^dagger and PSD diagonal
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK((v.slice(i, j) - v.slice(j, i).adjoint()).norm() < 1e-12);
        }
        numkit::EigResult e = numkit::eig_hermitian(v.slice(i, i));
        CHECK(e.eigenvalues.minCoeff() > -1e-10);
    }
}

TEST_CASE("V tensor for the dephasing pair at equal parameters") {
    alphabets::AlphabetFamily fam = alphabets::dephasing_pair_family();
    alphabets::SamplerOptions so;
    so.strategy = alphabets::SampleStrategy::Explicit;
    so.explicit_params = {{0.0, M_PI / 8, 0.0}, {0.0, M_PI / 3, 0.7}};
    alphabets::SampleSet samples = alphabets::sample_parameters(fam, so);
    VTensor v = build_v_tensor(channels::collective_dephasing(0.75), samples);
    // j = j' = 0 diagonal slice: [[p, sqrt(p(1-p))], [sqrt(p(1-p)), 1-p]]
    const ComplexMatrix& s = v.slice(0, 0);
    CHECK(std::abs(s(0, 0) - Complex(0.75, 0)) < 1e-12);
    CHECK(std::abs(s(0, 1) - Complex(0.4330127018922193, 0)) < 1e-12);
    CHECK(std::abs(s(1, 0) - Complex(0.4330127018922193, 0)) < 1e-12);
    CHECK(std::abs(s(1, 1) - Complex(0.25, 0)) < 1e-12);
}

TEST_CASE("V tensor single sample, identity channel") {
    FockSpace space(40);
    alphabets::AlphabetFamily fam = alphabets::coherent_family(space);
    alphabets::SampleSet samples = alphabets::make_sample_set(fam, {{1.0, 0.0}});
    channels::KrausChannel id =
        channels::custom_channel({ComplexMatrix::Identity(space.dim, space.dim)}, "identity");
    VTensor v = build_v_tensor(id, samples);
    CHECK(v.num_errors == 1);
    CHECK(std::abs(v.slice(0, 0)(0, 0) - Complex(1, 0)) < 1e-12);
}

TEST_CASE("spectral init diagonalizes the KL matrix exactly") {
    // synthetic KL-compliant tensor: slice(i,j) = h * gram(i,j)
    ComplexMatrix h = testing::random_hermitian(3, 2026);
    ComplexMatrix states = testing::random_matrix(10, 4, 2027);
    for (int j = 0; j < 4; ++j) states.col(j).normalize();
    VTensor v;
    v.num_errors = 3;
    v.num_samples = 4;
    v.gram = states.adjoint() * states;
    v.slices.resize(16);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) v.slice(i, j) = h * v.gram(i, j);
    }
    SpectralInit init = spectral_init(v);
    CHECK_FALSE(init.degenerate);
    ComplexMatrix d = init.u0.adjoint() * h * init.u0;
    double offdiag = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            if (a != b) offdiag = std::max(offdiag, std::abs(d(a, b)));
        }
    }
    CHECK(offdiag < 1e-10);
    // descending eigenvalue order
    CHECK(d(0, 0).real() >= d(1, 1).real());
    CHECK(d(1, 1).real() >= d(2, 2).real());
}

TEST_CASE("spectral init on collective dephasing") {
    alphabets::SampleSet samples = dephasing_samples();

    SUBCASE("p away from 1/2: off-diagonals cancel over j and u0 = I") {
        VTensor v = build_v_tensor(channels::collective_dephasing(0.75), samples);
        SpectralInit init = spectral_init(v);
        CHECK_FALSE(init.degenerate);
        // u0 equals the identity up to column phases
        CHECK(std::abs(std::abs(init.u0(0, 0)) - 1.0) < 1e-10);
        CHECK(std::abs(std::abs(init.u0(1, 1)) - 1.0) < 1e-10);
    }

    SUBCASE("p = 1/2 flags a degenerate spectrum") {
        VTensor v = build_v_tensor(channels::collective_dephasing(0.5), samples);
        CHECK(spectral_init(v).degenerate);
    }
}

TEST_CASE("Example 1: coherent alphabet under {I, a}") {
    FockSpace space(60);
    alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0, 2.5});
    VTensor v = build_v_tensor(channels::simplified_loss(space), samples);
    CriterionSolution sol = solve_factorization(v);
    check_solution_invariants(sol);
    CHECK(sol.residual_rel <= 1e-9);
    CHECK(sol.dichotomy_ok);
    // u = I up to gauge; c0 = 1, c1 = alpha; Gamma all ones
    CHECK((sol.u - ComplexMatrix::Identity(2, 2)).norm() < 1e-6);
    for (int i = 0; i < samples.size(); ++i) {
        CHECK(std::abs(sol.c(0, i) - Complex(1, 0)) < 1e-6);
        CHECK(std::abs(sol.c(1, i) - Complex(samples.params[i][0], 0)) < 1e-6);
    }
    CHECK(sol.gamma.minCoeff() == 1);
}

TEST_CASE("Example 2 first alphabet: decoherence-free pairs") {
    alphabets::SampleSet samples = dephasing_samples();
    for (double p : {0.1, 0.5, 0.75, 0.9}) {
        VTensor v = build_v_tensor(channels::collective_dephasing(p), samples);
        CriterionSolution sol = solve_factorization(v);
        check_solution_invariants(sol);
        CHECK(sol.residual_rel <= 1e-12);
        CHECK(sol.gamma.minCoeff() == 1);  // single error space
        for (int i = 0; i < samples.size(); ++i) {
            double sign = samples.params[i][0] == 0.0 ? 1.0 : -1.0;
            CHECK(std::abs(sol.c(0, i) - Complex(std::sqrt(p), 0)) < 1e-10);
            CHECK(std::abs(sol.c(1, i) - Complex(sign * std::sqrt(1.0 - p), 0)) < 1e-10);
        }
    }
}

TEST_CASE("Example 2 second alphabet: fixed relative phase") {
    alphabets::SampleSet samples = fixed_phase_samples(0.7);
    for (double p : {0.1, 0.5, 0.9}) {
        VTensor v = build_v_tensor(channels::collective_dephasing(p), samples);
        CriterionSolution sol = solve_factorization(v);
        check_solution_invariants(sol);
        CHECK(sol.residual_rel <= 1e-12);
        CHECK(sol.gamma(0, 1) == 0);  // two orthogonal subspaces
        for (int i = 0; i < samples.size(); ++i) {
            CHECK(std::abs(sol.c(0, i) - Complex(std::sqrt(p), 0)) < 1e-10);
            CHECK(std::abs(sol.c(1, i) - Complex(std::sqrt(1.0 - p), 0)) < 1e-10);
        }
    }
}

TEST_CASE("Example 3: squeezed coherent states, large alpha") {
    double r = 0.5;
    FockSpace space(320);
    alphabets::AlphabetFamily fam = alphabets::squeezed_coherent_family(Complex(r, 0), space);
    alphabets::SamplerOptions so;
    so.strategy = alphabets::SampleStrategy::Explicit;
    for (double a : {8.0, 9.0, 10.0, 11.0, 12.0}) so.explicit_params.push_back({a, 0.0});
    alphabets::SampleSet samples = alphabets::sample_parameters(fam, so);
    VTensor v = build_v_tensor(channels::simplified_loss(space), samples);
    CriterionSolution sol = solve_factorization(v);
    check_solution_invariants(sol);
    CHECK(sol.residual_rel < 5e-2);
    CHECK(sol.gamma.minCoeff() == 1);
    // c1(alpha) tracks Omega(alpha, alpha) = alpha e^{-r} for real alpha
    for (int i = 0; i < samples.size(); ++i) {
        Complex omega = squeezed_omega(samples.params[i][0], samples.params[i][0], Complex(r, 0));
        CHECK(std::abs(sol.c(1, i) - omega) / std::abs(omega) < 1e-2);
    }
}

TEST_CASE("zero operators get masked") {
    FockSpace space(30);
    alphabets::SampleSet samples = coherent_samples(space, {0.5, 1.0, 1.5});
    channels::KrausChannel ch = channels::custom_channel(
        {ComplexMatrix::Identity(space.dim, space.dim), ComplexMatrix::Zero(space.dim, space.dim)},
        "with_zero");
    VTensor v = build_v_tensor(ch, samples);
    CriterionSolution sol = solve_factorization(v);
    CHECK_FALSE(sol.zero_mask[0]);
    CHECK(sol.zero_mask[1]);
    CHECK(sol.residual_rel < 1e-12);
    CHECK(sol.gamma(0, 0) == 1);
    CHECK(sol.gamma(1, 1) == 1);
}

TEST_CASE("coefficient dichotomy violations are reported") {
    FockSpace space(60);
    alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0, 2.5});
    // E_1 = a - 2 I annihilates the alpha = 2 ray only: c_1 mixes zero and
    // order-one magnitudes, which the criterion forbids
    ComplexMatrix e1 = hilbert::annihilation_op(space) - 2.0 * ComplexMatrix::Identity(61, 61);
    channels::KrausChannel ch =
        channels::custom_channel({ComplexMatrix::Identity(61, 61), e1}, "shifted_loss");
    VTensor v = build_v_tensor(ch, samples);
    CriterionSolution sol = solve_factorization(v);
    CHECK(sol.residual_rel < 1e-8);
    CHECK_FALSE(sol.dichotomy_ok);
    REQUIRE(sol.dichotomy_violations.size() == 1);
    CHECK(sol.dichotomy_violations[0] == 1);
}

TEST_CASE("gauge covariance of the residual") {
    FockSpace space(60);
    alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0, 2.5});
    VTensor v = build_v_tensor(channels::simplified_loss(space), samples);
    CriterionSolution sol = solve_factorization(v);
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> dist(0.0, 2.0 * M_PI);
    for (int rep = 0; rep < 4; ++rep) {
        ComplexMatrix u = sol.u;
        ComplexMatrix c = sol.c;
        for (int n = 0; n < 2; ++n) {
            Complex phase = std::exp(Complex(0, dist(rng)));
            u.col(n) *= phase;
            c.row(n) *= phase;
        }
        double r = residual_rel(v, u, c, sol.gamma);
        CHECK(std::abs(r - sol.residual_rel) < 1e-12);
    }
}

TEST_CASE("residual is invariant under sample reordering and per-state phases") {
    alphabets::SampleSet samples = dephasing_samples();
    VTensor v = build_v_tensor(channels::collective_dephasing(0.3), samples);
    CriterionSolution sol = solve_factorization(v);
    const int s = v.num_samples;

    SUBCASE("reordering") {
        std::vector<int> perm(s);
        std::iota(perm.begin(), perm.end(), 0);
        std::reverse(perm.begin(), perm.end());
        VTensor w = v;
        ComplexMatrix c2 = sol.c;
        for (int i = 0; i < s; ++i) {
            for (int j = 0; j < s; ++j) {
                w.slice(i, j) = v.slice(perm[i], perm[j]);
                w.gram(i, j) = v.gram(perm[i], perm[j]);
            }
            c2.col(i) = sol.c.col(perm[i]);
        }
        CHECK(std::abs(residual_rel(w, sol.u, c2, sol.gamma) - sol.residual_rel) < 1e-12);
    }

    SUBCASE("global phase on one state") {
        // the Gram factor absorbs the state phase, so the coefficient table
        // and the residual are both unchanged
        Complex phase = std::exp(Complex(0, 1.23));
        VTensor w = v;
        int target = 2;
        for (int j = 0; j < s; ++j) {
            w.slice(target, j) = std::conj(phase) * ComplexMatrix(v.slice(target, j));
            w.slice(j, target) = phase * ComplexMatrix(v.slice(j, target));
            w.gram(target, j) *= std::conj(phase);
            w.gram(j, target) *= phase;
        }
        w.slice(target, target) = v.slice(target, target);
        w.gram(target, target) = v.gram(target, target);
        CHECK(std::abs(residual_rel(w, sol.u, sol.c, sol.gamma) - sol.residual_rel) < 1e-12);
        ComplexMatrix c2 = extract_coefficients(w, sol.u);
        CHECK((c2 - sol.c).norm() < 1e-10);
    }
}

TEST_CASE("necessary condition diagnostics") {
    FockSpace space(60);

    SUBCASE("exact example: violation at machine scale, PSD holds") {
        alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0});
        VTensor v = build_v_tensor(channels::simplified_loss(space), samples);
        NecessaryConditionReport rep = necessary_condition_check(v);
        CHECK(rep.max_violation <= 1e-10);
        CHECK(rep.psd_ok);
        CHECK(rep.pairs_skipped == 0);
    }

    SUBCASE("squeezed small alpha: tiny pairing defect, macroscopic residual") {
        FockSpace big(120);
        double r = 1.0;
        alphabets::AlphabetFamily fam = alphabets::squeezed_coherent_family(Complex(r, 0), big);
        alphabets::SamplerOptions so;
        so.strategy = alphabets::SampleStrategy::Explicit;
        for (double a : {0.6, 0.8, 1.0, 1.2, 1.4}) so.explicit_params.push_back({a, 0.0});
        alphabets::SampleSet samples = alphabets::sample_parameters(fam, so);
        VTensor v = build_v_tensor(channels::simplified_loss(big), samples);
        NecessaryConditionReport rep = necessary_condition_check(v);
        CriterionSolution sol = solve_factorization(v);
        CHECK(rep.max_violation <= 1e-10);
        CHECK(sol.residual_rel > 1e3 * rep.max_violation);
        CHECK(sol.residual_rel > 1e-3);  // genuinely not factorizable here
        // the channel is not trace preserving, so the Gram factorization of
        // the moment matrix is not implied; it measurably fails here
        CHECK(rep.psd_min_eig < 0.0);
    }

    SUBCASE("far-separated samples are skipped and counted") {
        FockSpace wide(140);
        alphabets::SampleSet samples = coherent_samples(wide, {1.0, 8.0});
        VTensor v = build_v_tensor(channels::simplified_loss(wide), samples);
        NecessaryConditionReport rep = necessary_condition_check(v);
        CHECK(rep.pairs_skipped == 2);
    }
}

TEST_CASE("approximate metrics") {
    FockSpace space(60);

    SUBCASE("exact example: epsilon at solver scale") {
        alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0, 2.5});
        VTensor v = build_v_tensor(channels::simplified_loss(space), samples);
        CriterionSolution sol = solve_factorization(v);
        ApproximateMetrics m = approximate_metrics(v, sol);
        CHECK(m.eps_max < 1e-9);
    }

    SUBCASE("orthogonal component ratio: formula vs direct evaluation") {
        FockSpace big(320);
        OrthogonalRatio ratio = squeezed_orthogonal_ratio(big, Complex(0.5, 0), 10.0);
        CHECK(std::abs(ratio.formula - ratio.direct) < 1e-8);
        double sh2 = std::sinh(0.5) * std::sinh(0.5);
        double omega2 = std::norm(squeezed_omega(10.0, 10.0, Complex(0.5, 0)));
        CHECK(ratio.formula == doctest::Approx(sh2 / (omega2 + sh2)).epsilon(1e-12));
    }

    SUBCASE("epsilon term closed form") {
        EpsilonBound b = squeezed_epsilon_term(Complex(9.0, 0.3), Complex(10.0, -0.2),
                                               Complex(0.4, 0.3));
        CHECK(std::abs(b.direct - b.formula) < 1e-12 * std::max(1.0, std::abs(b.formula)));
    }

    SUBCASE("cat overlap identity") {
        FockSpace big(80);
        CHECK(cat_overlap_identity_defect(big, 3.0, 4.0) < 1e-10);
        CHECK(cat_overlap_identity_defect(big, Complex(3.0, 0.4), Complex(3.5, -0.2)) < 1e-10);
    }
}

TEST_CASE("KL reduction check") {
    SUBCASE("3-qubit repetition code with uniform bit flips") {
        hilbert::QubitRegister reg(3);
        std::vector<ComplexMatrix> ops;
        ops.push_back(0.5 * ComplexMatrix::Identity(8, 8));
        for (int site = 0; site < 3; ++site) {
            ops.push_back(0.5 * hilbert::pauli_op(reg, hilbert::Pauli::X, site));
        }
        channels::KrausChannel ch = channels::custom_channel(std::move(ops), "uniform_flips");
        CHECK(ch.trace_preserving());
        std::vector<ComplexVector> codewords{ComplexVector::Unit(8, 0), ComplexVector::Unit(8, 7)};
        KlReductionReport rep = kl_reduction_check(codewords, ch);
        CHECK(rep.kl_holds);
        CHECK(rep.nlqec_ok);
        CHECK(rep.nlqec_residual <= 1e-10);
        CHECK(rep.c_spread < 1e-8);
        CHECK(rep.gamma.sum() == 4);  // four orthogonal syndrome spaces
        for (int n = 0; n < 4; ++n) {
            CHECK(std::abs(rep.h(n, n) - Complex(0.25, 0)) < 1e-12);
        }
    }

    SUBCASE("codeword-dependent h fails KL") {
        hilbert::QubitRegister reg(2);
        std::vector<ComplexVector> codewords{ComplexVector::Unit(4, 0), ComplexVector::Unit(4, 1)};
        double s = 1.0 / std::sqrt(2.0);
        channels::KrausChannel ch = channels::custom_channel(
            {s * ComplexMatrix::Identity(4, 4), s * hilbert::pauli_op(reg, hilbert::Pauli::Z, 1)},
            "z2");
        KlReductionReport rep = kl_reduction_check(codewords, ch);
        CHECK_FALSE(rep.kl_holds);
        CHECK(rep.kl_defect > 0.1);
    }

    SUBCASE("identity channel trivially satisfies KL") {
        std::vector<ComplexVector> codewords{ComplexVector::Unit(4, 0), ComplexVector::Unit(4, 3)};
        channels::KrausChannel ch =
            channels::custom_channel({ComplexMatrix::Identity(4, 4)}, "identity");
        KlReductionReport rep = kl_reduction_check(codewords, ch);
        CHECK(rep.kl_holds);
        CHECK(rep.h.rows() == 1);
        CHECK(std::abs(rep.h(0, 0) - Complex(1, 0)) < 1e-12);
    }
}

TEST_CASE("J_n operators act diagonally on the sampled states") {
    FockSpace space(60);
    alphabets::SampleSet samples = coherent_samples(space, {1.0, 1.5, 2.0, 2.5});
    VTensor v = build_v_tensor(channels::simplified_loss(space), samples);
    CriterionSolution sol = solve_factorization(v);
    for (int n = 0; n < 2; ++n) {
        ComplexMatrix jn = jn_operator(sol, samples, n);
        for (int i = 0; i < samples.size(); ++i) {
            ComplexVector lhs = jn * samples.states.col(i);
            ComplexVector rhs = sol.c(n, i) * samples.states.col(i);
            CHECK((lhs - rhs).norm() <= 1e-6);
        }
    }
}

TEST_CASE("infer_gamma standalone matches the solved structure") {
    alphabets::SampleSet samples = fixed_phase_samples(0.0);
    VTensor v = build_v_tensor(channels::collective_dephasing(0.25), samples);
    CriterionSolution sol = solve_factorization(v);
    IntMatrix g = infer_gamma(v, sol.u);
    CHECK((g - sol.gamma).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("non-transitive gamma beyond the flip budget is rejected") {
    // synthetic tensor whose pairwise statistic gives 0-1 linked, 1-2 linked,
    // but 0-2 orthogonal: not an equivalence relation
    ComplexMatrix mask(3, 3);
    mask << 1, 1, 0, 1, 1, 1, 0, 1, 1;
    ComplexMatrix states = testing::random_matrix(12, 4, 99);
    for (int j = 0; j < 4; ++j) states.col(j).normalize();
    VTensor v;
    v.num_errors = 3;
    v.num_samples = 4;
    v.gram = states.adjoint() * states;
    v.slices.resize(16);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) v.slice(i, j) = mask * v.gram(i, j);
    }
    SolveOptions opts;
    opts.flip_budget = 0;
    CHECK_THROWS_AS(infer_gamma(v, ComplexMatrix::Identity(3, 3), opts), InconsistentGamma);
    opts.flip_budget = 2;
    IntMatrix g = infer_gamma(v, ComplexMatrix::Identity(3, 3), opts);
    CHECK(g.sum() == 9);  // repaired by transitive closure
}

TEST_CASE("gamma alternatives report nearby residuals") {
    alphabets::SampleSet samples = fixed_phase_samples(0.7);
    VTensor v = build_v_tensor(channels::collective_dephasing(0.3), samples);
    CriterionSolution sol = solve_factorization(v);
    REQUIRE(sol.gamma_alternatives.size() >= 1);
    // flipping the decisive off-diagonal entry must hurt
    CHECK(sol.gamma_alternatives[0].residual_rel > sol.residual_rel);
}
