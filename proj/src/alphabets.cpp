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

#include "nlqec/alphabets.hpp"

#include <cmath>
#include <random>

#include "nlqec/numkit.hpp"

namespace nlqec::alphabets {

namespace {

std::vector<double> axis_grid_values(const Axis& axis, int count) {
    if (axis.is_discrete()) {
        return std::get<Discrete>(axis.range).values;
    }
    const Interval& iv = std::get<Interval>(axis.range);
    if (iv.hi < iv.lo) throw DomainEmpty("sample_parameters: axis '" + axis.name + "' is empty");
    if (iv.hi == iv.lo || count <= 1) return {iv.lo};
    std::vector<double> vals(count);
    for (int k = 0; k < count; ++k) {
        vals[k] = iv.lo + (iv.hi - iv.lo) * k / static_cast<double>(count - 1);
    }
    return vals;
}

std::vector<Params> cartesian_product(const std::vector<std::vector<double>>& per_axis, int cap) {
    std::vector<Params> out{{}};
    for (const auto& vals : per_axis) {
        std::vector<Params> next;
        next.reserve(out.size() * vals.size());
        for (const Params& p : out) {
            for (double v : vals) {
                Params q = p;
                q.push_back(v);
                next.push_back(std::move(q));
                if (static_cast<int>(next.size()) > cap) {
                    throw DomainViolation("sample_parameters: grid exceeds max_total samples");
                }
            }
        }
        out = std::move(next);
    }
    return out;
}

/// Two samples are duplicates when the 2x2 Gram submatrix of their
/// normalized states has condition number above 1/rank_tol, i.e.
/// |<a|b>| > (1 - rank_tol) / (1 + rank_tol).
bool near_duplicate(const ComplexVector& a, const ComplexVector& b, double rank_tol) {
    double overlap = std::abs(a.dot(b));
    return overlap > (1.0 - rank_tol) / (1.0 + rank_tol);
}

}  // namespace

SampleSet make_sample_set(const AlphabetFamily& family, const std::vector<Params>& params,
                          double rank_tol, uint64_t seed) {
    if (params.empty()) throw DomainEmpty("make_sample_set: no parameters");
    SampleSet out;
    out.seed = seed;
    std::vector<ComplexVector> kept;
    for (const Params& p : params) {
        ComplexVector psi = family.generator(p);
        bool dup = false;
        for (const ComplexVector& q : kept) {
            if (near_duplicate(psi, q, rank_tol)) {
                dup = true;
                break;
            }
        }
        if (dup) {
            ++out.pruned;
            continue;
        }
        kept.push_back(std::move(psi));
        out.params.push_back(p);
    }
    if (params.size() >= 2 && kept.size() < 2) {
        throw DegenerateSampleSet("sample set degenerate after pruning");
    }
    out.states = ComplexMatrix(kept.front().size(), kept.size());
    for (size_t j = 0; j < kept.size(); ++j) out.states.col(j) = kept[j];
    out.gram = out.states.adjoint() * out.states;
    auto basis = numkit::orthonormalize(out.states, rank_tol);
    out.rank = basis.rank;
    auto eig = numkit::eig_hermitian((out.gram + out.gram.adjoint()) / 2.0);
    double lo = eig.eigenvalues.minCoeff();
    double hi = eig.eigenvalues.maxCoeff();
    out.gram_cond = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    return out;
}

SampleSet sample_parameters(const AlphabetFamily& family, const SamplerOptions& opts) {
    if (family.domain.empty()) throw DomainEmpty("sample_parameters: family has no domain");
    std::vector<Params> params;
    switch (opts.strategy) {
        case SampleStrategy::Grid: {
            std::vector<std::vector<double>> per_axis;
            for (const Axis& ax : family.domain) {
                per_axis.push_back(axis_grid_values(ax, opts.count));
            }
            params = cartesian_product(per_axis, opts.max_total);
            break;
        }
        case SampleStrategy::UniformRandom: {
            std::mt19937_64 rng(opts.seed);
            for (int k = 0; k < opts.count; ++k) {
                Params p;
                for (const Axis& ax : family.domain) {
                    if (ax.is_discrete()) {
                        const auto& vals = std::get<Discrete>(ax.range).values;
                        std::uniform_int_distribution<size_t> pick(0, vals.size() - 1);
                        p.push_back(vals[pick(rng)]);
                    } else {
                        const Interval& iv = std::get<Interval>(ax.range);
                        std::uniform_real_distribution<double> pick(iv.lo, iv.hi);
                        p.push_back(pick(rng));
                    }
                }
                params.push_back(std::move(p));
            }
            break;
        }
        case SampleStrategy::Explicit: {
            if (!opts.explicit_params.empty()) {
                params = opts.explicit_params;
            } else {
                std::vector<std::vector<double>> per_axis;
                for (const Axis& ax : family.domain) {
                    if (!ax.is_discrete()) {
                        throw DomainViolation(
                            "sample_parameters: explicit strategy needs discrete axes or an "
                            "explicit parameter list");
                    }
                    per_axis.push_back(std::get<Discrete>(ax.range).values);
                }
                params = cartesian_product(per_axis, opts.max_total);
            }
            break;
        }
    }
    return make_sample_set(family, params, opts.rank_tol, opts.seed);
}

AlphabetFamily coherent_family(const hilbert::FockSpace& space) {
    AlphabetFamily f;
    f.name = "coherent";
    f.domain = {Axis{"re_alpha", Interval{0.0, 2.0}}, Axis{"im_alpha", Interval{0.0, 0.0}}};
    f.state_dim = space.dim;
    f.generator = [space](const Params& p) {
        if (p.size() != 2) throw DomainViolation("coherent family expects (re, im)");
        return hilbert::coherent_state(Complex(p[0], p[1]), space);
    };
    return f;
}

AlphabetFamily squeezed_coherent_family(Complex xi, const hilbert::FockSpace& space) {
    AlphabetFamily f;
    f.name = "squeezed_coherent";
    f.domain = {Axis{"re_alpha", Interval{0.0, 2.0}}, Axis{"im_alpha", Interval{0.0, 0.0}}};
    f.fixed_params = {{"xi_r", std::abs(xi)}, {"xi_theta", std::arg(xi)}};
    f.state_dim = space.dim;
    ComplexMatrix squeezer = hilbert::squeeze_op(xi, space);
    Tolerances tol;
    f.generator = [space, squeezer, tol](const Params& p) {
        if (p.size() != 2) throw DomainViolation("squeezed family expects (re, im)");
        ComplexVector psi = squeezer * hilbert::coherent_state(Complex(p[0], p[1]), space);
        int guard = std::min(hilbert::kDefaultGuardBand, space.dim - 1);
        if (hilbert::truncation_defect(psi, guard) > tol.trunc_tol) {
            throw TruncationError("squeezed state tail mass exceeds trunc_tol");
        }
        return psi;
    };
    return f;
}

AlphabetFamily even_cat_family(double half_plane_margin, const hilbert::FockSpace& space) {
    if (half_plane_margin <= 0.0) {
        throw DomainViolation("even_cat_family: half_plane_margin must be > 0");
    }
    AlphabetFamily f;
    f.name = "even_cat";
    f.domain = {Axis{"re_alpha", Interval{half_plane_margin, half_plane_margin + 2.0}},
                Axis{"im_alpha", Interval{0.0, 0.0}}};
    f.fixed_params = {{"half_plane_margin", half_plane_margin}};
    f.state_dim = space.dim;
    f.generator = [space, half_plane_margin](const Params& p) {
        if (p.size() != 2) throw DomainViolation("cat family expects (re, im)");
        if (p[0] < half_plane_margin) {
            throw DomainViolation("even_cat_family: Re(alpha) below half-plane margin");
        }
        return hilbert::even_cat_state(Complex(p[0], p[1]), space);
    };
    return f;
}

AlphabetFamily dephasing_pair_family() {
    AlphabetFamily f;
    f.name = "dephasing_pair";
    f.domain = {Axis{"j", Discrete{{0.0, 1.0}}},
                Axis{"theta", Interval{0.1, 1.4}},
                Axis{"phi", Interval{0.0, 3.0}}};
    f.state_dim = 4;
    f.generator = [](const Params& p) {
        if (p.size() != 3) throw DomainViolation("dephasing pair family expects (j, theta, phi)");
        int j = static_cast<int>(std::lround(p[0]));
        if (j != 0 && j != 1) throw DomainViolation("dephasing pair family: j must be 0 or 1");
        double theta = p[1], phi = p[2];
        ComplexVector psi = ComplexVector::Zero(4);
        psi(0) = std::cos(theta);                                       // |00>
        psi(3) = std::exp(Complex(0.0, phi)) * std::sin(theta);        // |11>
        if (j == 1) {
            // X2 swaps |00> <-> |01| and |10> <-> |11>
            ComplexVector flipped = ComplexVector::Zero(4);
            flipped(1) = psi(0);
            flipped(2) = psi(3);
            psi = flipped;
        }
        return psi;
    };
    return f;
}

AlphabetFamily fixed_phase_family(double phi0) {
    AlphabetFamily f;
    f.name = "fixed_phase";
    f.domain = {Axis{"theta", Interval{0.2, 1.3}}};
    f.fixed_params = {{"phi0", phi0}};
    f.state_dim = 4;
    f.generator = [phi0](const Params& p) {
        if (p.size() != 1) throw DomainViolation("fixed phase family expects (theta)");
        double theta = p[0];
        Complex ph = std::exp(Complex(0.0, phi0));
        ComplexVector psi(4);
        psi(0) = ph * std::cos(theta);
        psi(1) = std::sin(theta);
        psi(2) = std::cos(theta);
        psi(3) = ph * std::sin(theta);
        return ComplexVector(psi / std::sqrt(2.0));
    };
    return f;
}

AlphabetFamily kl_codeword_family(const std::vector<ComplexVector>& codewords) {
    if (codewords.empty()) throw DomainEmpty("kl_codeword_family: no codewords");
    const int k = static_cast<int>(codewords.size());
    const auto dim = codewords.front().size();
    for (int i = 0; i < k; ++i) {
        if (codewords[i].size() != dim) {
            throw DimensionMismatch("kl_codeword_family: codeword dimensions differ");
        }
        for (int j = 0; j <= i; ++j) {
            Complex g = codewords[j].dot(codewords[i]);
            double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(g - expect) > 1e-10) {
                throw DomainViolation("kl_codeword_family: codewords must be orthonormal");
            }
        }
    }
    AlphabetFamily f;
    f.name = "kl_codewords";
    for (int i = 0; i < k; ++i) {
        f.domain.push_back(Axis{"re_" + std::to_string(i), Interval{-1.0, 1.0}});
        f.domain.push_back(Axis{"im_" + std::to_string(i), Interval{-1.0, 1.0}});
    }
    f.state_dim = static_cast<int>(dim);
    f.generator = [codewords, k](const Params& p) {
        if (static_cast<int>(p.size()) != 2 * k) {
            throw DomainViolation("kl_codeword_family: expected 2k coefficients");
        }
        ComplexVector psi = ComplexVector::Zero(codewords.front().size());
        for (int i = 0; i < k; ++i) {
            psi += Complex(p[2 * i], p[2 * i + 1]) * codewords[i];
        }
        double norm = psi.norm();
        if (norm < 1e-12) throw DegenerateInput("kl_codeword_family: zero coefficient vector");
        return ComplexVector(psi / norm);
    };
    return f;
}

}  // namespace nlqec::alphabets
