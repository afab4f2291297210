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

#ifndef NLQEC_ALPHABETS_HPP
#define NLQEC_ALPHABETS_HPP

#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "nlqec/hilbert.hpp"
#include "nlqec/types.hpp"

namespace nlqec::alphabets {

/// One real parameter dimension: either a continuous interval or a discrete
/// value set.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};
struct Discrete {
    std::vector<double> values;
};
struct Axis {
    std::string name;
    std::variant<Interval, Discrete> range;
    bool is_discrete() const { return std::holds_alternative<Discrete>(range); }
};

using Params = std::vector<double>;

/// Parametrized state family psi(alpha) with its parameter domain.
struct AlphabetFamily {
    std::string name;
    std::vector<Axis> domain;
    std::map<std::string, double> fixed_params;
    std::function<ComplexVector(const Params&)> generator;
    int state_dim = 0;

    int param_dims() const { return static_cast<int>(domain.size()); }
};

enum class SampleStrategy { Grid, UniformRandom, Explicit };

struct SamplerOptions {
    SampleStrategy strategy = SampleStrategy::Grid;
    /// Grid: points per continuous axis. UniformRandom: total samples.
    int count = 8;
    uint64_t seed = 1;
    int max_total = 64;
    double rank_tol = 1e-8;
    /// Used by the Explicit strategy when non-empty; otherwise Explicit
    /// takes the Cartesian product of the discrete axes.
    std::vector<Params> explicit_params;
};

struct SampleSet {
    std::vector<Params> params;
    ComplexMatrix states;  // dim x S, column j = psi(params[j])
    ComplexMatrix gram;    // S x S
    uint64_t seed = 0;
    int rank = 0;
    double gram_cond = 1.0;
    int pruned = 0;

    int size() const { return static_cast<int>(params.size()); }
};

SampleSet sample_parameters(const AlphabetFamily& family, const SamplerOptions& opts);

/// Gram matrix and rank diagnostics for an explicit state list.
SampleSet make_sample_set(const AlphabetFamily& family, const std::vector<Params>& params,
                          double rank_tol = 1e-8, uint64_t seed = 0);

// Built-in families. Parameters are listed in axis order.

/// axes (re_alpha, im_alpha); psi = |alpha>.
AlphabetFamily coherent_family(const hilbert::FockSpace& space);

/// axes (re_alpha, im_alpha); psi = S(xi) D(alpha) |0>, xi fixed.
AlphabetFamily squeezed_coherent_family(Complex xi, const hilbert::FockSpace& space);

/// axes (re_alpha, im_alpha) with Re(alpha) >= half_plane_margin > 0;
/// psi = even cat of Eq-normalized form.
AlphabetFamily even_cat_family(double half_plane_margin, const hilbert::FockSpace& space);

/// axes (j in {0,1}, theta, phi); psi = X2^j (cos t |00> + e^{i phi} sin t |11>).
AlphabetFamily dephasing_pair_family();

/// axis theta, phi0 held fixed;
/// psi = (e^{i phi0} cos t |00> + sin t |01> + cos t |10> + e^{i phi0} sin t |11>)/sqrt(2).
AlphabetFamily fixed_phase_family(double phi0);

/// axes (re_0, im_0, .., re_{k-1}, im_{k-1}); psi = normalized sum of
/// codewords weighted by the complex coefficients. Codewords must be
/// orthonormal.
AlphabetFamily kl_codeword_family(const std::vector<ComplexVector>& codewords);

}  // namespace nlqec::alphabets

#endif  // NLQEC_ALPHABETS_HPP
