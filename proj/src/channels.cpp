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

#include "nlqec/channels.hpp"

#include <cmath>

#include "nlqec/numkit.hpp"

namespace nlqec::channels {

KrausChannel::KrausChannel(std::vector<ComplexMatrix> kraus_ops, std::string channel_label)
    : ops(std::move(kraus_ops)), label(std::move(channel_label)) {
    if (ops.empty()) throw DomainViolation("KrausChannel: empty operator list");
    const int d = static_cast<int>(ops.front().rows());
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (const ComplexMatrix& e : ops) {
        if (e.rows() != d || e.cols() != d) {
            throw DimensionMismatch("KrausChannel: operators must share dimensions");
        }
        sum += e.adjoint() * e;
    }
    tp_defect = (sum - ComplexMatrix::Identity(d, d)).norm();
}

KrausChannel simplified_loss(const hilbert::FockSpace& space) {
    std::vector<ComplexMatrix> ops;
    ops.push_back(ComplexMatrix::Identity(space.dim, space.dim));
    ops.push_back(hilbert::annihilation_op(space));
    return KrausChannel(std::move(ops), "simplified_loss");
}

KrausChannel amplitude_damping(double gamma, const hilbert::FockSpace& space, int k_max) {
    if (gamma <= 0.0 || gamma > 1.0) {
        throw DomainViolation("amplitude_damping: gamma must be in (0, 1]");
    }
    if (k_max > space.n_max()) {
        throw DomainViolation("amplitude_damping: k_max exceeds n_max");
    }
    std::vector<ComplexMatrix> ops;
    ops.reserve(k_max + 1);
    const double log_gamma = gamma < 1.0 ? std::log(gamma) : 0.0;
    const double log_eps = gamma < 1.0 ? std::log1p(-gamma) : -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= k_max; ++k) {
        ComplexMatrix a = ComplexMatrix::Zero(space.dim, space.dim);
        if (k > 0 && gamma == 1.0) {
            ops.push_back(std::move(a));
            continue;
        }
        for (int n = k; n < space.dim; ++n) {
            // log-space keeps the binomial factor finite at large n
            double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
            double log_amp2 = log_binom + (n - k) * log_gamma + (k > 0 ? k * log_eps : 0.0);
            a(n - k, n) = std::exp(0.5 * log_amp2);
        }
        ops.push_back(std::move(a));
    }
    return KrausChannel(std::move(ops), "amplitude_damping");
}

int default_k_max(double gamma, double alpha_max) {
    double mean_n = alpha_max * alpha_max;
    double eps = 1.0 - gamma;
    double term = 1.0;
    int k = 0;
    while (term >= 1e-14 && k < 200) {
        ++k;
        term *= eps * mean_n / k;
    }
    return std::max(k, 1);
}

KrausChannel collective_dephasing(double p) {
    if (p < 0.0 || p > 1.0) {
        throw DomainViolation("collective_dephasing: p must be in [0, 1]");
    }
    hilbert::QubitRegister reg(2);
    ComplexMatrix zz = hilbert::pauli_op(reg, hilbert::Pauli::Z, 0) *
                       hilbert::pauli_op(reg, hilbert::Pauli::Z, 1);
    std::vector<ComplexMatrix> ops;
    ops.push_back(std::sqrt(p) * ComplexMatrix::Identity(4, 4));
    ops.push_back(std::sqrt(1.0 - p) * zz);
    return KrausChannel(std::move(ops), "collective_dephasing");
}

KrausChannel custom_channel(std::vector<ComplexMatrix> ops, std::string label) {
    return KrausChannel(std::move(ops), std::move(label));
}

KrausChannel transform_channel(const KrausChannel& channel, const ComplexMatrix& u,
                               const Tolerances& tol) {
    const int n = channel.num_ops();
    if (u.rows() != n || u.cols() != n) {
        throw DimensionMismatch("transform_channel: u must be num_ops x num_ops");
    }
    double unitary_defect = (u.adjoint() * u - ComplexMatrix::Identity(n, n)).norm();
    if (unitary_defect > tol.eig_tol * std::max(1.0, u.norm())) {
        throw NonUnitaryTransform("transform_channel: u is not unitary");
    }
    std::vector<ComplexMatrix> out;
    out.reserve(n);
    for (int np = 0; np < n; ++np) {
        ComplexMatrix f = ComplexMatrix::Zero(channel.dim(), channel.dim());
        for (int k = 0; k < n; ++k) f += channel.ops[k] * u(k, np);
        out.push_back(std::move(f));
    }
    return KrausChannel(std::move(out), channel.label + "+mixed");
}

}  // namespace nlqec::channels
