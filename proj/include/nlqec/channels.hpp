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

#ifndef NLQEC_CHANNELS_HPP
#define NLQEC_CHANNELS_HPP

#include <string>
#include <vector>

#include "nlqec/hilbert.hpp"
#include "nlqec/types.hpp"

namespace nlqec::channels {

/// Ordered Kraus operator set. Channels that fail the trace-preservation
/// identity are kept first-class; tp_defect records how far off they are.
struct KrausChannel {
    std::vector<ComplexMatrix> ops;
    std::string label;
    double tp_defect = 0.0;

    KrausChannel(std::vector<ComplexMatrix> kraus_ops, std::string channel_label);

    int dim() const { return ops.empty() ? 0 : static_cast<int>(ops.front().rows()); }
    int num_ops() const { return static_cast<int>(ops.size()); }
    bool trace_preserving(double tp_tol = 1e-10) const { return tp_defect <= tp_tol; }
};

/// { I, a }, the one-photon-loss toy channel. Not trace preserving.
KrausChannel simplified_loss(const hilbert::FockSpace& space);

/// Amplitude damping Kraus set A_0..A_kmax with
/// A_k = sum_n sqrt(C(n,k) gamma^(n-k) (1-gamma)^k) |n-k><n|.
KrausChannel amplitude_damping(double gamma, const hilbert::FockSpace& space, int k_max);

/// Smallest k with (1-gamma)^k / k! * <n>^k below 1e-14, <n> = |alpha_max|^2.
int default_k_max(double gamma, double alpha_max);

/// { sqrt(p) I, sqrt(1-p) Z1 Z2 } on two qubits.
KrausChannel collective_dephasing(double p);

KrausChannel custom_channel(std::vector<ComplexMatrix> ops, std::string label = "custom");

/// F_n' = sum_n E_n u_{n n'}; the channel action is unchanged.
KrausChannel transform_channel(const KrausChannel& channel, const ComplexMatrix& u,
                               const Tolerances& tol = {});

}  // namespace nlqec::channels

#endif  // NLQEC_CHANNELS_HPP
