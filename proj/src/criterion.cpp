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
//
// Factorization search for the criterion tensor. The pipeline is
//   spectral init (+ Jacobi joint diagonalization on degenerate spectra)
//   -> closed-form coefficient extraction -> Gamma inference
//   -> alternating unitary-manifold refinement
//   -> canonicalization (permutation match, in-block rotation, phase gauge).
// The canonicalization step resolves the gauge freedom of all-ones Gamma
// blocks, where any unitary mixing of the block yields the same residual;
// the representative closest to the identity is returned.

#include "nlqec/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "nlqec/numkit.hpp"

namespace nlqec::criterion {

namespace {

constexpr double kTiny = 1e-300;

ComplexMatrix model_slice(const ComplexMatrix& c, const IntMatrix& gamma, const Complex& gram_ij,
                          int i, int j) {
    const int n_err = static_cast<int>(c.rows());
    ComplexMatrix m(n_err, n_err);
    for (int n = 0; n < n_err; ++n) {
        for (int mm = 0; mm < n_err; ++mm) {
            m(n, mm) = gamma(n, mm) == 0
                           ? Complex(0, 0)
                           : std::conj(c(n, i)) * c(mm, j) * gram_ij;
        }
    }
    return m;
}

double overlap_floor(const VTensor& v, const SolveOptions& opts) {
    return opts.overlap_floor_rel * v.gram.cwiseAbs().maxCoeff();
}

std::vector<bool> compute_zero_mask(const ComplexMatrix& c, double c_zero_rel,
                                    std::vector<int>* violations) {
    const int n_err = static_cast<int>(c.rows());
    const int s = static_cast<int>(c.cols());
    double cmax = c.cwiseAbs().maxCoeff();
    double tol = c_zero_rel * cmax;
    std::vector<bool> mask(n_err, false);
    for (int n = 0; n < n_err; ++n) {
        int below = 0;
        for (int i = 0; i < s; ++i) {
            if (std::abs(c(n, i)) <= tol) ++below;
        }
        mask[n] = (below == s);
        if (violations && below > 0 && below < s) violations->push_back(n);
    }
    return mask;
}

/// Median of the normalized magnitude statistic for entry (n, m).
double gamma_statistic(const VTensor& v, const std::vector<ComplexMatrix>& transformed,
                       const ComplexMatrix& c, int n, int m, const SolveOptions& opts) {
    const int s = v.num_samples;
    const double floor = overlap_floor(v, opts);
    std::vector<double> ratios;
    ratios.reserve(s * s);
    for (int pass = 0; pass < 2; ++pass) {
        ratios.clear();
        for (int i = 0; i < s; ++i) {
            for (int j = 0; j < s; ++j) {
                double g = std::abs(v.gram(i, j));
                if (pass == 0 && g <= floor) continue;  // second pass keeps all pairs
                double denom = std::abs(c(n, i)) * std::abs(c(m, j)) * g + opts.floor_eps;
                ratios.push_back(std::abs(transformed[i * s + j](n, m)) / denom);
            }
        }
        if (ratios.size() >= 3) break;
    }
    if (ratios.empty()) return 0.0;
    size_t mid = ratios.size() / 2;
    std::nth_element(ratios.begin(), ratios.begin() + mid, ratios.end());
    return ratios[mid];
}

std::vector<ComplexMatrix> transform_slices(const VTensor& v, const ComplexMatrix& u) {
    std::vector<ComplexMatrix> out(v.slices.size());
    for (size_t k = 0; k < v.slices.size(); ++k) out[k] = u.adjoint() * v.slices[k] * u;
    return out;
}

struct GammaResult {
    IntMatrix gamma;
    int repairs = 0;
    RealMatrix statistics;
};

GammaResult infer_gamma_impl(const VTensor& v, const std::vector<ComplexMatrix>& transformed,
                             const ComplexMatrix& c, const std::vector<bool>& mask,
                             const SolveOptions& opts) {
    const int n_err = v.num_errors;
    GammaResult out;
    out.gamma = IntMatrix::Identity(n_err, n_err);
    out.statistics = RealMatrix::Zero(n_err, n_err);
    for (int n = 0; n < n_err; ++n) {
        for (int m = n + 1; m < n_err; ++m) {
            if (mask[n] || mask[m]) continue;
            double stat = gamma_statistic(v, transformed, c, n, m, opts);
            out.statistics(n, m) = out.statistics(m, n) = stat;
            int val = stat > opts.gamma_threshold ? 1 : 0;
            out.gamma(n, m) = out.gamma(m, n) = val;
        }
    }
    // Transitive closure over the unmasked indices; the number of entries
    // changed is reported, not hidden.
    std::vector<int> comp(n_err, -1);
    int n_comp = 0;
    for (int n = 0; n < n_err; ++n) {
        if (mask[n] || comp[n] >= 0) continue;
        std::vector<int> stack{n};
        comp[n] = n_comp;
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            for (int m = 0; m < n_err; ++m) {
                if (mask[m] || comp[m] >= 0 || out.gamma(cur, m) == 0) continue;
                comp[m] = n_comp;
                stack.push_back(m);
            }
        }
        ++n_comp;
    }
    for (int n = 0; n < n_err; ++n) {
        for (int m = n + 1; m < n_err; ++m) {
            if (mask[n] || mask[m]) continue;
            int closed = comp[n] == comp[m] ? 1 : 0;
            if (closed != out.gamma(n, m)) {
                ++out.repairs;
                out.gamma(n, m) = out.gamma(m, n) = closed;
            }
        }
    }
    return out;
}

double residual_impl(const VTensor& v, const std::vector<ComplexMatrix>& transformed,
                     const ComplexMatrix& c, const IntMatrix& gamma,
                     std::vector<ComplexMatrix>* eps_out) {
    const int s = v.num_samples;
    double num = 0.0;
    if (eps_out) eps_out->resize(s * s);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
            ComplexMatrix eps = transformed[i * s + j] - model_slice(c, gamma, v.gram(i, j), i, j);
            num += eps.squaredNorm();
            if (eps_out) (*eps_out)[i * s + j] = std::move(eps);
        }
    }
    double denom = v.frobenius();
    if (denom == 0.0) return 0.0;
    return std::sqrt(num) / denom;
}

struct Evaluation {
    ComplexMatrix c;
    IntMatrix gamma;
    std::vector<bool> mask;
    std::vector<int> dichotomy_violations;
    int gamma_repairs = 0;
    double residual = 0.0;
    RealMatrix gamma_statistics;
};

Evaluation evaluate(const VTensor& v, const ComplexMatrix& u, const SolveOptions& opts) {
    Evaluation e;
    e.c = extract_coefficients(v, u, opts);
    e.mask = compute_zero_mask(e.c, opts.c_zero_rel, &e.dichotomy_violations);
    std::vector<ComplexMatrix> transformed = transform_slices(v, u);
    GammaResult g = infer_gamma_impl(v, transformed, e.c, e.mask, opts);
    e.gamma = g.gamma;
    e.gamma_repairs = g.repairs;
    e.gamma_statistics = g.statistics;
    e.residual = residual_impl(v, transformed, e.c, e.gamma, nullptr);
    return e;
}

/// One sweep of Cardoso-Souloumiac Jacobi rotations minimizing the
/// off-diagonal mass of the slice set. Returns the accumulated rotation.
double jacobi_sweep(std::vector<ComplexMatrix>& mats, ComplexMatrix& u) {
    const int n = static_cast<int>(u.rows());
    double total_rotation = 0.0;
    for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
            Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
            for (const ComplexMatrix& a : mats) {
                Eigen::Vector3cd h;
                h << a(p, p) - a(q, q), a(p, q) + a(q, p), Complex(0, 1) * (a(q, p) - a(p, q));
                g += (h * h.adjoint()).real();
            }
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(g);
            Eigen::Vector3d vec = es.eigenvectors().col(2);  // largest eigenvalue
            if (vec(0) < 0) vec = -vec;
            double x = vec(0), y = vec(1), z = vec(2);
            double c = std::sqrt((x + 1.0) / 2.0);
            Complex s = Complex(y, -z) / std::sqrt(2.0 * (x + 1.0));
            if (std::abs(s) < 1e-14) continue;
            total_rotation += std::abs(s);
            // Apply the plane rotation R(p,q) = [[c, -conj(s)], [s, conj(c)]]
            for (ComplexMatrix& a : mats) {
                ComplexVector col_p = c * a.col(p) + s * a.col(q);
                ComplexVector col_q = -std::conj(s) * a.col(p) + c * a.col(q);
                a.col(p) = col_p;
                a.col(q) = col_q;
                ComplexVector row_p = c * a.row(p).conjugate().transpose() +
                                      s * a.row(q).conjugate().transpose();
                ComplexVector row_q = -std::conj(s) * a.row(p).conjugate().transpose() +
                                      c * a.row(q).conjugate().transpose();
                a.row(p) = row_p.conjugate().transpose();
                a.row(q) = row_q.conjugate().transpose();
            }
            ComplexVector u_p = c * u.col(p) + s * u.col(q);
            ComplexVector u_q = -std::conj(s) * u.col(p) + c * u.col(q);
            u.col(p) = u_p;
            u.col(q) = u_q;
        }
    }
    return total_rotation;
}

ComplexMatrix joint_diagonalize(const VTensor& v, const ComplexMatrix& u0,
                                const SolveOptions& opts) {
    const int s = v.num_samples;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) pairs.emplace_back(i, j);
    }
    if (static_cast<int>(pairs.size()) > opts.jd_max_slices) {
        std::mt19937_64 rng(opts.seed);
        std::shuffle(pairs.begin(), pairs.end(), rng);
        pairs.resize(opts.jd_max_slices);
    }
    ComplexMatrix u = u0;
    std::vector<ComplexMatrix> mats;
    mats.reserve(pairs.size());
    double floor = overlap_floor(v, opts);
    for (auto [i, j] : pairs) {
        Complex g = v.gram(i, j);
        if (std::abs(g) <= floor) continue;
        mats.push_back(u.adjoint() * (v.slice(i, j) / g) * u);
    }
    if (mats.empty()) return u;
    for (int sweep = 0; sweep < 64; ++sweep) {
        if (jacobi_sweep(mats, u) < 1e-12) break;
    }
    return u;
}

/// Riemannian descent step on the unitary group for fixed (c, Gamma).
/// Objective sum_ij || S_ij u - u M_ij ||_F^2.
ComplexMatrix riemannian_step(const VTensor& v, const ComplexMatrix& u, const ComplexMatrix& c,
                              const IntMatrix& gamma) {
    const int s = v.num_samples;
    const int n_err = v.num_errors;
    auto objective = [&](const ComplexMatrix& w) {
        double f = 0.0;
        for (int i = 0; i < s; ++i) {
            for (int j = 0; j < s; ++j) {
                f += (v.slice(i, j) * w - w * model_slice(c, gamma, v.gram(i, j), i, j))
                         .squaredNorm();
            }
        }
        return f;
    };
    ComplexMatrix grad = ComplexMatrix::Zero(n_err, n_err);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
            ComplexMatrix m = model_slice(c, gamma, v.gram(i, j), i, j);
            ComplexMatrix r = v.slice(i, j) * u - u * m;
            grad += v.slice(i, j).adjoint() * r - r * m.adjoint();
        }
    }
    ComplexMatrix omega = grad * u.adjoint() - u * grad.adjoint();
    double omega_norm = omega.norm();
    if (omega_norm < 1e-15) return u;
    double f0 = objective(u);
    double tau = 1.0 / (2.0 * omega_norm);
    for (int bt = 0; bt < 30; ++bt) {
        ComplexMatrix candidate = numkit::expm_antihermitian(-tau * omega) * u;
        if (objective(candidate) < f0 - 1e-4 * tau * omega_norm * omega_norm) {
            return candidate;
        }
        tau *= 0.5;
    }
    return u;
}

std::vector<std::vector<int>> gamma_blocks(const IntMatrix& gamma, const std::vector<bool>& mask) {
    const int n = static_cast<int>(gamma.rows());
    std::vector<std::vector<int>> blocks;
    std::vector<bool> seen(n, false);
    for (int start = 0; start < n; ++start) {
        if (mask[start] || seen[start]) continue;
        std::vector<int> block{start};
        seen[start] = true;
        std::vector<int> stack{start};
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            for (int m = 0; m < n; ++m) {
                if (mask[m] || seen[m] || gamma(cur, m) == 0) continue;
                seen[m] = true;
                block.push_back(m);
                stack.push_back(m);
            }
        }
        std::sort(block.begin(), block.end());
        blocks.push_back(std::move(block));
    }
    return blocks;
}

/// Permute columns of u so that the dominant entries sit on the diagonal.
ComplexMatrix permutation_match(const ComplexMatrix& u) {
    const int n = static_cast<int>(u.rows());
    RealMatrix mag = u.cwiseAbs();
    std::vector<int> col_of_row(n, -1);
    std::vector<bool> row_used(n, false), col_used(n, false);
    for (int pick = 0; pick < n; ++pick) {
        double best = -1.0;
        int br = -1, bc = -1;
        for (int r = 0; r < n; ++r) {
            if (row_used[r]) continue;
            for (int cc = 0; cc < n; ++cc) {
                if (col_used[cc]) continue;
                if (mag(r, cc) > best) {
                    best = mag(r, cc);
                    br = r;
                    bc = cc;
                }
            }
        }
        col_of_row[br] = bc;
        row_used[br] = true;
        col_used[bc] = true;
    }
    ComplexMatrix out(n, n);
    for (int r = 0; r < n; ++r) out.col(r) = u.col(col_of_row[r]);
    return out;
}

/// Within each all-ones Gamma block the solution manifold is invariant under
/// unitary mixing of the block; pick the mixing closest to the identity.
ComplexMatrix canonicalize(const VTensor& v, ComplexMatrix u, const SolveOptions& opts) {
    u = permutation_match(u);
    Evaluation e = evaluate(v, u, opts);
    for (const auto& block : gamma_blocks(e.gamma, e.mask)) {
        if (block.size() < 2) continue;
        ComplexMatrix sub(block.size(), block.size());
        for (size_t a = 0; a < block.size(); ++a) {
            for (size_t b = 0; b < block.size(); ++b) {
                sub(a, b) = u(block[a], block[b]);
            }
        }
        numkit::SvdResult s = numkit::svd(sub.adjoint());
        ComplexMatrix w = s.u * s.v.adjoint();
        ComplexMatrix cols(u.rows(), block.size());
        for (size_t b = 0; b < block.size(); ++b) cols.col(b) = u.col(block[b]);
        cols = cols * w;
        for (size_t b = 0; b < block.size(); ++b) u.col(block[b]) = cols.col(b);
    }
    return u;
}

void gauge_fix(ComplexMatrix& u, ComplexMatrix& c, const std::vector<bool>& mask) {
    const int s = static_cast<int>(c.cols());
    int ref = 0;
    double best = -1.0;
    for (int i = 0; i < s; ++i) {
        double total = c.col(i).cwiseAbs().sum();
        if (total > best + 1e-15) {
            best = total;
            ref = i;
        }
    }
    for (int n = 0; n < c.rows(); ++n) {
        if (mask[n]) continue;
        Complex z = c(n, ref);
        if (std::abs(z) < 1e-300) continue;
        Complex phase = std::conj(z) / std::abs(z);
        c.row(n) *= phase;
        u.col(n) *= phase;
    }
}

}  // namespace

double VTensor::frobenius() const {
    double total = 0.0;
    for (const ComplexMatrix& s : slices) total += s.squaredNorm();
    return std::sqrt(total);
}

VTensor build_v_tensor(const channels::KrausChannel& channel,
                       const alphabets::SampleSet& samples) {
    if (channel.dim() != samples.states.rows()) {
        throw DimensionMismatch("build_v_tensor: channel and samples live on different spaces");
    }
    const int n_err = channel.num_ops();
    const int s = samples.size();
    VTensor v;
    v.num_errors = n_err;
    v.num_samples = s;
    v.gram = samples.gram;
    v.channel_label = channel.label;
    v.slices.assign(s * s, ComplexMatrix::Zero(n_err, n_err));

    std::vector<ComplexMatrix> images(n_err);
    for (int n = 0; n < n_err; ++n) images[n] = channel.ops[n] * samples.states;
    // Compute the upper half in the error index and conjugate-mirror it so
    // Hermitian symmetry holds by construction.
    for (int n = 0; n < n_err; ++n) {
        for (int m = n; m < n_err; ++m) {
            ComplexMatrix block = images[n].adjoint() * images[m];  // S x S
            for (int i = 0; i < s; ++i) {
                for (int j = 0; j < s; ++j) {
                    v.slice(i, j)(n, m) = block(i, j);
                    if (m != n) v.slice(j, i)(m, n) = std::conj(block(i, j));
                }
            }
        }
    }
    return v;
}

SpectralInit spectral_init(const VTensor& v, const SolveOptions& opts) {
    const int s = v.num_samples;
    ComplexMatrix w = ComplexMatrix::Zero(v.num_errors, v.num_errors);
    double nonzero = 0.0;
    for (int i = 0; i < s; ++i) {
        double g = std::real(v.gram(i, i));
        if (g <= 0) continue;
        w += v.slice(i, i) / g;
        nonzero += v.slice(i, i).norm();
    }
    if (nonzero == 0.0) {
        throw NumericalError("spectral_init: all diagonal slices vanish");
    }
    w /= static_cast<double>(s);
    numkit::EigResult eig = numkit::eig_hermitian((w + w.adjoint()) / 2.0, opts.tol);

    // Order columns by descending eigenvalue; ties broken lexicographically
    // on the phase-normalized eigenvector entries.
    const int n = v.num_errors;
    ComplexMatrix vecs = eig.eigenvectors;
    numkit::phase_normalize_columns(vecs);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double da = eig.eigenvalues(a), db = eig.eigenvalues(b);
        if (std::abs(da - db) > 1e-14 * std::max(1.0, std::abs(da) + std::abs(db))) {
            return da > db;
        }
        for (int r = 0; r < n; ++r) {
            Complex za = vecs(r, a), zb = vecs(r, b);
            if (std::abs(za.real() - zb.real()) > 1e-12) return za.real() > zb.real();
            if (std::abs(za.imag() - zb.imag()) > 1e-12) return za.imag() > zb.imag();
        }
        return a < b;
    });
    SpectralInit out;
    out.u0 = ComplexMatrix(n, n);
    for (int k = 0; k < n; ++k) out.u0.col(k) = vecs.col(order[k]);
    out.min_gap = std::numeric_limits<double>::infinity();
    double scale = std::max(1.0, std::abs(eig.eigenvalues.maxCoeff()));
    for (int k = 0; k + 1 < n; ++k) {
        out.min_gap = std::min(out.min_gap,
                               std::abs(eig.eigenvalues(k + 1) - eig.eigenvalues(k)) / scale);
    }
    if (n == 1) out.min_gap = std::numeric_limits<double>::infinity();
    out.degenerate = out.min_gap < opts.spec_gap_tol;
    return out;
}

ComplexMatrix extract_coefficients(const VTensor& v, const ComplexMatrix& u,
                                   const SolveOptions& opts) {
    const int s = v.num_samples;
    const int n_err = v.num_errors;
    ComplexMatrix c = ComplexMatrix::Zero(n_err, s);
    std::vector<ComplexMatrix> t = transform_slices(v, u);
    for (int i = 0; i < s; ++i) {
        double g = std::real(v.gram(i, i));
        for (int n = 0; n < n_err; ++n) {
            double mag2 = std::real(t[i * s + i](n, n)) / std::max(g, kTiny);
            c(n, i) = std::sqrt(std::max(mag2, 0.0));
        }
    }
    // Phase assignment. Every entry T_nm(i,j) = conj(c_n(i)) c_m(j) g_ij ties
    // the phases of two coefficients together, including the off-diagonal
    // entries of a sample's own slice (which carry the cross-error signs when
    // samples split into mutually orthogonal groups). Grow a maximum-
    // reliability spanning forest over the (error, sample) nodes and read
    // each phase off its strongest constraint.
    const double floor = overlap_floor(v, opts);
    const double cmax = c.cwiseAbs().maxCoeff();
    const double ctol = opts.c_zero_rel * cmax;
    const int n_nodes = n_err * s;
    auto node_of = [s](int n, int i) { return n * s + i; };
    std::vector<double> phase(n_nodes, 0.0);
    std::vector<int> component(n_nodes, -1);
    std::vector<char> active(n_nodes, 0);
    for (int n = 0; n < n_err; ++n) {
        for (int i = 0; i < s; ++i) active[node_of(n, i)] = std::abs(c(n, i)) > ctol ? 1 : 0;
    }
    auto edge = [&](int from, int to, double* rel, double* delta) {
        int n = from / s, i = from % s;
        int m = to / s, j = to % s;
        Complex g = v.gram(i, j);
        if (std::abs(g) <= floor && i != j) return false;
        Complex entry = t[i * s + j](n, m);
        *rel = std::abs(entry);
        // A phase edge is only trustworthy when the entry is carried by the
        // model magnitude |c_n(i)| |c_m(j)| |g|; entries far below it are
        // either orthogonal-block zeros or epsilon noise.
        double model_mag = std::abs(c(n, i)) * std::abs(c(m, j)) * std::abs(g);
        if (*rel < 0.5 * model_mag || model_mag < kTiny) return false;
        *delta = std::arg(entry) - std::arg(g);
        return true;
    };
    std::vector<double> best_rel(n_nodes, -1.0);
    std::vector<int> best_from(n_nodes, -1);
    std::vector<double> best_delta(n_nodes, 0.0);
    int n_comp = 0;
    while (true) {
        int root = -1;
        double root_mag = -1.0;
        for (int k = 0; k < n_nodes; ++k) {
            if (!active[k] || component[k] >= 0) continue;
            double mag = std::abs(c(k / s, k % s));
            if (mag > root_mag) {
                root_mag = mag;
                root = k;
            }
        }
        if (root < 0) break;
        int comp = n_comp++;
        std::fill(best_rel.begin(), best_rel.end(), -1.0);
        component[root] = comp;
        phase[root] = 0.0;
        int latest = root;
        while (true) {
            for (int k = 0; k < n_nodes; ++k) {
                if (!active[k] || component[k] >= 0) continue;
                double rel, delta;
                if (edge(latest, k, &rel, &delta) && rel > best_rel[k]) {
                    best_rel[k] = rel;
                    best_from[k] = latest;
                    best_delta[k] = delta;
                }
            }
            int pick = -1;
            double pick_rel = 0.0;
            for (int k = 0; k < n_nodes; ++k) {
                if (!active[k] || component[k] >= 0) continue;
                if (best_rel[k] > pick_rel) {
                    pick_rel = best_rel[k];
                    pick = k;
                }
            }
            if (pick < 0) break;
            component[pick] = comp;
            phase[pick] = phase[best_from[pick]] + best_delta[pick];
            latest = pick;
        }
        // Component gauge: the lowest error index present, at its lowest
        // sample, gets a real nonnegative coefficient.
        int anchor = -1;
        for (int n = 0; n < n_err && anchor < 0; ++n) {
            for (int i = 0; i < s; ++i) {
                int k = node_of(n, i);
                if (component[k] == comp) {
                    anchor = k;
                    break;
                }
            }
        }
        double shift = -phase[anchor];
        for (int k = 0; k < n_nodes; ++k) {
            if (component[k] == comp) phase[k] += shift;
        }
    }
    for (int n = 0; n < n_err; ++n) {
        for (int i = 0; i < s; ++i) {
            int k = node_of(n, i);
            if (active[k]) c(n, i) *= std::exp(Complex(0.0, phase[k]));
        }
    }
    return c;
}

IntMatrix infer_gamma(const VTensor& v, const ComplexMatrix& u, const SolveOptions& opts) {
    ComplexMatrix c = extract_coefficients(v, u, opts);
    std::vector<bool> mask = compute_zero_mask(c, opts.c_zero_rel, nullptr);
    std::vector<ComplexMatrix> transformed = transform_slices(v, u);
    GammaResult g = infer_gamma_impl(v, transformed, c, mask, opts);
    if (g.repairs > opts.flip_budget) {
        throw InconsistentGamma("infer_gamma: transitivity repair needed " +
                                std::to_string(g.repairs) + " flips (budget " +
                                std::to_string(opts.flip_budget) + ")");
    }
    return g.gamma;
}

double residual_rel(const VTensor& v, const ComplexMatrix& u, const ComplexMatrix& c,
                    const IntMatrix& gamma) {
    std::vector<ComplexMatrix> transformed = transform_slices(v, u);
    return residual_impl(v, transformed, c, gamma, nullptr);
}

CriterionSolution solve_factorization(const VTensor& v, const SolveOptions& opts) {
    if (v.num_samples < 2) {
        throw DegenerateSampleSet("solve_factorization: need at least two samples");
    }
    SpectralInit init = spectral_init(v, opts);
    ComplexMatrix u = init.u0;
    Evaluation e = evaluate(v, u, opts);
    // The per-error dichotomy is part of the criterion: a candidate whose
    // coefficients mix zero and nonzero magnitudes across samples loses to
    // any candidate that keeps them uniform, regardless of residual.
    auto better = [](const Evaluation& a, const Evaluation& b) {
        bool a_ok = a.dichotomy_violations.empty();
        bool b_ok = b.dichotomy_violations.empty();
        if (a_ok != b_ok) return a_ok;
        return a.residual < b.residual;
    };
    ComplexMatrix best_u = u;
    Evaluation best = e;
    if (init.degenerate) {
        ComplexMatrix u_jd = joint_diagonalize(v, u, opts);
        Evaluation e_jd = evaluate(v, u_jd, opts);
        if (better(e_jd, best)) {
            best = e_jd;
            best_u = u_jd;
            u = u_jd;
            e = e_jd;
        }
    }
    double prev = e.residual;
    int iters = 0;
    bool converged = false;
    for (; iters < opts.max_iters; ++iters) {
        if (best.residual < 1e-15) {
            converged = true;
            break;
        }
        u = riemannian_step(v, u, e.c, e.gamma);
        e = evaluate(v, u, opts);
        if (better(e, best)) {
            best = e;
            best_u = u;
        }
        if (std::abs(prev - e.residual) < opts.refine_tol * std::max(prev, 1e-30)) {
            converged = true;
            break;
        }
        prev = e.residual;
    }

    ComplexMatrix final_u = canonicalize(v, best_u, opts);
    Evaluation fe = evaluate(v, final_u, opts);
    gauge_fix(final_u, fe.c, fe.mask);

    CriterionSolution sol;
    sol.u = final_u;
    sol.c = fe.c;
    sol.gamma = fe.gamma;
    sol.zero_mask = fe.mask;
    sol.dichotomy_violations = fe.dichotomy_violations;
    sol.dichotomy_ok = fe.dichotomy_violations.empty();
    sol.gamma_repairs = fe.gamma_repairs;
    sol.converged = converged && fe.gamma_repairs <= opts.flip_budget;
    sol.iterations = iters;
    sol.degenerate_spectrum = init.degenerate;
    std::vector<ComplexMatrix> transformed = transform_slices(v, final_u);
    sol.residual_rel = residual_impl(v, transformed, sol.c, sol.gamma, &sol.epsilon);

    // Residuals under the two nearest alternative Gamma choices, so callers
    // can judge how decisive the inference was.
    std::vector<std::tuple<double, int, int>> candidates;
    for (int n = 0; n < v.num_errors; ++n) {
        for (int m = n + 1; m < v.num_errors; ++m) {
            if (sol.zero_mask[n] || sol.zero_mask[m]) continue;
            candidates.emplace_back(std::abs(fe.gamma_statistics(n, m) - opts.gamma_threshold), n,
                                    m);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    for (size_t k = 0; k < candidates.size() && k < 2; ++k) {
        auto [dist, n, m] = candidates[k];
        IntMatrix alt = sol.gamma;
        alt(n, m) = alt(m, n) = 1 - alt(n, m);
        GammaAlternative ga;
        ga.n = n;
        ga.m = m;
        ga.flipped_to = alt(n, m);
        ga.residual_rel = residual_impl(v, transformed, sol.c, alt, nullptr);
        sol.gamma_alternatives.push_back(ga);
    }
    return sol;
}

std::vector<std::vector<int>> solution_blocks(const CriterionSolution& sol) {
    return gamma_blocks(sol.gamma, sol.zero_mask);
}

NecessaryConditionReport necessary_condition_check(const VTensor& v, const SolveOptions& opts) {
    const int s = v.num_samples;
    const int n_err = v.num_errors;
    const double floor = overlap_floor(v, opts);
    NecessaryConditionReport out;
    ComplexMatrix stacked = ComplexMatrix::Zero(s * n_err, s * n_err);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
            Complex g = v.gram(i, j);
            if (std::abs(g) <= floor) {
                if (i != j) ++out.pairs_skipped;
                continue;
            }
            ComplexMatrix w_ij = v.slice(i, j) / g;
            ComplexMatrix w_ji = v.slice(j, i) / v.gram(j, i);
            out.max_violation =
                std::max(out.max_violation, (w_ij - w_ji.adjoint()).cwiseAbs().maxCoeff());
            for (int n = 0; n < n_err; ++n) {
                for (int m = 0; m < n_err; ++m) {
                    stacked(i * n_err + n, j * n_err + m) = w_ij(n, m);
                }
            }
        }
    }
    numkit::EigResult eig = numkit::eig_hermitian((stacked + stacked.adjoint()) / 2.0,
                                                  Tolerances{.herm_tol = 1.0});
    out.psd_min_eig = eig.eigenvalues.minCoeff();
    out.psd_max_eig = eig.eigenvalues.maxCoeff();
    out.psd_ok = out.psd_min_eig >= -1e-10 * std::max(1.0, out.psd_max_eig);
    return out;
}

ApproximateMetrics approximate_metrics(const VTensor& v, const CriterionSolution& sol,
                                       const SolveOptions& opts) {
    ApproximateMetrics out;
    const int s = v.num_samples;
    double eps2 = 0.0;
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
            const ComplexMatrix& eps = sol.epsilon[i * s + j];
            eps2 += eps.squaredNorm();
            for (int n = 0; n < v.num_errors; ++n) {
                for (int m = 0; m < v.num_errors; ++m) {
                    double e = std::abs(eps(n, m));
                    out.eps_max = std::max(out.eps_max, e);
                    if (sol.zero_mask[n] || sol.zero_mask[m]) continue;
                    double cc = std::abs(sol.c(n, i)) * std::abs(sol.c(m, j));
                    if (cc > opts.floor_eps) {
                        double ratio = e / cc;
                        out.ratio_max = std::max(out.ratio_max, ratio);
                        if (sol.gamma(n, m) == 0) {
                            out.near_orthogonality_defect =
                                std::max(out.near_orthogonality_defect, ratio);
                        }
                    }
                }
            }
        }
    }
    out.eps_frobenius = std::sqrt(eps2);
    return out;
}

KlReductionReport kl_reduction_check(const std::vector<ComplexVector>& codewords,
                                     const channels::KrausChannel& channel,
                                     const SolveOptions& opts) {
    KlReductionReport out;
    const int k = static_cast<int>(codewords.size());
    const int n_err = channel.num_ops();
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j <= i; ++j) {
            Complex g = codewords[j].dot(codewords[i]);
            double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(g - expect) > 1e-10) {
                throw DomainViolation("kl_reduction_check: codewords must be orthonormal");
            }
        }
    }
    out.h = ComplexMatrix::Zero(n_err, n_err);
    std::vector<std::vector<ComplexVector>> images(n_err);
    for (int n = 0; n < n_err; ++n) {
        for (int i = 0; i < k; ++i) images[n].push_back(channel.ops[n] * codewords[i]);
    }
    for (int n = 0; n < n_err; ++n) {
        for (int m = 0; m < n_err; ++m) {
            Complex mean = 0.0;
            for (int i = 0; i < k; ++i) mean += images[n][i].dot(images[m][i]);
            out.h(n, m) = mean / static_cast<double>(k);
        }
    }
    for (int n = 0; n < n_err; ++n) {
        for (int m = 0; m < n_err; ++m) {
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) {
                    Complex entry = images[n][i].dot(images[m][j]);
                    Complex expect = (i == j) ? out.h(n, m) : Complex(0, 0);
                    out.kl_defect = std::max(out.kl_defect, std::abs(entry - expect));
                }
            }
        }
    }
    double scale = std::max(1.0, out.h.cwiseAbs().maxCoeff());
    out.kl_holds = out.kl_defect <= 1e-10 * scale;

    // The induced alphabet of random codeword superpositions must satisfy the
    // factorized criterion with alpha-independent coefficients.
    alphabets::AlphabetFamily family = alphabets::kl_codeword_family(codewords);
    alphabets::SamplerOptions sampler;
    sampler.strategy = alphabets::SampleStrategy::UniformRandom;
    sampler.count = std::max(4, 2 * k);
    sampler.seed = opts.seed;
    alphabets::SampleSet samples = alphabets::sample_parameters(family, sampler);
    VTensor v = build_v_tensor(channel, samples);
    CriterionSolution sol = solve_factorization(v, opts);
    out.nlqec_residual = sol.residual_rel;
    out.gamma = sol.gamma;
    for (int n = 0; n < n_err; ++n) {
        Complex mean = sol.c.row(n).mean();
        for (int i = 0; i < samples.size(); ++i) {
            out.c_spread = std::max(out.c_spread, std::abs(sol.c(n, i) - mean));
        }
    }
    out.nlqec_ok = sol.residual_rel <= 10.0 * opts.tol.eig_tol && sol.dichotomy_ok;
    return out;
}

ComplexMatrix jn_operator(const CriterionSolution& sol, const alphabets::SampleSet& samples,
                          int n, double rank_tol) {
    if (n < 0 || n >= sol.c.rows()) throw IndexOutOfRange("jn_operator: bad error index");
    ComplexMatrix targets(samples.states.rows(), samples.size());
    for (int j = 0; j < samples.size(); ++j) {
        targets.col(j) = sol.c(n, j) * samples.states.col(j);
    }
    return numkit::span_map(samples.states, targets, rank_tol, 1e12).op;
}

Complex squeezed_omega(Complex alpha, Complex beta, Complex xi) {
    double r = std::abs(xi);
    Complex phase = r > 0 ? xi / r : Complex(1, 0);
    return beta * std::cosh(r) - std::conj(alpha) * phase * std::sinh(r);
}

OrthogonalRatio squeezed_orthogonal_ratio(const hilbert::FockSpace& space, Complex xi,
                                          Complex alpha) {
    double r = std::abs(xi);
    double sh2 = std::sinh(r) * std::sinh(r);
    Complex omega = squeezed_omega(alpha, alpha, xi);
    OrthogonalRatio out;
    out.formula = sh2 / (std::norm(omega) + sh2);

    ComplexMatrix squeezer = hilbert::squeeze_op(xi, space);
    ComplexVector psi = squeezer * hilbert::coherent_state(alpha, space);
    ComplexVector lowered = hilbert::annihilation_op(space) * psi;
    Complex mean_a = psi.dot(lowered);
    ComplexVector orth = lowered - mean_a * psi;
    double denom = lowered.squaredNorm();
    out.direct = denom > 0 ? orth.squaredNorm() / denom : 0.0;
    return out;
}

EpsilonBound squeezed_epsilon_term(Complex alpha, Complex beta, Complex xi) {
    double r = std::abs(xi);
    Complex phase = r > 0 ? xi / r : Complex(1, 0);
    Complex overlap = std::exp(-0.5 * std::norm(alpha) - 0.5 * std::norm(beta) +
                               std::conj(alpha) * beta);
    EpsilonBound out;
    out.direct = (squeezed_omega(alpha, beta, xi) - squeezed_omega(beta, beta, xi)) * overlap;
    out.formula = (std::conj(beta) - std::conj(alpha)) * phase * std::sinh(r) * overlap;
    return out;
}

double cat_overlap_identity_defect(const hilbert::FockSpace& space, Complex alpha, Complex beta) {
    ComplexVector ap = hilbert::coherent_state_unchecked(alpha, space);
    ComplexVector am = hilbert::coherent_state_unchecked(-alpha, space);
    ComplexVector bp = hilbert::coherent_state_unchecked(beta, space);
    ComplexVector bm = hilbert::coherent_state_unchecked(-beta, space);
    const double inv = 1.0 / std::sqrt(2.0);
    ComplexVector ae = inv * (ap + am), ao = inv * (ap - am);
    ComplexVector be = inv * (bp + bm), bo = inv * (bp - bm);
    Complex lhs = ae.dot(be) - ao.dot(bo);
    Complex rhs = am.dot(bp) + ap.dot(bm);
    return std::abs(lhs - rhs);
}

}  // namespace nlqec::criterion
