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

#include "nlqec/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <sstream>

namespace nlqec::scenarios {

namespace {

int log_level() {
    const char* env = std::getenv("NLQEC_LOG");
    if (!env) return 0;
    std::string s(env);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "nlqec: %s\n", msg.c_str());
}

void require_keys(const json& obj, const std::string& where,
                  const std::vector<std::string>& allowed,
                  const std::vector<std::string>& required = {}) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
    for (const std::string& key : required) {
        if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    }
}

double number_at(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return obj.at(key).get<double>();
}

void validate_axis(const json& axis) {
    require_keys(axis, "alphabet.domain[]",
                 {"name", "min", "max", "center", "halfwidth", "values"}, {"name"});
    int forms = 0;
    if (axis.contains("min") || axis.contains("max")) {
        if (!(axis.contains("min") && axis.contains("max"))) {
            throw ConfigError("alphabet.domain[]: min and max must come together");
        }
        ++forms;
    }
    if (axis.contains("center") || axis.contains("halfwidth")) {
        if (!(axis.contains("center") && axis.contains("halfwidth"))) {
            throw ConfigError("alphabet.domain[]: center and halfwidth must come together");
        }
        ++forms;
    }
    if (axis.contains("values")) ++forms;
    if (forms != 1) {
        throw ConfigError("alphabet.domain[]: give exactly one of {min,max}, "
                          "{center,halfwidth}, {values}");
    }
}

const std::vector<std::string> kFamilies = {"coherent",       "squeezed_coherent", "even_cat",
                                            "dephasing_pair", "fixed_phase",       "kl_codewords"};

struct BuiltScenario {
    json config;
    int space_dim = 0;
    std::optional<hilbert::FockSpace> fock;
    alphabets::AlphabetFamily family;
    alphabets::SampleSet samples;
    std::optional<channels::KrausChannel> channel;
    criterion::SolveOptions solve_opts;
    recovery::RecoveryOptions rec_opts;
    std::string recovery_mode = "span";
    double accept_residual = 1e-8;
    double approx_ceiling = 0.5;
    int resolved_n_max = 0;
};

alphabets::Axis axis_from_json(const json& j) {
    alphabets::Axis axis;
    axis.name = j.at("name").get<std::string>();
    if (j.contains("values")) {
        alphabets::Discrete d;
        for (const json& v : j.at("values")) d.values.push_back(v.get<double>());
        if (d.values.empty()) throw ConfigError("alphabet.domain: empty value list");
        axis.range = d;
    } else if (j.contains("center")) {
        double c = number_at(j, "center", "alphabet.domain");
        double h = number_at(j, "halfwidth", "alphabet.domain");
        axis.range = alphabets::Interval{c - h, c + h};
    } else {
        axis.range = alphabets::Interval{number_at(j, "min", "alphabet.domain"),
                                         number_at(j, "max", "alphabet.domain")};
    }
    return axis;
}

double axis_abs_max(const alphabets::Axis& axis) {
    if (axis.is_discrete()) {
        double m = 0.0;
        for (double v : std::get<alphabets::Discrete>(axis.range).values) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }
    const auto& iv = std::get<alphabets::Interval>(axis.range);
    return std::max(std::abs(iv.lo), std::abs(iv.hi));
}

void apply_domain_overrides(alphabets::AlphabetFamily& family, const json& alphabet) {
    if (!alphabet.contains("domain")) return;
    for (const json& j : alphabet.at("domain")) {
        alphabets::Axis axis = axis_from_json(j);
        bool found = false;
        for (alphabets::Axis& existing : family.domain) {
            if (existing.name == axis.name) {
                existing.range = axis.range;
                found = true;
                break;
            }
        }
        if (!found) {
            throw ConfigError("alphabet.domain: family '" + family.name + "' has no axis '" +
                              axis.name + "'");
        }
    }
}

double family_alpha_max(const alphabets::AlphabetFamily& family) {
    double re = 0.0, im = 0.0;
    for (const alphabets::Axis& axis : family.domain) {
        if (axis.name == "re_alpha") re = axis_abs_max(axis);
        if (axis.name == "im_alpha") im = axis_abs_max(axis);
    }
    return std::sqrt(re * re + im * im);
}

int resolve_n_max(const json& config, const json& alphabet) {
    const json& space = config.at("space");
    if (!space.at("n_max").is_string()) return space.at("n_max").get<int>();
    // "auto": photon budget from the domain, widened for squeezing
    alphabets::AlphabetFamily probe;  // only the domain matters here
    std::string family = alphabet.at("family").get<std::string>();
    hilbert::FockSpace tiny(2);
    if (family == "coherent") {
        probe = alphabets::coherent_family(tiny);
    } else if (family == "squeezed_coherent") {
        probe = alphabets::squeezed_coherent_family(0.0, tiny);
    } else if (family == "even_cat") {
        probe = alphabets::even_cat_family(1.5, tiny);
    } else {
        throw ConfigError("space.n_max: auto is only defined for bosonic families");
    }
    apply_domain_overrides(probe, alphabet);
    double amax = family_alpha_max(probe);
    if (family == "squeezed_coherent") {
        double r = 0.0;
        if (alphabet.contains("fixed") && alphabet.at("fixed").contains("xi_r")) {
            r = alphabet.at("fixed").at("xi_r").get<double>();
        }
        // squeezed tails decay geometrically at tanh^2(r) per photon pair,
        // so the cutoff needs ~30/(-ln tanh r) extra levels on top of the
        // displaced-Gaussian budget
        double tail = r > 1e-6 ? 30.0 / (-std::log(std::tanh(r))) : 0.0;
        return static_cast<int>(
            std::ceil(amax * amax + 8.0 * amax * std::exp(r) + 30.0 + tail));
    }
    return hilbert::default_n_max(amax);
}

BuiltScenario build_scenario(const json& config) {
    BuiltScenario sc;
    sc.config = config;
    const json& space = config.at("space");
    const json& alphabet = config.at("alphabet");
    std::string family_name = alphabet.at("family").get<std::string>();
    const json fixed = alphabet.contains("fixed") ? alphabet.at("fixed") : json::object();

    std::string space_type = space.at("type").get<std::string>();
    if (space_type == "fock") {
        sc.resolved_n_max = resolve_n_max(config, alphabet);
        sc.fock.emplace(sc.resolved_n_max);
        sc.space_dim = sc.fock->dim;
    } else {
        sc.space_dim = 1 << space.at("n").get<int>();
    }

    if (family_name == "coherent") {
        if (!sc.fock) throw ConfigError("coherent family needs a fock space");
        sc.family = alphabets::coherent_family(*sc.fock);
    } else if (family_name == "squeezed_coherent") {
        if (!sc.fock) throw ConfigError("squeezed_coherent family needs a fock space");
        double r = fixed.contains("xi_r") ? fixed.at("xi_r").get<double>() : 0.0;
        double theta = fixed.contains("xi_theta") ? fixed.at("xi_theta").get<double>() : 0.0;
        sc.family = alphabets::squeezed_coherent_family(std::polar(r, theta), *sc.fock);
    } else if (family_name == "even_cat") {
        if (!sc.fock) throw ConfigError("even_cat family needs a fock space");
        double margin =
            fixed.contains("half_plane_margin") ? fixed.at("half_plane_margin").get<double>() : 1.5;
        sc.family = alphabets::even_cat_family(margin, *sc.fock);
    } else if (family_name == "dephasing_pair") {
        if (sc.space_dim != 4) throw ConfigError("dephasing_pair family needs two qubits");
        sc.family = alphabets::dephasing_pair_family();
    } else if (family_name == "fixed_phase") {
        if (sc.space_dim != 4) throw ConfigError("fixed_phase family needs two qubits");
        sc.family = alphabets::fixed_phase_family(number_at(fixed, "phi0", "alphabet.fixed"));
    } else if (family_name == "kl_codewords") {
        std::vector<ComplexVector> codewords;
        for (const json& cw : fixed.at("codewords")) {
            ComplexMatrix m = report::matrix_from_json(cw);
            if (m.cols() != 1) throw ConfigError("codewords must be column vectors");
            codewords.push_back(m.col(0));
        }
        if (codewords.empty() || codewords.front().size() != sc.space_dim) {
            throw ConfigError("codeword dimension does not match the space");
        }
        sc.family = alphabets::kl_codeword_family(codewords);
    }
    apply_domain_overrides(sc.family, alphabet);

    const json& sampler = alphabet.at("sampler");
    alphabets::SamplerOptions so;
    std::string strategy = sampler.at("strategy").get<std::string>();
    if (strategy == "grid") {
        so.strategy = alphabets::SampleStrategy::Grid;
    } else if (strategy == "uniform_random") {
        so.strategy = alphabets::SampleStrategy::UniformRandom;
    } else if (strategy == "explicit") {
        so.strategy = alphabets::SampleStrategy::Explicit;
    } else {
        throw ConfigError("sampler.strategy: unknown strategy '" + strategy + "'");
    }
    if (sampler.contains("count")) so.count = sampler.at("count").get<int>();
    if (sampler.contains("seed")) so.seed = sampler.at("seed").get<uint64_t>();
    if (sampler.contains("explicit")) {
        for (const json& p : sampler.at("explicit")) {
            so.explicit_params.push_back(p.get<std::vector<double>>());
        }
    }
    if (config.contains("recovery") && config.at("recovery").contains("rank_tol")) {
        so.rank_tol = config.at("recovery").at("rank_tol").get<double>();
    }
    sc.samples = alphabets::sample_parameters(sc.family, so);

    const json& channel = config.at("channel");
    std::string channel_type = channel.at("type").get<std::string>();
    if (channel_type == "simplified_loss") {
        if (!sc.fock) throw ConfigError("simplified_loss needs a fock space");
        sc.channel.emplace(channels::simplified_loss(*sc.fock));
    } else if (channel_type == "amplitude_damping") {
        if (!sc.fock) throw ConfigError("amplitude_damping needs a fock space");
        double gamma = number_at(channel, "gamma", "channel");
        int k_max = channel.contains("k_max")
                        ? channel.at("k_max").get<int>()
                        : channels::default_k_max(gamma, family_alpha_max(sc.family));
        sc.channel.emplace(channels::amplitude_damping(gamma, *sc.fock, k_max));
    } else if (channel_type == "collective_dephasing") {
        if (sc.space_dim != 4) throw ConfigError("collective_dephasing needs two qubits");
        sc.channel.emplace(channels::collective_dephasing(number_at(channel, "p", "channel")));
    } else if (channel_type == "custom") {
        std::vector<ComplexMatrix> ops;
        for (const json& op : channel.at("ops")) ops.push_back(report::matrix_from_json(op));
        std::string label =
            channel.contains("label") ? channel.at("label").get<std::string>() : "custom";
        if (ops.empty() || ops.front().rows() != sc.space_dim) {
            throw ConfigError("custom channel dimension does not match the space");
        }
        sc.channel.emplace(channels::custom_channel(std::move(ops), label));
    } else {
        throw ConfigError("channel.type: unknown type '" + channel_type + "'");
    }

    if (config.contains("solver")) {
        const json& s = config.at("solver");
        if (s.contains("max_iters")) sc.solve_opts.max_iters = s.at("max_iters").get<int>();
        if (s.contains("refine_tol")) sc.solve_opts.refine_tol = s.at("refine_tol").get<double>();
        if (s.contains("spec_gap_tol")) {
            sc.solve_opts.spec_gap_tol = s.at("spec_gap_tol").get<double>();
        }
        if (s.contains("gamma_threshold")) {
            sc.solve_opts.gamma_threshold = s.at("gamma_threshold").get<double>();
        }
        if (s.contains("flip_budget")) sc.solve_opts.flip_budget = s.at("flip_budget").get<int>();
        if (s.contains("seed")) sc.solve_opts.seed = s.at("seed").get<uint64_t>();
        if (s.contains("accept_residual")) {
            sc.accept_residual = s.at("accept_residual").get<double>();
        }
        if (s.contains("approx_ceiling")) sc.approx_ceiling = s.at("approx_ceiling").get<double>();
    }
    if (config.contains("recovery")) {
        const json& r = config.at("recovery");
        if (r.contains("mode")) sc.recovery_mode = r.at("mode").get<std::string>();
        if (r.contains("rank_tol")) sc.rec_opts.rank_tol = r.at("rank_tol").get<double>();
        if (r.contains("cond_max")) sc.rec_opts.cond_max = r.at("cond_max").get<double>();
        if (r.contains("block_tol")) sc.rec_opts.block_tol = r.at("block_tol").get<double>();
    }
    sc.rec_opts.accept_residual = sc.accept_residual;
    return sc;
}

json diagnostics_section(const BuiltScenario& sc) {
    double max_trunc = 0.0;
    int guard = std::min(hilbert::kDefaultGuardBand, static_cast<int>(sc.space_dim) - 1);
    for (int j = 0; j < sc.samples.size(); ++j) {
        max_trunc = std::max(
            max_trunc, hilbert::truncation_defect(sc.samples.states.col(j), guard));
    }
    return json{
        {"space_dim", sc.space_dim},
        {"resolved_n_max", sc.resolved_n_max},
        {"tp_defect", sc.channel->tp_defect},
        {"trace_preserving", sc.channel->trace_preserving()},
        {"num_errors", sc.channel->num_ops()},
        {"sample_count", sc.samples.size()},
        {"sample_rank", sc.samples.rank},
        {"samples_pruned", sc.samples.pruned},
        {"gram_cond", sc.samples.gram_cond},
        {"max_truncation_defect", max_trunc},
    };
}

json params_json(const alphabets::SampleSet& samples) {
    json out = json::array();
    for (const auto& p : samples.params) out.push_back(p);
    return out;
}

int criterion_exit_code(const BuiltScenario& sc, const criterion::CriterionSolution& sol) {
    if (!sol.dichotomy_ok) return kExitFail;
    if (sol.residual_rel <= sc.accept_residual) return kExitExact;
    if (sol.residual_rel <= sc.approx_ceiling) return kExitApproximate;
    return kExitFail;
}

json base_report(const BuiltScenario& sc) {
    return json{
        {"config", sc.config},
        {"tool", {{"name", "nlqec"}, {"version", NLQEC_VERSION}}},
        {"diagnostics", diagnostics_section(sc)},
        {"sample_params", params_json(sc.samples)},
    };
}

/// Family-specific closed-form diagnostics attached to the criterion report.
json family_extras(const BuiltScenario& sc) {
    json extras = json::object();
    std::string family = sc.family.name;
    if (family == "squeezed_coherent" && sc.fock) {
        double r = sc.family.fixed_params.at("xi_r");
        double theta = sc.family.fixed_params.at("xi_theta");
        Complex xi = std::polar(r, theta);
        double sh2 = std::sinh(r) * std::sinh(r);
        // one squeezer for all samples; rebuilding it per sample would repeat
        // a dense eigendecomposition
        ComplexMatrix lower = hilbert::annihilation_op(*sc.fock);
        json rows = json::array();
        for (int j = 0; j < sc.samples.size(); ++j) {
            const auto& p = sc.samples.params[j];
            Complex alpha(p[0], p[1]);
            Complex omega = criterion::squeezed_omega(alpha, alpha, xi);
            ComplexVector psi = sc.samples.states.col(j);
            ComplexVector lowered = lower * psi;
            Complex mean_a = psi.dot(lowered);
            double denom = lowered.squaredNorm();
            double direct =
                denom > 0 ? (lowered - mean_a * psi).squaredNorm() / denom : 0.0;
            rows.push_back({{"alpha", report::to_json(alpha)},
                            {"ratio_formula", sh2 / (std::norm(omega) + sh2)},
                            {"ratio_direct", direct}});
        }
        extras["orthogonal_component_ratio"] = rows;
    }
    if (family == "even_cat" && sc.fock && sc.samples.size() >= 2) {
        Complex a(sc.samples.params[0][0], sc.samples.params[0][1]);
        Complex b(sc.samples.params[1][0], sc.samples.params[1][1]);
        extras["cat_overlap_identity_defect"] =
            criterion::cat_overlap_identity_defect(*sc.fock, a, b);
    }
    return extras;
}

struct CheckOutput {
    BuiltScenario scenario;
    criterion::VTensor v;
    criterion::CriterionSolution sol;
    json report;
    int exit_code;
};

CheckOutput run_check_impl(const json& raw) {
    auto start = std::chrono::steady_clock::now();
    CheckOutput out{build_scenario(validate_config(raw)), {}, {}, {}, kExitFail};
    out.v = criterion::build_v_tensor(*out.scenario.channel, out.scenario.samples);
    out.sol = criterion::solve_factorization(out.v, out.scenario.solve_opts);
    criterion::NecessaryConditionReport nc =
        criterion::necessary_condition_check(out.v, out.scenario.solve_opts);
    criterion::ApproximateMetrics am =
        criterion::approximate_metrics(out.v, out.sol, out.scenario.solve_opts);
    out.exit_code = criterion_exit_code(out.scenario, out.sol);
    out.report = base_report(out.scenario);
    out.report["criterion"] = report::criterion_section(out.sol, nc, am);
    out.report["criterion"]["accepted"] = out.exit_code == kExitExact;
    out.report["criterion"]["regime"] = out.exit_code == kExitExact     ? "exact"
                                        : out.exit_code == kExitApproximate ? "approximate"
                                                                            : "fail";
    json extras = family_extras(out.scenario);
    if (!extras.empty()) out.report["criterion"]["family_diagnostics"] = extras;
    out.report["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log_info("check: residual_rel=" + std::to_string(out.sol.residual_rel) +
             " regime=" + out.report["criterion"]["regime"].get<std::string>());
    return out;
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"example1_coherent",
            "example2_dephasing_dfs",
            "example2_dephasing_fixedphase",
            "example3_squeezed_small_alpha",
            "example3_squeezed_large_alpha",
            "example4_cat",
            "appendixF_damping",
            "kl_repetition3"};
}

json builtin_config(const std::string& name) {
    if (name == "example1_coherent") {
        return json{
            {"space", {{"type", "fock"}, {"n_max", 60}}},
            {"alphabet",
             {{"family", "coherent"},
              {"domain",
               json::array({{{"name", "re_alpha"}, {"min", 1.0}, {"max", 2.5}},
                            {{"name", "im_alpha"}, {"values", json::array({0.0})}}})},
              {"sampler", {{"strategy", "grid"}, {"count", 4}, {"seed", 1}}}}},
            {"channel", {{"type", "simplified_loss"}}},
            {"recovery", {{"mode", "span"}}},
        };
    }
    if (name == "example2_dephasing_dfs") {
        return json{
            {"space", {{"type", "qubits"}, {"n", 2}}},
            {"alphabet",
             {{"family", "dephasing_pair"},
              {"domain",
               json::array({{{"name", "j"}, {"values", json::array({0.0, 1.0})}},
                            {{"name", "theta"},
                             {"values", json::array({M_PI / 8, M_PI / 3})}},
                            {{"name", "phi"}, {"values", json::array({0.0, M_PI / 2})}}})},
              {"sampler", {{"strategy", "explicit"}, {"seed", 1}}}}},
            {"channel", {{"type", "collective_dephasing"}, {"p", 0.75}}},
            {"recovery", {{"mode", "span"}}},
        };
    }
    if (name == "example2_dephasing_fixedphase") {
        return json{
            {"space", {{"type", "qubits"}, {"n", 2}}},
            {"alphabet",
             {{"family", "fixed_phase"},
              {"fixed", {{"phi0", 0.7}}},
              {"domain", json::array({{{"name", "theta"}, {"min", 0.3}, {"max", 1.35}}})},
              {"sampler", {{"strategy", "grid"}, {"count", 4}, {"seed", 1}}}}},
            {"channel", {{"type", "collective_dephasing"}, {"p", 0.3}}},
            {"recovery", {{"mode", "span"}}},
        };
    }
    if (name == "example3_squeezed_small_alpha" || name == "example3_squeezed_large_alpha") {
        bool small = name == "example3_squeezed_small_alpha";
        return json{
            {"space", {{"type", "fock"}, {"n_max", "auto"}}},
            {"alphabet",
             {{"family", "squeezed_coherent"},
              {"fixed", {{"xi_r", small ? 1.0 : 0.5}, {"xi_theta", 0.0}}},
              {"domain",
               json::array({{{"name", "re_alpha"},
                             {"center", small ? 1.0 : 10.0},
                             {"halfwidth", small ? 0.4 : 2.0}},
                            {{"name", "im_alpha"}, {"values", json::array({0.0})}}})},
              {"sampler", {{"strategy", "grid"}, {"count", 5}, {"seed", 1}}}}},
            {"channel", {{"type", "simplified_loss"}}},
            {"recovery", {{"mode", "span"}}},
        };
    }
    if (name == "example4_cat") {
        return json{
            {"space", {{"type", "fock"}, {"n_max", 80}}},
            {"alphabet",
             {{"family", "even_cat"},
              {"fixed", {{"half_plane_margin", 1.5}}},
              {"domain",
               json::array({{{"name", "re_alpha"}, {"center", 4.0}, {"halfwidth", 1.0}},
                            {{"name", "im_alpha"}, {"values", json::array({0.0})}}})},
              {"sampler", {{"strategy", "grid"}, {"count", 3}, {"seed", 1}}}}},
            {"channel", {{"type", "simplified_loss"}}},
            {"recovery", {{"mode", "parity_shift"}}},
        };
    }
    if (name == "appendixF_damping") {
        return json{
            {"space", {{"type", "fock"}, {"n_max", 60}}},
            {"alphabet",
             {{"family", "coherent"},
              {"domain",
               json::array({{{"name", "re_alpha"}, {"center", 2.0}, {"halfwidth", 0.4}},
                            {{"name", "im_alpha"}, {"values", json::array({0.0})}}})},
              {"sampler", {{"strategy", "grid"}, {"count", 5}, {"seed", 1}}}}},
            {"channel", {{"type", "amplitude_damping"}, {"gamma", 0.999}}},
            {"recovery", {{"mode", "identity_polar"}}},
        };
    }
    if (name == "kl_repetition3") {
        hilbert::QubitRegister reg(3);
        json codewords = json::array();
        ComplexMatrix c0 = ComplexVector::Unit(8, 0);
        ComplexMatrix c7 = ComplexVector::Unit(8, 7);
        codewords.push_back(report::to_json(c0));
        codewords.push_back(report::to_json(c7));
        json ops = json::array();
        ops.push_back(report::to_json(ComplexMatrix(0.5 * ComplexMatrix::Identity(8, 8))));
        for (int site = 0; site < 3; ++site) {
            ops.push_back(report::to_json(
                ComplexMatrix(0.5 * hilbert::pauli_op(reg, hilbert::Pauli::X, site))));
        }
        return json{
            {"space", {{"type", "qubits"}, {"n", 3}}},
            {"alphabet",
             {{"family", "kl_codewords"},
              {"fixed", {{"codewords", codewords}}},
              {"sampler", {{"strategy", "uniform_random"}, {"count", 6}, {"seed", 20260808}}}}},
            {"channel", {{"type", "custom"}, {"ops", ops}, {"label", "uniform_bit_flips"}}},
            {"recovery", {{"mode", "span"}}},
        };
    }
    throw ConfigError("unknown builtin scenario '" + name + "'");
}

json validate_config(const json& config) {
    require_keys(config, "config",
                 {"space", "alphabet", "channel", "solver", "recovery", "mixture", "outputs"},
                 {"space", "alphabet", "channel"});
    const json& space = config.at("space");
    require_keys(space, "space", {"type", "n_max", "n"}, {"type"});
    std::string space_type = space.at("type").get<std::string>();
    if (space_type == "fock") {
        if (!space.contains("n_max")) throw ConfigError("space: fock needs n_max");
        if (!space.at("n_max").is_number_integer() &&
            !(space.at("n_max").is_string() && space.at("n_max") == "auto")) {
            throw ConfigError("space.n_max: expected an integer or \"auto\"");
        }
    } else if (space_type == "qubits") {
        if (!space.contains("n")) throw ConfigError("space: qubits needs n");
    } else {
        throw ConfigError("space.type: expected fock or qubits");
    }

    const json& alphabet = config.at("alphabet");
    require_keys(alphabet, "alphabet", {"family", "fixed", "domain", "sampler"},
                 {"family", "sampler"});
    std::string family = alphabet.at("family").get<std::string>();
    if (std::find(kFamilies.begin(), kFamilies.end(), family) == kFamilies.end()) {
        throw ConfigError("alphabet.family: unknown family '" + family + "'");
    }
    if (alphabet.contains("fixed")) {
        static const std::map<std::string, std::vector<std::string>> allowed_fixed = {
            {"coherent", {}},
            {"squeezed_coherent", {"xi_r", "xi_theta"}},
            {"even_cat", {"half_plane_margin"}},
            {"dephasing_pair", {}},
            {"fixed_phase", {"phi0"}},
            {"kl_codewords", {"codewords"}},
        };
        require_keys(alphabet.at("fixed"), "alphabet.fixed", allowed_fixed.at(family));
    }
    if (alphabet.contains("domain")) {
        if (!alphabet.at("domain").is_array()) throw ConfigError("alphabet.domain: expected array");
        for (const json& axis : alphabet.at("domain")) validate_axis(axis);
    }
    require_keys(alphabet.at("sampler"), "alphabet.sampler",
                 {"strategy", "count", "seed", "explicit"}, {"strategy"});

    const json& channel = config.at("channel");
    require_keys(channel, "channel", {"type", "gamma", "k_max", "p", "ops", "label"}, {"type"});

    if (config.contains("solver")) {
        require_keys(config.at("solver"), "solver",
                     {"max_iters", "refine_tol", "spec_gap_tol", "gamma_threshold", "flip_budget",
                      "seed", "accept_residual", "approx_ceiling"});
    }
    if (config.contains("recovery")) {
        require_keys(config.at("recovery"), "recovery",
                     {"mode", "rank_tol", "cond_max", "block_tol"});
        if (config.at("recovery").contains("mode")) {
            std::string mode = config.at("recovery").at("mode").get<std::string>();
            if (mode != "span" && mode != "parity_shift" && mode != "identity_polar") {
                throw ConfigError(
                    "recovery.mode: expected span, parity_shift or identity_polar");
            }
        }
    }
    if (config.contains("mixture")) {
        require_keys(config.at("mixture"), "mixture", {"weights"}, {"weights"});
    }
    if (config.contains("outputs")) {
        require_keys(config.at("outputs"), "outputs", {"report", "sweep"});
        if (config.at("outputs").contains("sweep")) {
            const json& sweep = config.at("outputs").at("sweep");
            require_keys(sweep, "outputs.sweep", {"axes", "csv"}, {"axes"});
            if (!sweep.at("axes").is_array() || sweep.at("axes").empty() ||
                sweep.at("axes").size() > 2) {
                throw ConfigError("outputs.sweep.axes: expected one or two axes");
            }
            for (const json& axis : sweep.at("axes")) {
                require_keys(axis, "outputs.sweep.axes[]", {"path", "values"},
                             {"path", "values"});
            }
        }
    }
    return config;
}

RunResult run_check(const json& config) {
    CheckOutput out = run_check_impl(config);
    return RunResult{std::move(out.report), out.exit_code};
}

RunResult run_recover(const json& config) {
    auto start = std::chrono::steady_clock::now();
    CheckOutput chk = run_check_impl(config);
    if (chk.exit_code == kExitFail) {
        chk.report["recovery"] = {{"skipped", true},
                                  {"reason", "criterion residual above approx ceiling"}};
        return RunResult{std::move(chk.report), kExitFail};
    }
    BuiltScenario& sc = chk.scenario;
    sc.rec_opts.approx_mode = chk.exit_code == kExitApproximate;

    recovery::RecoveryChannel rec;
    if (sc.recovery_mode == "parity_shift") {
        if (!sc.fock) throw ConfigError("parity_shift recovery needs a fock space");
        rec = recovery::build_parity_shift_recovery(chk.sol, *sc.channel, sc.samples, *sc.fock,
                                                    sc.rec_opts);
    } else if (sc.recovery_mode == "identity_polar") {
        rec = recovery::build_identity_polar_recovery(chk.sol, *sc.channel, sc.samples,
                                                      sc.rec_opts);
    } else {
        rec = recovery::build_recovery(chk.sol, *sc.channel, sc.samples, sc.rec_opts);
    }

    json fidelity_rows = json::array();
    double min_fidelity = 1.0;
    double prob_defect = 0.0;
    for (int i = 0; i < sc.samples.size(); ++i) {
        ComplexVector psi = sc.samples.states.col(i);
        recovery::FidelityResult f = recovery::recovery_fidelity(psi, *sc.channel, rec);
        json branches = json::array();
        for (size_t q = 0; q < rec.recovery_ops.size(); ++q) {
            try {
                branches.push_back(recovery::branch_fidelity(rec, *sc.channel, psi, q));
            } catch (const ZeroTrace&) {
                branches.push_back(nullptr);
            }
        }
        fidelity_rows.push_back({{"params", sc.samples.params[i]},
                                 {"fidelity", f.fidelity},
                                 {"probability", f.probability},
                                 {"branch_fidelities", branches}});
        min_fidelity = std::min(min_fidelity, f.fidelity);
        if (sc.channel->trace_preserving()) {
            prob_defect = std::max(prob_defect, std::abs(f.probability - 1.0));
        }
    }
    json recovery_json = report::recovery_section(rec);
    recovery_json["fidelity"] = fidelity_rows;
    recovery_json["min_fidelity"] = min_fidelity;
    recovery_json["probability_defect"] = prob_defect;

    if (sc.channel->trace_preserving()) {
        std::vector<double> weights(sc.samples.size(), 1.0 / sc.samples.size());
        if (sc.config.contains("mixture")) {
            weights = sc.config.at("mixture").at("weights").get<std::vector<double>>();
            if (static_cast<int>(weights.size()) != sc.samples.size()) {
                throw ConfigError("mixture.weights length must equal the sample count");
            }
        }
        recovery::MixedStateReport mixed =
            recovery::mixed_state_recovery_check(rec, *sc.channel, weights, sc.samples);
        recovery_json["mixed_state"] = {{"defect", mixed.defect},
                                        {"c_values", mixed.c_values},
                                        {"trace_in", mixed.trace_in},
                                        {"trace_out", mixed.trace_out}};
    }
    chk.report["recovery"] = recovery_json;
    chk.report["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log_info("recover: min_fidelity=" + std::to_string(min_fidelity));
    return RunResult{std::move(chk.report), chk.exit_code};
}

void set_config_path(json& config, const std::string& path, double value) {
    std::vector<std::string> segments;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) segments.push_back(part);
    if (segments.empty()) throw ConfigError("sweep path is empty");
    json* node = &config;
    for (size_t k = 0; k + 1 < segments.size(); ++k) {
        const std::string& seg = segments[k];
        if (node->is_object()) {
            if (!node->contains(seg)) throw ConfigError("sweep path: no key '" + seg + "'");
            node = &node->at(seg);
        } else if (node->is_array()) {
            json* hit = nullptr;
            for (json& element : *node) {
                if (element.is_object() && element.contains("name") &&
                    element.at("name") == seg) {
                    hit = &element;
                    break;
                }
            }
            if (!hit) throw ConfigError("sweep path: no element named '" + seg + "'");
            node = hit;
        } else {
            throw ConfigError("sweep path: cannot descend into '" + seg + "'");
        }
    }
    if (!node->is_object()) throw ConfigError("sweep path: terminal node is not an object");
    (*node)[segments.back()] = value;
}

namespace {

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

SweepResult run_sweep(const json& config, int jobs) {
    json validated = validate_config(config);
    if (!validated.contains("outputs") || !validated.at("outputs").contains("sweep")) {
        throw ConfigError("sweep: config has no outputs.sweep section");
    }
    const json& sweep = validated.at("outputs").at("sweep");
    std::vector<std::string> paths;
    std::vector<std::vector<double>> values;
    for (const json& axis : sweep.at("axes")) {
        paths.push_back(axis.at("path").get<std::string>());
        values.push_back(axis.at("values").get<std::vector<double>>());
        if (values.back().empty()) throw ConfigError("sweep axis has no values");
    }
    std::vector<std::vector<double>> points;
    if (paths.size() == 1) {
        for (double a : values[0]) points.push_back({a});
    } else {
        for (double a : values[0]) {
            for (double b : values[1]) points.push_back({a, b});
        }
    }
    auto run_point = [&](const std::vector<double>& point) -> std::pair<std::string, int> {
        json cfg = validated;
        cfg.erase("outputs");
        for (size_t a = 0; a < paths.size(); ++a) set_config_path(cfg, paths[a], point[a]);
        std::string row;
        for (double x : point) row += format_number(x) + ",";
        try {
            RunResult rr = run_recover(cfg);
            const json& cr = rr.report.at("criterion");
            const json& rec = rr.report.contains("recovery") ? rr.report.at("recovery") : json{};
            double residual = cr.at("residual_rel").get<double>();
            row += format_number(residual) + ",";
            if (rec.contains("min_fidelity")) {
                double min_f = rec.at("min_fidelity").get<double>();
                double sum = 0.0;
                for (const json& fr : rec.at("fidelity")) {
                    sum += fr.at("fidelity").get<double>();
                }
                row += format_number(min_f) + "," +
                       format_number(sum / rec.at("fidelity").size()) + "," +
                       format_number(rec.at("probability_defect").get<double>());
            } else {
                row += "nan,nan,nan";
            }
            return {row, rr.exit_code};
        } catch (const Error&) {
            return {row + "nan,nan,nan,nan", kExitFail};
        }
    };

    std::vector<std::pair<std::string, int>> rows(points.size());
    jobs = std::max(1, jobs);
    size_t next = 0;
    while (next < points.size()) {
        size_t batch = std::min<size_t>(jobs, points.size() - next);
        std::vector<std::future<std::pair<std::string, int>>> futs;
        for (size_t k = 0; k < batch; ++k) {
            futs.push_back(std::async(std::launch::async, run_point, points[next + k]));
        }
        for (size_t k = 0; k < batch; ++k) rows[next + k] = futs[k].get();
        next += batch;
    }

    std::string csv;
    for (const std::string& p : paths) csv += p + ",";
    csv += "residual_rel,min_fidelity,mean_fidelity,probability_defect\n";
    int exit_code = kExitExact;
    auto severity = [](int code) { return code == kExitFail ? 2 : code == kExitApproximate ? 1 : 0; };
    for (const auto& [row, code] : rows) {
        csv += row + "\n";
        if (severity(code) > severity(exit_code)) exit_code = code;
    }
    return SweepResult{std::move(csv), exit_code};
}

}  // namespace nlqec::scenarios
