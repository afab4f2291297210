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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlqec/scenarios.hpp"

namespace py = pybind11;
using namespace nlqec;

namespace {

alphabets::SamplerOptions sampler_options(const std::string& strategy, int count, uint64_t seed,
                                          const std::vector<std::vector<double>>& explicit_params) {
    alphabets::SamplerOptions opts;
    if (strategy == "grid") {
        opts.strategy = alphabets::SampleStrategy::Grid;
    } else if (strategy == "uniform_random") {
        opts.strategy = alphabets::SampleStrategy::UniformRandom;
    } else if (strategy == "explicit") {
        opts.strategy = alphabets::SampleStrategy::Explicit;
    } else {
        throw ConfigError("unknown sampler strategy '" + strategy + "'");
    }
    opts.count = count;
    opts.seed = seed;
    opts.explicit_params = explicit_params;
    return opts;
}

py::dict run_command(const std::string& command, const std::string& config_text) {
    scenarios::json config = scenarios::json::parse(config_text);
    scenarios::RunResult result =
        command == "recover" ? scenarios::run_recover(config) : scenarios::run_check(config);
    py::module_ json_mod = py::module_::import("json");
    py::dict out;
    out["exit_code"] = result.exit_code;
    out["report"] = json_mod.attr("loads")(result.report.dump());
    return out;
}

}  // namespace

PYBIND11_MODULE(_nlqec, m) {
    m.doc() = "Nonlinear QEC criterion checker and recovery-channel builder";

    py::register_exception<ConfigError>(m, "ConfigError");
    static py::exception<Error> base_error(m, "NlqecError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError&) {
            throw;  // handled by the registered exception above
        } catch (const Error& err) {
            py::set_error(base_error, err.what());
        }
    });

    py::class_<hilbert::FockSpace>(m, "FockSpace")
        .def(py::init<int>(), py::arg("n_max"))
        .def_readonly("dim", &hilbert::FockSpace::dim)
        .def("n_max", &hilbert::FockSpace::n_max);

    py::class_<hilbert::QubitRegister>(m, "QubitRegister")
        .def(py::init<int>(), py::arg("n_qubits"))
        .def_readonly("n_qubits", &hilbert::QubitRegister::n_qubits)
        .def_readonly("dim", &hilbert::QubitRegister::dim);

    m.def("annihilation_op", &hilbert::annihilation_op);
    m.def("number_op", &hilbert::number_op);
    m.def("sqrt_number_op", &hilbert::sqrt_number_op);
    m.def("left_shift_op", &hilbert::left_shift_op);
    m.def("coherent_state",
          [](Complex alpha, const hilbert::FockSpace& space) {
              return hilbert::coherent_state(alpha, space);
          },
          py::arg("alpha"), py::arg("space"));
    m.def("displacement_op", &hilbert::displacement_op);
    m.def("squeeze_op", &hilbert::squeeze_op);
    m.def("even_cat_state",
          [](Complex alpha, const hilbert::FockSpace& space) {
              return hilbert::even_cat_state(alpha, space);
          },
          py::arg("alpha"), py::arg("space"));
    m.def("odd_cat_state",
          [](Complex alpha, const hilbert::FockSpace& space) {
              return hilbert::odd_cat_state(alpha, space);
          },
          py::arg("alpha"), py::arg("space"));
    m.def("truncation_defect", &hilbert::truncation_defect);
    m.def("default_n_max", &hilbert::default_n_max);

    py::class_<channels::KrausChannel>(m, "KrausChannel")
        .def_readonly("ops", &channels::KrausChannel::ops)
        .def_readonly("label", &channels::KrausChannel::label)
        .def_readonly("tp_defect", &channels::KrausChannel::tp_defect)
        .def("trace_preserving", &channels::KrausChannel::trace_preserving,
             py::arg("tp_tol") = 1e-10);

    m.def("simplified_loss", &channels::simplified_loss);
    m.def("amplitude_damping", &channels::amplitude_damping, py::arg("gamma"), py::arg("space"),
          py::arg("k_max"));
    m.def("collective_dephasing", &channels::collective_dephasing);
    m.def("custom_channel", &channels::custom_channel, py::arg("ops"),
          py::arg("label") = "custom");

    py::class_<alphabets::AlphabetFamily>(m, "AlphabetFamily")
        .def_readonly("name", &alphabets::AlphabetFamily::name)
        .def("state", [](const alphabets::AlphabetFamily& fam,
                         const std::vector<double>& params) { return fam.generator(params); });

    py::class_<alphabets::SampleSet>(m, "SampleSet")
        .def_readonly("params", &alphabets::SampleSet::params)
        .def_readonly("states", &alphabets::SampleSet::states)
        .def_readonly("gram", &alphabets::SampleSet::gram)
        .def_readonly("rank", &alphabets::SampleSet::rank)
        .def_readonly("seed", &alphabets::SampleSet::seed)
        .def("size", &alphabets::SampleSet::size);

    m.def("coherent_family", &alphabets::coherent_family);
    m.def("squeezed_coherent_family", &alphabets::squeezed_coherent_family);
    m.def("even_cat_family", &alphabets::even_cat_family);
    m.def("dephasing_pair_family", &alphabets::dephasing_pair_family);
    m.def("fixed_phase_family", &alphabets::fixed_phase_family);
    m.def("kl_codeword_family", &alphabets::kl_codeword_family);

    m.def("sample_explicit",
          [](const alphabets::AlphabetFamily& fam, const std::vector<std::vector<double>>& params) {
              return alphabets::make_sample_set(fam, params);
          },
          py::arg("family"), py::arg("params"));
    m.def("sample_parameters",
          [](const alphabets::AlphabetFamily& fam, const std::string& strategy, int count,
             uint64_t seed, const std::vector<std::vector<double>>& explicit_params) {
              return alphabets::sample_parameters(
                  fam, sampler_options(strategy, count, seed, explicit_params));
          },
          py::arg("family"), py::arg("strategy") = "grid", py::arg("count") = 8,
          py::arg("seed") = 1, py::arg("explicit_params") = std::vector<std::vector<double>>{});

    py::class_<criterion::VTensor>(m, "VTensor")
        .def_readonly("num_errors", &criterion::VTensor::num_errors)
        .def_readonly("num_samples", &criterion::VTensor::num_samples)
        .def_readonly("gram", &criterion::VTensor::gram)
        .def("slice", [](const criterion::VTensor& v, int i, int j) { return v.slice(i, j); })
        .def("frobenius", &criterion::VTensor::frobenius);

    py::class_<criterion::CriterionSolution>(m, "CriterionSolution")
        .def_readonly("u", &criterion::CriterionSolution::u)
        .def_readonly("c", &criterion::CriterionSolution::c)
        .def_readonly("gamma", &criterion::CriterionSolution::gamma)
        .def_readonly("zero_mask", &criterion::CriterionSolution::zero_mask)
        .def_readonly("residual_rel", &criterion::CriterionSolution::residual_rel)
        .def_readonly("converged", &criterion::CriterionSolution::converged)
        .def_readonly("iterations", &criterion::CriterionSolution::iterations)
        .def_readonly("dichotomy_ok", &criterion::CriterionSolution::dichotomy_ok);

    m.def("build_v_tensor", &criterion::build_v_tensor);
    m.def("solve_factorization",
          [](const criterion::VTensor& v) { return criterion::solve_factorization(v); });
    m.def("necessary_condition_check", [](const criterion::VTensor& v) {
        criterion::NecessaryConditionReport rep = criterion::necessary_condition_check(v);
        py::dict out;
        out["max_violation"] = rep.max_violation;
        out["psd_min_eig"] = rep.psd_min_eig;
        out["psd_max_eig"] = rep.psd_max_eig;
        out["psd_ok"] = rep.psd_ok;
        out["pairs_skipped"] = rep.pairs_skipped;
        return out;
    });
    m.def("kl_reduction_check",
          [](const std::vector<ComplexVector>& codewords, const channels::KrausChannel& ch) {
              criterion::KlReductionReport rep = criterion::kl_reduction_check(codewords, ch);
              py::dict out;
              out["kl_holds"] = rep.kl_holds;
              out["h"] = rep.h;
              out["kl_defect"] = rep.kl_defect;
              out["nlqec_residual"] = rep.nlqec_residual;
              out["c_spread"] = rep.c_spread;
              out["gamma"] = rep.gamma;
              out["nlqec_ok"] = rep.nlqec_ok;
              return out;
          });

    py::class_<recovery::RecoveryChannel>(m, "RecoveryChannel")
        .def_readonly("code_projector", &recovery::RecoveryChannel::code_projector)
        .def_readonly("blocks", &recovery::RecoveryChannel::blocks)
        .def_readonly("isometries", &recovery::RecoveryChannel::isometries)
        .def_readonly("projectors", &recovery::RecoveryChannel::projectors)
        .def_readonly("recovery_ops", &recovery::RecoveryChannel::recovery_ops)
        .def_readonly("lambda_tables", &recovery::RecoveryChannel::lambda)
        .def_readonly("includes_r0", &recovery::RecoveryChannel::includes_r0)
        .def_readonly("completeness_defect", &recovery::RecoveryChannel::completeness_defect)
        .def_readonly("mode", &recovery::RecoveryChannel::mode);

    m.def("build_recovery",
          [](const criterion::CriterionSolution& sol, const channels::KrausChannel& ch,
             const alphabets::SampleSet& samples, bool approx_mode) {
              recovery::RecoveryOptions opts;
              opts.approx_mode = approx_mode;
              return recovery::build_recovery(sol, ch, samples, opts);
          },
          py::arg("solution"), py::arg("channel"), py::arg("samples"),
          py::arg("approx_mode") = false);
    m.def("build_identity_polar_recovery",
          [](const criterion::CriterionSolution& sol, const channels::KrausChannel& ch,
             const alphabets::SampleSet& samples, bool approx_mode) {
              recovery::RecoveryOptions opts;
              opts.approx_mode = approx_mode;
              return recovery::build_identity_polar_recovery(sol, ch, samples, opts);
          },
          py::arg("solution"), py::arg("channel"), py::arg("samples"),
          py::arg("approx_mode") = true);
    m.def("build_parity_shift_recovery",
          [](const criterion::CriterionSolution& sol, const channels::KrausChannel& ch,
             const alphabets::SampleSet& samples, const hilbert::FockSpace& space,
             bool approx_mode) {
              recovery::RecoveryOptions opts;
              opts.approx_mode = approx_mode;
              return recovery::build_parity_shift_recovery(sol, ch, samples, space, opts);
          },
          py::arg("solution"), py::arg("channel"), py::arg("samples"), py::arg("space"),
          py::arg("approx_mode") = true);
    m.def("apply_channel",
          [](const channels::KrausChannel& ch, const ComplexMatrix& rho) {
              return recovery::apply_channel(ch, rho);
          });
    m.def("apply_recovery",
          [](const recovery::RecoveryChannel& rec, const ComplexMatrix& rho) {
              return recovery::apply_recovery(rec, rho);
          });
    m.def("recovery_fidelity",
          [](const ComplexVector& psi, const channels::KrausChannel& ch,
             const recovery::RecoveryChannel& rec) {
              recovery::FidelityResult f = recovery::recovery_fidelity(psi, ch, rec);
              return py::make_tuple(f.fidelity, f.probability);
          });
    m.def("branch_fidelity", &recovery::branch_fidelity);

    m.def("builtin_scenarios", &scenarios::builtin_names);
    m.def("builtin_config",
          [](const std::string& name) { return scenarios::builtin_config(name).dump(2); });
    m.def("run_scenario", &run_command, py::arg("command"), py::arg("config_json"),
          "Run 'check' or 'recover' on a JSON config string; returns {exit_code, report}");

    m.attr("__version__") = NLQEC_VERSION;
}
