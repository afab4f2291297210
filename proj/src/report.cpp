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

#include "nlqec/report.hpp"

namespace nlqec::report {

json to_json(const Complex& z) {
    return json::array({z.real(), z.imag()});
}

json to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json(const ComplexVector& v) {
    json out = json::array();
    for (int k = 0; k < v.size(); ++k) out.push_back(to_json(v(k)));
    return out;
}

json to_json(const IntMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("matrix: expected a non-empty array");
    const auto rows = j.size();
    const auto cols = j.at(0).size();
    ComplexMatrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        const json& row = j.at(r);
        if (!row.is_array() || row.size() != cols) {
            throw ConfigError("matrix: ragged rows");
        }
        for (size_t c = 0; c < cols; ++c) {
            const json& z = row.at(c);
            if (!z.is_array() || z.size() != 2) {
                throw ConfigError("matrix: entries must be [re, im] pairs");
            }
            m(r, c) = Complex(z.at(0).get<double>(), z.at(1).get<double>());
        }
    }
    return m;
}

json criterion_section(const criterion::CriterionSolution& sol,
                       const criterion::NecessaryConditionReport& nc,
                       const criterion::ApproximateMetrics& am) {
    json alternatives = json::array();
    for (const auto& alt : sol.gamma_alternatives) {
        alternatives.push_back({{"n", alt.n},
                                {"m", alt.m},
                                {"flipped_to", alt.flipped_to},
                                {"residual_rel", alt.residual_rel}});
    }
    json zero_mask = json::array();
    for (bool b : sol.zero_mask) zero_mask.push_back(b);
    return json{
        {"residual_rel", sol.residual_rel},
        {"u", to_json(sol.u)},
        {"c", to_json(sol.c)},
        {"gamma", to_json(sol.gamma)},
        {"zero_mask", zero_mask},
        {"converged", sol.converged},
        {"iterations", sol.iterations},
        {"degenerate_spectrum", sol.degenerate_spectrum},
        {"dichotomy_ok", sol.dichotomy_ok},
        {"dichotomy_violations", sol.dichotomy_violations},
        {"gamma_repairs", sol.gamma_repairs},
        {"gamma_alternatives", alternatives},
        {"epsilon",
         {{"max_abs", am.eps_max},
          {"frobenius", am.eps_frobenius},
          {"max_ratio", am.ratio_max},
          {"near_orthogonality_defect", am.near_orthogonality_defect}}},
        {"necessary_condition",
         {{"max_violation", nc.max_violation},
          {"psd_min_eig", nc.psd_min_eig},
          {"psd_max_eig", nc.psd_max_eig},
          {"psd_ok", nc.psd_ok},
          {"pairs_skipped", nc.pairs_skipped}}},
    };
}

json recovery_section(const recovery::RecoveryChannel& rec) {
    json blocks = json::array();
    for (const auto& block : rec.blocks) blocks.push_back(block);
    json lambda = json::array();
    for (const ComplexMatrix& table : rec.lambda) lambda.push_back(to_json(table));
    return json{
        {"mode", rec.mode},
        {"blocks", blocks},
        {"includes_r0", rec.includes_r0},
        {"completeness_defect", rec.completeness_defect},
        {"u_equality_defect", rec.u_equality_defect},
        {"isometry_fit_defect", rec.isometry_fit_defect},
        {"lambda", lambda},
        {"lambda_defect", rec.lambda_defect},
        {"lambda_defect_per_sample", rec.lambda_defect_per_sample},
    };
}

}  // namespace nlqec::report
