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

#ifndef NLQEC_REPORT_HPP
#define NLQEC_REPORT_HPP

#include <json.hpp>

#include "nlqec/criterion.hpp"
#include "nlqec/recovery.hpp"

namespace nlqec::report {

using json = nlohmann::json;

// complex numbers as [re, im]; matrices as row-major nested arrays
json to_json(const Complex& z);
json to_json(const ComplexMatrix& m);
json to_json(const ComplexVector& v);
json to_json(const IntMatrix& m);

ComplexMatrix matrix_from_json(const json& j);

json criterion_section(const criterion::CriterionSolution& sol,
                       const criterion::NecessaryConditionReport& nc,
                       const criterion::ApproximateMetrics& am);

json recovery_section(const recovery::RecoveryChannel& rec);

}  // namespace nlqec::report

#endif  // NLQEC_REPORT_HPP
