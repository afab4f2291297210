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

#ifndef NLQEC_SCENARIOS_HPP
#define NLQEC_SCENARIOS_HPP

#include <optional>
#include <string>
#include <vector>

#include "nlqec/report.hpp"

namespace nlqec::scenarios {

using report::json;

// exit code contract: 0 exact, 2 approximate, 1 criterion failure,
// 64 config error, 70 numerical error
inline constexpr int kExitExact = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitApproximate = 2;
inline constexpr int kExitConfig = 64;
inline constexpr int kExitNumerical = 70;

struct RunResult {
    json report;
    int exit_code = kExitExact;
};

std::vector<std::string> builtin_names();
json builtin_config(const std::string& name);

/// Strict schema validation; unknown keys are rejected. Returns the config
/// with defaults filled in.
json validate_config(const json& config);

RunResult run_check(const json& config);
RunResult run_recover(const json& config);

struct SweepResult {
    std::string csv;
    int exit_code = kExitExact;
};
SweepResult run_sweep(const json& config, int jobs = 1);

/// Assigns a numeric value at a dotted path ("channel.p"). Array segments are
/// resolved by matching the "name" field of the elements
/// ("alphabet.domain.re_alpha.center").
void set_config_path(json& config, const std::string& path, double value);

}  // namespace nlqec::scenarios

#endif  // NLQEC_SCENARIOS_HPP
