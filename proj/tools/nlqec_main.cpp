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

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "nlqec/scenarios.hpp"

namespace {

using nlqec::scenarios::json;

struct CommandArgs {
    std::string config_path;
    std::string scenario;
    std::string out_path;
    std::string emit_config;
    int jobs = 1;
    std::optional<uint64_t> seed;
};

void write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw nlqec::ConfigError("cannot open output file '" + out_path + "'");
    out << text;
}

json load_config(const CommandArgs& args) {
    json config;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw nlqec::ConfigError("cannot open config file '" + args.config_path + "'");
        try {
            config = json::parse(in);
        } catch (const json::parse_error& err) {
            throw nlqec::ConfigError(std::string("config parse error: ") + err.what());
        }
    } else if (!args.scenario.empty()) {
        config = nlqec::scenarios::builtin_config(args.scenario);
    } else {
        throw nlqec::ConfigError("give --config <path> or --scenario <name>");
    }
    if (args.seed) {
        config["alphabet"]["sampler"]["seed"] = *args.seed;
        config["solver"]["seed"] = *args.seed;
    }
    return config;
}

std::string report_destination(const CommandArgs& args, const json& config) {
    if (!args.out_path.empty()) return args.out_path;
    if (config.contains("outputs") && config.at("outputs").contains("report")) {
        return config.at("outputs").at("report").get<std::string>();
    }
    return "";
}

int dispatch(const std::string& command, const CommandArgs& args) {
    if (!args.emit_config.empty()) {
        json config = nlqec::scenarios::builtin_config(args.emit_config);
        write_output(args.out_path, config.dump(2) + "\n");
        return 0;
    }
    json config = load_config(args);
    if (command == "check" || command == "recover") {
        nlqec::scenarios::RunResult result = command == "check"
                                                 ? nlqec::scenarios::run_check(config)
                                                 : nlqec::scenarios::run_recover(config);
        write_output(report_destination(args, config), result.report.dump(2) + "\n");
        return result.exit_code;
    }
    // sweep
    nlqec::scenarios::SweepResult result = nlqec::scenarios::run_sweep(config, args.jobs);
    std::string dest = args.out_path;
    if (dest.empty() && config.contains("outputs") && config.at("outputs").contains("sweep") &&
        config.at("outputs").at("sweep").contains("csv")) {
        dest = config.at("outputs").at("sweep").at("csv").get<std::string>();
    }
    write_output(dest, result.csv);
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NLQEC criterion checker and recovery-channel laboratory"};
    app.require_subcommand(0, 1);

    CommandArgs args;
    std::string command;
    bool list_scenarios = false;
    app.add_flag("--list-scenarios", list_scenarios, "List built-in scenario names");
    app.add_option("--emit-config", args.emit_config,
                   "Print the config of a built-in scenario and exit");
    app.add_option("--out", args.out_path, "Output path (default: stdout)");

    for (const std::string name : {"check", "recover", "sweep"}) {
        CLI::App* sub = app.add_subcommand(
            name, name == "check"     ? "Verify the factorization criterion"
                  : name == "recover" ? "Build the recovery channel and measure fidelities"
                                      : "Sweep config fields and emit a CSV table");
        sub->add_option("--config", args.config_path, "JSON scenario config");
        sub->add_option("--scenario", args.scenario, "Built-in scenario name");
        sub->add_option("--out", args.out_path, "Output path (default: stdout)");
        sub->add_option("--jobs", args.jobs, "Concurrent sweep evaluations")
            ->check(CLI::PositiveNumber);
        sub->add_option_function<uint64_t>(
            "--seed", [&args](const uint64_t& s) { args.seed = s; },
            "Override sampler and solver seeds");
        sub->add_option("--emit-config", args.emit_config,
                        "Print the config of a built-in scenario and exit");
        sub->callback([&command, name] { command = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_scenarios) {
            for (const std::string& name : nlqec::scenarios::builtin_names()) {
                std::cout << name << "\n";
            }
            return 0;
        }
        if (command.empty() && args.emit_config.empty()) {
            std::cerr << app.help() << std::endl;
            return 64;
        }
        return dispatch(command, args);
    } catch (const nlqec::ConfigError& err) {
        std::cerr << "config error: " << err.what() << std::endl;
        return 64;
    } catch (const nlqec::Error& err) {
        std::cerr << "numerical error: " << err.what() << std::endl;
        return 70;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << std::endl;
        return 70;
    }
}
