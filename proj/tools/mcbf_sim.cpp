// SPDX-License-Identifier: Apache-2.0
//
// mcbf - multicell coordinated beamforming with limited feedback
// Copyright (C) 2026 The mcbf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mcbf/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo sum-rate sweep for multicell zero-forcing beamforming with limited feedback"};

    mcbf::RunManifest manifest;
    std::string schemes = "perfect-csi,mfp-adaptive,mfp-equal,afp";
    std::uint64_t seed = 0;
    int trials = 0;

    app.add_option("--config", manifest.config_path, "Scenario file (key = value)")->required();
    app.add_option("--out", manifest.output_path, "CSV output path")->required();
    app.add_option("--schemes", schemes, "Comma-separated subset of perfect-csi,mfp-adaptive,mfp-equal,afp");
    auto* seed_opt = app.add_option("--seed", seed, "Master RNG seed (overrides the config file)");
    auto* trials_opt = app.add_option("--trials", trials, "Trials per sweep point (overrides the config file)")
                           ->check(CLI::PositiveNumber);
    app.add_option("--threads", manifest.threads, "Worker threads, 0 = all cores");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? mcbf::kExitOk : mcbf::kExitConfig;
    }

    manifest.schemes.clear();
    std::string_view rest = schemes;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto name = rest.substr(0, comma);
        const auto id = mcbf::parse_scheme(name);
        if (!id) {
            std::cerr << "error: unknown scheme '" << name << "'\n";
            return mcbf::kExitConfig;
        }
        manifest.schemes.push_back(*id);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    if (*seed_opt)
        manifest.seed_override = seed;
    if (*trials_opt)
        manifest.trials_override = trials;

    return mcbf::run(manifest, std::cerr);
}
