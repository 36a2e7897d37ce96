// SPDX-License-Identifier: Apache-2.0
//
// beamcast — link-level simulator for predictive hybrid beamforming on
// high-speed-railway mmWave links
// Copyright (C) 2026 beamcast developers
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

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "beamcast/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"beamcast — HSR mmWave beam prediction batch simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    uint64_t seed = 0;
    bool seed_set = false;
    int trials = -1, workers = -1;

    std::vector<CLI::App*> subs;
    for (const char* name : beamcast::kExperimentNames) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", config_path, "scenario config file (key = value lines)");
        sub->add_option("--seed", seed, "base RNG seed")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--trials", trials, "override trial count");
        sub->add_option("--workers", workers, "override worker count");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        beamcast::ScenarioConfig cfg;
        if (!config_path.empty())
            cfg = beamcast::parse_config(config_path);
        if (seed_set)
            cfg.seed = seed;
        if (trials > 0)
            cfg.trials = trials;
        if (workers > 0)
            cfg.workers = workers;
        if (const char* env = std::getenv("BEAMCAST_WORKERS"))
            cfg.workers = std::atoi(env);

        std::string experiment = app.get_subcommands().front()->get_name();
        beamcast::run_experiment(cfg, experiment, out_dir);
        std::cout << "wrote " << experiment << " outputs to " << out_dir << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
