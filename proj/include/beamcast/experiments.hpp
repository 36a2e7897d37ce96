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

#ifndef BEAMCAST_EXPERIMENTS_HPP
#define BEAMCAST_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "beamcast/config.hpp"
#include "beamcast/simulate.hpp"

namespace beamcast {

// Uniformly spaced noiseless (or noisy) samples of the configured track.
std::vector<TrackSample> generate_track_corpus(const ScenarioConfig& cfg, int count, double sigma,
                                               uint64_t seed);

struct FitComparisonRow {
    std::string method;
    double mae;
};

// Proposed piecewise fitter against a degree-2 polynomial LS fit and a
// per-bin nearest-neighbour average, all evaluated on a held-out corpus.
std::vector<FitComparisonRow> baseline_comparison_fit(std::span<const TrackSample> train,
                                                      std::span<const TrackSample> eval,
                                                      const TrackFitOptions& opt);

struct OverheadRow {
    int n_mts;
    double pred_ratio, bat_ratio;
    double pred_tput_mbps, bat_tput_mbps;
    bool saturated;
};

// Parameterized resource accounting for the prediction scheme vs periodic
// beam alignment/tracking; ratios clamp at 1 with a saturation flag.
std::vector<OverheadRow> overhead_throughput(const ScenarioConfig& cfg,
                                             std::span<const int> n_mts_list);

// Builds a labeled fusion dataset by running both estimators over randomized
// drops of the configured scenario.
std::vector<FusionSample> generate_fusion_dataset(const ScenarioConfig& cfg,
                                                  const TrackModel& truth_track,
                                                  const TrackModel& est_track, int count,
                                                  uint64_t seed);

// The estimation track for the scenario: the true track when linear, the
// fitted piecewise track otherwise (fit from a noiseless corpus, matching
// the offline-learning deployment).
TrackModel estimation_track(const ScenarioConfig& cfg, const TrackModel& truth);

struct EndToEndSummary {
    double accuracy[kSourceCount];
    double se[kSourceCount];
    double x_mse[3], v_mse[3]; // clipped, overall
};

EndToEndSummary summarize(const ScenarioConfig& cfg, std::span<const TrialResult> results);

// Named batch experiments; each writes `<experiment>_<seed>.csv` (and
// sidecars) plus manifest.txt into out_dir. Valid names: fit, bound-check,
// motion-scaling, fusion-train, mse-sweep, endtoend, overhead.
void run_experiment(const ScenarioConfig& cfg, const std::string& experiment,
                    const std::string& out_dir);

extern const char* const kExperimentNames[7];

} // namespace beamcast

#endif
