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

#ifndef BEAMCAST_SIMULATE_HPP
#define BEAMCAST_SIMULATE_HPP

#include <array>
#include <functional>
#include <vector>

#include "beamcast/beamforming.hpp"
#include "beamcast/config.hpp"
#include "beamcast/fusion.hpp"

namespace beamcast {

// Runs body(0..n-1) on up to `workers` threads (0 = hardware concurrency).
// Work items must be independent; determinism comes from per-item RNG
// streams, not scheduling.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

struct MtState {
    double x; // projected location at the final observation instant (m)
    double v; // signed along-track speed (m/s)
    double a; // acceleration at the prediction start (m/s^2)
};

// x uniform on the support; speed = direction * (nominal + Laplace jitter
// with the configured variance); initial acceleration Gaussian. The
// direction comes from mt.direction (0 draws it per call).
MtState sample_mt_state(const ScenarioConfig& cfg, Rng& rng);

// Source order used in all per-source arrays.
enum SourceIndex { kSrcPilot = 0, kSrcMeasurement = 1, kSrcFused = 2, kSrcOptimal = 3 };
inline constexpr int kSourceCount = 4;
inline constexpr const char* kSourceNames[kSourceCount] = {"pilot", "measurement", "fused",
                                                           "optimal"};

struct MetricRecord {
    int trial = 0;
    int mt = 0;
    double x_true = 0.0, v_true = 0.0;
    double x_est[3] = {0, 0, 0}; // pilot, measurement, fused
    double v_est[3] = {0, 0, 0};
    bool pilot_converged = true, meas_converged = true;
    InitStatus meas_init = InitStatus::Ok;
    double beam_acc[kSourceCount] = {0, 0, 0, 0}; // per MT over the horizon
    bool plan_clamped = false;
};

struct TrialResult {
    std::vector<MetricRecord> records;
    // Mean over the horizon of the per-instant sum spectral efficiency.
    double se_sum[kSourceCount] = {0, 0, 0, 0};
    bool with_beamforming = false;
};

// Per-instant detail of the fused-source plan, captured on request for the
// BeamPlan CSV export.
struct InstantPlanRecord {
    int instant = 0;
    std::vector<int> tx, rx, genie;
    double se = 0.0;
    Eigen::MatrixXcd d;
};

// One full drop: sample MT states, generate the observation window on the
// true track, run both estimators and the fusion net against the estimation
// track, optionally roll the prediction horizon with common channel
// realizations across the four sources. Degeneracies are recorded in the
// records, never thrown.
TrialResult run_trial(const ScenarioConfig& cfg, const TrackModel& truth_track,
                      const TrackModel& est_track, const FusionNetwork* net, uint64_t trial_idx,
                      bool with_beamforming, std::vector<InstantPlanRecord>* fused_plan = nullptr);

// Trials [0, cfg.trials) across the worker pool; records land in trial order
// regardless of scheduling.
std::vector<TrialResult> run_sweep(const ScenarioConfig& cfg, const TrackModel& truth_track,
                                   const TrackModel& est_track, const FusionNetwork* net,
                                   bool with_beamforming);

// Location-binned MSE per estimate source, with each squared error clipped
// at `clip` before averaging (the comparison figures' regularization).
struct MseBins {
    double bin_width = 10.0;
    double r_max = 100.0;
    struct Cell {
        int n = 0;
        double x_mse[3] = {0, 0, 0};
        double v_mse[3] = {0, 0, 0};
        double x_mse_raw[3] = {0, 0, 0};
        double v_mse_raw[3] = {0, 0, 0};
    };
    std::vector<Cell> cells;
    double bin_center(int i) const { return -r_max + (i + 0.5) * bin_width; }
};

MseBins mse_vs_location(std::span<const MetricRecord> records, double bin_width, double r_max,
                        double clip);

} // namespace beamcast

#endif
