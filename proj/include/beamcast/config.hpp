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

#ifndef BEAMCAST_CONFIG_HPP
#define BEAMCAST_CONFIG_HPP

#include <cstdint>
#include <istream>
#include <string>

#include "beamcast/channel.hpp"
#include "beamcast/estimation.hpp"
#include "beamcast/fusion.hpp"
#include "beamcast/track.hpp"

namespace beamcast {

// All physical and system parameters, defaulted to the evaluated
// configuration (30 GHz / 80 MHz / 8x4 antennas / 100 m half ISD / 11 m
// closest approach / 256 km/h / L = 3 at 100 ms / 1.25 s horizon at 1.25 ms),
// plus solver and training knobs. Parsed from `key = value` text.
struct ScenarioConfig {
    // Link and geometry
    double fc_hz = 30e9;
    double bandwidth_hz = 80e6;
    int n_t = 8;
    int n_r = 4;
    int n_rf = 4;
    double pt_max_dbm = 30.0;
    double noise_psd_dbm_hz = -174.0;
    double r_max_m = 100.0;
    double d_m = 11.0;

    // Mobility
    double hsr_speed_kmh = 256.0;
    double speed_var_kmh2 = 18.0;
    double accel_var = 0.1; // (m/s^2)^2, per-instant jitter variance
    int mt_direction = +1;  // +1, -1, or 0 for a random per-trial direction

    // Observation / prediction timing
    double delta_t_s = 0.1;
    // Scales the generated measurement noise only (likelihood weights keep
    // the physical variances); 0 gives ideal noise-free measurements.
    double meas_noise_scale = 1.0;
    int l_obs = 3;
    double t_c_s = 12.5e-3;
    double k_fc = 1e-6;
    double predict_duration_s = 1.25;
    double delta_t_p_s = 1.25e-3;

    // Track selection: linear | quadratic | piecewise (from track_file)
    TrackKind track_kind = TrackKind::Linear;
    double quad_a = std::pow(6.0 / 200.0, 2);
    double quad_b = -2.0 * std::pow(6.0 / 200.0, 2) * 5.0;
    double quad_c = std::pow(6.0 / 200.0, 2) * 25.0 + 11.0;
    std::string track_file;

    EstimatorSettings est;

    // Track fitter
    TrackFitOptions fit;
    int fit_samples = 40000;
    double fit_noise_sigma = 0.0;

    // Fusion training
    FusionTrainOptions fusion;
    int fusion_dataset_size = 50000;
    std::string fusion_model_file;

    // Harness
    int trials = 500;
    uint64_t seed = 1;
    int workers = 0; // 0 = hardware concurrency
    int n_mts = 4;
    double bin_width_m = 10.0;
    double mse_clip = 30.0;

    // Overhead model
    double oh_slot_us = 26.8;
    double oh_feedback_rate_mbps = 100.0;
    double oh_bat_period_ms = 10.0;
    int oh_bat_beams = 3;
    double oh_bat_delay_ms = 20.0;
    double oh_bat_report_interval_ms = 640.0;
    double oh_se_bpshz = 13.37;

    int n_p() const { return static_cast<int>(std::llround(predict_duration_s / delta_t_p_s)); }
    double v_mean_ms() const { return kmh_to_ms(hsr_speed_kmh); }
    double noise_power_w() const {
        return dbm_to_watt(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
    }
    double tx_power_per_stream_w() const { return dbm_to_watt(pt_max_dbm) / n_rf; }
    LinkBudget link_budget() const { return {fc_hz, tx_power_per_stream_w(), noise_power_w()}; }
    ArrayConfig array() const { return {n_t, n_r, n_rf}; }
    MeasVariances variances() const {
        return measurement_variances(bandwidth_hz, fc_hz, t_c_s, k_fc);
    }
    TrackModel true_track() const;

    void validate() const; // throws RangeError
    std::string echo() const; // canonical key = value dump
};

// Line-oriented `key = value` parser with `#` comments. Unknown keys raise
// ConfigError with the line number; invariant violations raise RangeError.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_stream(std::istream& in, const std::string& label = "<stream>");

} // namespace beamcast

#endif
